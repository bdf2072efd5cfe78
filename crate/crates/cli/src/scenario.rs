//! Scenario configuration: a TOML file describing the manifold, codomain,
//! depth, seed and enumeration bounds.

use std::path::Path;

use padic_limits::level_rings::{PadicApprox, Prime};
use padic_limits::manifold_tower::{Ball, ClopenManifold};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error("invalid scenario: {0}")]
    Library(#[from] padic_limits::Error),
}

/// One ball `B(c, p^-s)`; `center` holds base-`p` digits per coordinate,
/// least significant first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BallSpec {
    pub center: Vec<Vec<u64>>,
    pub radius_exp: u32,
}

/// The pointed manifold `N` used as loop codomain and as map target.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CodomainSpec {
    pub dim: usize,
    /// Empty means the unit ball.
    pub balls: Vec<BallSpec>,
    pub base_point: Option<Vec<Vec<u64>>>,
}

impl Default for CodomainSpec {
    fn default() -> Self {
        CodomainSpec {
            dim: 1,
            balls: Vec::new(),
            base_point: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Bounds {
    /// Random cases per randomized check.
    pub cases: u64,
    /// Largest `n_k` for which `Hom(M_k)` is enumerated.
    pub hom_points: usize,
    /// Largest loop support enumerated.
    pub support: usize,
    /// Largest based domain in the orbit check, base point included.
    pub orbit_domain: usize,
    /// Largest number of classes enumerated at one level.
    pub classes: u64,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds {
            cases: 100,
            hom_points: 5,
            support: 3,
            orbit_domain: 4,
            classes: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CompleteSpec {
    /// Precision `s` of the characters.
    pub precision: u32,
    /// Number of partial sums in the geometric fixture.
    pub terms: u32,
}

impl Default for CompleteSpec {
    fn default() -> Self {
        CompleteSpec {
            precision: 3,
            terms: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LoopTableSpec {
    pub level: u32,
    pub support: usize,
}

impl Default for LoopTableSpec {
    fn default() -> Self {
        LoopTableSpec {
            level: 1,
            support: 2,
        }
    }
}

/// Negative-control fixtures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fault {
    /// Adds a permutation family whose top level swaps points of two
    /// different fibers.
    PermTower,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Scenario {
    pub prime: u64,
    pub dim: usize,
    pub depth: u32,
    pub seed: u64,
    /// Empty means the unit ball `Z_p^dim`.
    pub balls: Vec<BallSpec>,
    pub base_point: Option<Vec<Vec<u64>>>,
    pub codomain: CodomainSpec,
    pub bounds: Bounds,
    pub complete: CompleteSpec,
    pub loop_table: LoopTableSpec,
    pub inject_fault: Option<Fault>,
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario {
            prime: 2,
            dim: 1,
            depth: 3,
            seed: 0,
            balls: Vec::new(),
            base_point: None,
            codomain: CodomainSpec::default(),
            bounds: Bounds::default(),
            complete: CompleteSpec::default(),
            loop_table: LoopTableSpec::default(),
            inject_fault: None,
        }
    }
}

impl Scenario {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml(&text)
    }

    /// Hex SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("scenario serializes");
        Sha256::digest(&json)
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    /// Validates the scenario and builds its manifolds.
    pub fn setup(&self) -> Result<Setup, ConfigError> {
        let prime = Prime::new(self.prime)?;
        if self.depth == 0 {
            return Err(ConfigError::Invalid("depth must be at least 1".into()));
        }
        if self.complete.precision == 0 || self.complete.terms <= self.complete.precision {
            return Err(ConfigError::Invalid(
                "complete needs precision >= 1 and more terms than its precision".into(),
            ));
        }
        if self.loop_table.level == 0 || self.loop_table.level > self.depth {
            return Err(ConfigError::Invalid(format!(
                "loop_table.level must lie in 1..={}",
                self.depth
            )));
        }
        if self.inject_fault == Some(Fault::PermTower) && self.depth < 2 {
            return Err(ConfigError::Invalid(
                "the perm-tower fault needs depth >= 2".into(),
            ));
        }
        let precision = self.depth + 2;
        let manifold = build_manifold(
            prime,
            self.dim,
            &self.balls,
            self.base_point.as_deref(),
            precision,
        )?;
        let c = &self.codomain;
        let codomain = build_manifold(prime, c.dim, &c.balls, c.base_point.as_deref(), precision)?;
        Ok(Setup {
            scenario: self.clone(),
            prime,
            manifold,
            codomain,
        })
    }
}

fn padic(prime: Prime, digits: &[u64], precision: u32) -> Result<PadicApprox, ConfigError> {
    let mut d = digits.to_vec();
    if d.len() < precision as usize {
        d.resize(precision as usize, 0);
    }
    Ok(PadicApprox::from_digits(prime, d)?)
}

fn build_manifold(
    prime: Prime,
    dim: usize,
    balls: &[BallSpec],
    base_point: Option<&[Vec<u64>]>,
    precision: u32,
) -> Result<ClopenManifold, ConfigError> {
    if dim == 0 {
        return Err(ConfigError::Invalid("dim must be at least 1".into()));
    }
    let manifold = if balls.is_empty() {
        ClopenManifold::unit_ball(prime, dim)?
    } else {
        let built = balls
            .iter()
            .map(|b| {
                if b.center.len() != dim {
                    return Err(ConfigError::Invalid(format!(
                        "ball center has {} coordinates, expected {dim}",
                        b.center.len()
                    )));
                }
                let center = b
                    .center
                    .iter()
                    .map(|c| padic(prime, c, b.radius_exp.max(1)))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(Ball::new(center, b.radius_exp)?)
            })
            .collect::<Result<Vec<_>, ConfigError>>()?;
        ClopenManifold::new(prime, built, None)?
    };
    let base: Vec<Vec<u64>> = match base_point {
        Some(b) => b.to_vec(),
        None => balls
            .first()
            .map(|b| b.center.clone())
            .unwrap_or_else(|| vec![Vec::new(); dim]),
    };
    let base = base
        .iter()
        .map(|d| padic(prime, d, precision))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(manifold.with_base_point(base)?)
}

/// A validated scenario with its manifolds.
#[derive(Debug, Clone)]
pub struct Setup {
    pub scenario: Scenario,
    pub prime: Prime,
    pub manifold: ClopenManifold,
    pub codomain: ClopenManifold,
}
