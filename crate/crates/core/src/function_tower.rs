//! Maps between level sets, compatible towers of such maps, Mahler
//! expansions and level projections of polynomials.

use std::fmt;
use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};
use rand::Rng;
use serde::ser::{SerializeSeq, SerializeStruct};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::level_rings::{mod_floor, Level, PadicApprox, Prime, Residue, ResidueVector};
use crate::manifold_tower::{ClopenManifold, LevelSet};

type OracleFn = dyn Fn(&[PadicApprox]) -> Vec<PadicApprox> + Send + Sync;

/// A function on p-adic points, known only through evaluation at points of
/// a fixed precision.
#[derive(Clone)]
pub struct PointOracle {
    precision: Level,
    f: Arc<OracleFn>,
}

impl PointOracle {
    /// `precision` is the number of digits the oracle receives for each input
    /// coordinate; level projections sample every residue at that precision.
    pub fn new<F>(precision: Level, f: F) -> Self
    where
        F: Fn(&[PadicApprox]) -> Vec<PadicApprox> + Send + Sync + 'static,
    {
        PointOracle {
            precision,
            f: Arc::new(f),
        }
    }

    /// The univariate polynomial `sum_i coeffs[i] x^i`, evaluated modulo
    /// `p^precision`.
    pub fn polynomial(prime: Prime, coeffs: Vec<BigInt>, precision: Level) -> Self {
        PointOracle::new(precision, move |x| {
            let modulus = prime.pow(precision);
            let arg = BigInt::from(x[0].value());
            let value = coeffs.iter().rev().fold(BigInt::zero(), |acc, c| {
                (acc * &arg + c) % BigInt::from(modulus.clone())
            });
            let r = Residue::new(prime, precision, value).expect("precision >= 1");
            vec![PadicApprox::from_residue(&r)]
        })
    }

    pub fn precision(&self) -> Level {
        self.precision
    }

    pub fn eval(&self, x: &[PadicApprox]) -> Vec<PadicApprox> {
        (self.f)(x)
    }

    /// `outer ∘ self`, sampled at this oracle's precision.
    pub fn then(&self, outer: &PointOracle) -> PointOracle {
        let inner = self.f.clone();
        let outer_f = outer.f.clone();
        PointOracle {
            precision: self.precision,
            f: Arc::new(move |x| outer_f(&inner(x))),
        }
    }
}

impl fmt::Debug for PointOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PointOracle")
            .field("precision", &self.precision)
            .finish_non_exhaustive()
    }
}

/// A total map `M_k -> N_k`, stored as indices into the codomain points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelMap {
    domain: Arc<LevelSet>,
    codomain: Arc<LevelSet>,
    table: Vec<usize>,
}

impl LevelMap {
    pub fn new(domain: Arc<LevelSet>, codomain: Arc<LevelSet>, table: Vec<usize>) -> Result<Self> {
        if domain.level() != codomain.level() {
            return Err(Error::LevelMismatch(format!(
                "domain level {} vs codomain level {}",
                domain.level(),
                codomain.level()
            )));
        }
        if table.len() != domain.len() {
            return Err(Error::DomainMismatch(format!(
                "table has {} entries for {} domain points",
                table.len(),
                domain.len()
            )));
        }
        if table.iter().any(|&i| i >= codomain.len()) {
            return Err(Error::ValueOutsideCodomain);
        }
        Ok(LevelMap {
            domain,
            codomain,
            table,
        })
    }

    pub fn from_fn<F>(domain: Arc<LevelSet>, codomain: Arc<LevelSet>, mut f: F) -> Result<Self>
    where
        F: FnMut(&ResidueVector) -> ResidueVector,
    {
        let table = domain
            .points()
            .iter()
            .map(|x| codomain.index_of(&f(x)).ok_or(Error::ValueOutsideCodomain))
            .collect::<Result<Vec<_>>>()?;
        Self::new(domain, codomain, table)
    }

    pub fn identity(domain: Arc<LevelSet>) -> Self {
        let table = (0..domain.len()).collect();
        LevelMap {
            codomain: domain.clone(),
            domain,
            table,
        }
    }

    pub fn level(&self) -> Level {
        self.domain.level()
    }

    pub fn domain(&self) -> &Arc<LevelSet> {
        &self.domain
    }

    pub fn codomain(&self) -> &Arc<LevelSet> {
        &self.codomain
    }

    pub fn table(&self) -> &[usize] {
        &self.table
    }

    pub fn apply(&self, x: &ResidueVector) -> Option<&ResidueVector> {
        let i = self.domain.index_of(x)?;
        Some(&self.codomain.points()[self.table[i]])
    }

    pub fn entries(&self) -> impl Iterator<Item = (&ResidueVector, &ResidueVector)> {
        self.domain
            .points()
            .iter()
            .zip(&self.table)
            .map(|(x, &j)| (x, &self.codomain.points()[j]))
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &LevelMap) -> Result<LevelMap> {
        if inner.codomain != self.domain {
            return Err(Error::DomainMismatch(format!(
                "cannot compose at level {}: codomain of the inner map is not the outer domain",
                self.level()
            )));
        }
        Ok(LevelMap {
            domain: inner.domain.clone(),
            codomain: self.codomain.clone(),
            table: inner.table.iter().map(|&j| self.table[j]).collect(),
        })
    }
}

impl Serialize for LevelMap {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        struct Table<'a>(&'a LevelMap);
        impl Serialize for Table<'_> {
            fn serialize<S: serde::Serializer>(
                &self,
                s: S,
            ) -> std::result::Result<S::Ok, S::Error> {
                let mut seq = s.serialize_seq(Some(self.0.table.len()))?;
                for pair in self.0.entries() {
                    seq.serialize_element(&pair)?;
                }
                seq.end()
            }
        }
        let mut st = s.serialize_struct("LevelMap", 3)?;
        st.serialize_field("level", &self.level())?;
        st.serialize_field("domain", self.domain.points())?;
        st.serialize_field("table", &Table(self))?;
        st.end()
    }
}

/// The level-`k` shadow `f_k = pi_k ∘ f` of a function `M -> N`.
///
/// Every point of `M` at the oracle's precision is evaluated, so the map is
/// well defined exactly when no two samples over one point of `M_k` land on
/// different points of `N_k`.
pub fn project_function(
    f: &PointOracle,
    domain: &ClopenManifold,
    codomain: &ClopenManifold,
    k: Level,
) -> Result<LevelMap> {
    if f.precision() < k {
        return Err(Error::PrecisionExceeded {
            requested: k,
            available: f.precision(),
        });
    }
    let dk = Arc::new(domain.discretize(k)?);
    let nk = Arc::new(codomain.discretize(k)?);
    let mut table: Vec<Option<usize>> = vec![None; dk.len()];
    let mut witness: Vec<Option<ResidueVector>> = vec![None; dk.len()];
    for x in domain.level_points(f.precision()) {
        let y = ResidueVector::project(&f.eval(&x.to_padic()), k)?;
        let j = nk.index_of(&y).ok_or(Error::ValueOutsideCodomain)?;
        let i = dk.index_of(&x.reduce(k)?).expect("sample reduces into M_k");
        match table[i] {
            None => {
                table[i] = Some(j);
                witness[i] = Some(x);
            }
            Some(prev) if prev != j => {
                return Err(Error::NotLevelCompatible {
                    level: k,
                    detail: format!(
                        "{} and {} agree mod p^{} but map to {} and {}",
                        witness[i].as_ref().expect("set with table"),
                        x,
                        k,
                        nk.points()[prev],
                        y
                    ),
                });
            }
            Some(_) => {}
        }
    }
    let table = table
        .into_iter()
        .map(|t| t.expect("every point of M_k has a sample"))
        .collect();
    LevelMap::new(dk, nk, table)
}

/// Levels `1..=K` of compatible maps `f_k : M_k -> N_k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MapTower {
    maps: Vec<LevelMap>,
}

impl MapTower {
    /// Validates `pi^l_k ∘ f_l = f_k ∘ pi^l_k` for every `k <= l`.
    pub fn new(maps: Vec<LevelMap>) -> Result<Self> {
        if maps.is_empty() {
            return Err(Error::ZeroLevel);
        }
        for (i, f) in maps.iter().enumerate() {
            if f.level() as usize != i + 1 {
                return Err(Error::LevelMismatch(format!(
                    "tower entry {} has level {}",
                    i + 1,
                    f.level()
                )));
            }
        }
        for l in 1..maps.len() {
            let fine = &maps[l];
            for coarse in &maps[..l] {
                let k = coarse.level();
                if fine.domain.reduce(k)? != *coarse.domain
                    || fine.codomain.reduce(k)? != *coarse.codomain
                {
                    return Err(Error::DomainMismatch(format!(
                        "level {} sets do not reduce onto level {k}",
                        fine.level()
                    )));
                }
                let dom = fine.domain.projection_indices(&coarse.domain)?;
                let cod = fine.codomain.projection_indices(&coarse.codomain)?;
                for (i, &j) in fine.table.iter().enumerate() {
                    if cod[j] != coarse.table[dom[i]] {
                        return Err(Error::NotLevelCompatible {
                            level: k,
                            detail: format!(
                                "f_{} at {} does not reduce to f_{k}",
                                fine.level(),
                                fine.domain.points()[i]
                            ),
                        });
                    }
                }
            }
        }
        Ok(MapTower { maps })
    }

    /// Projects an oracle at every level `1..=depth`.
    pub fn project(
        f: &PointOracle,
        domain: &ClopenManifold,
        codomain: &ClopenManifold,
        depth: Level,
    ) -> Result<Self> {
        let maps = (1..=depth)
            .map(|k| project_function(f, domain, codomain, k))
            .collect::<Result<Vec<_>>>()?;
        Self::new(maps)
    }

    pub fn identity(m: &ClopenManifold, depth: Level) -> Result<Self> {
        let maps = (1..=depth)
            .map(|k| Ok(LevelMap::identity(Arc::new(m.discretize(k)?))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(maps)
    }

    /// A uniformly chosen compatible tower, built top-down: each point of
    /// `M_{k+1}` picks a random point of `N_{k+1}` over `f_k` of its parent.
    pub fn random<R: Rng + ?Sized>(
        domain: &ClopenManifold,
        codomain: &ClopenManifold,
        depth: Level,
        rng: &mut R,
    ) -> Result<Self> {
        if depth == 0 {
            return Err(Error::ZeroLevel);
        }
        let mut maps: Vec<LevelMap> = Vec::with_capacity(depth as usize);
        let d1 = Arc::new(domain.discretize(1)?);
        let n1 = Arc::new(codomain.discretize(1)?);
        let table = (0..d1.len()).map(|_| rng.gen_range(0..n1.len())).collect();
        maps.push(LevelMap::new(d1, n1, table)?);
        for k in 2..=depth {
            let prev = maps.last().expect("level 1 pushed");
            let dk = Arc::new(domain.discretize(k)?);
            let nk = Arc::new(codomain.discretize(k)?);
            let dom_parent = dk.projection_indices(&prev.domain)?;
            let cod_parent = nk.projection_indices(&prev.codomain)?;
            let mut children: Vec<Vec<usize>> = vec![Vec::new(); prev.codomain.len()];
            for (j, &parent) in cod_parent.iter().enumerate() {
                children[parent].push(j);
            }
            let table = dom_parent
                .iter()
                .map(|&parent| {
                    let options = &children[prev.table[parent]];
                    options[rng.gen_range(0..options.len())]
                })
                .collect();
            maps.push(LevelMap::new(dk, nk, table)?);
        }
        Self::new(maps)
    }

    pub fn depth(&self) -> Level {
        self.maps.len() as Level
    }

    /// The map at level `k` (1-based).
    pub fn level(&self, k: Level) -> Option<&LevelMap> {
        self.maps.get((k as usize).checked_sub(1)?)
    }

    pub fn levels(&self) -> &[LevelMap] {
        &self.maps
    }

    /// An oracle whose projections reproduce this tower: `x` goes to the
    /// canonical lift of `f_K(x mod p^K)`.
    pub fn to_oracle(&self) -> PointOracle {
        let top = self.maps.last().expect("towers are nonempty").clone();
        let depth = self.depth();
        PointOracle::new(depth, move |x| {
            let xk = ResidueVector::project(x, depth).expect("input precision covers the tower");
            top.apply(&xk).expect("input lies in the domain").to_padic()
        })
    }
}

/// `outer ∘ inner`, levelwise.
pub fn compose_towers(outer: &MapTower, inner: &MapTower) -> Result<MapTower> {
    if outer.depth() != inner.depth() {
        return Err(Error::DomainMismatch(format!(
            "tower depths {} and {} differ",
            outer.depth(),
            inner.depth()
        )));
    }
    let maps = outer
        .maps
        .iter()
        .zip(&inner.maps)
        .map(|(f, g)| f.compose(g))
        .collect::<Result<Vec<_>>>()?;
    MapTower::new(maps)
}

/// Univariate polynomial with p-adic integer coefficients, pushed down to
/// `M_k -> Z/p^k` coefficientwise: `pi_k(a x^m) = pi_k(a) pi_k(x)^m`.
pub fn project_polynomial(
    coeffs: &[PadicApprox],
    domain: &ClopenManifold,
    k: Level,
) -> Result<LevelMap> {
    if domain.dim() != 1 {
        return Err(Error::DomainMismatch(format!(
            "polynomials act on one-dimensional manifolds, got dimension {}",
            domain.dim()
        )));
    }
    let prime = domain.prime();
    let reduced = coeffs
        .iter()
        .map(|a| {
            if a.prime() != prime {
                return Err(Error::DomainMismatch(
                    "coefficient uses a different prime".into(),
                ));
            }
            a.project(k)
        })
        .collect::<Result<Vec<_>>>()?;
    let zero = Residue::zero(prime, k)?;
    let dk = Arc::new(domain.discretize(k)?);
    let nk = Arc::new(ClopenManifold::unit_ball(prime, 1)?.discretize(k)?);
    LevelMap::from_fn(dk, nk, |x| {
        let arg = x.entry(0);
        let value = reduced.iter().rev().fold(zero.clone(), |acc, a| {
            acc.mul(&arg)
                .and_then(|t| t.add(a))
                .expect("all terms live in Z/p^k")
        });
        ResidueVector::from_residues(&[value]).expect("one entry")
    })
}

/// `v_p(m!) = (m - s_p(m)) / (p - 1)` where `s_p` is the base-`p` digit sum.
pub fn factorial_valuation(prime: Prime, m: u64) -> u32 {
    let p = prime.get();
    let mut digit_sum = 0u64;
    let mut rest = m;
    while rest > 0 {
        digit_sum += rest % p;
        rest /= p;
    }
    ((m - digit_sum) / (p - 1)) as u32
}

fn base_p_digits(prime: Prime, n: u64) -> u32 {
    let mut count = 1;
    let mut rest = n / prime.get();
    while rest > 0 {
        count += 1;
        rest /= prime.get();
    }
    count
}

/// Exact binomial coefficient `C(x, m)` for a nonnegative integer `x`.
pub fn binomial(x: &BigUint, m: u64) -> BigUint {
    let mut acc = BigUint::one();
    for i in 0..m {
        if *x < BigUint::from(i + 1) {
            return BigUint::zero();
        }
        acc = acc * (x - i) / (i + 1);
    }
    acc
}

/// Truncated Mahler expansion `f = sum_m a_m C(x, m)` with coefficients
/// known modulo `p^K`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MahlerSeries {
    prime: Prime,
    precision: Level,
    coefficients: Vec<PadicApprox>,
}

impl MahlerSeries {
    pub fn prime(&self) -> Prime {
        self.prime
    }

    pub fn precision(&self) -> Level {
        self.precision
    }

    pub fn coefficients(&self) -> &[PadicApprox] {
        &self.coefficients
    }

    pub fn max_degree(&self) -> u64 {
        self.coefficients.len() as u64 - 1
    }

    /// Digits an argument needs so that every `C(x, m)` is determined
    /// modulo `p^K`: `K + v_p(M!)`.
    pub fn required_input_precision(&self) -> Level {
        self.precision + factorial_valuation(self.prime, self.max_degree())
    }

    pub fn eval(&self, x: &PadicApprox) -> Result<PadicApprox> {
        mahler_eval(self, x)
    }
}

/// Mahler coefficients `a_m = Δ^m f(0) = sum_j (-1)^(m-j) C(m, j) f(j)` for
/// `m = 0..=max_degree`, reduced modulo `p^precision`.
pub fn mahler_coefficients<F>(
    prime: Prime,
    f: F,
    max_degree: u64,
    precision: Level,
) -> Result<MahlerSeries>
where
    F: Fn(&PadicApprox) -> PadicApprox,
{
    if precision == 0 {
        return Err(Error::ZeroLevel);
    }
    let input_precision =
        (precision + factorial_valuation(prime, max_degree)).max(base_p_digits(prime, max_degree));
    let values = (0..=max_degree)
        .map(|j| {
            let y = f(&PadicApprox::from_integer(prime, j, input_precision)?);
            Ok(BigInt::from(y.project(precision)?.value().clone()))
        })
        .collect::<Result<Vec<_>>>()?;
    let modulus = prime.pow(precision);
    let coefficients = (0..=max_degree)
        .map(|m| {
            let mut sum = BigInt::zero();
            for (j, v) in values.iter().enumerate().take(m as usize + 1) {
                let term = BigInt::from(binomial(&BigUint::from(m), j as u64)) * v;
                if (m - j as u64).is_multiple_of(2) {
                    sum += term;
                } else {
                    sum -= term;
                }
            }
            let r = Residue::from_canonical(prime, precision, mod_floor(&sum, &modulus));
            PadicApprox::from_residue(&r)
        })
        .collect();
    Ok(MahlerSeries {
        prime,
        precision,
        coefficients,
    })
}

/// `sum_m a_m C(x, m)` modulo `p^K`, with `C(x, m)` computed exactly on the
/// integer representative of `x` at `K + v_p(M!)` digits.
pub fn mahler_eval(series: &MahlerSeries, x: &PadicApprox) -> Result<PadicApprox> {
    if x.prime() != series.prime {
        return Err(Error::DomainMismatch(
            "argument uses a different prime".into(),
        ));
    }
    let needed = series.required_input_precision();
    let rep = x.project(needed)?.value().clone();
    let modulus = series.prime.pow(series.precision);
    let mut sum = BigUint::zero();
    let mut binom = BigUint::one();
    for (m, a) in series.coefficients.iter().enumerate() {
        if m > 0 {
            // C(x, m) = C(x, m-1) (x - m + 1) / m, exact in the integers
            let m = m as u64;
            if rep < BigUint::from(m) {
                break;
            }
            binom = binom * (&rep - (m - 1)) / m;
        }
        sum = (sum + a.value() * (&binom % &modulus)) % &modulus;
    }
    Ok(PadicApprox::from_residue(&Residue::from_canonical(
        series.prime,
        series.precision,
        sum,
    )))
}
