//! Compact clopen subsets of `Z_p^m` as finite disjoint unions of closed
//! balls, and their finite images `M_k` in `(Z/p^kZ)^m`.

use std::collections::BTreeSet;

use itertools::Itertools;
use num_bigint::BigUint;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::level_rings::{Level, PadicApprox, Prime, ResidueVector};

/// Closed ball `{ z : |z - center| <= p^-radius_exp }` in `Z_p^m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ball {
    center: Vec<PadicApprox>,
    radius_exp: u32,
}

impl Ball {
    pub fn new(center: Vec<PadicApprox>, radius_exp: u32) -> Result<Self> {
        let first = center
            .first()
            .ok_or_else(|| Error::InvalidManifold("ball center has no coordinates".into()))?;
        if center.iter().any(|c| c.prime() != first.prime()) {
            return Err(Error::InvalidManifold("ball center mixes primes".into()));
        }
        if let Some(c) = center.iter().find(|c| c.precision() < radius_exp) {
            return Err(Error::PrecisionExceeded {
                requested: radius_exp,
                available: c.precision(),
            });
        }
        Ok(Ball { center, radius_exp })
    }

    pub fn center(&self) -> &[PadicApprox] {
        &self.center
    }

    pub fn radius_exp(&self) -> u32 {
        self.radius_exp
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    fn prime(&self) -> Prime {
        self.center[0].prime()
    }

    /// Center coordinates modulo `p^j`, as plain integers (`j = 0` gives zeros).
    fn center_mod(&self, j: Level) -> Vec<BigUint> {
        if j == 0 {
            return vec![BigUint::zero(); self.dim()];
        }
        self.center
            .iter()
            .map(|c| {
                c.project(j)
                    .expect("j <= radius_exp <= precision")
                    .value()
                    .clone()
            })
            .collect()
    }

    fn contains(&self, x: &ResidueVector) -> bool {
        let j = x.level().min(self.radius_exp);
        let modulus = self.prime().pow(j);
        self.center_mod(j)
            .iter()
            .zip(x.coords())
            .all(|(c, v)| v % &modulus == *c)
    }

    fn points_at(&self, k: Level) -> Vec<ResidueVector> {
        let p = self.prime();
        if k <= self.radius_exp {
            return vec![ResidueVector::from_canonical(p, k, self.center_mod(k))];
        }
        let step = &p.pow(self.radius_exp);
        let count = p
            .pow_u64(k - self.radius_exp)
            .expect("level set too large to enumerate");
        self.center_mod(self.radius_exp)
            .into_iter()
            .map(|c| (0..count).map(|t| &c + step * t).collect::<Vec<_>>())
            .multi_cartesian_product()
            .map(|coords| ResidueVector::from_canonical(p, k, coords))
            .collect()
    }
}

/// A finite disjoint union of balls in `Z_p^m`, optionally with a marked
/// base point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClopenManifold {
    prime: Prime,
    dim: usize,
    balls: Vec<Ball>,
    base_point: Option<Vec<PadicApprox>>,
}

impl ClopenManifold {
    pub fn new(
        prime: Prime,
        balls: Vec<Ball>,
        base_point: Option<Vec<PadicApprox>>,
    ) -> Result<Self> {
        let dim = balls
            .first()
            .ok_or_else(|| Error::InvalidManifold("a manifold needs at least one ball".into()))?
            .dim();
        for b in &balls {
            if b.dim() != dim {
                return Err(Error::InvalidManifold(
                    "balls of different dimension".into(),
                ));
            }
            if b.prime() != prime {
                return Err(Error::InvalidManifold(
                    "ball center uses a different prime".into(),
                ));
            }
        }
        for (i, j) in (0..balls.len()).tuple_combinations() {
            let t = balls[i].radius_exp.min(balls[j].radius_exp);
            if balls[i].center_mod(t) == balls[j].center_mod(t) {
                return Err(Error::OverlappingBalls {
                    first: i,
                    second: j,
                });
            }
        }
        let manifold = ClopenManifold {
            prime,
            dim,
            balls,
            base_point: None,
        };
        match base_point {
            Some(s0) => manifold.with_base_point(s0),
            None => Ok(manifold),
        }
    }

    /// The unit ball `Z_p^m`.
    pub fn unit_ball(prime: Prime, dim: usize) -> Result<Self> {
        let center = vec![PadicApprox::from_integer(prime, 0, 1)?; dim];
        Self::new(prime, vec![Ball::new(center, 0)?], None)
    }

    pub fn with_base_point(mut self, s0: Vec<PadicApprox>) -> Result<Self> {
        if s0.len() != self.dim || s0.iter().any(|x| x.prime() != self.prime) {
            return Err(Error::InvalidManifold(
                "base point has the wrong shape".into(),
            ));
        }
        let inside = self.balls.iter().any(|b| {
            let s = b.radius_exp;
            s == 0
                || s0
                    .iter()
                    .zip(b.center_mod(s))
                    .all(|(x, c)| x.project(s).map(|r| *r.value() == c).unwrap_or(false))
        });
        if !inside {
            return Err(Error::InvalidManifold(
                "base point lies outside every ball".into(),
            ));
        }
        self.base_point = Some(s0);
        Ok(self)
    }

    pub fn prime(&self) -> Prime {
        self.prime
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn balls(&self) -> &[Ball] {
        &self.balls
    }

    pub fn base_point(&self) -> Option<&[PadicApprox]> {
        self.base_point.as_deref()
    }

    /// Largest radius exponent: from this level on every ball is resolved.
    pub fn resolution(&self) -> u32 {
        self.balls.iter().map(|b| b.radius_exp).max().unwrap_or(0)
    }

    /// Highest level at which the base point image is known.
    pub fn precision(&self) -> Option<Level> {
        self.base_point
            .as_ref()
            .map(|s0| s0.iter().map(PadicApprox::precision).min().unwrap_or(0))
    }

    pub fn contains(&self, x: &ResidueVector) -> bool {
        x.prime() == self.prime && x.dim() == self.dim && self.balls.iter().any(|b| b.contains(x))
    }

    /// The level set `M_k = pi_k(M)`.
    pub fn discretize(&self, k: Level) -> Result<LevelSet> {
        if k == 0 {
            return Err(Error::ZeroLevel);
        }
        let base_point_image = match &self.base_point {
            Some(s0) => Some(ResidueVector::project(s0, k)?),
            None => None,
        };
        Ok(LevelSet {
            prime: self.prime,
            dim: self.dim,
            level: k,
            points: self.level_points(k),
            base_point_image,
        })
    }

    /// Points of `M_k` in increasing order, without the base point image
    /// (so not limited by the base point's precision).
    pub fn level_points(&self, k: Level) -> Vec<ResidueVector> {
        let points: BTreeSet<ResidueVector> =
            self.balls.iter().flat_map(|b| b.points_at(k)).collect();
        points.into_iter().collect()
    }

    /// Closed form `sum_i p^(m (k - s_i))`, valid once every ball is resolved.
    pub fn cardinality(&self, k: Level) -> Result<BigUint> {
        let resolution = self.resolution();
        if k < resolution || k == 0 {
            return Err(Error::LevelTooSmall {
                level: k,
                resolution,
            });
        }
        Ok(self
            .balls
            .iter()
            .map(|b| self.prime.pow(self.dim as u32 * (k - b.radius_exp)))
            .sum())
    }

    /// Exponent `m * min_i (k - s_i)`: `p` to this power divides `|M_k|`.
    pub fn divisibility_exponent(&self, k: Level) -> Result<u32> {
        let resolution = self.resolution();
        if k < resolution || k == 0 {
            return Err(Error::LevelTooSmall {
                level: k,
                resolution,
            });
        }
        let min_gap = self
            .balls
            .iter()
            .map(|b| k - b.radius_exp)
            .min()
            .unwrap_or(0);
        Ok(self.dim as u32 * min_gap)
    }

    /// All points of `M_l` reducing to `x`.
    pub fn fiber(&self, x: &ResidueVector, l: Level) -> Result<Vec<ResidueVector>> {
        let k = x.level();
        if !self.contains(x) {
            return Err(Error::PointNotInManifold { level: k });
        }
        if l <= k {
            return Err(Error::LevelMismatch(format!(
                "fiber target level {l} must exceed {k}"
            )));
        }
        if let Some(precision) = self.precision() {
            if l > precision {
                return Err(Error::PrecisionExceeded {
                    requested: l,
                    available: precision,
                });
            }
        }
        let p = self.prime;
        let step = p.pow(k);
        let count = p.pow_u64(l - k).expect("fiber too large to enumerate");
        Ok(x.coords()
            .iter()
            .map(|c| (0..count).map(|t| c + &step * t).collect::<Vec<_>>())
            .multi_cartesian_product()
            .map(|coords| ResidueVector::from_canonical(p, l, coords))
            .filter(|y| self.contains(y))
            .collect())
    }
}

/// A finite level set `M_k`, points in increasing order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LevelSet {
    prime: Prime,
    dim: usize,
    level: Level,
    points: Vec<ResidueVector>,
    base_point_image: Option<ResidueVector>,
}

impl LevelSet {
    /// Builds a level set from arbitrary points; duplicates are merged.
    pub fn from_points(
        prime: Prime,
        dim: usize,
        level: Level,
        points: impl IntoIterator<Item = ResidueVector>,
        base_point_image: Option<ResidueVector>,
    ) -> Result<Self> {
        let points: BTreeSet<ResidueVector> = points.into_iter().collect();
        if points
            .iter()
            .chain(base_point_image.iter())
            .any(|x| x.prime() != prime || x.level() != level || x.dim() != dim)
        {
            return Err(Error::LevelMismatch(
                "point does not belong to the level set".into(),
            ));
        }
        if let Some(b) = &base_point_image {
            if !points.contains(b) {
                return Err(Error::PointNotInManifold { level });
            }
        }
        Ok(LevelSet {
            prime,
            dim,
            level,
            points: points.into_iter().collect(),
            base_point_image,
        })
    }

    pub fn prime(&self) -> Prime {
        self.prime
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn level(&self) -> Level {
        self.level
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[ResidueVector] {
        &self.points
    }

    pub fn base_point_image(&self) -> Option<&ResidueVector> {
        self.base_point_image.as_ref()
    }

    pub fn index_of(&self, x: &ResidueVector) -> Option<usize> {
        self.points.binary_search(x).ok()
    }

    pub fn contains(&self, x: &ResidueVector) -> bool {
        self.index_of(x).is_some()
    }

    /// Image of this set under `pi^l_k`.
    pub fn reduce(&self, k: Level) -> Result<LevelSet> {
        let points = self
            .points
            .iter()
            .map(|x| x.reduce(k))
            .collect::<Result<Vec<_>>>()?;
        let base = self
            .base_point_image
            .as_ref()
            .map(|b| b.reduce(k))
            .transpose()?;
        Self::from_points(self.prime, self.dim, k, points, base)
    }

    /// For each point, the index of its image in `coarse` under reduction.
    pub fn projection_indices(&self, coarse: &LevelSet) -> Result<Vec<usize>> {
        self.points
            .iter()
            .map(|x| {
                let y = x.reduce(coarse.level)?;
                coarse.index_of(&y).ok_or(Error::PointNotInManifold {
                    level: coarse.level,
                })
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(n: u64) -> Prime {
        Prime::new(n).unwrap()
    }

    fn ball(pr: u64, center: &[i64], s: u32) -> Ball {
        let prec = s.max(1);
        Ball::new(
            center
                .iter()
                .map(|&c| PadicApprox::from_integer(p(pr), c, prec).unwrap())
                .collect(),
            s,
        )
        .unwrap()
    }

    fn rv(pr: u64, k: Level, v: &[i64]) -> ResidueVector {
        ResidueVector::new(p(pr), k, v.iter().copied()).unwrap()
    }

    #[test]
    fn whole_z2_at_level_three() {
        let m = ClopenManifold::unit_ball(p(2), 1).unwrap();
        let m3 = m.discretize(3).unwrap();
        assert_eq!(m3.len(), 8);
        assert_eq!(m.cardinality(3).unwrap(), BigUint::from(8u32));
    }

    #[test]
    fn two_balls_in_z3() {
        let m = ClopenManifold::new(p(3), vec![ball(3, &[0], 1), ball(3, &[1], 1)], None).unwrap();
        let m2 = m.discretize(2).unwrap();
        assert_eq!(m2.len(), 6);
        assert_eq!(m.cardinality(2).unwrap(), BigUint::from(6u32));
        let expected: Vec<_> = [0, 1, 3, 4, 6, 7].iter().map(|&v| rv(3, 2, &[v])).collect();
        assert_eq!(m2.points(), expected.as_slice());
    }

    #[test]
    fn base_point_image() {
        let zero = vec![PadicApprox::from_integer(p(5), 0, 4).unwrap()];
        let m = ClopenManifold::unit_ball(p(5), 1)
            .unwrap()
            .with_base_point(zero)
            .unwrap();
        let m3 = m.discretize(3).unwrap();
        assert_eq!(m3.base_point_image(), Some(&rv(5, 3, &[0])));
        assert!(matches!(
            m.discretize(5),
            Err(Error::PrecisionExceeded {
                requested: 5,
                available: 4
            })
        ));
    }

    #[test]
    fn base_point_outside_is_rejected() {
        let m = ClopenManifold::new(p(3), vec![ball(3, &[1], 1)], None).unwrap();
        let s0 = vec![PadicApprox::from_integer(p(3), 0, 2).unwrap()];
        assert!(matches!(
            m.with_base_point(s0),
            Err(Error::InvalidManifold(_))
        ));
    }

    #[test]
    fn overlapping_balls_are_rejected() {
        let err = ClopenManifold::new(p(2), vec![ball(2, &[0], 0), ball(2, &[1], 1)], None);
        assert_eq!(
            err,
            Err(Error::OverlappingBalls {
                first: 0,
                second: 1
            })
        );
        let nested = ClopenManifold::new(p(3), vec![ball(3, &[1], 1), ball(3, &[4], 2)], None);
        assert!(matches!(nested, Err(Error::OverlappingBalls { .. })));
        // differ only in the second coordinate
        let ok = ClopenManifold::new(p(2), vec![ball(2, &[0, 0], 1), ball(2, &[0, 1], 1)], None);
        assert!(ok.is_ok());
    }

    #[test]
    fn cardinality_below_resolution() {
        let m = ClopenManifold::new(p(2), vec![ball(2, &[1], 3), ball(2, &[0], 1)], None).unwrap();
        assert_eq!(
            m.cardinality(2),
            Err(Error::LevelTooSmall {
                level: 2,
                resolution: 3
            })
        );
        // enumeration still works: {1 mod 4} and {0, 2 mod 4}
        assert_eq!(m.discretize(2).unwrap().len(), 3);
        assert_eq!(m.cardinality(3).unwrap(), BigUint::from(5u32));
    }

    #[test]
    fn fiber_examples() {
        let m = ClopenManifold::unit_ball(p(2), 1).unwrap();
        let f = m.fiber(&rv(2, 1, &[0]), 2).unwrap();
        assert_eq!(f, vec![rv(2, 2, &[0]), rv(2, 2, &[2])]);

        let m = ClopenManifold::new(p(3), vec![ball(3, &[1], 2)], None).unwrap();
        assert_eq!(
            m.fiber(&rv(3, 1, &[0]), 2),
            Err(Error::PointNotInManifold { level: 1 })
        );
        // below resolution the fiber is a single point
        assert_eq!(m.fiber(&rv(3, 1, &[1]), 2).unwrap(), vec![rv(3, 2, &[1])]);
    }

    #[test]
    fn fibers_partition_the_next_level() {
        let m = ClopenManifold::new(p(2), vec![ball(2, &[0, 1], 1), ball(2, &[1, 1], 2)], None)
            .unwrap();
        for k in 1..4 {
            let mk = m.discretize(k).unwrap();
            let ml = m.discretize(k + 1).unwrap();
            let mut union: Vec<_> = mk
                .points()
                .iter()
                .flat_map(|x| m.fiber(x, k + 1).unwrap())
                .collect();
            union.sort();
            assert_eq!(union.as_slice(), ml.points());
        }
    }

    #[test]
    fn divisibility_exponent_counterexample_to_total_sum() {
        // two balls of radius 1/3 at level 2: six points, divisible by 3 but not 9
        let m = ClopenManifold::new(p(3), vec![ball(3, &[0], 1), ball(3, &[1], 1)], None).unwrap();
        assert_eq!(m.divisibility_exponent(2).unwrap(), 1);
    }

    #[test]
    fn level_set_reduce_and_projection_indices() {
        let m = ClopenManifold::new(p(3), vec![ball(3, &[2], 1)], None).unwrap();
        let m1 = m.discretize(1).unwrap();
        let m3 = m.discretize(3).unwrap();
        assert_eq!(m3.reduce(1).unwrap(), m1);
        assert_eq!(m3.projection_indices(&m1).unwrap(), vec![0; 9]);
    }
}
