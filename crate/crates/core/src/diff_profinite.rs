//! Permutation groups `Hom(M_k)` of level sets and compatible permutation
//! towers, the finite-depth stand-in for the profinite group
//! `pr-lim Hom(M_k)`.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use itertools::Itertools;
use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::level_rings::{serialize_big, Level, ResidueVector};
use crate::manifold_tower::{ClopenManifold, LevelSet};
use crate::ultrametric::PadicDistance;

/// A bijection of a level set onto itself, stored as point indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LevelPerm {
    domain: Arc<LevelSet>,
    mapping: Vec<usize>,
}

impl LevelPerm {
    pub fn new(domain: Arc<LevelSet>, mapping: Vec<usize>) -> Result<Self> {
        if mapping.len() != domain.len() {
            return Err(Error::NotBijection(format!(
                "{} images for {} points",
                mapping.len(),
                domain.len()
            )));
        }
        let mut seen = vec![false; mapping.len()];
        for &j in &mapping {
            if j >= seen.len() || std::mem::replace(&mut seen[j], true) {
                return Err(Error::NotBijection(format!(
                    "image index {j} repeated or out of range"
                )));
            }
        }
        Ok(LevelPerm { domain, mapping })
    }

    pub fn identity(domain: Arc<LevelSet>) -> Self {
        let mapping = (0..domain.len()).collect();
        LevelPerm { domain, mapping }
    }

    pub fn level(&self) -> Level {
        self.domain.level()
    }

    pub fn domain(&self) -> &Arc<LevelSet> {
        &self.domain
    }

    pub fn mapping(&self) -> &[usize] {
        &self.mapping
    }

    pub fn is_identity(&self) -> bool {
        self.mapping.iter().enumerate().all(|(i, &j)| i == j)
    }

    pub fn apply(&self, x: &ResidueVector) -> Option<&ResidueVector> {
        let i = self.domain.index_of(x)?;
        Some(&self.domain.points()[self.mapping[i]])
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &LevelPerm) -> Result<LevelPerm> {
        if self.domain != other.domain {
            return Err(Error::DomainMismatch(format!(
                "permutations of different level sets at level {}",
                self.level()
            )));
        }
        Ok(LevelPerm {
            domain: self.domain.clone(),
            mapping: other.mapping.iter().map(|&j| self.mapping[j]).collect(),
        })
    }

    pub fn inverse(&self) -> LevelPerm {
        let mut mapping = vec![0; self.mapping.len()];
        for (i, &j) in self.mapping.iter().enumerate() {
            mapping[j] = i;
        }
        LevelPerm {
            domain: self.domain.clone(),
            mapping,
        }
    }

    /// The permutation this one induces on `coarse` under reduction, if it
    /// maps fibers to fibers.
    pub fn reduce_to(&self, coarse: &Arc<LevelSet>) -> Result<LevelPerm> {
        let proj = self.domain.projection_indices(coarse)?;
        let mut mapping: Vec<Option<usize>> = vec![None; coarse.len()];
        for (i, &j) in self.mapping.iter().enumerate() {
            let (src, dst) = (proj[i], proj[j]);
            match mapping[src] {
                None => mapping[src] = Some(dst),
                Some(prev) if prev != dst => {
                    return Err(Error::NotLevelCompatible {
                        level: coarse.level(),
                        detail: format!(
                            "level {} permutation splits the fiber over {}",
                            self.level(),
                            coarse.points()[src]
                        ),
                    })
                }
                Some(_) => {}
            }
        }
        let mapping = mapping
            .into_iter()
            .map(|m| m.expect("reduction is surjective"))
            .collect();
        LevelPerm::new(coarse.clone(), mapping)
    }
}

impl Serialize for LevelPerm {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(
            self.domain
                .points()
                .iter()
                .zip(&self.mapping)
                .map(|(x, &j)| (x, &self.domain.points()[j])),
        )
    }
}

/// Checks that `levels` are permutations at levels `1..=K` with
/// `pi^l_k ∘ sigma_l = sigma_k ∘ pi^l_k` for all `k <= l`.
pub fn check_tower(levels: &[LevelPerm]) -> Result<()> {
    if levels.is_empty() {
        return Err(Error::ZeroLevel);
    }
    for (i, s) in levels.iter().enumerate() {
        if s.level() as usize != i + 1 {
            return Err(Error::LevelMismatch(format!(
                "tower entry {} has level {}",
                i + 1,
                s.level()
            )));
        }
    }
    for l in 1..levels.len() {
        for coarse in &levels[..l] {
            if levels[l].domain.reduce(coarse.level())? != *coarse.domain {
                return Err(Error::DomainMismatch(format!(
                    "level {} set does not reduce onto level {}",
                    l + 1,
                    coarse.level()
                )));
            }
            let induced = levels[l].reduce_to(&coarse.domain)?;
            if induced != *coarse {
                return Err(Error::NotLevelCompatible {
                    level: coarse.level(),
                    detail: format!(
                        "sigma_{} reduces to a permutation different from sigma_{}",
                        l + 1,
                        coarse.level()
                    ),
                });
            }
        }
    }
    Ok(())
}

/// A compatible family `sigma_1, ..., sigma_K` of permutations of the level
/// sets of one manifold.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PermTower {
    levels: Vec<LevelPerm>,
}

impl PermTower {
    pub fn new(levels: Vec<LevelPerm>) -> Result<Self> {
        check_tower(&levels)?;
        Ok(PermTower { levels })
    }

    pub fn identity(m: &ClopenManifold, depth: Level) -> Result<Self> {
        let levels = (1..=depth)
            .map(|k| Ok(LevelPerm::identity(Arc::new(m.discretize(k)?))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(levels)
    }

    /// A random element of the finite-depth group.
    ///
    /// Points of `M_K` form a forest under reduction; a tower is exactly an
    /// automorphism of that forest. Children are matched only to children
    /// with isomorphic subtrees, shuffled within each isomorphism class.
    pub fn random<R: Rng + ?Sized>(m: &ClopenManifold, depth: Level, rng: &mut R) -> Result<Self> {
        let sets = (1..=depth)
            .map(|k| Ok(Arc::new(m.discretize(k)?)))
            .collect::<Result<Vec<_>>>()?;
        let d = sets.len();
        let mut children: Vec<Vec<Vec<usize>>> = Vec::with_capacity(d);
        for k in 0..d {
            let mut ch = vec![Vec::new(); sets[k].len()];
            if k + 1 < d {
                for (j, &parent) in sets[k + 1].projection_indices(&sets[k])?.iter().enumerate() {
                    ch[parent].push(j);
                }
            }
            children.push(ch);
        }
        // subtree isomorphism classes, interned per level
        let mut codes: Vec<Vec<usize>> = vec![Vec::new(); d];
        codes[d - 1] = vec![0; sets[d - 1].len()];
        for k in (0..d - 1).rev() {
            let mut intern: HashMap<Vec<usize>, usize> = HashMap::new();
            codes[k] = children[k]
                .iter()
                .map(|ch| {
                    let mut key: Vec<usize> = ch.iter().map(|&c| codes[k + 1][c]).collect();
                    key.sort_unstable();
                    let next = intern.len();
                    *intern.entry(key).or_insert(next)
                })
                .collect();
        }

        let classes = |idx: &[usize], code: &[usize]| -> BTreeMap<usize, Vec<usize>> {
            let mut by_code: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
            for &i in idx {
                by_code.entry(code[i]).or_default().push(i);
            }
            by_code
        };

        let all: Vec<usize> = (0..sets[0].len()).collect();
        let mut mapping = vec![0; sets[0].len()];
        for (_, group) in classes(&all, &codes[0]) {
            let mut targets = group.clone();
            targets.shuffle(rng);
            for (src, dst) in group.into_iter().zip(targets) {
                mapping[src] = dst;
            }
        }
        let mut levels = vec![LevelPerm::new(sets[0].clone(), mapping)?];
        for k in 0..d - 1 {
            let prev = &levels[k].mapping;
            let mut next = vec![0; sets[k + 1].len()];
            for (i, &t) in prev.iter().enumerate() {
                let src = classes(&children[k][i], &codes[k + 1]);
                let mut dst = classes(&children[k][t], &codes[k + 1]);
                for (code, group) in src {
                    let mut targets = dst.remove(&code).expect("isomorphic subtrees");
                    targets.shuffle(rng);
                    for (s, t) in group.into_iter().zip(targets) {
                        next[s] = t;
                    }
                }
            }
            levels.push(LevelPerm::new(sets[k + 1].clone(), next)?);
        }
        Self::new(levels)
    }

    pub fn depth(&self) -> Level {
        self.levels.len() as Level
    }

    /// `sigma_k`, 1-based.
    pub fn level(&self, k: Level) -> Option<&LevelPerm> {
        self.levels.get((k as usize).checked_sub(1)?)
    }

    pub fn levels(&self) -> &[LevelPerm] {
        &self.levels
    }

    /// Levelwise `self ∘ other`.
    pub fn compose(&self, other: &PermTower) -> Result<PermTower> {
        if self.depth() != other.depth() {
            return Err(Error::DomainMismatch(format!(
                "tower depths {} and {} differ",
                self.depth(),
                other.depth()
            )));
        }
        let levels = self
            .levels
            .iter()
            .zip(&other.levels)
            .map(|(a, b)| a.compose(b))
            .collect::<Result<Vec<_>>>()?;
        Self::new(levels)
    }

    /// Levelwise inverse.
    pub fn invert(&self) -> PermTower {
        PermTower {
            levels: self.levels.iter().map(LevelPerm::inverse).collect(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.levels.iter().all(LevelPerm::is_identity)
    }
}

/// `0` if the towers agree at every level, otherwise `p^-j` for the first
/// level `j` where they differ.
pub fn weak_distance(a: &PermTower, b: &PermTower) -> Result<PadicDistance> {
    if a.depth() != b.depth() || a.levels[0].domain != b.levels[0].domain {
        return Err(Error::DomainMismatch(
            "towers over different manifolds".into(),
        ));
    }
    let prime = a.levels[0].domain.prime();
    for (x, y) in a.levels.iter().zip(&b.levels) {
        if x.domain != y.domain {
            return Err(Error::DomainMismatch(
                "towers over different manifolds".into(),
            ));
        }
        if x.mapping != y.mapping {
            return Ok(PadicDistance::inverse_power(prime, x.level()));
        }
    }
    Ok(PadicDistance::zero(prime))
}

/// A tower fixing the image of the base point at every level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasedPermTower {
    tower: PermTower,
}

impl BasedPermTower {
    pub fn new(tower: PermTower) -> Result<Self> {
        for s in &tower.levels {
            let base = s
                .domain
                .base_point_image()
                .ok_or_else(|| Error::InvalidManifold("manifold has no base point".into()))?;
            if s.apply(base) != Some(base) {
                return Err(Error::BasePointMoved);
            }
        }
        Ok(BasedPermTower { tower })
    }

    pub fn tower(&self) -> &PermTower {
        &self.tower
    }

    pub fn compose(&self, other: &BasedPermTower) -> Result<BasedPermTower> {
        Self::new(self.tower.compose(&other.tower)?)
    }

    pub fn invert(&self) -> BasedPermTower {
        BasedPermTower {
            tower: self.tower.invert(),
        }
    }
}

/// Lifts `sigma` on `M_k` to `M_l` by a random bijection from each fiber over
/// `x` onto the fiber over `sigma(x)`.
///
/// The fiber over the `i`-th point of `M_k` draws from stream `i` of a
/// ChaCha8 generator keyed by `seed`, so the result does not depend on the
/// order in which fibers are processed.
pub fn random_lift(
    m: &ClopenManifold,
    sigma: &LevelPerm,
    l: Level,
    seed: u64,
) -> Result<LevelPerm> {
    let k = sigma.level();
    if l <= k {
        return Err(Error::LevelMismatch(format!(
            "lift target {l} must exceed {k}"
        )));
    }
    let coarse = sigma.domain();
    if **coarse != m.discretize(k)? {
        return Err(Error::DomainMismatch("permutation is not on M_k".into()));
    }
    let fine = Arc::new(m.discretize(l)?);
    let mut fibers: Vec<Vec<usize>> = vec![Vec::new(); coarse.len()];
    for (j, &parent) in fine.projection_indices(coarse)?.iter().enumerate() {
        fibers[parent].push(j);
    }
    for (i, &t) in sigma.mapping.iter().enumerate() {
        if fibers[i].len() != fibers[t].len() {
            return Err(Error::UnequalFibers(format!(
                "fiber over {} has {} points, fiber over {} has {}",
                coarse.points()[i],
                fibers[i].len(),
                coarse.points()[t],
                fibers[t].len()
            )));
        }
    }
    let mut mapping = vec![0; fine.len()];
    for (i, &t) in sigma.mapping.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        let mut targets = fibers[t].clone();
        targets.shuffle(&mut rng);
        for (&src, dst) in fibers[i].iter().zip(targets) {
            mapping[src] = dst;
        }
    }
    LevelPerm::new(fine, mapping)
}

/// Every element of `Hom(M_k) ≅ S_n`, refusing when `n!` exceeds `bound`.
pub fn enumerate_hom(domain: &Arc<LevelSet>, bound: u128) -> Result<Vec<LevelPerm>> {
    let n = domain.len();
    let count = (1..=n as u128).try_fold(1u128, |acc, i| acc.checked_mul(i));
    match count {
        Some(c) if c <= bound => {}
        other => {
            return Err(Error::TooLarge {
                count: other.unwrap_or(u128::MAX),
                bound,
            })
        }
    }
    Ok((0..n)
        .permutations(n)
        .map(|mapping| LevelPerm {
            domain: domain.clone(),
            mapping,
        })
        .collect())
}

pub fn factorial(n: u64) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, i| acc * i)
}

/// Order of `Hom(M_k)` together with the divisibility data reported for it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GroupOrder {
    pub level: Level,
    #[serde(serialize_with = "serialize_big")]
    pub points: BigUint,
    /// `n_k!`
    #[serde(serialize_with = "serialize_big")]
    pub order: BigUint,
    /// Largest `b` with `p^b <= n_k`.
    pub factorial_exponent: u32,
    /// Whether `(p^b)!` divides `n_k!`, checked by exact division.
    pub factorial_divides: bool,
    /// `m * min_i (k - s_i)`, for which `p^e | n_k` holds; absent below the
    /// ball resolution.
    pub card_exponent: Option<u32>,
    pub card_exponent_divides: Option<bool>,
    /// `sum_i (k - max{ l : p^l <= p^-s_i })`, read literally as
    /// `sum_i (k + s_i)`.
    pub literal_exponent: u32,
    /// Whether `p^literal_exponent` divides `n_k`.
    pub literal_card_divides: bool,
    /// Whether `(p^literal_exponent)!` divides `n_k!`.
    pub literal_factorial_divides: bool,
}

pub fn group_order(m: &ClopenManifold, k: Level) -> Result<GroupOrder> {
    let points = match m.cardinality(k) {
        Ok(n) => n,
        Err(Error::LevelTooSmall { .. }) => BigUint::from(m.level_points(k).len()),
        Err(e) => return Err(e),
    };
    let n = points.to_u64().ok_or(Error::TooLarge {
        count: u128::MAX,
        bound: u64::MAX as u128,
    })?;
    let order = factorial(n);
    let p = m.prime();
    let mut b = 0u32;
    while p.pow(b + 1) <= points {
        b += 1;
    }
    let pb = p.pow(b).to_u64().expect("p^b <= n_k");
    let factorial_divides = (&order % factorial(pb)).is_zero();
    let card_exponent = m.divisibility_exponent(k).ok();
    let card_exponent_divides = card_exponent.map(|e| (&points % p.pow(e)).is_zero());
    let literal_exponent: u32 = m.balls().iter().map(|ball| k + ball.radius_exp()).sum();
    let pa = p.pow(literal_exponent);
    let literal_card_divides = (&points % &pa).is_zero();
    // (p^a)! | n! iff p^a <= n
    let literal_factorial_divides = pa <= points;
    Ok(GroupOrder {
        level: k,
        points,
        order,
        factorial_exponent: b,
        factorial_divides,
        card_exponent,
        card_exponent_divides,
        literal_exponent,
        literal_card_divides,
        literal_factorial_divides,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::level_rings::{PadicApprox, Prime};
    use crate::manifold_tower::Ball;

    fn p(n: u64) -> Prime {
        Prime::new(n).unwrap()
    }

    fn zp(pr: u64) -> ClopenManifold {
        ClopenManifold::unit_ball(p(pr), 1).unwrap()
    }

    fn set(m: &ClopenManifold, k: Level) -> Arc<LevelSet> {
        Arc::new(m.discretize(k).unwrap())
    }

    fn two_balls_z3() -> ClopenManifold {
        let b =
            |c: i64| Ball::new(vec![PadicApprox::from_integer(p(3), c, 1).unwrap()], 1).unwrap();
        ClopenManifold::new(p(3), vec![b(0), b(1)], None).unwrap()
    }

    #[test]
    fn transposition_squares_to_identity() {
        let m = zp(2);
        let swap = PermTower::new(vec![LevelPerm::new(set(&m, 1), vec![1, 0]).unwrap()]).unwrap();
        assert!(swap.compose(&swap).unwrap().is_identity());
        let id = PermTower::identity(&m, 1).unwrap();
        assert_eq!(swap.compose(&id).unwrap(), swap);
        assert_eq!(swap.invert(), swap);
    }

    #[test]
    fn three_cycle_inverse_is_its_square() {
        let m = zp(3);
        let c = PermTower::new(vec![LevelPerm::new(set(&m, 1), vec![1, 2, 0]).unwrap()]).unwrap();
        assert_eq!(c.invert(), c.compose(&c).unwrap());
        assert!(PermTower::identity(&m, 2).unwrap().invert().is_identity());
    }

    #[test]
    fn non_bijections_are_rejected() {
        let m = zp(3);
        assert!(matches!(
            LevelPerm::new(set(&m, 1), vec![0, 0, 1]),
            Err(Error::NotBijection(_))
        ));
        assert!(matches!(
            LevelPerm::new(set(&m, 1), vec![0, 1]),
            Err(Error::NotBijection(_))
        ));
    }

    #[test]
    fn fiber_splitting_tower_is_rejected() {
        let m = zp(2);
        let s1 = LevelPerm::identity(set(&m, 1));
        // swaps 0 and 1 mod 4, mixing the fibers over 0 and 1 mod 2
        let s2 = LevelPerm::new(set(&m, 2), vec![1, 0, 2, 3]).unwrap();
        assert!(matches!(
            PermTower::new(vec![s1, s2]),
            Err(Error::NotLevelCompatible { level: 1, .. })
        ));
    }

    #[test]
    fn lifts_of_identity_on_z2() {
        let m = zp(2);
        let id = LevelPerm::identity(set(&m, 1));
        // brute force: permutations of Z/4 that reduce to the identity mod 2
        let expected: Vec<LevelPerm> = enumerate_hom(&set(&m, 2), 100)
            .unwrap()
            .into_iter()
            .filter(|s| s.reduce_to(&set(&m, 1)).ok().as_ref() == Some(&id))
            .collect();
        assert_eq!(expected.len(), 4);
        let mut seen = std::collections::HashSet::new();
        for seed in 0..64 {
            let lift = random_lift(&m, &id, 2, seed).unwrap();
            assert_eq!(lift.reduce_to(&set(&m, 1)).unwrap(), id);
            assert!(expected.contains(&lift));
            seen.insert(lift);
        }
        assert_eq!(seen.len(), 4);
        assert_eq!(
            random_lift(&m, &id, 2, 9).unwrap(),
            random_lift(&m, &id, 2, 9).unwrap()
        );
    }

    #[test]
    fn lift_across_unequal_fibers_fails() {
        let b = |c: i64, s: u32| {
            Ball::new(vec![PadicApprox::from_integer(p(2), c, 2).unwrap()], s).unwrap()
        };
        let m = ClopenManifold::new(p(2), vec![b(0, 1), b(1, 2)], None).unwrap();
        // M_1 = {0, 1}; fibers at level 2 have sizes 2 and 1
        let swap = LevelPerm::new(set(&m, 1), vec![1, 0]).unwrap();
        assert!(matches!(
            random_lift(&m, &swap, 2, 0),
            Err(Error::UnequalFibers(_))
        ));
        assert!(random_lift(&m, &LevelPerm::identity(set(&m, 1)), 2, 0).is_ok());
    }

    #[test]
    fn group_order_examples() {
        let o = group_order(&zp(2), 1).unwrap();
        assert_eq!(o.order, BigUint::from(2u32));
        let o = group_order(&zp(2), 2).unwrap();
        assert_eq!(o.order, BigUint::from(24u32));
        assert_eq!(o.factorial_exponent, 2);
        assert!(o.factorial_divides);
        assert_eq!(group_order(&zp(3), 1).unwrap().order, BigUint::from(6u32));
    }

    #[test]
    fn literal_exponent_fails_on_two_small_balls() {
        let o = group_order(&two_balls_z3(), 2).unwrap();
        assert_eq!(o.points, BigUint::from(6u32));
        assert_eq!(o.card_exponent, Some(1));
        assert_eq!(o.card_exponent_divides, Some(true));
        assert_eq!(o.literal_exponent, 6);
        assert!(!o.literal_card_divides);
        assert!(!o.literal_factorial_divides);
        assert_eq!(o.factorial_exponent, 1);
        assert!(o.factorial_divides);
    }

    #[test]
    fn hom_enumeration_counts() {
        for (m, k, n) in [(zp(2), 1, 2), (zp(2), 2, 4), (zp(3), 1, 3), (zp(5), 1, 5)] {
            let all = enumerate_hom(&set(&m, k), 1000).unwrap();
            assert_eq!(all.len() as u64, factorial(n).to_u64().unwrap());
        }
        assert!(matches!(
            enumerate_hom(&set(&zp(2), 3), 1000),
            Err(Error::TooLarge {
                count: 40320,
                bound: 1000
            })
        ));
    }

    #[test]
    fn weak_distance_examples() {
        let m = zp(2);
        let id = PermTower::identity(&m, 2).unwrap();
        assert!(weak_distance(&id, &id).unwrap().is_zero());
        // identity mod 2, x -> x + 2 mod 4
        let s = PermTower::new(vec![
            LevelPerm::identity(set(&m, 1)),
            LevelPerm::new(set(&m, 2), vec![2, 3, 0, 1]).unwrap(),
        ])
        .unwrap();
        assert_eq!(
            weak_distance(&id, &s).unwrap(),
            PadicDistance::inverse_power(p(2), 2)
        );
        let short = PermTower::identity(&m, 1).unwrap();
        assert!(matches!(
            weak_distance(&id, &short),
            Err(Error::DomainMismatch(_))
        ));
    }

    #[test]
    fn random_towers_on_mixed_radii() {
        let b = |c: i64, s: u32| {
            Ball::new(vec![PadicApprox::from_integer(p(2), c, 3).unwrap()], s).unwrap()
        };
        let m = ClopenManifold::new(p(2), vec![b(0, 1), b(1, 3), b(3, 3)], None).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let t = PermTower::random(&m, 4, &mut rng).unwrap();
            assert!(t.compose(&t.invert()).unwrap().is_identity());
        }
    }

    #[test]
    fn based_towers_are_closed() {
        let s0 = vec![PadicApprox::from_integer(p(3), 0, 3).unwrap()];
        let m = zp(3).with_base_point(s0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut based = Vec::new();
        while based.len() < 6 {
            if let Ok(b) = BasedPermTower::new(PermTower::random(&m, 2, &mut rng).unwrap()) {
                based.push(b);
            }
        }
        for a in &based {
            assert!(BasedPermTower::new(a.invert().tower().clone()).is_ok());
            for b in &based {
                a.compose(b).unwrap();
            }
        }
        let c = PermTower::new(vec![LevelPerm::new(set(&m, 1), vec![1, 2, 0]).unwrap()]);
        let c = c.unwrap();
        assert_eq!(BasedPermTower::new(c), Err(Error::BasePointMoved));
    }
}
