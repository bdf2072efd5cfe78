//! Finite-level loop monoids: based finite-support maps from a countable
//! based domain into `N_k`, up to based bijections of the domain.
//!
//! Two finite-support maps are related by a based bijection exactly when
//! their multisets of nonzero values agree, so a class is stored as that
//! multiset. Wedge composition glues two maps along the base point, which on
//! classes is multiset union.

use std::collections::BTreeMap;
use std::sync::Arc;

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::level_rings::{Level, ResidueVector};
use crate::manifold_tower::{ClopenManifold, LevelSet};

/// Label of a point of the countable based domain.
pub type PointLabel = u64;

/// The value set `N_k` with its distinguished zero `y0_k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelCodomain {
    values: Arc<LevelSet>,
    zero: ResidueVector,
}

impl LevelCodomain {
    pub fn new(values: Arc<LevelSet>, zero: ResidueVector) -> Result<Self> {
        if !values.contains(&zero) {
            return Err(Error::ValueOutsideCodomain);
        }
        Ok(LevelCodomain { values, zero })
    }

    /// `N_k` with the image of the base point of `n` as zero.
    pub fn from_manifold(n: &ClopenManifold, k: Level) -> Result<Self> {
        let values = n.discretize(k)?;
        let zero = values
            .base_point_image()
            .cloned()
            .ok_or_else(|| Error::InvalidManifold("codomain has no base point".into()))?;
        Self::new(Arc::new(values), zero)
    }

    pub fn level(&self) -> Level {
        self.values.level()
    }

    pub fn values(&self) -> &Arc<LevelSet> {
        &self.values
    }

    pub fn zero(&self) -> &ResidueVector {
        &self.zero
    }

    /// `|N_k|`, zero included.
    pub fn size(&self) -> usize {
        self.values.len()
    }

    pub fn nonzero_values(&self) -> impl Iterator<Item = &ResidueVector> {
        self.values
            .points()
            .iter()
            .filter(move |v| **v != self.zero)
    }

    /// `N_k = {0}`: the loop monoid is trivial.
    pub fn is_trivial(&self) -> bool {
        self.values.len() == 1
    }
}

/// A based-bijection class of finite-support maps: the multiset of nonzero
/// values, stored as value -> multiplicity.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LevelLoopClass {
    level: Level,
    counts: BTreeMap<ResidueVector, usize>,
}

impl LevelLoopClass {
    /// The class of the constant map `w_0`.
    pub fn unit(level: Level) -> Self {
        LevelLoopClass {
            level,
            counts: BTreeMap::new(),
        }
    }

    /// The class with the given nonzero values (with repetition).
    pub fn from_values<'a, I>(codomain: &LevelCodomain, values: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a ResidueVector>,
    {
        let mut counts = BTreeMap::new();
        for v in values {
            if !codomain.values.contains(v) {
                return Err(Error::ValueOutsideCodomain);
            }
            if *v == codomain.zero {
                return Err(Error::BasePointMoved);
            }
            *counts.entry(v.clone()).or_insert(0) += 1;
        }
        Ok(LevelLoopClass {
            level: codomain.level(),
            counts,
        })
    }

    /// `count` copies of one value; the caller vouches that it is a nonzero
    /// codomain value.
    pub fn singleton(level: Level, value: ResidueVector, count: usize) -> Self {
        let mut counts = BTreeMap::new();
        if count > 0 {
            counts.insert(value, count);
        }
        LevelLoopClass { level, counts }
    }

    pub fn level(&self) -> Level {
        self.level
    }

    /// Number of points outside the zero set.
    pub fn support_size(&self) -> usize {
        self.counts.values().sum()
    }

    pub fn is_unit(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn multiplicity(&self, v: &ResidueVector) -> usize {
        self.counts.get(v).copied().unwrap_or(0)
    }

    /// `(value, multiplicity)` in increasing value order.
    pub fn counts(&self) -> impl Iterator<Item = (&ResidueVector, usize)> {
        self.counts.iter().map(|(v, &c)| (v, c))
    }

    /// The sorted multiset with repetition.
    pub fn values(&self) -> Vec<&ResidueVector> {
        self.counts
            .iter()
            .flat_map(|(v, &c)| std::iter::repeat_n(v, c))
            .collect()
    }

    /// Wedge composition, i.e. multiset union.
    pub fn wedge(&self, other: &LevelLoopClass) -> Result<LevelLoopClass> {
        if self.level != other.level {
            return Err(Error::LevelMismatch(format!(
                "classes at levels {} and {}",
                self.level, other.level
            )));
        }
        let mut counts = self.counts.clone();
        for (v, &c) in &other.counts {
            *counts.entry(v.clone()).or_insert(0) += c;
        }
        Ok(LevelLoopClass {
            level: self.level,
            counts,
        })
    }

    /// The connecting map to a coarser level: reduce every value and drop
    /// those that become zero.
    pub fn connecting(&self, target: &LevelCodomain) -> Result<LevelLoopClass> {
        let k = target.level();
        if k > self.level {
            return Err(Error::LevelMismatch(format!(
                "cannot connect level {} to level {k}",
                self.level
            )));
        }
        let mut counts = BTreeMap::new();
        for (v, &c) in &self.counts {
            let w = v.reduce(k)?;
            if !target.values.contains(&w) {
                return Err(Error::ValueOutsideCodomain);
            }
            if w != target.zero {
                *counts.entry(w).or_insert(0) += c;
            }
        }
        Ok(LevelLoopClass { level: k, counts })
    }
}

/// The class of a based map given by `(label, value)` assignments; labels not
/// listed map to zero.
///
/// Assignments are read lazily and reading stops with `InfiniteSupport` as
/// soon as more than `support_bound` nonzero values appear, so unbounded
/// iterators are rejected rather than exhausted.
pub fn canonicalize<I>(
    basepoint: PointLabel,
    assignments: I,
    codomain: &LevelCodomain,
    support_bound: usize,
) -> Result<LevelLoopClass>
where
    I: IntoIterator<Item = (PointLabel, ResidueVector)>,
{
    let mut seen: BTreeMap<PointLabel, ResidueVector> = BTreeMap::new();
    let mut support = 0usize;
    let mut counts = BTreeMap::new();
    for (label, value) in assignments {
        if !codomain.values.contains(&value) {
            return Err(Error::ValueOutsideCodomain);
        }
        if label == basepoint && value != codomain.zero {
            return Err(Error::BasePointMoved);
        }
        if let Some(prev) = seen.get(&label) {
            if *prev != value {
                return Err(Error::DomainMismatch(format!(
                    "point {label} is assigned two values"
                )));
            }
            continue;
        }
        seen.insert(label, value.clone());
        if value == codomain.zero {
            continue;
        }
        support += 1;
        if support > support_bound {
            return Err(Error::InfiniteSupport {
                bound: support_bound,
            });
        }
        *counts.entry(value).or_insert(0) += 1;
    }
    Ok(LevelLoopClass {
        level: codomain.level(),
        counts,
    })
}

/// Binomial coefficient in `u128`, `None` on overflow.
fn choose(n: u128, k: u128) -> Option<u128> {
    let k = k.min(n.saturating_sub(k));
    (0..k).try_fold(1u128, |acc, i| Some(acc.checked_mul(n - i)? / (i + 1)))
}

/// Number of classes with support at most `max_support` over `nonzero`
/// nonzero values: `sum_j C(nonzero + j - 1, j)`.
pub fn class_count(nonzero: usize, max_support: usize) -> Option<u128> {
    if nonzero == 0 {
        return Some(1);
    }
    (0..=max_support as u128).try_fold(0u128, |acc, j| {
        acc.checked_add(choose(nonzero as u128 + j - 1, j)?)
    })
}

/// Every class realized by a based map on a domain of `domain_size` points
/// (base point included) with support at most `max_support`, ordered by
/// support size and then lexicographically.
pub fn enumerate_classes(
    domain_size: usize,
    codomain: &LevelCodomain,
    max_support: usize,
    bound: u128,
) -> Result<Vec<LevelLoopClass>> {
    let reach = max_support.min(domain_size.saturating_sub(1));
    let nonzero: Vec<&ResidueVector> = codomain.nonzero_values().collect();
    let count = class_count(nonzero.len(), reach).unwrap_or(u128::MAX);
    if count > bound {
        return Err(Error::TooLarge { count, bound });
    }
    let mut out = vec![LevelLoopClass::unit(codomain.level())];
    if nonzero.is_empty() {
        return Ok(out);
    }
    for j in 1..=reach {
        for combo in nonzero.iter().copied().combinations_with_replacement(j) {
            out.push(LevelLoopClass::from_values(codomain, combo)?);
        }
    }
    Ok(out)
}

/// Classes at levels `k0..=K` linked by the connecting maps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoopClassTower {
    codomains: Arc<[LevelCodomain]>,
    classes: Vec<LevelLoopClass>,
}

impl LoopClassTower {
    /// `codomains` are consecutive levels; checks `connecting(c_l) = c_k`
    /// for every `k <= l`.
    pub fn new(codomains: Arc<[LevelCodomain]>, classes: Vec<LevelLoopClass>) -> Result<Self> {
        if codomains.is_empty() || codomains.len() != classes.len() {
            return Err(Error::LevelMismatch(
                "one class per codomain level is required".into(),
            ));
        }
        for (i, (n, c)) in codomains.iter().zip(&classes).enumerate() {
            if n.level() != c.level() || n.level() != codomains[0].level() + i as Level {
                return Err(Error::LevelMismatch(format!(
                    "entry {i} is not at level {}",
                    codomains[0].level() + i as Level
                )));
            }
        }
        for l in 1..classes.len() {
            for k in 0..l {
                if classes[l].connecting(&codomains[k])? != classes[k] {
                    return Err(Error::NotLevelCompatible {
                        level: codomains[k].level(),
                        detail: format!(
                            "class at level {} does not connect to the class at level {}",
                            codomains[l].level(),
                            codomains[k].level()
                        ),
                    });
                }
            }
        }
        Ok(LoopClassTower { codomains, classes })
    }

    /// The tower determined by its top class.
    pub fn from_top(codomains: Arc<[LevelCodomain]>, top: LevelLoopClass) -> Result<Self> {
        let classes = codomains
            .iter()
            .map(|n| top.connecting(n))
            .collect::<Result<Vec<_>>>()?;
        Self::new(codomains, classes)
    }

    pub fn classes(&self) -> &[LevelLoopClass] {
        &self.classes
    }

    pub fn codomains(&self) -> &[LevelCodomain] {
        &self.codomains
    }

    pub fn wedge(&self, other: &LoopClassTower) -> Result<LoopClassTower> {
        if self.codomains != other.codomains {
            return Err(Error::DomainMismatch(
                "towers over different codomains".into(),
            ));
        }
        let classes = self
            .classes
            .iter()
            .zip(&other.classes)
            .map(|(a, b)| a.wedge(b))
            .collect::<Result<Vec<_>>>()?;
        Self::new(self.codomains.clone(), classes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::level_rings::{PadicApprox, Prime};

    fn p(n: u64) -> Prime {
        Prime::new(n).unwrap()
    }

    fn zmod(pr: u64, k: Level) -> LevelCodomain {
        let zero = vec![PadicApprox::from_integer(p(pr), 0, 6).unwrap()];
        let n = ClopenManifold::unit_ball(p(pr), 1)
            .unwrap()
            .with_base_point(zero)
            .unwrap();
        LevelCodomain::from_manifold(&n, k).unwrap()
    }

    fn rv(pr: u64, k: Level, v: i64) -> ResidueVector {
        ResidueVector::new(p(pr), k, [v]).unwrap()
    }

    fn class(n: &LevelCodomain, vals: &[i64]) -> LevelLoopClass {
        let pr = n.values().prime().get();
        let vs: Vec<_> = vals.iter().map(|&v| rv(pr, n.level(), v)).collect();
        LevelLoopClass::from_values(n, &vs).unwrap()
    }

    #[test]
    fn canonicalize_examples() {
        let n = zmod(3, 1);
        let c = canonicalize(0, [(5, rv(3, 1, 2))], &n, 10).unwrap();
        assert_eq!(c, class(&n, &[2]));
        let w0 = canonicalize(0, [(0, rv(3, 1, 0)), (1, rv(3, 1, 0))], &n, 10).unwrap();
        assert!(w0.is_unit());
    }

    #[test]
    fn canonicalize_errors() {
        let n = zmod(2, 2);
        assert_eq!(
            canonicalize(0, [(0, rv(2, 2, 1))], &n, 4),
            Err(Error::BasePointMoved)
        );
        let unbounded = (1u64..).map(|i| (i, rv(2, 2, 3)));
        assert_eq!(
            canonicalize(0, unbounded, &n, 16),
            Err(Error::InfiniteSupport { bound: 16 })
        );
        assert!(matches!(
            canonicalize(0, [(1, rv(2, 2, 1)), (1, rv(2, 2, 2))], &n, 4),
            Err(Error::DomainMismatch(_))
        ));
        assert_eq!(
            canonicalize(0, [(1, rv(2, 1, 1))], &n, 4),
            Err(Error::ValueOutsideCodomain)
        );
    }

    #[test]
    fn wedge_examples() {
        let n = zmod(3, 1);
        let v = class(&n, &[1]);
        assert_eq!(v.wedge(&v).unwrap(), class(&n, &[1, 1]));
        let unit = LevelLoopClass::unit(1);
        assert_eq!(v.wedge(&unit).unwrap(), v);
        let other_level = class(&zmod(3, 2), &[1]);
        assert!(matches!(
            v.wedge(&other_level),
            Err(Error::LevelMismatch(_))
        ));
    }

    #[test]
    fn connecting_examples() {
        let n2 = zmod(2, 2);
        let n1 = zmod(2, 1);
        assert!(class(&n2, &[2]).connecting(&n1).unwrap().is_unit());
        assert_eq!(
            class(&n2, &[1, 3]).connecting(&n1).unwrap(),
            class(&n1, &[1, 1])
        );
        assert!(matches!(
            class(&n1, &[1]).connecting(&n2),
            Err(Error::LevelMismatch(_))
        ));
    }

    #[test]
    fn enumerate_examples() {
        let n = zmod(2, 1);
        let classes = enumerate_classes(5, &n, 2, 100).unwrap();
        assert_eq!(
            classes,
            vec![LevelLoopClass::unit(1), class(&n, &[1]), class(&n, &[1, 1])]
        );
        assert_eq!(
            enumerate_classes(5, &n, 0, 100).unwrap(),
            vec![LevelLoopClass::unit(1)]
        );
        // a domain of two points supports at most one nonzero value
        assert_eq!(enumerate_classes(2, &n, 3, 100).unwrap().len(), 2);
        assert!(matches!(
            enumerate_classes(6, &zmod(5, 2), 5, 1000),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn stars_and_bars_count() {
        // n = |values| including zero, so n - 1 nonzero values
        for n in 1..=4usize {
            for s in 0..=3usize {
                let brute: usize = (0..=s)
                    .map(|j| (0..n - 1).combinations_with_replacement(j).count())
                    .sum();
                let brute = if n == 1 { 1 } else { brute };
                assert_eq!(class_count(n - 1, s), Some(brute as u128), "n={n} s={s}");
            }
        }
    }

    #[test]
    fn trivial_codomain() {
        let zero = vec![PadicApprox::from_integer(p(2), 1, 3).unwrap()];
        let b = crate::manifold_tower::Ball::new(zero.clone(), 3).unwrap();
        let n = ClopenManifold::new(p(2), vec![b], Some(zero)).unwrap();
        let n2 = LevelCodomain::from_manifold(&n, 2).unwrap();
        assert!(n2.is_trivial());
        assert_eq!(
            enumerate_classes(4, &n2, 3, 10).unwrap(),
            vec![LevelLoopClass::unit(2)]
        );
    }

    #[test]
    fn class_towers_close_under_wedge() {
        let codomains: Arc<[LevelCodomain]> = (1..=3).map(|k| zmod(2, k)).collect();
        let a = LoopClassTower::from_top(codomains.clone(), class(&codomains[2], &[1, 6])).unwrap();
        let b = LoopClassTower::from_top(codomains.clone(), class(&codomains[2], &[4, 7])).unwrap();
        let ab = a.wedge(&b).unwrap();
        assert_eq!(ab.classes()[0], class(&codomains[0], &[1, 1]));
        assert_eq!(ab.classes()[1], class(&codomains[1], &[1, 2, 3]));

        let bad = vec![
            LevelLoopClass::unit(1),
            LevelLoopClass::unit(2),
            class(&codomains[2], &[1]),
        ];
        assert!(matches!(
            LoopClassTower::new(codomains, bad),
            Err(Error::NotLevelCompatible { .. })
        ));
    }
}
