//! Grothendieck groups of the level loop monoids.
//!
//! A formal difference `[a] - [b]` is normalized at once to signed
//! multiplicities indexed by nonzero codomain values, which identifies the
//! group with the free abelian group on those values.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::level_rings::{Level, ResidueVector};
use crate::loop_monoid::{enumerate_classes, LevelCodomain, LevelLoopClass};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GrothElem {
    level: Level,
    coords: BTreeMap<ResidueVector, i64>,
}

impl GrothElem {
    pub fn zero(level: Level) -> Self {
        GrothElem {
            level,
            coords: BTreeMap::new(),
        }
    }

    pub fn embed(c: &LevelLoopClass) -> Self {
        GrothElem {
            level: c.level(),
            coords: c.counts().map(|(v, n)| (v.clone(), n as i64)).collect(),
        }
    }

    /// `embed(a) - embed(b)`.
    pub fn difference(a: &LevelLoopClass, b: &LevelLoopClass) -> Result<Self> {
        Self::embed(a).sub(&Self::embed(b))
    }

    pub fn level(&self) -> Level {
        self.level
    }

    pub fn coord(&self, v: &ResidueVector) -> i64 {
        self.coords.get(v).copied().unwrap_or(0)
    }

    pub fn coords(&self) -> impl Iterator<Item = (&ResidueVector, i64)> {
        self.coords.iter().map(|(v, &c)| (v, c))
    }

    pub fn is_zero(&self) -> bool {
        self.coords.is_empty()
    }

    fn check_level(&self, other: &GrothElem) -> Result<()> {
        if self.level != other.level {
            return Err(Error::LevelMismatch(format!(
                "group elements at levels {} and {}",
                self.level, other.level
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &GrothElem) -> Result<GrothElem> {
        self.check_level(other)?;
        let mut coords = self.coords.clone();
        for (v, &c) in &other.coords {
            let entry = coords.entry(v.clone()).or_insert(0);
            *entry += c;
            if *entry == 0 {
                coords.remove(v);
            }
        }
        Ok(GrothElem {
            level: self.level,
            coords,
        })
    }

    pub fn neg(&self) -> GrothElem {
        GrothElem {
            level: self.level,
            coords: self.coords.iter().map(|(v, &c)| (v.clone(), -c)).collect(),
        }
    }

    pub fn sub(&self, other: &GrothElem) -> Result<GrothElem> {
        self.add(&other.neg())
    }

    /// Splits into classes `(a, b)` with `self = embed(a) - embed(b)`.
    pub fn as_difference(&self) -> (LevelLoopClass, LevelLoopClass) {
        let mut pos = LevelLoopClass::unit(self.level);
        let mut neg = LevelLoopClass::unit(self.level);
        for (v, &c) in &self.coords {
            let single =
                LevelLoopClass::singleton(self.level, v.clone(), c.unsigned_abs() as usize);
            let side = if c > 0 { &mut pos } else { &mut neg };
            *side = side.wedge(&single).expect("same level");
        }
        (pos, neg)
    }

    /// The connecting map on classes, extended to differences.
    pub fn connecting(&self, target: &LevelCodomain) -> Result<GrothElem> {
        let (a, b) = self.as_difference();
        GrothElem::difference(&a.connecting(target)?, &b.connecting(target)?)
    }
}

/// Rank of the Grothendieck group of the loop monoid over `codomain`: the
/// number of nonzero values.
pub fn free_rank(codomain: &LevelCodomain) -> usize {
    codomain.nonzero_values().count()
}

/// Rank report for one codomain. `paper_claimed_rank` is `card(N_k)`, kept
/// beside the rank computed from the class structure.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RankReport {
    pub level: Level,
    pub codomain_size: usize,
    pub computed_rank: usize,
    pub paper_claimed_rank: usize,
}

pub fn rank_report(codomain: &LevelCodomain) -> RankReport {
    RankReport {
        level: codomain.level(),
        codomain_size: codomain.size(),
        computed_rank: free_rank(codomain),
        paper_claimed_rank: codomain.size(),
    }
}

/// A group homomorphism to the integers, determined by its values on the
/// free generators `[{v}]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupHom {
    level: Level,
    generator_values: BTreeMap<ResidueVector, i64>,
}

impl GroupHom {
    pub fn generator_values(&self) -> &BTreeMap<ResidueVector, i64> {
        &self.generator_values
    }

    pub fn apply(&self, x: &GrothElem) -> Result<i64> {
        if x.level != self.level {
            return Err(Error::LevelMismatch(format!(
                "homomorphism at level {} applied at level {}",
                self.level, x.level
            )));
        }
        Ok(x.coords
            .iter()
            .map(|(v, &c)| c * self.generator_values.get(v).copied().unwrap_or(0))
            .sum())
    }
}

/// Extends a monoid homomorphism `h` from classes to `(Z, +)` to the
/// Grothendieck group.
///
/// `h` is checked to send the unit to 0, to be additive on every pair of
/// generators, and to agree with the sum over its generators on every class
/// of support at most `check_support`.
pub fn universal_extend<H>(codomain: &LevelCodomain, h: H, check_support: usize) -> Result<GroupHom>
where
    H: Fn(&LevelLoopClass) -> i64,
{
    let level = codomain.level();
    let unit = LevelLoopClass::unit(level);
    if h(&unit) != 0 {
        return Err(Error::NotHomomorphism(
            "the unit class is not sent to 0".into(),
        ));
    }
    let generators: Vec<LevelLoopClass> = codomain
        .nonzero_values()
        .map(|v| LevelLoopClass::singleton(level, v.clone(), 1))
        .collect();
    let generator_values: BTreeMap<ResidueVector, i64> = codomain
        .nonzero_values()
        .cloned()
        .zip(generators.iter().map(&h))
        .collect();
    for a in &generators {
        for b in &generators {
            if h(&a.wedge(b)?) != h(a) + h(b) {
                return Err(Error::NotHomomorphism(format!(
                    "not additive on generators {:?} and {:?}",
                    a.values(),
                    b.values()
                )));
            }
        }
    }
    let ext = GroupHom {
        level,
        generator_values,
    };
    for c in enumerate_classes(check_support + 1, codomain, check_support, u128::MAX)? {
        if ext.apply(&GrothElem::embed(&c))? != h(&c) {
            return Err(Error::NotHomomorphism(format!(
                "not additive on the class {:?}",
                c.values()
            )));
        }
    }
    Ok(ext)
}
