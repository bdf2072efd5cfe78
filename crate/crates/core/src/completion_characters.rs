//! Truncated p-adic completions of free abelian lattices `Z^(N)`, the
//! characters `Z -> Z/p^sZ` applied coordinatewise, and the Baire metric.
//!
//! Countably indexed objects are finite-support maps from labels to values.
//! A truncated completion is a finite-support vector of residues mod `p^s`.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::level_rings::{mod_floor, serialize_big, Level, Prime, Residue};
use crate::ultrametric::PadicDistance;

/// Index label of a coordinate.
pub type Label = u64;

/// A finite-support integer vector; absent labels are zero.
#[derive(Debug, Clone, PartialEq, Eq, Default, Hash)]
pub struct IntVector {
    entries: BTreeMap<Label, BigInt>,
}

impl IntVector {
    pub fn new<I, V>(entries: I) -> Self
    where
        I: IntoIterator<Item = (Label, V)>,
        V: Into<BigInt>,
    {
        let mut out = IntVector::default();
        for (label, v) in entries {
            let v = v.into() + out.get(label);
            out.set(label, v);
        }
        out
    }

    /// Entry `i` of `values` gets label `i + 1`.
    pub fn from_dense<V: Into<BigInt>>(values: impl IntoIterator<Item = V>) -> Self {
        Self::new((1..).zip(values))
    }

    fn set(&mut self, label: Label, v: BigInt) {
        if v.is_zero() {
            self.entries.remove(&label);
        } else {
            self.entries.insert(label, v);
        }
    }

    pub fn get(&self, label: Label) -> BigInt {
        self.entries.get(&label).cloned().unwrap_or_default()
    }

    pub fn entries(&self) -> impl Iterator<Item = (Label, &BigInt)> {
        self.entries.iter().map(|(&l, v)| (l, v))
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn add(&self, other: &IntVector) -> IntVector {
        let mut out = self.clone();
        for (&l, v) in &other.entries {
            let sum = out.get(l) + v;
            out.set(l, sum);
        }
        out
    }

    pub fn neg(&self) -> IntVector {
        IntVector {
            entries: self.entries.iter().map(|(&l, v)| (l, -v)).collect(),
        }
    }
}

/// A truncated element of `Z_p^(N)`: nonzero residues mod `p^s` at finitely
/// many labels.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct PadicVector {
    prime: Prime,
    precision: Level,
    #[serde(serialize_with = "serialize_entries")]
    entries: BTreeMap<Label, BigUint>,
}

fn serialize_entries<S: serde::Serializer>(
    entries: &BTreeMap<Label, BigUint>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    struct Big<'a>(&'a BigUint);
    impl Serialize for Big<'_> {
        fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
            serialize_big(self.0, s)
        }
    }
    s.collect_map(entries.iter().map(|(l, v)| (l.to_string(), Big(v))))
}

impl PadicVector {
    pub fn new<I>(prime: Prime, precision: Level, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Label, BigInt)>,
    {
        if precision == 0 {
            return Err(Error::ZeroLevel);
        }
        let modulus = prime.pow(precision);
        let mut acc: BTreeMap<Label, BigInt> = BTreeMap::new();
        for (l, v) in entries {
            *acc.entry(l).or_default() += v;
        }
        let entries = acc
            .into_iter()
            .map(|(l, v)| (l, mod_floor(&v, &modulus)))
            .filter(|(_, v)| !v.is_zero())
            .collect();
        Ok(PadicVector {
            prime,
            precision,
            entries,
        })
    }

    pub fn zero(prime: Prime, precision: Level) -> Result<Self> {
        Self::new(prime, precision, std::iter::empty())
    }

    pub fn prime(&self) -> Prime {
        self.prime
    }

    pub fn precision(&self) -> Level {
        self.precision
    }

    pub fn entry(&self, label: Label) -> Residue {
        Residue::new(
            self.prime,
            self.precision,
            BigInt::from(self.entries.get(&label).cloned().unwrap_or_default()),
        )
        .expect("precision >= 1")
    }

    pub fn entries(&self) -> impl Iterator<Item = (Label, &BigUint)> {
        self.entries.iter().map(|(&l, v)| (l, v))
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn add(&self, other: &PadicVector) -> Result<PadicVector> {
        if self.prime != other.prime || self.precision != other.precision {
            return Err(Error::LevelMismatch(format!(
                "vectors mod {}^{} and {}^{}",
                self.prime, self.precision, other.prime, other.precision
            )));
        }
        let terms = self
            .entries
            .iter()
            .chain(&other.entries)
            .map(|(&l, v)| (l, BigInt::from(v.clone())));
        PadicVector::new(self.prime, self.precision, terms)
    }
}

/// The character `eta_{p,s}`: coordinatewise reduction mod `p^s`.
pub fn character(x: &IntVector, prime: Prime, s: Level) -> Result<PadicVector> {
    PadicVector::new(prime, s, x.entries.iter().map(|(&l, v)| (l, v.clone())))
}

/// Coordinatewise limit mod `p^s` of a sequence of integer vectors.
///
/// The sequence counts as Cauchy at precision `s` when its last two terms
/// agree mod `p^s` in every coordinate.
pub fn complete(seq: &[IntVector], prime: Prime, s: Level) -> Result<PadicVector> {
    complete_with_tail(seq, prime, s, 2)
}

/// As [`complete`], requiring the last `tail` terms to agree mod `p^s`.
pub fn complete_with_tail(
    seq: &[IntVector],
    prime: Prime,
    s: Level,
    tail: usize,
) -> Result<PadicVector> {
    let tail = tail.max(1);
    if seq.len() < tail {
        return Err(Error::NotCauchy {
            precision: s,
            detail: format!(
                "{} terms given, a stable tail of {tail} is required",
                seq.len()
            ),
        });
    }
    let reduced = seq[seq.len() - tail..]
        .iter()
        .map(|v| character(v, prime, s))
        .collect::<Result<Vec<_>>>()?;
    let limit = &reduced[tail - 1];
    for (i, r) in reduced.iter().enumerate() {
        if r != limit {
            let label = r
                .entries
                .keys()
                .chain(limit.entries.keys())
                .find(|&&l| r.entries.get(&l) != limit.entries.get(&l))
                .copied()
                .unwrap_or_default();
            return Err(Error::NotCauchy {
                precision: s,
                detail: format!(
                    "term {} differs from the last term at label {label}",
                    seq.len() - tail + i
                ),
            });
        }
    }
    Ok(limit.clone())
}

/// An integer vector whose character is `target`: the canonical
/// representatives in `[0, p^s)`.
pub fn density_witness(target: &PadicVector) -> IntVector {
    IntVector::new(
        target
            .entries
            .iter()
            .map(|(&l, v)| (l, BigInt::from(v.clone()))),
    )
}

/// Enumeration of labels by positions `1, 2, 3, ...`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IndexOrder {
    /// Label `n` sits at position `n`; label 0 has no position.
    Natural,
    /// The `i`-th listed label sits at position `i + 1`; unlisted labels
    /// have no position.
    Explicit(Vec<Label>),
}

impl IndexOrder {
    fn position(&self, label: Label) -> Option<u32> {
        match self {
            IndexOrder::Natural => (label > 0).then(|| u32::try_from(label).ok()).flatten(),
            IndexOrder::Explicit(labels) => labels
                .iter()
                .position(|&l| l == label)
                .map(|i| i as u32 + 1),
        }
    }
}

fn first_difference<T: PartialEq>(
    prime: Prime,
    x: &BTreeMap<Label, T>,
    y: &BTreeMap<Label, T>,
    order: &IndexOrder,
) -> Result<PadicDistance> {
    let mut first: Option<u32> = None;
    for &l in x.keys().chain(y.keys()) {
        if x.get(&l) != y.get(&l) {
            let pos = order.position(l).ok_or(Error::OrderUndefined(l))?;
            first = Some(first.map_or(pos, |f| f.min(pos)));
        }
    }
    Ok(match first {
        None => PadicDistance::zero(prime),
        Some(j) => PadicDistance::inverse_power(prime, j),
    })
}

/// Baire metric `p^-j`, `j` the first position at which `x` and `y` differ.
pub fn baire_distance(
    prime: Prime,
    x: &IntVector,
    y: &IntVector,
    order: &IndexOrder,
) -> Result<PadicDistance> {
    first_difference(prime, &x.entries, &y.entries, order)
}

/// Baire metric on truncated completions of one prime and precision.
pub fn baire_distance_padic(
    x: &PadicVector,
    y: &PadicVector,
    order: &IndexOrder,
) -> Result<PadicDistance> {
    if x.prime != y.prime || x.precision != y.precision {
        return Err(Error::LevelMismatch(
            "vectors of different precision".into(),
        ));
    }
    first_difference(x.prime, &x.entries, &y.entries, order)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(n: u64) -> Prime {
        Prime::new(n).unwrap()
    }

    fn geometric_partial_sums(prime: Prime, terms: u32) -> Vec<IntVector> {
        let q = prime.get() as i64;
        (0..terms)
            .map(|n| {
                let sum: i64 = (0..=n).map(|i| (q - 1) * q.pow(i)).sum();
                IntVector::from_dense([sum])
            })
            .collect()
    }

    #[test]
    fn geometric_series_completes_to_minus_one() {
        let seq = geometric_partial_sums(p(2), 5);
        let limit = complete(&seq, p(2), 3).unwrap();
        assert_eq!(limit.entry(1), Residue::new(p(2), 3, 7).unwrap());
        assert_eq!(limit.entry(1), Residue::new(p(2), 3, -1).unwrap());
        let limit5 = complete(&geometric_partial_sums(p(5), 8), p(5), 6).unwrap();
        assert_eq!(limit5.entry(1), Residue::new(p(5), 6, -1).unwrap());
    }

    #[test]
    fn constant_and_null_sequences() {
        let v = IntVector::from_dense([3, -4, 0, 11]);
        let limit = complete(&[v.clone(), v.clone()], p(3), 2).unwrap();
        assert_eq!(limit, character(&v, p(3), 2).unwrap());
        let null: Vec<_> = (0..6)
            .map(|n| IntVector::from_dense([3i64.pow(n)]))
            .collect();
        assert!(complete(&null, p(3), 4).unwrap().is_zero());
    }

    #[test]
    fn unstable_sequences_are_not_cauchy() {
        let seq = geometric_partial_sums(p(2), 3); // 1, 3, 7
        assert!(matches!(
            complete(&seq, p(2), 3),
            Err(Error::NotCauchy { precision: 3, .. })
        ));
        assert!(matches!(
            complete(&seq[..1], p(2), 1),
            Err(Error::NotCauchy { .. })
        ));
        assert!(matches!(
            complete(&[], p(2), 1),
            Err(Error::NotCauchy { .. })
        ));
    }

    #[test]
    fn character_examples() {
        let x = IntVector::from_dense([13]);
        assert_eq!(
            character(&x, p(2), 3).unwrap().entry(1),
            Residue::new(p(2), 3, 5).unwrap()
        );
        assert!(character(&IntVector::default(), p(5), 4).unwrap().is_zero());
        assert_eq!(character(&x, p(2), 0), Err(Error::ZeroLevel));
    }

    #[test]
    fn density_witness_examples() {
        let t = PadicVector::new(p(2), 3, [(4, BigInt::from(7))]).unwrap();
        let w = density_witness(&t);
        assert_eq!(w.get(4), BigInt::from(7));
        assert_eq!(character(&w, p(2), 3).unwrap(), t);
        assert!(density_witness(&PadicVector::zero(p(2), 3).unwrap()).is_zero());
    }

    #[test]
    fn baire_examples() {
        let x = IntVector::from_dense([1, 2, 3]);
        let y = IntVector::from_dense([5, 2, 3]);
        let z = IntVector::from_dense([1, 2, 4]);
        let order = IndexOrder::Natural;
        assert!(baire_distance(p(3), &x, &x, &order).unwrap().is_zero());
        assert_eq!(
            baire_distance(p(3), &x, &y, &order).unwrap(),
            PadicDistance::inverse_power(p(3), 1)
        );
        assert_eq!(
            baire_distance(p(3), &x, &z, &order).unwrap(),
            PadicDistance::inverse_power(p(3), 3)
        );
        let reversed = IndexOrder::Explicit(vec![3, 2, 1]);
        assert_eq!(
            baire_distance(p(3), &x, &z, &reversed).unwrap(),
            PadicDistance::inverse_power(p(3), 1)
        );
        let partial = IndexOrder::Explicit(vec![1, 2]);
        assert_eq!(
            baire_distance(p(3), &x, &z, &partial),
            Err(Error::OrderUndefined(3))
        );
        let w = IntVector::new([(0, 1)]);
        assert_eq!(
            baire_distance(p(3), &w, &IntVector::default(), &order),
            Err(Error::OrderUndefined(0))
        );
    }

    #[test]
    fn int_vector_arithmetic_drops_zeros() {
        let x = IntVector::from_dense([1, -2]);
        let sum = x.add(&x.neg());
        assert!(sum.is_zero());
        assert_eq!(IntVector::new([(2, 3), (2, -3)]), IntVector::default());
    }
}
