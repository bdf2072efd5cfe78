//! The level rings `Z/p^kZ`, truncated p-adic integers and the
//! projections between them.
//!
//! Every value is held as a canonical representative in `[0, p^k)` and all
//! arithmetic is exact big-integer arithmetic.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};

/// Precision level `k` of the ring `Z/p^kZ`. Always at least 1.
pub type Level = u32;

/// A rational prime, checked by trial division on construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct Prime(u64);

impl Prime {
    pub fn new(p: u64) -> Result<Self> {
        if p < 2 {
            return Err(Error::NotPrime(p));
        }
        let mut d = 2u64;
        while d.saturating_mul(d) <= p {
            if p.is_multiple_of(d) {
                return Err(Error::NotPrime(p));
            }
            d += 1;
        }
        Ok(Prime(p))
    }

    pub fn get(self) -> u64 {
        self.0
    }

    /// `p^k` as a big integer.
    pub fn pow(self, k: u32) -> BigUint {
        BigUint::from(self.0).pow(k)
    }

    /// `p^k` when it fits in a `u64`.
    pub fn pow_u64(self, k: u32) -> Option<u64> {
        self.0.checked_pow(k)
    }
}

impl fmt::Display for Prime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

fn check_level(k: Level) -> Result<()> {
    if k == 0 {
        Err(Error::ZeroLevel)
    } else {
        Ok(())
    }
}

/// Reduces a signed integer to its representative in `[0, modulus)`.
pub(crate) fn mod_floor(value: &BigInt, modulus: &BigUint) -> BigUint {
    let m = BigInt::from(modulus.clone());
    value
        .mod_floor(&m)
        .to_biguint()
        .expect("mod_floor with positive modulus is nonnegative")
}

/// An element of `Z/p^kZ`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Residue {
    prime: Prime,
    level: Level,
    value: BigUint,
}

impl Residue {
    /// Builds the residue class of `value` modulo `p^level`; negative inputs
    /// are accepted and reduced.
    pub fn new(prime: Prime, level: Level, value: impl Into<BigInt>) -> Result<Self> {
        check_level(level)?;
        let value = mod_floor(&value.into(), &prime.pow(level));
        Ok(Residue {
            prime,
            level,
            value,
        })
    }

    pub fn zero(prime: Prime, level: Level) -> Result<Self> {
        Self::new(prime, level, 0)
    }

    /// Caller guarantees `value < p^level` and `level >= 1`.
    pub(crate) fn from_canonical(prime: Prime, level: Level, value: BigUint) -> Self {
        debug_assert!(level >= 1 && value < prime.pow(level));
        Residue {
            prime,
            level,
            value,
        }
    }

    pub fn prime(&self) -> Prime {
        self.prime
    }

    pub fn level(&self) -> Level {
        self.level
    }

    /// Canonical representative in `[0, p^k)`.
    pub fn value(&self) -> &BigUint {
        &self.value
    }

    pub fn modulus(&self) -> BigUint {
        self.prime.pow(self.level)
    }

    pub fn is_zero(&self) -> bool {
        self.value.is_zero()
    }

    fn check_same_ring(&self, other: &Residue) -> Result<()> {
        if self.prime != other.prime || self.level != other.level {
            return Err(Error::LevelMismatch(format!(
                "Z/{}^{} vs Z/{}^{}",
                self.prime, self.level, other.prime, other.level
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Residue) -> Result<Residue> {
        self.check_same_ring(other)?;
        let value = (&self.value + &other.value) % self.modulus();
        Ok(Residue::from_canonical(self.prime, self.level, value))
    }

    pub fn sub(&self, other: &Residue) -> Result<Residue> {
        self.check_same_ring(other)?;
        let m = self.modulus();
        let value = (&self.value + &m - &other.value) % m;
        Ok(Residue::from_canonical(self.prime, self.level, value))
    }

    pub fn mul(&self, other: &Residue) -> Result<Residue> {
        self.check_same_ring(other)?;
        let value = (&self.value * &other.value) % self.modulus();
        Ok(Residue::from_canonical(self.prime, self.level, value))
    }

    pub fn neg(&self) -> Residue {
        let m = self.modulus();
        let value = (&m - &self.value) % m;
        Residue::from_canonical(self.prime, self.level, value)
    }

    /// The connecting homomorphism `Z/p^l -> Z/p^k` for `k <= l`.
    pub fn reduce(&self, k: Level) -> Result<Residue> {
        check_level(k)?;
        if k > self.level {
            return Err(Error::LevelMismatch(format!(
                "cannot reduce level {} to level {}",
                self.level, k
            )));
        }
        let value = &self.value % self.prime.pow(k);
        Ok(Residue::from_canonical(self.prime, k, value))
    }

    /// All `p^(l-k)` residues at level `l` reducing to `self`, in increasing
    /// order.
    pub fn fiber(&self, l: Level) -> Result<Vec<Residue>> {
        if l <= self.level {
            return Err(Error::LevelMismatch(format!(
                "fiber target level {} must exceed {}",
                l, self.level
            )));
        }
        let step = self.modulus();
        let count = self.prime.pow(l - self.level);
        let mut out = Vec::new();
        let mut t = BigUint::zero();
        while t < count {
            let value = &self.value + &step * &t;
            out.push(Residue::from_canonical(self.prime, l, value));
            t += 1u32;
        }
        Ok(out)
    }

    /// Base-`p` digits `d_0 .. d_{k-1}` of the representative.
    pub fn digits(&self) -> Vec<u64> {
        let p = BigUint::from(self.prime.get());
        let mut rest = self.value.clone();
        (0..self.level)
            .map(|_| {
                let (q, r) = rest.div_rem(&p);
                rest = q;
                r.to_u64().expect("digit below p")
            })
            .collect()
    }
}

impl fmt::Display for Residue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} mod {}^{}", self.value, self.prime, self.level)
    }
}

/// A truncated p-adic integer given by its first `K` base-`p` digits.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PadicApprox {
    prime: Prime,
    digits: Vec<u64>,
}

impl PadicApprox {
    pub fn from_digits(prime: Prime, digits: Vec<u64>) -> Result<Self> {
        check_level(digits.len() as u32)?;
        if let Some(&digit) = digits.iter().find(|&&d| d >= prime.get()) {
            return Err(Error::InvalidDigit {
                digit,
                prime: prime.get(),
            });
        }
        Ok(PadicApprox { prime, digits })
    }

    /// The first `precision` digits of an integer; negative integers get
    /// their p-adic expansion (e.g. `-1` is all digits `p - 1`).
    pub fn from_integer(prime: Prime, value: impl Into<BigInt>, precision: Level) -> Result<Self> {
        let r = Residue::new(prime, precision, value)?;
        Ok(Self::from_residue(&r))
    }

    pub fn from_residue(r: &Residue) -> Self {
        PadicApprox {
            prime: r.prime,
            digits: r.digits(),
        }
    }

    pub fn prime(&self) -> Prime {
        self.prime
    }

    pub fn precision(&self) -> Level {
        self.digits.len() as Level
    }

    pub fn digits(&self) -> &[u64] {
        &self.digits
    }

    /// `sum d_i p^i` over all stored digits.
    pub fn value(&self) -> BigUint {
        let p = BigUint::from(self.prime.get());
        self.digits
            .iter()
            .rev()
            .fold(BigUint::zero(), |acc, &d| acc * &p + BigUint::from(d))
    }

    /// The quotient map `Z_p -> Z/p^k`.
    pub fn project(&self, k: Level) -> Result<Residue> {
        check_level(k)?;
        if k > self.precision() {
            return Err(Error::PrecisionExceeded {
                requested: k,
                available: self.precision(),
            });
        }
        let p = BigUint::from(self.prime.get());
        let value = self.digits[..k as usize]
            .iter()
            .rev()
            .fold(BigUint::zero(), |acc, &d| acc * &p + BigUint::from(d));
        Ok(Residue::from_canonical(self.prime, k, value))
    }

    pub fn truncate(&self, k: Level) -> Result<PadicApprox> {
        Ok(Self::from_residue(&self.project(k)?))
    }
}

impl fmt::Display for PadicApprox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} + O({}^{})",
            self.value(),
            self.prime,
            self.precision()
        )
    }
}

/// A point of `(Z/p^kZ)^m`.
///
/// Ordering is lexicographic on the coordinates, which fixes the enumeration
/// order of level sets.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ResidueVector {
    prime: Prime,
    level: Level,
    coords: Vec<BigUint>,
}

impl ResidueVector {
    pub fn new<I, V>(prime: Prime, level: Level, values: I) -> Result<Self>
    where
        I: IntoIterator<Item = V>,
        V: Into<BigInt>,
    {
        check_level(level)?;
        let m = prime.pow(level);
        let coords: Vec<BigUint> = values
            .into_iter()
            .map(|v| mod_floor(&v.into(), &m))
            .collect();
        if coords.is_empty() {
            return Err(Error::InvalidManifold(
                "vector dimension must be at least 1".into(),
            ));
        }
        Ok(ResidueVector {
            prime,
            level,
            coords,
        })
    }

    pub fn from_residues(entries: &[Residue]) -> Result<Self> {
        let first = entries
            .first()
            .ok_or_else(|| Error::InvalidManifold("vector dimension must be at least 1".into()))?;
        for e in entries {
            first.check_same_ring(e)?;
        }
        Ok(ResidueVector {
            prime: first.prime,
            level: first.level,
            coords: entries.iter().map(|e| e.value.clone()).collect(),
        })
    }

    /// Projects each coordinate of a p-adic point to level `k`.
    pub fn project(point: &[PadicApprox], k: Level) -> Result<Self> {
        let entries = point
            .iter()
            .map(|x| x.project(k))
            .collect::<Result<Vec<_>>>()?;
        Self::from_residues(&entries)
    }

    pub(crate) fn from_canonical(prime: Prime, level: Level, coords: Vec<BigUint>) -> Self {
        ResidueVector {
            prime,
            level,
            coords,
        }
    }

    pub fn prime(&self) -> Prime {
        self.prime
    }

    pub fn level(&self) -> Level {
        self.level
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[BigUint] {
        &self.coords
    }

    pub fn entry(&self, i: usize) -> Residue {
        Residue::from_canonical(self.prime, self.level, self.coords[i].clone())
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(Zero::is_zero)
    }

    pub fn reduce(&self, k: Level) -> Result<ResidueVector> {
        check_level(k)?;
        if k > self.level {
            return Err(Error::LevelMismatch(format!(
                "cannot reduce level {} to level {}",
                self.level, k
            )));
        }
        let m = self.prime.pow(k);
        Ok(ResidueVector {
            prime: self.prime,
            level: k,
            coords: self.coords.iter().map(|c| c % &m).collect(),
        })
    }

    /// Canonical lift to a p-adic point of precision equal to the level.
    pub fn to_padic(&self) -> Vec<PadicApprox> {
        (0..self.dim())
            .map(|i| PadicApprox::from_residue(&self.entry(i)))
            .collect()
    }
}

impl fmt::Display for ResidueVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ") mod {}^{}", self.prime, self.level)
    }
}

/// Serializes a big integer as a JSON number when it fits in 64 bits and as
/// a decimal string otherwise.
pub(crate) fn serialize_big<S: serde::Serializer>(
    value: &BigUint,
    serializer: S,
) -> std::result::Result<S::Ok, S::Error> {
    match value.to_u64() {
        Some(v) => serializer.serialize_u64(v),
        None => serializer.serialize_str(&value.to_string()),
    }
}

impl Serialize for Residue {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        serialize_big(&self.value, s)
    }
}

impl Serialize for ResidueVector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeSeq;
        struct Big<'a>(&'a BigUint);
        impl Serialize for Big<'_> {
            fn serialize<S: serde::Serializer>(
                &self,
                s: S,
            ) -> std::result::Result<S::Ok, S::Error> {
                serialize_big(self.0, s)
            }
        }
        let mut seq = s.serialize_seq(Some(self.coords.len()))?;
        for c in &self.coords {
            seq.serialize_element(&Big(c))?;
        }
        seq.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(n: u64) -> Prime {
        Prime::new(n).unwrap()
    }

    fn r(pr: u64, k: Level, v: i64) -> Residue {
        Residue::new(p(pr), k, v).unwrap()
    }

    #[test]
    fn primes_by_trial_division() {
        assert!(Prime::new(2).is_ok());
        assert!(Prime::new(97).is_ok());
        assert_eq!(Prime::new(1), Err(Error::NotPrime(1)));
        assert_eq!(Prime::new(9), Err(Error::NotPrime(9)));
        assert_eq!(Prime::new(0), Err(Error::NotPrime(0)));
    }

    #[test]
    fn level_zero_is_rejected() {
        assert_eq!(Residue::new(p(2), 0, 1), Err(Error::ZeroLevel));
        assert_eq!(
            PadicApprox::from_digits(p(2), vec![]),
            Err(Error::ZeroLevel)
        );
    }

    #[test]
    fn ring_ops_examples() {
        assert_eq!(r(3, 2, 7).add(&r(3, 2, 5)).unwrap(), r(3, 2, 3));
        for x in 0..9 {
            assert_eq!(r(3, 2, x).mul(&r(3, 2, 1)).unwrap(), r(3, 2, x));
        }
        assert!(r(5, 3, 0).neg().is_zero());
        assert_eq!(r(5, 1, 2).neg(), r(5, 1, 3));
        assert_eq!(r(5, 1, 2).sub(&r(5, 1, 4)).unwrap(), r(5, 1, 3));
    }

    #[test]
    fn mismatched_rings_are_rejected() {
        assert!(matches!(
            r(3, 2, 1).add(&r(3, 1, 1)),
            Err(Error::LevelMismatch(_))
        ));
        assert!(matches!(
            r(3, 1, 1).mul(&r(2, 1, 1)),
            Err(Error::LevelMismatch(_))
        ));
    }

    #[test]
    fn reduce_examples() {
        assert_eq!(r(3, 3, 17).reduce(1).unwrap(), r(3, 1, 2));
        assert_eq!(r(3, 3, 17).reduce(3).unwrap(), r(3, 3, 17));
        assert!(matches!(r(3, 1, 1).reduce(2), Err(Error::LevelMismatch(_))));
    }

    #[test]
    fn negative_inputs_are_canonicalized() {
        assert_eq!(r(2, 3, -1), r(2, 3, 7));
        let x = PadicApprox::from_integer(p(3), -1, 4).unwrap();
        assert_eq!(x.digits(), &[2, 2, 2, 2]);
    }

    #[test]
    fn project_examples() {
        let x = PadicApprox::from_digits(p(2), vec![1, 1, 1]).unwrap();
        assert_eq!(x.project(3).unwrap(), r(2, 3, 7));
        let y = PadicApprox::from_digits(p(3), vec![2, 0, 1]).unwrap();
        assert_eq!(y.project(2).unwrap(), r(3, 2, 2));
        assert_eq!(y.project(3).unwrap(), r(3, 3, 11));
        assert_eq!(
            y.project(4),
            Err(Error::PrecisionExceeded {
                requested: 4,
                available: 3
            })
        );
        for j in 1..=3 {
            assert_eq!(
                y.project(3).unwrap().reduce(j).unwrap(),
                y.project(j).unwrap()
            );
        }
    }

    #[test]
    fn digits_are_validated() {
        assert!(matches!(
            PadicApprox::from_digits(p(3), vec![0, 3]),
            Err(Error::InvalidDigit { digit: 3, prime: 3 })
        ));
    }

    #[test]
    fn fiber_examples() {
        assert_eq!(r(2, 1, 1).fiber(2).unwrap(), vec![r(2, 2, 1), r(2, 2, 3)]);
        assert_eq!(
            r(3, 1, 0).fiber(2).unwrap(),
            vec![r(3, 2, 0), r(3, 2, 3), r(3, 2, 6)]
        );
        assert!(matches!(r(3, 2, 0).fiber(2), Err(Error::LevelMismatch(_))));
    }

    #[test]
    fn fibers_partition_the_level_ring() {
        for pr in [2u64, 3] {
            for l in 2..=4 {
                for k in 1..l {
                    let mut seen = Vec::new();
                    let pk = p(pr).pow_u64(k).unwrap();
                    for a in 0..pk {
                        let fib = r(pr, k, a as i64).fiber(l).unwrap();
                        assert_eq!(fib.len() as u64, p(pr).pow_u64(l - k).unwrap());
                        seen.extend(fib);
                    }
                    seen.sort();
                    let all: Vec<Residue> = (0..p(pr).pow_u64(l).unwrap())
                        .map(|v| r(pr, l, v as i64))
                        .collect();
                    assert_eq!(seen, all);
                }
            }
        }
    }

    #[test]
    fn reduce_cocycle_exhaustive() {
        for pr in [2u64, 3] {
            for top in 1..=4 {
                for x in 0..p(pr).pow_u64(top).unwrap() {
                    let a = r(pr, top, x as i64);
                    for l in 1..=top {
                        for k in 1..=l {
                            let two_step = a.reduce(l).unwrap().reduce(k).unwrap();
                            assert_eq!(two_step, a.reduce(k).unwrap());
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn residue_vector_reduce_and_lift() {
        let v = ResidueVector::new(p(3), 2, [7, -1]).unwrap();
        assert_eq!(v.coords(), &[BigUint::from(7u32), BigUint::from(8u32)]);
        assert_eq!(
            v.reduce(1).unwrap(),
            ResidueVector::new(p(3), 1, [1, 2]).unwrap()
        );
        let lifted = v.to_padic();
        assert_eq!(ResidueVector::project(&lifted, 2).unwrap(), v);
    }
}
