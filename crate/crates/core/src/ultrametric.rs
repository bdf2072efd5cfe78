//! Distances of the form `p^-j`, as used by the weak topology on towers and
//! by the Baire metric on sequence spaces.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigUint;
use num_traits::One;
use serde::Serialize;

use crate::level_rings::Prime;

/// Either `0` or `p^-exponent`. Kept exact; never converted to a float.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PadicDistance {
    prime: Prime,
    exponent: Option<u32>,
}

impl PadicDistance {
    pub fn zero(prime: Prime) -> Self {
        PadicDistance {
            prime,
            exponent: None,
        }
    }

    pub fn inverse_power(prime: Prime, exponent: u32) -> Self {
        PadicDistance {
            prime,
            exponent: Some(exponent),
        }
    }

    pub fn prime(&self) -> Prime {
        self.prime
    }

    /// `Some(j)` for `p^-j`, `None` for zero.
    pub fn exponent(&self) -> Option<u32> {
        self.exponent
    }

    pub fn is_zero(&self) -> bool {
        self.exponent.is_none()
    }

    /// `(numerator, denominator)` in lowest terms.
    pub fn as_ratio(&self) -> (BigUint, BigUint) {
        match self.exponent {
            None => (BigUint::ZERO, BigUint::one()),
            Some(j) => (BigUint::one(), self.prime.pow(j)),
        }
    }
}

impl PartialOrd for PadicDistance {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for PadicDistance {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b) = self.as_ratio();
        let (c, d) = other.as_ratio();
        (a * d).cmp(&(c * b))
    }
}

impl fmt::Display for PadicDistance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.exponent {
            None => write!(f, "0"),
            Some(_) => {
                let (n, d) = self.as_ratio();
                write!(f, "{n}/{d}")
            }
        }
    }
}

impl Serialize for PadicDistance {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordering_and_display() {
        let p = Prime::new(3).unwrap();
        let zero = PadicDistance::zero(p);
        let third = PadicDistance::inverse_power(p, 1);
        let ninth = PadicDistance::inverse_power(p, 2);
        assert!(zero < ninth && ninth < third);
        assert_eq!(ninth.to_string(), "1/9");
        assert_eq!(zero.to_string(), "0");
        assert_eq!(PadicDistance::inverse_power(p, 0).to_string(), "1/1");
    }
}
