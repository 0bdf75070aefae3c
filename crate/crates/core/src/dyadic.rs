//! Exact sparse dyadic rationals.
//!
//! A [`SparseDyadic`] is a non-negative number of the form
//! `integer_part + Σ 2^{-e}` over a finite set of distinct fractional
//! exponents `e ≥ 1`. Only the set bits are stored, so a value like
//! `2^{-2} + 2^{-20971520}` costs two words rather than a 20-million-bit
//! buffer. The model only ever adds powers of two and compares, so that is
//! all this type offers.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

use crate::prefix_code::BitString;

/// Exact non-negative dyadic rational with a sparse fractional part.
///
/// `exponents` is kept strictly increasing with every entry `≥ 1`; carries
/// are always resolved, so each value has exactly one representation and
/// the derived `PartialEq` is value equality.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct SparseDyadic {
    integer_part: BigUint,
    exponents: Vec<u64>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseDyadicError {
    #[error("expected `<int>.{{e1,e2,...}}`, got {0:?}")]
    Syntax(String),
    #[error("fraction exponents must be >= 1")]
    ZeroExponent,
}

impl SparseDyadic {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::from_integer(1u32)
    }

    pub fn from_integer(k: impl Into<BigUint>) -> Self {
        Self {
            integer_part: k.into(),
            exponents: Vec::new(),
        }
    }

    /// The single power `2^{-e}`.
    ///
    /// # Panics
    /// If `e == 0`; use [`SparseDyadic::one`] for that.
    pub fn power(e: u64) -> Self {
        assert!(e >= 1, "fraction exponent must be >= 1");
        Self {
            integer_part: BigUint::zero(),
            exponents: vec![e],
        }
    }

    /// Sum of `2^{-e}` over the given exponents. Repeats are allowed and
    /// carry like any other addition.
    pub fn from_exponents<I: IntoIterator<Item = u64>>(exponents: I) -> Self {
        let mut v = Self::zero();
        for e in exponents {
            v.add_power(e);
        }
        v
    }

    pub fn integer_part(&self) -> &BigUint {
        &self.integer_part
    }

    /// Set fractional bit positions, strictly increasing.
    pub fn exponents(&self) -> &[u64] {
        &self.exponents
    }

    pub fn is_zero(&self) -> bool {
        self.integer_part.is_zero() && self.exponents.is_empty()
    }

    /// Position of the lowest-order set fractional bit.
    pub fn last_exponent(&self) -> Option<u64> {
        self.exponents.last().copied()
    }

    /// In-place `self += 2^{-e}`, resolving the carry chain.
    ///
    /// Two copies of `2^{-e}` merge into `2^{-(e-1)}`; a carry out of
    /// `2^{-1}` increments the integer part.
    pub fn add_power(&mut self, e: u64) {
        assert!(e >= 1, "fraction exponent must be >= 1");
        let mut e = e;
        loop {
            match self.exponents.binary_search(&e) {
                Err(pos) => {
                    self.exponents.insert(pos, e);
                    return;
                }
                Ok(pos) => {
                    self.exponents.remove(pos);
                    if e == 1 {
                        self.integer_part += 1u32;
                        return;
                    }
                    e -= 1;
                }
            }
        }
    }

    /// `self + 2^{-e}` as a new value.
    pub fn plus_power(&self, e: u64) -> Self {
        let mut v = self.clone();
        v.add_power(e);
        v
    }

    /// In-place exact addition of another dyadic.
    pub fn add_assign_dyadic(&mut self, other: &SparseDyadic) {
        self.integer_part += &other.integer_part;
        for &e in other.exponents.iter().rev() {
            self.add_power(e);
        }
    }

    /// Bit `i ≥ 1` of the fractional expansion.
    pub fn bit_at(&self, i: u64) -> bool {
        i >= 1 && self.exponents.binary_search(&i).is_ok()
    }

    /// Fractional bits `1..=n` as a string.
    pub fn prefix_bits(&self, n: usize) -> BitString {
        let mut bits = vec![false; n];
        for &e in &self.exponents {
            if e > n as u64 {
                break;
            }
            bits[(e - 1) as usize] = true;
        }
        BitString::from(bits)
    }

    /// Nearest `f64`; exact whenever the value fits in 53 significant bits.
    pub fn to_f64(&self) -> f64 {
        let mut x = self.integer_part.to_f64().unwrap_or(f64::INFINITY);
        for &e in &self.exponents {
            if e > 1100 {
                break;
            }
            x += (-(e as f64)).exp2();
        }
        x
    }
}

impl Ord for SparseDyadic {
    /// Runs in time linear in the stored exponent count, whatever the
    /// exponent magnitudes.
    fn cmp(&self, other: &Self) -> Ordering {
        match self.integer_part.cmp(&other.integer_part) {
            Ordering::Equal => {}
            ord => return ord,
        }
        for (a, b) in self.exponents.iter().zip(&other.exponents) {
            match a.cmp(b) {
                Ordering::Equal => continue,
                // a has a bit at a higher-order position than b's next bit
                Ordering::Less => return Ordering::Greater,
                Ordering::Greater => return Ordering::Less,
            }
        }
        self.exponents.len().cmp(&other.exponents.len())
    }
}

impl PartialOrd for SparseDyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Canonical log form, e.g. `0.{1,3}` for 5/8.
impl fmt::Display for SparseDyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{{", self.integer_part)?;
        for (i, e) in self.exponents.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{e}")?;
        }
        f.write_str("}")
    }
}

impl FromStr for SparseDyadic {
    type Err = ParseDyadicError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let syntax = || ParseDyadicError::Syntax(s.to_string());
        let (int, frac) = s.trim().split_once('.').ok_or_else(syntax)?;
        let integer_part: BigUint = int.parse().map_err(|_| syntax())?;
        let inner = frac
            .strip_prefix('{')
            .and_then(|r| r.strip_suffix('}'))
            .ok_or_else(syntax)?;
        let mut v = Self::from_integer(integer_part);
        for tok in inner.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let e: u64 = tok.parse().map_err(|_| syntax())?;
            if e == 0 {
                return Err(ParseDyadicError::ZeroExponent);
            }
            v.add_power(e);
        }
        Ok(v)
    }
}
