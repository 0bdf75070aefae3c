//! Fitness oracles deciding `v < Ω` for a fixed stand-in real `Ω`.
//!
//! [`RandomOmegaOracle`] reads the bits of a keyed pseudo-random real on
//! demand, so comparisons at bit positions in the tens of millions cost a
//! handful of word evaluations. [`EnumeratedOmegaOracle`] uses the actual
//! halting probability of the toy machine, bracketed by an enumeration, and
//! answers only what the bracket certifies.

use std::sync::Arc;

use num_traits::Zero;
use thiserror::Error;

use crate::dyadic::SparseDyadic;
use crate::prefix_code::BitString;
use crate::rng::{mix, stream_key, Stream};
use crate::toy_machine::Domain;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Verdict {
    Below,
    NotBelow,
    Unknown,
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("no set bit of Omega within {cap} positions after bit {from}")]
    ScanCapExceeded { from: u64, cap: u64 },
    #[error("only {certified} bits of Omega are certified, {requested} requested")]
    Uncertified { certified: usize, requested: usize },
}

pub trait OmegaOracle: Send + Sync {
    /// Whether `v < Ω`.
    fn query(&self, v: &SparseDyadic) -> Result<Verdict, OracleError>;

    /// The first `n` fractional bits of `Ω`.
    fn true_bits(&self, n: usize) -> Result<BitString, OracleError>;
}

/// Positions scanned past a query's last set bit before giving up.
pub const SCAN_CAP: u64 = 1_000_000;

/// `Ω = 0.ω₁ω₂…` with `ω` read from keyed 64-bit words, most significant
/// bit first: bits `64w+1 ..= 64w+64` are the word `mix(key, w)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RandomOmegaOracle {
    seed: u64,
    key: u64,
}

impl RandomOmegaOracle {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            key: stream_key(seed, Stream::Oracle),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    fn word(&self, w: u64) -> u64 {
        mix(self.key, w)
    }

    /// `ω(i)` for `i ≥ 1`.
    pub fn bit(&self, i: u64) -> bool {
        assert!(i >= 1, "Omega bits are indexed from 1");
        let i = i - 1;
        (self.word(i / 64) >> (63 - i % 64)) & 1 == 1
    }

    /// First word index `≥ from` holding a set bit, if within `limit` words.
    fn next_nonzero_word(&self, from: u64, limit: u64) -> Option<u64> {
        (from..from.saturating_add(limit)).find(|&w| self.word(w) != 0)
    }
}

impl OmegaOracle for RandomOmegaOracle {
    fn query(&self, v: &SparseDyadic) -> Result<Verdict, OracleError> {
        if !v.integer_part().is_zero() {
            return Ok(Verdict::NotBelow);
        }
        let exps = v.exponents();
        let mut next_word = 0u64;
        let mut i = 0;
        while i < exps.len() {
            let w = (exps[i] - 1) / 64;
            // words where v is all zeros
            if w > next_word && self.next_nonzero_word(next_word, w - next_word).is_some() {
                return Ok(Verdict::Below);
            }
            let mut vword = 0u64;
            while i < exps.len() && (exps[i] - 1) / 64 == w {
                vword |= 1 << (63 - (exps[i] - 1) % 64);
                i += 1;
            }
            let oword = self.word(w);
            if vword != oword {
                return Ok(if vword < oword {
                    Verdict::Below
                } else {
                    Verdict::NotBelow
                });
            }
            next_word = w + 1;
        }
        // every bit through v's last word agrees; Ω > v iff a later bit is set
        let last = v.last_exponent().unwrap_or(0);
        let limit = SCAN_CAP.div_ceil(64);
        match self.next_nonzero_word(next_word, limit) {
            Some(_) => Ok(Verdict::Below),
            None => Err(OracleError::ScanCapExceeded {
                from: last,
                cap: SCAN_CAP,
            }),
        }
    }

    fn true_bits(&self, n: usize) -> Result<BitString, OracleError> {
        Ok((1..=n as u64).map(|i| self.bit(i)).collect())
    }
}

/// The toy machine's own halting probability, known to lie in
/// `[lower, upper]` where `lower` sums the halting programs found and
/// `upper` adds every branch that was cut or censored without a
/// divergence proof.
#[derive(Clone, Debug)]
pub struct EnumeratedOmegaOracle {
    lower: SparseDyadic,
    upper: SparseDyadic,
}

impl EnumeratedOmegaOracle {
    pub fn from_domain(domain: &Domain) -> Self {
        let lower = domain.omega_lower_bound();
        let mut upper = lower.clone();
        upper.add_assign_dyadic(&domain.unresolved_mass());
        Self { lower, upper }
    }

    pub fn new(max_len: usize, step_budget: u64) -> Self {
        Self::from_domain(&Domain::enumerate(max_len, step_budget))
    }

    pub fn lower(&self) -> &SparseDyadic {
        &self.lower
    }

    pub fn upper(&self) -> &SparseDyadic {
        &self.upper
    }

    /// Number of leading bits shared by every real in the bracket.
    pub fn certified_bits(&self) -> usize {
        if self.upper >= SparseDyadic::one() {
            return 0;
        }
        if self.lower == self.upper {
            return usize::MAX;
        }
        let mut n = 0usize;
        let limit = self.upper.last_exponent().unwrap_or(0).max(self.lower.last_exponent().unwrap_or(0));
        while (n as u64) < limit && self.lower.bit_at(n as u64 + 1) == self.upper.bit_at(n as u64 + 1) {
            n += 1;
        }
        n
    }
}

impl OmegaOracle for EnumeratedOmegaOracle {
    fn query(&self, v: &SparseDyadic) -> Result<Verdict, OracleError> {
        Ok(if *v < self.lower {
            Verdict::Below
        } else if *v >= self.upper {
            Verdict::NotBelow
        } else {
            Verdict::Unknown
        })
    }

    fn true_bits(&self, n: usize) -> Result<BitString, OracleError> {
        let certified = self.certified_bits();
        if n > certified {
            return Err(OracleError::Uncertified {
                certified,
                requested: n,
            });
        }
        Ok(self.lower.prefix_bits(n))
    }
}

/// Oracle backend chosen at run time.
#[derive(Clone, Debug)]
pub enum AnyOracle {
    Random(RandomOmegaOracle),
    Enumerated(Arc<EnumeratedOmegaOracle>),
}

impl OmegaOracle for AnyOracle {
    fn query(&self, v: &SparseDyadic) -> Result<Verdict, OracleError> {
        match self {
            Self::Random(o) => o.query(v),
            Self::Enumerated(o) => o.query(v),
        }
    }

    fn true_bits(&self, n: usize) -> Result<BitString, OracleError> {
        match self {
            Self::Random(o) => o.true_bits(n),
            Self::Enumerated(o) => o.true_bits(n),
        }
    }
}
