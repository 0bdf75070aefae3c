//! Organisms as lower bounds on `Ω` and the mutation-selection dynamics
//! that improve them.
//!
//! An organism carries the first `N` bits of its current lower bound. A
//! mutation `k` proposes adding `2^{-k}`; the oracle keeps it when the sum
//! is still strictly below `Ω`. Three scenarios differ in how mutations
//! are chosen: all candidates in turn, the optimal order, or at random with
//! algorithmic probability.

mod cumulative;
pub mod sampler;
mod scenario;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::dyadic::SparseDyadic;
use crate::oracle::{OmegaOracle, OracleError, Verdict};
use crate::prefix_code::{BitSource, BitString, DecodeError};

pub use cumulative::{
    expected_wait, run_walk, Walk, ENTANGLED_FAST_FORWARD_MAX_N, ENTANGLED_SIMULATE_MAX_N,
};
pub use sampler::{MutationSampler, SamplerKind};
pub use scenario::{run_once, OracleSpec, OrganismModel, RunOutcome, ScenarioSpec};

/// Largest `N` for exhaustive search.
pub const EXHAUSTIVE_MAX_N: u64 = 22;
/// Largest `N` for step-by-step cumulative runs.
pub const CUMULATIVE_SIMULATE_MAX_N: u64 = 512;
/// Largest `N` for fast-forwarded cumulative runs.
pub const CUMULATIVE_FAST_FORWARD_MAX_N: u64 = 4096;
/// Attempt ceiling for step-by-step runs.
pub const ATTEMPT_LIMIT: u64 = 1_000_000_000;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum EvolutionError {
    #[error("{what} requires N <= {limit}, got {n}")]
    Guard {
        what: &'static str,
        n: u64,
        limit: u64,
    },
    #[error("N must be at least 1")]
    ZeroN,
    #[error("oracle could not decide a comparison after {attempts} attempts")]
    OracleUnknown { attempts: u64 },
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("mutation sampler failed: {0}")]
    Sampler(#[from] DecodeError),
    #[error("no admissible mutation can be accepted")]
    Stuck,
    #[error("run exceeded {limit} attempts")]
    AttemptLimit { limit: u64 },
    #[error("bit index {index} outside 1..={len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("malformed organism encoding")]
    MalformedOrganism,
    #[error("{0}")]
    Unsupported(String),
}

impl EvolutionError {
    pub fn is_guard(&self) -> bool {
        matches!(self, Self::Guard { .. } | Self::ZeroN)
    }

    pub fn is_unknown(&self) -> bool {
        matches!(self, Self::OracleUnknown { .. })
    }
}

pub(crate) fn guard(what: &'static str, n: u64, limit: u64) -> Result<(), EvolutionError> {
    if n == 0 {
        return Err(EvolutionError::ZeroN);
    }
    if n > limit {
        return Err(EvolutionError::Guard { what, n, limit });
    }
    Ok(())
}

/// Flips bit `n0` (1-based).
pub fn mutate_point(x: &BitString, n0: usize) -> Result<BitString, EvolutionError> {
    if n0 == 0 || n0 > x.len() {
        return Err(EvolutionError::IndexOutOfRange {
            index: n0,
            len: x.len(),
        });
    }
    Ok(x.iter()
        .enumerate()
        .map(|(i, b)| b ^ (i + 1 == n0))
        .collect())
}

/// Flips every bit.
pub fn mutate_bitwise(x: &BitString) -> BitString {
    x.iter().map(|b| !b).collect()
}

/// The fitness-reading routine every organism carries. Its workings are
/// outside the model, so it is a fixed opaque byte.
pub const HEADER: u8 = 0b1011_0010;

/// `header ∥ 1^N 0 ∥ payload`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Organism {
    pub header: u8,
    pub payload: BitString,
}

impl Organism {
    pub fn new(payload: BitString) -> Self {
        Self {
            header: HEADER,
            payload,
        }
    }

    /// The organism holding the first `n` bits of the state's value.
    pub fn from_state(state: &EvolutionState, n: usize) -> Self {
        Self::new(state.value.prefix_bits(n))
    }

    pub fn encode(&self) -> BitString {
        let mut out = BitString::new();
        for i in (0..8).rev() {
            out.push((self.header >> i) & 1 == 1);
        }
        for _ in 0..self.payload.len() {
            out.push(true);
        }
        out.push(false);
        out.extend_from(&self.payload);
        out
    }

    /// Reads an organism off a bit source.
    pub fn decode<S: BitSource>(src: &mut S) -> Result<Self, EvolutionError> {
        let mut next = || src.next_bit().ok_or(EvolutionError::MalformedOrganism);
        let mut header = 0u8;
        for _ in 0..8 {
            header = (header << 1) | next()? as u8;
        }
        let mut n = 0usize;
        while next()? {
            n += 1;
        }
        let payload = (0..n).map(|_| next()).collect::<Result<BitString, _>>()?;
        Ok(Self { header, payload })
    }
}

/// Current lower bound on `Ω` and bookkeeping.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EvolutionState {
    pub value: SparseDyadic,
    /// `T`, every proposal made so far.
    pub attempts: u64,
    pub accepted: u64,
    /// Index of the last mutation proposed.
    pub step: u64,
}

impl EvolutionState {
    pub fn new() -> Self {
        Self::default()
    }
}

fn decide(oracle: &dyn OmegaOracle, v: &SparseDyadic, attempts: u64) -> Result<bool, EvolutionError> {
    match oracle.query(v)? {
        Verdict::Below => Ok(true),
        Verdict::NotBelow => Ok(false),
        Verdict::Unknown => Err(EvolutionError::OracleUnknown { attempts }),
    }
}

/// Proposes `value + 2^{-exponent}` and keeps it iff it stays below `Ω`.
pub(crate) fn attempt_exponent(
    state: &mut EvolutionState,
    k: u64,
    exponent: u64,
    oracle: &dyn OmegaOracle,
) -> Result<bool, EvolutionError> {
    state.attempts += 1;
    state.step = k;
    let proposal = state.value.plus_power(exponent);
    if decide(oracle, &proposal, state.attempts)? {
        state.value = proposal;
        state.accepted += 1;
        Ok(true)
    } else {
        Ok(false)
    }
}

/// One classical mutation attempt with step `2^{-k}`.
pub fn attempt_mutation(
    state: &mut EvolutionState,
    k: u64,
    oracle: &dyn OmegaOracle,
) -> Result<bool, EvolutionError> {
    assert!(k >= 1, "mutation index must be >= 1");
    attempt_exponent(state, k, k, oracle)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scenario {
    Exhaustive,
    IntelligentDesign,
    Cumulative,
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Exhaustive => "exhaustive",
            Self::IntelligentDesign => "id",
            Self::Cumulative => "cumulative",
        })
    }
}

impl FromStr for Scenario {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exhaustive" => Ok(Self::Exhaustive),
            "id" | "intelligent-design" => Ok(Self::IntelligentDesign),
            "cumulative" => Ok(Self::Cumulative),
            _ => Err(format!("unknown scenario {s:?}")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum Mode {
    #[default]
    Simulate,
    FastForward,
    /// Closed-form count where simulation is out of reach.
    Analytic,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Simulate => "simulate",
            Self::FastForward => "fast-forward",
            Self::Analytic => "analytic",
        })
    }
}

impl FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "simulate" => Ok(Self::Simulate),
            "fast-forward" | "fast_forward" | "ff" => Ok(Self::FastForward),
            "analytic" => Ok(Self::Analytic),
            _ => Err(format!("unknown mode {s:?}")),
        }
    }
}

/// Enumerates payloads in length-then-lexicographic order, starting with
/// the empty string, until one equals the first `n` bits of `Ω`.
pub fn run_exhaustive(n: u64, oracle: &dyn OmegaOracle) -> Result<u64, EvolutionError> {
    guard("exhaustive search", n, EXHAUSTIVE_MAX_N)?;
    let target = oracle.true_bits(n as usize)?;
    Ok(exhaustive_rank(&target))
}

/// Position of `target` in the length-then-lexicographic enumeration,
/// counting candidates one by one.
pub(crate) fn exhaustive_rank(target: &BitString) -> u64 {
    let n = target.len() as u32;
    let want = target.iter().fold(0u64, |acc, b| (acc << 1) | b as u64);
    let mut attempts = 0u64;
    for len in 0..=n {
        for x in 0..(1u64 << len) {
            attempts += 1;
            if len == n && x == want {
                return attempts;
            }
        }
    }
    unreachable!("the target is among the length-{n} candidates")
}

/// One step of an intelligent-design run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DesignStep {
    pub k: u64,
    /// Bit position the proposal touched.
    pub exponent: u64,
    pub accepted: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DesignTrace {
    pub steps: Vec<DesignStep>,
    pub state: EvolutionState,
}

pub(crate) fn run_design(
    n: u64,
    oracle: &dyn OmegaOracle,
    exponent: impl Fn(u64) -> u64,
) -> Result<DesignTrace, EvolutionError> {
    let mut state = EvolutionState::new();
    let mut steps = Vec::with_capacity(n as usize);
    for k in 1..=n {
        let e = exponent(k);
        let accepted = attempt_exponent(&mut state, k, e, oracle)?;
        steps.push(DesignStep {
            k,
            exponent: e,
            accepted,
        });
    }
    Ok(DesignTrace { steps, state })
}

/// Mutations `k = 1, …, N` in order: each settles bit `k` of `Ω`.
pub fn run_intelligent_design(n: u64, oracle: &dyn OmegaOracle) -> Result<DesignTrace, EvolutionError> {
    if n == 0 {
        return Err(EvolutionError::ZeroN);
    }
    run_design(n, oracle, |k| k)
}

/// Random mutations drawn with algorithmic probability until the organism
/// holds the first `N` bits of `Ω`.
pub fn run_cumulative(
    n: u64,
    oracle: &dyn OmegaOracle,
    seed: u64,
    mode: Mode,
) -> Result<EvolutionState, EvolutionError> {
    run_walk(Walk::Classical, n, oracle, seed, mode)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::RandomOmegaOracle;

    fn b(s: &str) -> BitString {
        s.parse().unwrap()
    }

    #[test]
    fn point_mutation() {
        assert_eq!(mutate_point(&b("0000"), 2).unwrap(), b("0100"));
        assert_eq!(mutate_point(&b("1"), 1).unwrap(), b("0"));
        let x = b("10110");
        assert_eq!(mutate_point(&mutate_point(&x, 4).unwrap(), 4).unwrap(), x);
        assert!(mutate_point(&x, 0).is_err());
        assert!(mutate_point(&x, 6).is_err());
    }

    #[test]
    fn bitwise_mutation() {
        assert_eq!(mutate_bitwise(&b("0101")), b("1010"));
        let x = b("1100101");
        assert_eq!(mutate_bitwise(&mutate_bitwise(&x)), x);
        let pointwise = (1..=x.len()).fold(x.clone(), |y, i| mutate_point(&y, i).unwrap());
        assert_eq!(pointwise, mutate_bitwise(&x));
    }

    #[test]
    fn organism_layout() {
        let o = Organism::new(b("101"));
        let enc = o.encode().to_string();
        assert!(enc.ends_with("1110101"));
        assert_eq!(enc.len(), 8 + 4 + 3);
        assert!(Organism::new(BitString::new()).encode().to_string().ends_with('0'));
        assert_eq!(Organism::decode(&mut o.encode().reader()).unwrap(), o);
    }

    #[test]
    fn first_mutation_matches_first_bit() {
        for seed in 0..40 {
            let o = RandomOmegaOracle::new(seed);
            let mut s = EvolutionState::new();
            let acc = attempt_mutation(&mut s, 1, &o).unwrap();
            assert_eq!(acc, o.bit(1));
            assert_eq!(s.attempts, 1);
            if acc {
                assert_eq!(s.value, SparseDyadic::power(1));
                // the same bit cannot be added twice
                assert!(!attempt_mutation(&mut s, 1, &o).unwrap());
                assert_eq!(s.attempts, 2);
            }
        }
    }

    #[test]
    fn exhaustive_small() {
        assert_eq!(exhaustive_rank(&BitString::new()), 1);
        assert_eq!(exhaustive_rank(&b("0")), 2);
        assert_eq!(exhaustive_rank(&b("1")), 3);
        assert_eq!(exhaustive_rank(&b("00")), 4);
        assert_eq!(exhaustive_rank(&b("111")), 15);
    }

    #[test]
    fn exhaustive_guard() {
        let o = RandomOmegaOracle::new(1);
        assert!(run_exhaustive(23, &o).unwrap_err().is_guard());
        assert!(run_exhaustive(0, &o).unwrap_err().is_guard());
    }

    #[test]
    fn design_nails_prefix() {
        let o = RandomOmegaOracle::new(11);
        let t = run_intelligent_design(64, &o).unwrap();
        assert_eq!(t.state.attempts, 64);
        let truth = o.true_bits(64).unwrap();
        assert_eq!(t.state.value.prefix_bits(64), truth);
        assert_eq!(t.state.accepted as usize, truth.count_ones());
    }
}
