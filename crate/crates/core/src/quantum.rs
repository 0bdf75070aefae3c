//! Quantum organisms: truncated quantum Omega numbers, separable and
//! entangled mutations, and the quantum scenario runners.
//!
//! A register of `n` qubits in a separable state needs about `n` bits to
//! describe; a maximally entangled one needs about `n·2^n`. Mutations
//! inherit those scales: the `k`-th separable mutation adds `2^{-k}`, the
//! `k`-th entangled one adds `2^{-k·2^k}`. The separable regime therefore
//! coincides with the classical model and its runners delegate to it.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::One;

use crate::dyadic::SparseDyadic;
use crate::evolution::{
    attempt_exponent, exhaustive_rank, guard, run_design, run_walk, DesignTrace, EvolutionError,
    EvolutionState, Mode, Walk,
};
use crate::oracle::OmegaOracle;
use crate::prefix_code::integer_code_len_for_width;

/// Largest `N` for entangled truncations and intelligent design.
pub const ENTANGLED_MAX_N: u64 = 24;
/// Largest `N` for simulated quantum exhaustive search.
pub const Q_EXHAUSTIVE_SIMULATE_MAX_N: u64 = 4;
/// Largest `N` for the closed-form quantum exhaustive count.
pub const Q_EXHAUSTIVE_ANALYTIC_MAX_N: u64 = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum QuantumRegime {
    Separable,
    Entangled,
}

impl QuantumRegime {
    /// Bit position the `k`-th mutation writes to.
    pub fn step_exponent(self, k: u64) -> u64 {
        match self {
            Self::Separable => k,
            Self::Entangled => k << k,
        }
    }

    /// Description length of an `n`-qubit state, overheads dropped.
    pub fn complexity_model(self, n: u64) -> u64 {
        self.step_exponent(n)
    }

    fn walk(self) -> Walk {
        match self {
            Self::Separable => Walk::Classical,
            Self::Entangled => Walk::Entangled,
        }
    }
}

impl fmt::Display for QuantumRegime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Separable => "separable",
            Self::Entangled => "entangled",
        })
    }
}

impl FromStr for QuantumRegime {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "separable" | "sep" => Ok(Self::Separable),
            "entangled" | "ent" => Ok(Self::Entangled),
            _ => Err(format!("unknown regime {s:?}")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QOmegaTruncation {
    pub regime: QuantumRegime,
    pub n: u64,
    pub value: SparseDyadic,
}

/// `Σ_{1 ≤ n < N} 2^{-complexity_model(n)}`.
pub fn q_omega_truncation(regime: QuantumRegime, n: u64) -> Result<QOmegaTruncation, EvolutionError> {
    if regime == QuantumRegime::Entangled {
        guard("entangled Omega truncation", n, ENTANGLED_MAX_N)?;
    } else if n == 0 {
        return Err(EvolutionError::ZeroN);
    }
    let value = SparseDyadic::from_exponents((1..n).map(|m| regime.complexity_model(m)));
    Ok(QOmegaTruncation { regime, n, value })
}

/// Self-delimiting size of the integer `2^k` naming the `k`-th quantum
/// mutation.
pub fn q_mutation_complexity(k: u64) -> u64 {
    assert!(k >= 1, "mutation index must be >= 1");
    integer_code_len_for_width(k + 1)
}

/// `2^{-q_mutation_complexity(k)}`.
pub fn q_mutation_probability(k: u64) -> SparseDyadic {
    SparseDyadic::power(q_mutation_complexity(k))
}

/// One quantum mutation attempt.
pub fn attempt_q_mutation(
    state: &mut EvolutionState,
    k: u64,
    regime: QuantumRegime,
    oracle: &dyn OmegaOracle,
) -> Result<bool, EvolutionError> {
    assert!(k >= 1, "mutation index must be >= 1");
    attempt_exponent(state, k, regime.step_exponent(k), oracle)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QExhaustiveOutcome {
    /// Evolution time; the expected value when `analytic` is set.
    pub t: BigUint,
    pub analytic: bool,
}

/// Exhaustive search over bit strings of length up to `M = 2^N`.
///
/// Simulation enumerates candidates until the first `M` bits of `Ω` turn
/// up. Analytic mode returns the expected count `1.5·2^M` and says so.
pub fn run_q_exhaustive(
    n: u64,
    oracle: &dyn OmegaOracle,
    mode: Mode,
) -> Result<QExhaustiveOutcome, EvolutionError> {
    match mode {
        Mode::Simulate => {
            guard("simulated quantum exhaustive search", n, Q_EXHAUSTIVE_SIMULATE_MAX_N)?;
            let window = 1usize << n;
            let target = oracle.true_bits(window)?;
            Ok(QExhaustiveOutcome {
                t: BigUint::from(exhaustive_rank(&target)),
                analytic: false,
            })
        }
        Mode::Analytic => {
            guard("analytic quantum exhaustive count", n, Q_EXHAUSTIVE_ANALYTIC_MAX_N)?;
            let window = 1u64 << n;
            Ok(QExhaustiveOutcome {
                t: BigUint::from(3u32) << (window - 1),
                analytic: true,
            })
        }
        Mode::FastForward => Err(EvolutionError::Unsupported(
            "quantum exhaustive search has no fast-forward mode".into(),
        )),
    }
}

/// Mutations `k = 1, …, N` in order.
pub fn run_q_intelligent_design(
    n: u64,
    regime: QuantumRegime,
    oracle: &dyn OmegaOracle,
) -> Result<DesignTrace, EvolutionError> {
    match regime {
        QuantumRegime::Entangled => guard("entangled intelligent design", n, ENTANGLED_MAX_N)?,
        QuantumRegime::Separable if n == 0 => return Err(EvolutionError::ZeroN),
        QuantumRegime::Separable => {}
    }
    run_design(n, oracle, |k| regime.step_exponent(k))
}

/// Random quantum mutations with algorithmic probability.
pub fn run_q_cumulative(
    n: u64,
    regime: QuantumRegime,
    oracle: &dyn OmegaOracle,
    seed: u64,
    mode: Mode,
) -> Result<EvolutionState, EvolutionError> {
    run_walk(regime.walk(), n, oracle, seed, mode)
}

/// `1.5·2^M` in log2, for reporting analytic counts that overflow floats.
pub fn q_exhaustive_log2_expected(n: u64) -> f64 {
    (1u64 << n) as f64 + 1.5f64.log2()
}

/// Value after accepting entangled steps `ks`, computed directly.
pub fn entangled_value(ks: &[u64]) -> SparseDyadic {
    SparseDyadic::from_exponents(ks.iter().map(|&k| QuantumRegime::Entangled.step_exponent(k)))
}

/// `2^k` for `k ≥ 1`.
pub fn mutation_name(k: u64) -> BigUint {
    BigUint::one() << k
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::run_intelligent_design;
    use crate::oracle::RandomOmegaOracle;
    use crate::prefix_code::encode_natural;

    fn d(s: &str) -> SparseDyadic {
        s.parse().unwrap()
    }

    #[test]
    fn truncations() {
        assert_eq!(q_omega_truncation(QuantumRegime::Separable, 4).unwrap().value, d("0.{1,2,3}"));
        assert_eq!(q_omega_truncation(QuantumRegime::Entangled, 3).unwrap().value, d("0.{2,8}"));
        assert!(q_omega_truncation(QuantumRegime::Entangled, 1).unwrap().value.is_zero());
        assert!(q_omega_truncation(QuantumRegime::Entangled, 25).unwrap_err().is_guard());
        let mut prev = SparseDyadic::zero();
        for n in 2..=24 {
            let v = q_omega_truncation(QuantumRegime::Entangled, n).unwrap().value;
            assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn complexity_is_size_of_name() {
        for k in 1..=64 {
            assert_eq!(q_mutation_complexity(k), encode_natural(&mutation_name(k)).len() as u64);
        }
        assert!((1..64).all(|k| q_mutation_complexity(k) < q_mutation_complexity(k + 1)));
    }

    #[test]
    fn entangled_step_sizes() {
        assert_eq!(QuantumRegime::Entangled.step_exponent(2), 8);
        assert_eq!(QuantumRegime::Separable.step_exponent(9), 9);
    }

    #[test]
    fn separable_design_is_classical() {
        let o = RandomOmegaOracle::new(21);
        let q = run_q_intelligent_design(40, QuantumRegime::Separable, &o).unwrap();
        let c = run_intelligent_design(40, &o).unwrap();
        assert_eq!(q, c);
    }

    #[test]
    fn q_exhaustive_modes() {
        let o = RandomOmegaOracle::new(2);
        let r = run_q_exhaustive(2, &o, Mode::Simulate).unwrap();
        assert!(!r.analytic);
        assert!(r.t >= BigUint::from(16u32) && r.t <= BigUint::from(32u32));
        let a = run_q_exhaustive(6, &o, Mode::Analytic).unwrap();
        assert!(a.analytic);
        assert_eq!(a.t, BigUint::from(3u32) << 63u32);
        assert!(run_q_exhaustive(5, &o, Mode::Simulate).unwrap_err().is_guard());
    }
}
