//! One entry point for every (scenario, organism model) pair.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigUint;

use super::{
    guard, run_cumulative, run_exhaustive, run_intelligent_design, EvolutionError, Mode, Scenario,
    CUMULATIVE_FAST_FORWARD_MAX_N, CUMULATIVE_SIMULATE_MAX_N, ENTANGLED_FAST_FORWARD_MAX_N,
    ENTANGLED_SIMULATE_MAX_N, EXHAUSTIVE_MAX_N,
};
use crate::oracle::{AnyOracle, EnumeratedOmegaOracle, RandomOmegaOracle};
use crate::quantum::{
    run_q_cumulative, run_q_exhaustive, run_q_intelligent_design, QuantumRegime, ENTANGLED_MAX_N,
    Q_EXHAUSTIVE_ANALYTIC_MAX_N, Q_EXHAUSTIVE_SIMULATE_MAX_N,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OrganismModel {
    Classical,
    QSeparable,
    QEntangled,
}

impl OrganismModel {
    pub fn regime(self) -> Option<QuantumRegime> {
        match self {
            Self::Classical => None,
            Self::QSeparable => Some(QuantumRegime::Separable),
            Self::QEntangled => Some(QuantumRegime::Entangled),
        }
    }

    /// Column value for run traces.
    pub fn regime_name(self) -> &'static str {
        match self {
            Self::Classical => "classical",
            Self::QSeparable => "separable",
            Self::QEntangled => "entangled",
        }
    }
}

impl fmt::Display for OrganismModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Classical => "classical",
            Self::QSeparable => "q-sep",
            Self::QEntangled => "q-ent",
        })
    }
}

impl FromStr for OrganismModel {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "classical" => Ok(Self::Classical),
            "q-sep" | "separable" => Ok(Self::QSeparable),
            "q-ent" | "entangled" => Ok(Self::QEntangled),
            _ => Err(format!("unknown model {s:?}")),
        }
    }
}

/// Where `Ω` comes from.
#[derive(Clone, Debug)]
pub enum OracleSpec {
    /// A fresh keyed random real per run seed.
    Random,
    /// The toy machine's bracketed halting probability, shared by all runs.
    Enumerated(Arc<EnumeratedOmegaOracle>),
}

impl OracleSpec {
    pub fn oracle_for(&self, seed: u64) -> AnyOracle {
        match self {
            Self::Random => AnyOracle::Random(RandomOmegaOracle::new(seed)),
            Self::Enumerated(o) => AnyOracle::Enumerated(Arc::clone(o)),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ScenarioSpec {
    pub scenario: Scenario,
    pub model: OrganismModel,
    pub mode: Mode,
    pub oracle: OracleSpec,
}

impl ScenarioSpec {
    pub fn new(scenario: Scenario, model: OrganismModel, mode: Mode) -> Self {
        Self {
            scenario,
            model,
            mode,
            oracle: OracleSpec::Random,
        }
    }

    /// Checks that the mode makes sense for the scenario.
    pub fn validate(&self) -> Result<(), EvolutionError> {
        let ok = match (self.scenario, self.model, self.mode) {
            (Scenario::Cumulative, _, Mode::Simulate | Mode::FastForward) => true,
            (Scenario::IntelligentDesign, _, Mode::Simulate) => true,
            (Scenario::Exhaustive, OrganismModel::QEntangled, Mode::Simulate | Mode::Analytic) => true,
            (Scenario::Exhaustive, _, Mode::Simulate) => true,
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(EvolutionError::Unsupported(format!(
                "mode {} is not available for {} evolution of {} organisms",
                self.mode, self.scenario, self.model
            )))
        }
    }

    /// Checks mode and size limits for a run at `n` without running it.
    pub fn check(&self, n: u64) -> Result<(), EvolutionError> {
        self.validate()?;
        let (what, limit) = match (self.scenario, self.model, self.mode) {
            (Scenario::Exhaustive, OrganismModel::QEntangled, Mode::Analytic) => {
                ("analytic quantum exhaustive count", Q_EXHAUSTIVE_ANALYTIC_MAX_N)
            }
            (Scenario::Exhaustive, OrganismModel::QEntangled, _) => {
                ("simulated quantum exhaustive search", Q_EXHAUSTIVE_SIMULATE_MAX_N)
            }
            (Scenario::Exhaustive, _, _) => ("exhaustive search", EXHAUSTIVE_MAX_N),
            (Scenario::IntelligentDesign, OrganismModel::QEntangled, _) => {
                ("entangled intelligent design", ENTANGLED_MAX_N)
            }
            (Scenario::IntelligentDesign, _, _) => ("intelligent design", u64::MAX),
            (Scenario::Cumulative, OrganismModel::QEntangled, Mode::Simulate) => {
                ("step-by-step cumulative evolution", ENTANGLED_SIMULATE_MAX_N)
            }
            (Scenario::Cumulative, OrganismModel::QEntangled, _) => {
                ("fast-forwarded cumulative evolution", ENTANGLED_FAST_FORWARD_MAX_N)
            }
            (Scenario::Cumulative, _, Mode::Simulate) => {
                ("step-by-step cumulative evolution", CUMULATIVE_SIMULATE_MAX_N)
            }
            (Scenario::Cumulative, _, _) => {
                ("fast-forwarded cumulative evolution", CUMULATIVE_FAST_FORWARD_MAX_N)
            }
        };
        guard(what, n, limit)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunOutcome {
    /// Evolution time `T`.
    pub t: BigUint,
    pub accepted: u64,
    /// `t` is a closed-form expectation rather than a measurement.
    pub analytic: bool,
}

/// Runs one scenario at size `n` with run seed `seed`.
///
/// Separable quantum organisms evolve exactly like classical ones, and
/// their exhaustive search is the classical one; entangled exhaustive
/// search scans windows of `2^N` bits.
pub fn run_once(spec: &ScenarioSpec, n: u64, seed: u64) -> Result<RunOutcome, EvolutionError> {
    spec.validate()?;
    let oracle = spec.oracle.oracle_for(seed);
    let measured = |t: u64, accepted: u64| RunOutcome {
        t: BigUint::from(t),
        accepted,
        analytic: false,
    };
    match (spec.scenario, spec.model.regime()) {
        (Scenario::Exhaustive, Some(QuantumRegime::Entangled)) => {
            let r = run_q_exhaustive(n, &oracle, spec.mode)?;
            Ok(RunOutcome {
                t: r.t,
                accepted: 1,
                analytic: r.analytic,
            })
        }
        (Scenario::Exhaustive, _) => Ok(measured(run_exhaustive(n, &oracle)?, 1)),
        (Scenario::IntelligentDesign, None) => {
            let s = run_intelligent_design(n, &oracle)?.state;
            Ok(measured(s.attempts, s.accepted))
        }
        (Scenario::IntelligentDesign, Some(r)) => {
            let s = run_q_intelligent_design(n, r, &oracle)?.state;
            Ok(measured(s.attempts, s.accepted))
        }
        (Scenario::Cumulative, None) => {
            let s = run_cumulative(n, &oracle, seed, spec.mode)?;
            Ok(measured(s.attempts, s.accepted))
        }
        (Scenario::Cumulative, Some(r)) => {
            let s = run_q_cumulative(n, r, &oracle, seed, spec.mode)?;
            Ok(measured(s.attempts, s.accepted))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn id_is_exact() {
        let spec = ScenarioSpec::new(Scenario::IntelligentDesign, OrganismModel::Classical, Mode::Simulate);
        assert_eq!(run_once(&spec, 32, 7).unwrap().t, BigUint::from(32u32));
    }

    #[test]
    fn invalid_modes_rejected() {
        let spec = ScenarioSpec::new(Scenario::IntelligentDesign, OrganismModel::Classical, Mode::FastForward);
        assert!(run_once(&spec, 3, 1).is_err());
        let spec = ScenarioSpec::new(Scenario::Exhaustive, OrganismModel::Classical, Mode::Analytic);
        assert!(spec.validate().is_err());
    }

    #[test]
    fn checks_match_runs() {
        let spec = ScenarioSpec::new(Scenario::Cumulative, OrganismModel::QEntangled, Mode::FastForward);
        assert!(spec.check(22).is_ok());
        assert!(spec.check(23).unwrap_err().is_guard());
        let spec = ScenarioSpec::new(Scenario::Exhaustive, OrganismModel::Classical, Mode::Simulate);
        assert!(spec.check(23).unwrap_err().is_guard());
        assert!(run_once(&spec, 23, 1).unwrap_err().is_guard());
    }

    #[test]
    fn analytic_flagged() {
        let spec = ScenarioSpec::new(Scenario::Exhaustive, OrganismModel::QEntangled, Mode::Analytic);
        let r = run_once(&spec, 5, 1).unwrap();
        assert!(r.analytic);
        assert_eq!(r.t, BigUint::from(3u32) << 31u32);
    }
}
