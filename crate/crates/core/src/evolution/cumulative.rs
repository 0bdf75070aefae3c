//! Random-walk evolution, step by step or fast-forwarded.
//!
//! Whether `value + 2^{-e} < Ω` is monotone in `e`, so at any moment the
//! acceptable mutations form an up-set `{k ≥ k*}`, with `k*` only ever
//! moving up as the value grows. Fast-forwarding uses this to draw the
//! geometric wait until the next acceptance and then the accepted mutation
//! itself, skipping the rejected proposals in between.

use rand_distr::{Distribution, Geometric};

use super::sampler::MutationSampler;
use super::{attempt_exponent, decide, guard, EvolutionError, EvolutionState, Mode};
use super::{ATTEMPT_LIMIT, CUMULATIVE_FAST_FORWARD_MAX_N, CUMULATIVE_SIMULATE_MAX_N};
use crate::oracle::OmegaOracle;
use crate::prefix_code::BitString;
use crate::rng::{stream_rng, Coin, Stream};

/// Largest `N` for step-by-step entangled walks.
pub const ENTANGLED_SIMULATE_MAX_N: u64 = 14;
/// Largest `N` for fast-forwarded entangled walks.
pub const ENTANGLED_FAST_FORWARD_MAX_N: u64 = 22;

/// Kind of random walk.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Walk {
    /// Mutation `k` adds `2^{-k}`; done when the first `N` bits match `Ω`.
    Classical,
    /// Mutation `k` adds `2^{-k·2^k}` at most once; done when no mutation
    /// `k ≤ N` that the oracle would accept is still missing.
    Entangled,
}

impl Walk {
    pub fn exponent(self, k: u64) -> u64 {
        match self {
            Self::Classical => k,
            Self::Entangled => k << k,
        }
    }

    fn sampler(self, n: u64) -> MutationSampler {
        match self {
            Self::Classical => MutationSampler::classical(n),
            Self::Entangled => MutationSampler::entangled(),
        }
    }

    fn limits(self) -> (u64, u64) {
        match self {
            Self::Classical => (CUMULATIVE_SIMULATE_MAX_N, CUMULATIVE_FAST_FORWARD_MAX_N),
            Self::Entangled => (ENTANGLED_SIMULATE_MAX_N, ENTANGLED_FAST_FORWARD_MAX_N),
        }
    }
}

struct Walker<'a> {
    walk: Walk,
    n: u64,
    oracle: &'a dyn OmegaOracle,
    sampler: MutationSampler,
    target: Option<BitString>,
    /// Smallest `k` whose step the oracle would still accept.
    threshold: u64,
    state: EvolutionState,
}

impl<'a> Walker<'a> {
    fn new(walk: Walk, n: u64, oracle: &'a dyn OmegaOracle) -> Result<Self, EvolutionError> {
        let target = match walk {
            Walk::Classical => Some(oracle.true_bits(n as usize)?),
            Walk::Entangled => None,
        };
        Ok(Self {
            walk,
            n,
            oracle,
            sampler: walk.sampler(n),
            target,
            threshold: 1,
            state: EvolutionState::new(),
        })
    }

    fn applied(&self, k: u64) -> bool {
        self.walk == Walk::Entangled && self.state.value.bit_at(self.walk.exponent(k))
    }

    /// Moves `threshold` up to the smallest acceptable step.
    fn settle_threshold(&mut self) -> Result<(), EvolutionError> {
        while self.threshold <= self.sampler.k_max() {
            let proposal = self.state.value.plus_power(self.walk.exponent(self.threshold));
            if decide(self.oracle, &proposal, self.state.attempts)? {
                break;
            }
            self.threshold += 1;
        }
        Ok(())
    }

    fn done(&mut self) -> Result<bool, EvolutionError> {
        match &self.target {
            Some(t) => Ok(self.state.value.prefix_bits(self.n as usize) == *t),
            None => {
                self.settle_threshold()?;
                Ok((self.threshold..=self.n).all(|k| self.applied(k)))
            }
        }
    }

    fn simulate(&mut self, seed: u64) -> Result<(), EvolutionError> {
        let mut coin = Coin::new(stream_rng(seed, Stream::Sampler));
        if self.done()? {
            return Ok(());
        }
        loop {
            if self.state.attempts >= ATTEMPT_LIMIT {
                return Err(EvolutionError::AttemptLimit {
                    limit: ATTEMPT_LIMIT,
                });
            }
            let k = self.sampler.draw(&mut coin)?;
            if self.applied(k) {
                self.state.attempts += 1;
                self.state.step = k;
                continue;
            }
            let e = self.walk.exponent(k);
            if attempt_exponent(&mut self.state, k, e, self.oracle)? && self.done()? {
                return Ok(());
            }
        }
    }

    fn fast_forward(&mut self, seed: u64) -> Result<(), EvolutionError> {
        let mut rng = stream_rng(seed, Stream::Sampler);
        let k_max = self.sampler.k_max();
        while !self.done()? {
            self.settle_threshold()?;
            let open = |k: &u64| !self.applied(*k);
            let mass: f64 = (self.threshold..=k_max)
                .filter(open)
                .map(|k| self.sampler.weight(k))
                .sum();
            let p = mass / self.sampler.total_weight();
            if !(p > 0.0) {
                return Err(EvolutionError::Stuck);
            }
            let failures = Geometric::new(p.min(1.0))
                .expect("probability in (0, 1]")
                .sample(&mut rng);
            let k = self
                .sampler
                .draw_within(&mut rng, (self.threshold..=k_max).filter(open), mass);
            self.state.attempts = self.state.attempts.saturating_add(failures).saturating_add(1);
            self.state.step = k;
            self.state.value.add_power(self.walk.exponent(k));
            self.state.accepted += 1;
        }
        Ok(())
    }
}

/// Runs a cumulative walk to completion and returns the final state;
/// `attempts` is the evolution time `T`.
pub fn run_walk(
    walk: Walk,
    n: u64,
    oracle: &dyn OmegaOracle,
    seed: u64,
    mode: Mode,
) -> Result<EvolutionState, EvolutionError> {
    let (sim_max, ff_max) = walk.limits();
    let mut w = match mode {
        Mode::Simulate => {
            guard("step-by-step cumulative evolution", n, sim_max)?;
            Walker::new(walk, n, oracle)?
        }
        Mode::FastForward => {
            guard("fast-forwarded cumulative evolution", n, ff_max)?;
            Walker::new(walk, n, oracle)?
        }
        Mode::Analytic => {
            return Err(EvolutionError::Unsupported(
                "cumulative evolution has no analytic mode".into(),
            ))
        }
    };
    match mode {
        Mode::Simulate => w.simulate(seed)?,
        _ => w.fast_forward(seed)?,
    }
    Ok(w.state)
}

/// Mean waiting time until the first draw lands in `ks`, in attempts.
pub fn expected_wait(sampler: &MutationSampler, ks: impl Iterator<Item = u64>) -> f64 {
    let mass: f64 = ks.map(|k| sampler.weight(k)).sum();
    sampler.total_weight() / mass
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::RandomOmegaOracle;

    #[test]
    fn classical_runs_reach_target() {
        for seed in 0..10 {
            let o = RandomOmegaOracle::new(seed);
            for mode in [Mode::Simulate, Mode::FastForward] {
                let s = run_walk(Walk::Classical, 12, &o, seed, mode).unwrap();
                assert_eq!(s.value.prefix_bits(12), o.true_bits(12).unwrap());
                assert!(s.attempts >= s.accepted);
            }
        }
    }

    #[test]
    fn entangled_runs_apply_each_step_once() {
        let o = RandomOmegaOracle::new(4);
        for mode in [Mode::Simulate, Mode::FastForward] {
            let s = run_walk(Walk::Entangled, 6, &o, 9, mode).unwrap();
            assert_eq!(s.value.exponents().len() as u64, s.accepted);
            for e in s.value.exponents() {
                assert!((1..=58u64).any(|k| k << k == *e));
            }
        }
    }

    #[test]
    fn guards() {
        let o = RandomOmegaOracle::new(0);
        assert!(run_walk(Walk::Classical, 513, &o, 0, Mode::Simulate).unwrap_err().is_guard());
        assert!(run_walk(Walk::Entangled, 15, &o, 0, Mode::Simulate).unwrap_err().is_guard());
        assert!(run_walk(Walk::Entangled, 23, &o, 0, Mode::FastForward).unwrap_err().is_guard());
    }
}
