//! Algorithmic-probability mutation samplers.
//!
//! Nature names a mutation by a natural number drawn from fair coin flips
//! through the self-delimiting integer code, so mutation `k` turns up with
//! probability proportional to `2^{-|code|}`. Draws that land outside the
//! admissible range are discarded and redrawn; they are not attempts.

use rand::Rng;

use crate::prefix_code::{
    integer_code_len, integer_code_len_for_width, read_efficient_header, BitSource, DecodeError,
};

/// Largest entangled mutation index; keeps `k·2^k` inside `u64`.
pub const ENTANGLED_K_MAX: u64 = 58;

/// Headroom past `N` for classical proposals.
pub const CLASSICAL_K_SLACK: u64 = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SamplerKind {
    /// Draws the integer `k`.
    Classical,
    /// Draws the integer `2^k`, the name of the `k`-th entangled mutation.
    Entangled,
}

#[derive(Clone, Debug)]
pub struct MutationSampler {
    kind: SamplerKind,
    k_max: u64,
    /// `weights[k-1] = 2^{-|code|}` for `k = 1..=k_max`.
    weights: Vec<f64>,
    total: f64,
}

impl MutationSampler {
    pub fn new(kind: SamplerKind, k_max: u64) -> Self {
        assert!(k_max >= 1);
        if kind == SamplerKind::Entangled {
            assert!(k_max <= ENTANGLED_K_MAX, "entangled k_max above {ENTANGLED_K_MAX}");
        }
        let weights: Vec<f64> = (1..=k_max)
            .map(|k| (-(code_len(kind, k) as f64)).exp2())
            .collect();
        let total = weights.iter().sum();
        Self {
            kind,
            k_max,
            weights,
            total,
        }
    }

    /// Sampler for a classical run targeting `n` bits.
    pub fn classical(n: u64) -> Self {
        Self::new(SamplerKind::Classical, n + CLASSICAL_K_SLACK)
    }

    pub fn entangled() -> Self {
        Self::new(SamplerKind::Entangled, ENTANGLED_K_MAX)
    }

    pub fn kind(&self) -> SamplerKind {
        self.kind
    }

    pub fn k_max(&self) -> u64 {
        self.k_max
    }

    /// Unnormalized weight `2^{-|code|}` of mutation `k`.
    pub fn weight(&self, k: u64) -> f64 {
        self.weights[(k - 1) as usize]
    }

    /// Probability of `k` given an admissible draw.
    pub fn probability(&self, k: u64) -> f64 {
        self.weight(k) / self.total
    }

    /// Kraft mass of the admissible range.
    pub fn total_weight(&self) -> f64 {
        self.total
    }

    /// Reads one codeword. `None` when it names nothing admissible.
    ///
    /// The header is checked before the payload is read so over-long names
    /// are discarded after a handful of flips.
    fn draw_once<S: BitSource>(&self, coin: &mut S) -> Result<Option<u64>, DecodeError> {
        let (width, mut consumed) = match read_efficient_header(coin) {
            Ok(h) => h,
            Err(DecodeError::Malformed { .. }) => return Ok(None),
            Err(e) => return Err(e),
        };
        let max_width = match self.kind {
            SamplerKind::Classical => 64 - u64::from(self.k_max.leading_zeros()),
            SamplerKind::Entangled => self.k_max + 1,
        };
        if width == 0 || width > max_width {
            return Ok(None);
        }
        let mut payload = 0u64;
        let mut canonical = true;
        for i in 0..width {
            let bit = coin.next_bit().ok_or(DecodeError::Exhausted { consumed })?;
            consumed += 1;
            match self.kind {
                SamplerKind::Classical => payload = (payload << 1) | bit as u64,
                // 2^k is a one followed by k zeros
                SamplerKind::Entangled => canonical &= bit == (i == 0),
            }
        }
        let k = match self.kind {
            SamplerKind::Classical => payload,
            SamplerKind::Entangled if canonical => width - 1,
            SamplerKind::Entangled => return Ok(None),
        };
        if k == 0 || k > self.k_max {
            return Ok(None);
        }
        // a leading zero is not an integer codeword
        if self.kind == SamplerKind::Classical && payload >> (width - 1) == 0 {
            return Ok(None);
        }
        Ok(Some(k))
    }

    /// Draws an admissible mutation index from fair coin flips.
    pub fn draw<S: BitSource>(&self, coin: &mut S) -> Result<u64, DecodeError> {
        loop {
            if let Some(k) = self.draw_once(coin)? {
                return Ok(k);
            }
        }
    }

    /// Draws from the restriction of the distribution to `ks`, whose
    /// weights sum to `mass`.
    pub fn draw_within<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        ks: impl Iterator<Item = u64> + Clone,
        mass: f64,
    ) -> u64 {
        let mut u = rng.random::<f64>() * mass;
        let mut last = 0;
        for k in ks {
            last = k;
            u -= self.weight(k);
            if u < 0.0 {
                return k;
            }
        }
        last
    }
}

fn code_len(kind: SamplerKind, k: u64) -> u64 {
    match kind {
        SamplerKind::Classical => integer_code_len(k),
        SamplerKind::Entangled => integer_code_len_for_width(k + 1),
    }
}
