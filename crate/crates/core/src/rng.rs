//! Deterministic randomness.
//!
//! Two flavours are used: a stateless counter-based mixer (`mix`) for
//! anything that must be index-addressable, like the bits of a stand-in
//! Omega, and a seeded ChaCha stream for sequential sampling.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::prefix_code::BitSource;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer applied to `(key, counter)`.
///
/// Pure function of its inputs; consecutive counters give independent
/// looking words. Not cryptographic.
#[inline]
pub fn mix(key: u64, counter: u64) -> u64 {
    let mut z = key
        .wrapping_add(counter.wrapping_mul(GOLDEN))
        .wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stream identifiers so one run seed can feed independent consumers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Oracle = 0x006F_6D65_6761,
    Sampler = 0x7361_6D70_6C65,
    Synthesis = 0x0073_796E_7468,
}

/// Key for stream `stream` of run seed `seed`.
pub fn stream_key(seed: u64, stream: Stream) -> u64 {
    mix(seed, stream as u64)
}

/// ChaCha8 generator for stream `stream` of run seed `seed`.
pub fn stream_rng(seed: u64, stream: Stream) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(stream_key(seed, stream))
}

/// Fair coin flips drawn 64 at a time from an RNG.
#[derive(Clone, Debug)]
pub struct Coin<R> {
    rng: R,
    word: u64,
    left: u32,
    flips: u64,
}

impl<R: RngCore> Coin<R> {
    pub fn new(rng: R) -> Self {
        Self {
            rng,
            word: 0,
            left: 0,
            flips: 0,
        }
    }

    /// Total bits handed out so far.
    pub fn flips(&self) -> u64 {
        self.flips
    }

    pub fn rng_mut(&mut self) -> &mut R {
        &mut self.rng
    }
}

impl<R: RngCore> BitSource for Coin<R> {
    #[inline]
    fn next_bit(&mut self) -> Option<bool> {
        if self.left == 0 {
            self.word = self.rng.next_u64();
            self.left = 64;
        }
        self.left -= 1;
        self.flips += 1;
        Some((self.word >> self.left) & 1 == 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mix_is_deterministic_and_spreads() {
        assert_eq!(mix(7, 3), mix(7, 3));
        assert_ne!(mix(7, 3), mix(7, 4));
        assert_ne!(mix(7, 3), mix(8, 3));
        let ones: u32 = (0..1000).map(|i| mix(1, i).count_ones()).sum();
        let mean = f64::from(ones) / 1000.0;
        assert!((mean - 32.0).abs() < 1.0, "mean popcount {mean}");
    }

    #[test]
    fn coin_is_roughly_fair() {
        let mut coin = Coin::new(stream_rng(42, Stream::Sampler));
        let heads = (0..100_000).filter(|_| coin.next_bit().unwrap()).count();
        assert!((heads as f64 - 50_000.0).abs() < 5.0 * 158.2);
        assert_eq!(coin.flips(), 100_000);
    }
}
