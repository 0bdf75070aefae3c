//! Self-delimiting (prefix-free) codes for bit strings and naturals.
//!
//! Two constructions are provided:
//!
//! * the naive code `x ↦ 0^n 1 x` with `n = |x|`, of length `2n + 1`;
//! * the efficient code, which writes `binary(n)` with the naive code and
//!   then `x` itself, for `n + 2·|binary(n)| + 1` bits.
//!
//! Naturals are coded by applying the efficient code to their binary
//! representation. `binary(0)` is the one-bit string `0`, so every natural
//! has a nonempty representation.
//!
//! Decoders pull bits on demand from a [`BitSource`] and never read past
//! the end of a codeword, which is what makes them usable on an endless
//! stream of coin flips.

use std::fmt;
use std::ops::Index;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::Zero;
use thiserror::Error;

use crate::dyadic::SparseDyadic;

/// Finite string of bits; the empty string is `Λ`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitString(Vec<bool>);

impl BitString {
    pub fn new() -> Self {
        Self(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn push(&mut self, bit: bool) {
        self.0.push(bit);
    }

    pub fn extend_from(&mut self, other: &BitString) {
        self.0.extend_from_slice(&other.0);
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        self.0.iter().copied()
    }

    pub fn concat(&self, other: &BitString) -> BitString {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        BitString(v)
    }

    pub fn is_prefix_of(&self, other: &BitString) -> bool {
        other.0.starts_with(&self.0)
    }

    pub fn count_ones(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    pub fn repeat(bit: bool, n: usize) -> Self {
        Self(vec![bit; n])
    }

    /// `binary(k)`: most-significant bit first, no leading zeros, and
    /// `binary(0) = "0"`.
    pub fn binary(k: u64) -> Self {
        if k == 0 {
            return Self(vec![false]);
        }
        let width = 64 - k.leading_zeros();
        Self((0..width).rev().map(|i| (k >> i) & 1 == 1).collect())
    }

    pub fn binary_natural(k: &BigUint) -> Self {
        if k.is_zero() {
            return Self(vec![false]);
        }
        let width = k.bits();
        Self((0..width).rev().map(|i| k.bit(i)).collect())
    }

    /// The string `1 0^k`, i.e. `binary(2^k)`.
    pub fn power_of_two(k: usize) -> Self {
        let mut v = vec![false; k + 1];
        v[0] = true;
        Self(v)
    }

    /// True for strings produced by [`BitString::binary`]: either `"0"` or
    /// a string starting with `1`.
    pub fn is_canonical_binary(&self) -> bool {
        match self.0.as_slice() {
            [] => false,
            [_] => true,
            [first, ..] => *first,
        }
    }

    /// Value of the string read as an unsigned binary numeral.
    pub fn to_natural(&self) -> BigUint {
        let mut k = BigUint::zero();
        for &b in &self.0 {
            k <<= 1u32;
            if b {
                k += 1u32;
            }
        }
        k
    }

    /// Like [`BitString::to_natural`] but `None` past 64 significant bits.
    pub fn to_u64(&self) -> Option<u64> {
        let mut k: u64 = 0;
        for &b in &self.0 {
            k = k.checked_mul(2)? | b as u64;
        }
        Some(k)
    }

    pub fn reader(&self) -> BitReader<'_> {
        BitReader { bits: self, pos: 0 }
    }
}

impl From<Vec<bool>> for BitString {
    fn from(v: Vec<bool>) -> Self {
        Self(v)
    }
}

impl FromIterator<bool> for BitString {
    fn from_iter<I: IntoIterator<Item = bool>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

impl Index<usize> for BitString {
    type Output = bool;

    fn index(&self, i: usize) -> &bool {
        &self.0[i]
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("invalid bit character {0:?}")]
pub struct ParseBitStringError(char);

/// Parses `0`/`1` characters; whitespace is ignored so `"010 11"` works.
impl FromStr for BitString {
    type Err = ParseBitStringError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(ParseBitStringError(other)),
            })
            .collect()
    }
}

/// Anything that hands out bits one at a time. `None` means exhausted.
pub trait BitSource {
    fn next_bit(&mut self) -> Option<bool>;
}

impl<S: BitSource + ?Sized> BitSource for &mut S {
    fn next_bit(&mut self) -> Option<bool> {
        (**self).next_bit()
    }
}

/// Cursor over a [`BitString`].
#[derive(Clone, Debug)]
pub struct BitReader<'a> {
    bits: &'a BitString,
    pos: usize,
}

impl BitReader<'_> {
    pub fn position(&self) -> usize {
        self.pos
    }

    pub fn remaining(&self) -> usize {
        self.bits.len() - self.pos
    }
}

impl BitSource for BitReader<'_> {
    fn next_bit(&mut self) -> Option<bool> {
        let b = self.bits.0.get(self.pos).copied()?;
        self.pos += 1;
        Some(b)
    }
}

/// Stops handing out bits after a fixed number have been read.
struct Capped<S> {
    inner: S,
    remaining: usize,
    hit: bool,
}

impl<S: BitSource> BitSource for Capped<S> {
    fn next_bit(&mut self) -> Option<bool> {
        if self.remaining == 0 {
            self.hit = true;
            return None;
        }
        self.remaining -= 1;
        self.inner.next_bit()
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DecodeError {
    #[error("bit source exhausted after {consumed} bits")]
    Exhausted { consumed: usize },
    /// A complete string was read but it is not the image of any input.
    #[error("malformed codeword ({consumed} bits read)")]
    Malformed { consumed: usize },
    #[error("decoding exceeded the cap of {cap} bits")]
    CapExceeded { cap: usize },
}

fn read_bits<S: BitSource>(
    src: &mut S,
    n: usize,
    consumed: &mut usize,
) -> Result<BitString, DecodeError> {
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let b = src.next_bit().ok_or(DecodeError::Exhausted {
            consumed: *consumed,
        })?;
        *consumed += 1;
        out.push(b);
    }
    Ok(BitString(out))
}

/// `x ↦ 0^n 1 x`.
pub fn encode_naive(x: &BitString) -> BitString {
    let mut v = vec![false; x.len()];
    v.push(true);
    v.extend_from_slice(&x.0);
    BitString(v)
}

/// Inverse of [`encode_naive`]; returns the payload and bits consumed.
pub fn decode_naive<S: BitSource>(src: &mut S) -> Result<(BitString, usize), DecodeError> {
    let mut consumed = 0usize;
    let mut n = 0usize;
    loop {
        match src.next_bit() {
            None => return Err(DecodeError::Exhausted { consumed }),
            Some(b) => {
                consumed += 1;
                if b {
                    break;
                }
                n += 1;
            }
        }
    }
    let x = read_bits(src, n, &mut consumed)?;
    Ok((x, consumed))
}

/// `x ↦ encode_naive(binary(|x|)) x`.
pub fn encode_efficient(x: &BitString) -> BitString {
    let mut out = encode_naive(&BitString::binary(x.len() as u64));
    out.extend_from(x);
    out
}

/// Reads the length header of an efficient codeword.
///
/// Returns the declared payload length and the header size. Samplers use
/// this to reject over-long codewords without pulling their payloads.
pub fn read_efficient_header<S: BitSource>(src: &mut S) -> Result<(u64, usize), DecodeError> {
    let (len_bits, consumed) = decode_naive(src)?;
    if !len_bits.is_canonical_binary() {
        return Err(DecodeError::Malformed { consumed });
    }
    let n = len_bits
        .to_u64()
        .ok_or(DecodeError::Malformed { consumed })?;
    Ok((n, consumed))
}

/// Inverse of [`encode_efficient`].
pub fn decode_efficient<S: BitSource>(src: &mut S) -> Result<(BitString, usize), DecodeError> {
    let (n, mut consumed) = read_efficient_header(src)?;
    let n = usize::try_from(n).map_err(|_| DecodeError::Malformed { consumed })?;
    let x = read_bits(src, n, &mut consumed)?;
    Ok((x, consumed))
}

/// Length of `encode_efficient(x)` for `|x| = n`.
pub fn efficient_len(n: u64) -> u64 {
    n + 2 * BitString::binary(n).len() as u64 + 1
}

/// `size(k) = 1 + ⌈log2(1 + k)⌉`.
pub fn integer_size(k: u64) -> u64 {
    1 + u64::from(64 - k.leading_zeros())
}

/// Self-delimiting code of the natural `k`.
pub fn encode_integer(k: u64) -> BitString {
    encode_efficient(&BitString::binary(k))
}

pub fn encode_natural(k: &BigUint) -> BitString {
    encode_efficient(&BitString::binary_natural(k))
}

/// Length of `encode_integer(k)` for a natural whose binary form has
/// `width` bits; lets callers size codes for `2^k` without building them.
pub fn integer_code_len_for_width(width: u64) -> u64 {
    efficient_len(width.max(1))
}

pub fn integer_code_len(k: u64) -> u64 {
    integer_code_len_for_width(BitString::binary(k).len() as u64)
}

/// Inverse of [`encode_integer`]. Payloads that are empty or carry a
/// leading zero are not images of any natural and come back `Malformed`.
pub fn decode_integer<S: BitSource>(src: &mut S) -> Result<(BigUint, usize), DecodeError> {
    let (x, consumed) = decode_efficient(src)?;
    if !x.is_canonical_binary() {
        return Err(DecodeError::Malformed { consumed });
    }
    Ok((x.to_natural(), consumed))
}

/// Bit cap for [`sample_integer`].
pub const SAMPLE_BIT_CAP: usize = 1_000_000;

/// One algorithmic-probability draw: decode a natural from fair coin flips.
///
/// The integer code is prefix-free but not complete, so a draw lands on
/// `k` with probability exactly `2^{-|encode_integer(k)|}` and on no
/// natural at all (`Ok(None)`) with the leftover Kraft mass.
pub fn sample_integer<S: BitSource>(coin: &mut S) -> Result<Option<BigUint>, DecodeError> {
    let mut capped = Capped {
        inner: coin,
        remaining: SAMPLE_BIT_CAP,
        hit: false,
    };
    match decode_integer(&mut capped) {
        Ok((k, _)) => Ok(Some(k)),
        Err(DecodeError::Malformed { .. }) => Ok(None),
        Err(_) if capped.hit => Err(DecodeError::CapExceeded {
            cap: SAMPLE_BIT_CAP,
        }),
        Err(e) => Err(e),
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("code set is not prefix-free: {prefix} is a prefix of {word}")]
pub struct NotPrefixFree {
    pub prefix: BitString,
    pub word: BitString,
}

/// A finite prefix-free set of codewords.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodeSet {
    members: Vec<BitString>,
}

impl CodeSet {
    /// Validates prefix-freeness. Duplicates are rejected, since a word is
    /// a prefix of itself.
    pub fn new(members: impl IntoIterator<Item = BitString>) -> Result<Self, NotPrefixFree> {
        let mut members: Vec<BitString> = members.into_iter().collect();
        // lexicographic order puts every extension of w directly after w
        members.sort();
        for pair in members.windows(2) {
            if pair[0].is_prefix_of(&pair[1]) {
                return Err(NotPrefixFree {
                    prefix: pair[0].clone(),
                    word: pair[1].clone(),
                });
            }
        }
        Ok(Self { members })
    }

    pub fn members(&self) -> &[BitString] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// `Σ 2^{-|c|}` over a prefix-free set; the empty word contributes 1.
pub fn kraft_sum(codes: &CodeSet) -> SparseDyadic {
    let mut total = SparseDyadic::zero();
    for c in codes.members() {
        if c.is_empty() {
            total.add_assign_dyadic(&SparseDyadic::one());
        } else {
            total.add_power(c.len() as u64);
        }
    }
    total
}
