//! Network complexity of small quantum states.
//!
//! The classical description of a state is the shortest gate circuit over
//! `{H, T, CNOT}` that prepares it from `|0…0⟩` to within a fixed
//! precision, written out as a self-delimiting bit string. For a handful
//! of qubits the shortest circuit can be found by exhaustive search.

mod schmidt;
mod synthesis;

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::prefix_code::{decode_efficient, encode_efficient, BitSource, BitString, DecodeError};

pub use schmidt::{
    all_cuts, classify_entanglement, schmidt_measure, schmidt_rank, Classification,
    EntanglementReport,
};
pub use synthesis::{h_net_upper, synthesize, Catalog, SynthesisConfig, DEFAULT_EPSILON};

pub const MAX_QUBITS: usize = 4;

/// Norm tolerance for a valid state.
pub const NORM_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum NetError {
    #[error("qubit count must be in 1..={MAX_QUBITS}, got {0}")]
    QubitCount(usize),
    #[error("amplitude count {0} is not 2^n for a supported n")]
    Dimension(usize),
    #[error("state norm is {0}, not 1")]
    NotNormalized(f64),
    #[error("dimension mismatch: {0} vs {1} qubits")]
    Mismatch(usize, usize),
    #[error("gate {0} addresses a qubit outside 0..{1}")]
    QubitIndex(Op, usize),
    #[error("CNOT control equals target in {0}")]
    SameQubit(Op),
    #[error("bipartition must be a nonempty proper subset of the qubits")]
    BadCut,
    #[error("malformed circuit encoding")]
    MalformedEncoding,
    #[error(transparent)]
    Decode(#[from] DecodeError),
}

/// Pure state of `n` qubits. Qubit `q` is bit `n-1-q` of the basis index,
/// so qubit 0 is the most significant.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    pub fn new(amps: Vec<Complex64>) -> Result<Self, NetError> {
        let n = qubits_for(amps.len())?;
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(NetError::NotNormalized(norm.sqrt()));
        }
        Ok(Self { n, amps })
    }

    /// Scales `amps` to unit norm.
    pub fn normalized(mut amps: Vec<Complex64>) -> Result<Self, NetError> {
        let n = qubits_for(amps.len())?;
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) {
            return Err(NetError::NotNormalized(norm));
        }
        for a in &mut amps {
            *a /= norm;
        }
        Ok(Self { n, amps })
    }

    /// `|0…0⟩`.
    pub fn zero(n: usize) -> Result<Self, NetError> {
        if n == 0 || n > MAX_QUBITS {
            return Err(NetError::QubitCount(n));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(Self { n, amps })
    }

    /// `(|0…0⟩ + |1…1⟩)/√2`; the Bell state for two qubits.
    pub fn ghz(n: usize) -> Result<Self, NetError> {
        let mut s = Self::zero(n)?;
        s.amps[0] = Complex64::new(FRAC_1_SQRT_2, 0.0);
        let last = s.amps.len() - 1;
        s.amps[last] = Complex64::new(FRAC_1_SQRT_2, 0.0);
        Ok(s)
    }

    /// Haar-random pure state.
    pub fn random_haar<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Self, NetError> {
        if n == 0 || n > MAX_QUBITS {
            return Err(NetError::QubitCount(n));
        }
        let amps = (0..1usize << n)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        Self::normalized(amps)
    }

    /// Tensor product of independent Haar-random qubits.
    pub fn random_product<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Self, NetError> {
        let mut s = Self::random_haar(1, rng)?;
        for _ in 1..n {
            s = s.tensor(&Self::random_haar(1, rng)?)?;
        }
        Ok(s)
    }

    /// `self ⊗ other`, with `self` on the leading qubits.
    pub fn tensor(&self, other: &StateVector) -> Result<Self, NetError> {
        let n = self.n + other.n;
        if n > MAX_QUBITS {
            return Err(NetError::QubitCount(n));
        }
        let amps = self
            .amps
            .iter()
            .flat_map(|a| other.amps.iter().map(move |b| a * b))
            .collect();
        Ok(Self { n, amps })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    fn mask(&self, q: usize) -> usize {
        1 << (self.n - 1 - q)
    }

    pub(crate) fn apply(&mut self, op: Op) {
        match op.gate {
            Gate::H => {
                let m = self.mask(op.target);
                for i in 0..self.amps.len() {
                    if i & m == 0 {
                        let (a, b) = (self.amps[i], self.amps[i | m]);
                        self.amps[i] = (a + b) * FRAC_1_SQRT_2;
                        self.amps[i | m] = (a - b) * FRAC_1_SQRT_2;
                    }
                }
            }
            Gate::T => {
                let m = self.mask(op.target);
                let phase = Complex64::new(FRAC_1_SQRT_2, FRAC_1_SQRT_2);
                for (i, a) in self.amps.iter_mut().enumerate() {
                    if i & m != 0 {
                        *a *= phase;
                    }
                }
            }
            Gate::Cnot => {
                let c = self.mask(op.control.expect("CNOT has a control"));
                let t = self.mask(op.target);
                for i in 0..self.amps.len() {
                    if i & c != 0 && i & t == 0 {
                        self.amps.swap(i, i | t);
                    }
                }
            }
        }
    }
}

fn qubits_for(len: usize) -> Result<usize, NetError> {
    if !len.is_power_of_two() || !(2..=1 << MAX_QUBITS).contains(&len) {
        return Err(NetError::Dimension(len));
    }
    Ok(len.trailing_zeros() as usize)
}

/// `|⟨a|b⟩|`.
pub fn fidelity(a: &StateVector, b: &StateVector) -> Result<f64, NetError> {
    if a.n != b.n {
        return Err(NetError::Mismatch(a.n, b.n));
    }
    Ok(inner(a, b).norm())
}

pub(crate) fn inner(a: &StateVector, b: &StateVector) -> Complex64 {
    a.amps.iter().zip(&b.amps).map(|(x, y)| x.conj() * y).sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Gate {
    H,
    T,
    Cnot,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Op {
    pub gate: Gate,
    pub target: usize,
    pub control: Option<usize>,
}

impl Op {
    pub fn h(target: usize) -> Self {
        Self {
            gate: Gate::H,
            target,
            control: None,
        }
    }

    pub fn t(target: usize) -> Self {
        Self {
            gate: Gate::T,
            target,
            control: None,
        }
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        Self {
            gate: Gate::Cnot,
            target,
            control: Some(control),
        }
    }

    fn validate(self, n: usize) -> Result<(), NetError> {
        let in_range = self.target < n && self.control.is_none_or(|c| c < n);
        if !in_range {
            return Err(NetError::QubitIndex(self, n));
        }
        match (self.gate, self.control) {
            (Gate::Cnot, Some(c)) if c == self.target => Err(NetError::SameQubit(self)),
            (Gate::Cnot, Some(_)) | (Gate::H | Gate::T, None) => Ok(()),
            _ => Err(NetError::QubitIndex(self, n)),
        }
    }
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.gate, self.control) {
            (Gate::Cnot, Some(c)) => write!(f, "CNOT q{c}->q{}", self.target),
            (g, _) => write!(f, "{g:?} q{}", self.target),
        }
    }
}

/// Every gate on `n` qubits in canonical order: `H < T < CNOT`, then by
/// target, then by control.
pub fn gate_alphabet(n: usize) -> Vec<Op> {
    let mut ops: Vec<Op> = (0..n).map(Op::h).collect();
    ops.extend((0..n).map(Op::t));
    for t in 0..n {
        for c in (0..n).filter(|&c| c != t) {
            ops.push(Op::cnot(c, t));
        }
    }
    ops
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Circuit {
    pub n: usize,
    pub ops: Vec<Op>,
}

impl Circuit {
    pub fn new(n: usize, ops: Vec<Op>) -> Result<Self, NetError> {
        if n == 0 || n > MAX_QUBITS {
            return Err(NetError::QubitCount(n));
        }
        for &op in &ops {
            op.validate(n)?;
        }
        Ok(Self { n, ops })
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.ops.iter().map(Op::to_string).collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

/// Runs the circuit on `|0…0⟩`.
pub fn apply_circuit(c: &Circuit) -> Result<StateVector, NetError> {
    let mut s = StateVector::zero(c.n)?;
    for &op in &c.ops {
        op.validate(c.n)?;
        s.apply(op);
    }
    Ok(s)
}

/// Bits per qubit index.
pub fn index_width(n: usize) -> usize {
    (usize::BITS - (n.max(1) - 1).leading_zeros()) as usize
}

fn push_index(out: &mut BitString, q: usize, width: usize) {
    for i in (0..width).rev() {
        out.push((q >> i) & 1 == 1);
    }
}

/// Gate body (opcode `00` H, `01` T, `10` CNOT, then the target index,
/// then for CNOT the control index) wrapped in the self-delimiting code.
pub fn encode_circuit(c: &Circuit) -> BitString {
    let w = index_width(c.n);
    let mut body = BitString::new();
    for op in &c.ops {
        let (hi, lo) = match op.gate {
            Gate::H => (false, false),
            Gate::T => (false, true),
            Gate::Cnot => (true, false),
        };
        body.push(hi);
        body.push(lo);
        push_index(&mut body, op.target, w);
        if let Some(ctl) = op.control {
            push_index(&mut body, ctl, w);
        }
    }
    encode_efficient(&body)
}

pub fn decode_circuit(bits: &BitString, n: usize) -> Result<Circuit, NetError> {
    let mut r = bits.reader();
    let (body, used) = decode_efficient(&mut r)?;
    if used != bits.len() {
        return Err(NetError::MalformedEncoding);
    }
    let w = index_width(n);
    let mut r = body.reader();
    let mut ops = Vec::new();
    while r.remaining() > 0 {
        let mut read = |len: usize| -> Result<usize, NetError> {
            (0..len).try_fold(0usize, |acc, _| {
                let bit = r.next_bit().ok_or(NetError::MalformedEncoding)?;
                Ok((acc << 1) | bit as usize)
            })
        };
        let op = match read(2)? {
            0 => Op::h(read(w)?),
            1 => Op::t(read(w)?),
            2 => {
                let t = read(w)?;
                Op::cnot(read(w)?, t)
            }
            _ => return Err(NetError::MalformedEncoding),
        };
        ops.push(op);
    }
    Circuit::new(n, ops)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn basic_circuits() {
        let s = apply_circuit(&Circuit::new(2, vec![]).unwrap()).unwrap();
        assert_eq!(s, StateVector::zero(2).unwrap());
        let s = apply_circuit(&Circuit::new(1, vec![Op::h(0)]).unwrap()).unwrap();
        assert_abs_diff_eq!(s.amplitudes()[0].re, FRAC_1_SQRT_2, epsilon = 1e-15);
        assert_abs_diff_eq!(s.amplitudes()[1].re, FRAC_1_SQRT_2, epsilon = 1e-15);
        let bell = apply_circuit(&Circuit::new(2, vec![Op::h(0), Op::cnot(0, 1)]).unwrap()).unwrap();
        let want = StateVector::ghz(2).unwrap();
        assert_abs_diff_eq!(fidelity(&bell, &want).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn fidelity_examples() {
        let z = StateVector::zero(2).unwrap();
        let bell = StateVector::ghz(2).unwrap();
        assert_abs_diff_eq!(fidelity(&z, &z).unwrap(), 1.0);
        let one = apply_circuit(&Circuit::new(2, vec![Op::h(0), Op::t(0), Op::t(0), Op::t(0), Op::t(0), Op::h(0)]).unwrap()).unwrap();
        assert_abs_diff_eq!(fidelity(&z, &one).unwrap(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fidelity(&bell, &z).unwrap(), FRAC_1_SQRT_2, epsilon = 1e-15);
        assert!(fidelity(&z, &StateVector::zero(1).unwrap()).is_err());
    }

    #[test]
    fn validation() {
        assert!(Circuit::new(2, vec![Op::h(2)]).is_err());
        assert!(Circuit::new(2, vec![Op::cnot(1, 1)]).is_err());
        assert!(Circuit::new(5, vec![]).is_err());
        assert!(StateVector::new(vec![Complex64::new(1.0, 0.0); 2]).is_err());
    }

    #[test]
    fn encoding_examples() {
        let empty = Circuit::new(2, vec![]).unwrap();
        assert_eq!(encode_circuit(&empty).to_string(), "010");
        let h = Circuit::new(2, vec![Op::h(0)]).unwrap();
        assert_eq!(encode_circuit(&h).to_string(), "00111000");
        let c = Circuit::new(3, vec![Op::t(2), Op::cnot(0, 1)]).unwrap();
        assert_eq!(decode_circuit(&encode_circuit(&c), 3).unwrap(), c);
    }

    #[test]
    fn alphabet_order() {
        let a = gate_alphabet(2);
        assert_eq!(a, vec![Op::h(0), Op::h(1), Op::t(0), Op::t(1), Op::cnot(1, 0), Op::cnot(0, 1)]);
        assert_eq!(gate_alphabet(4).len(), 4 + 4 + 12);
    }
}
