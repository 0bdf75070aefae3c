//! Breadth-first search for shortest circuits.
//!
//! Layer `L` holds every state first reached by an `L`-gate circuit,
//! each with the lexicographically smallest such circuit. States equal up
//! to a global phase are merged, so a layer only keeps genuinely new
//! states. The first state in a layer that is close enough to the target
//! gives a shortest circuit, and among those the lexicographically
//! smallest.

use std::collections::HashSet;
use std::hash::{DefaultHasher, Hash, Hasher};

use num_complex::Complex64;
use rayon::prelude::*;

use super::{encode_circuit, fidelity, gate_alphabet, Circuit, Op, StateVector};

pub const DEFAULT_EPSILON: f64 = 0.01;

/// Amplitude grid used to recognise repeated states.
const QUANTUM: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SynthesisConfig {
    pub n: usize,
    pub epsilon: f64,
    pub max_gates: usize,
}

impl SynthesisConfig {
    /// Depth cap by qubit count: 10 up to two qubits, 8 for three, 6 for
    /// four.
    pub fn default_max_gates(n: usize) -> usize {
        match n {
            0..=2 => 10,
            3 => 8,
            _ => 6,
        }
    }

    pub fn new(n: usize, epsilon: f64) -> Self {
        Self {
            n,
            epsilon,
            max_gates: Self::default_max_gates(n),
        }
    }
}

/// 128-bit fingerprint of a state's ray.
fn ray_key(s: &StateVector) -> u128 {
    let amps = s.amplitudes();
    let pivot = amps
        .iter()
        .find(|a| a.norm() > 1e-6)
        .copied()
        .unwrap_or(Complex64::new(1.0, 0.0));
    let phase = pivot.conj() / pivot.norm();
    let mut h1 = DefaultHasher::new();
    let mut h2 = DefaultHasher::new();
    0xA5u8.hash(&mut h2);
    for a in amps {
        let z = a * phase;
        let q = ((z.re / QUANTUM).round() as i64, (z.im / QUANTUM).round() as i64);
        q.hash(&mut h1);
        q.hash(&mut h2);
    }
    (u128::from(h1.finish()) << 64) | u128::from(h2.finish())
}

struct Node {
    parent: usize,
    op: Op,
}

/// Shared search driver. `hit` marks states that end the search; the
/// returned index (into `nodes`) is the first hit in BFS order.
fn search(
    n: usize,
    max_gates: usize,
    hit: impl Fn(&StateVector) -> bool + Sync,
    mut keep: impl FnMut(&StateVector),
) -> (Vec<Node>, Option<usize>) {
    let alphabet = gate_alphabet(n);
    let root = StateVector::zero(n).expect("qubit count checked by caller");
    let mut nodes = vec![Node {
        parent: usize::MAX,
        op: Op::h(0),
    }];
    if hit(&root) {
        return (nodes, Some(0));
    }
    let mut seen: HashSet<u128> = HashSet::new();
    seen.insert(ray_key(&root));
    keep(&root);
    let mut frontier: Vec<(usize, StateVector)> = vec![(0, root)];
    for _ in 0..max_gates {
        let children: Vec<(usize, Op, StateVector, u128, bool)> = frontier
            .par_iter()
            .flat_map_iter(|(idx, s)| {
                alphabet.iter().map(|&op| {
                    let mut c = s.clone();
                    c.apply(op);
                    let key = ray_key(&c);
                    let h = hit(&c);
                    (*idx, op, c, key, h)
                })
            })
            .collect();
        let mut next = Vec::new();
        for (parent, op, state, key, h) in children {
            if !seen.insert(key) {
                continue;
            }
            let idx = nodes.len();
            nodes.push(Node { parent, op });
            if h {
                return (nodes, Some(idx));
            }
            keep(&state);
            next.push((idx, state));
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    (nodes, None)
}

fn trace(n: usize, nodes: &[Node], mut idx: usize) -> Circuit {
    let mut ops = Vec::new();
    while idx != 0 {
        ops.push(nodes[idx].op);
        idx = nodes[idx].parent;
    }
    ops.reverse();
    Circuit { n, ops }
}

/// A shortest circuit reaching fidelity `1 - ε` with `target`, the
/// lexicographically smallest among ties. `None` past `max_gates`.
pub fn synthesize(target: &StateVector, cfg: &SynthesisConfig) -> Option<Circuit> {
    if target.n() != cfg.n {
        return None;
    }
    let bar = 1.0 - cfg.epsilon;
    let hit = |s: &StateVector| fidelity(s, target).is_ok_and(|f| f >= bar);
    let (nodes, found) = search(cfg.n, cfg.max_gates, hit, |_| {});
    found.map(|i| trace(cfg.n, &nodes, i))
}

/// `|encode_circuit(synthesize(target))|`, an upper bound on the state's
/// network complexity.
pub fn h_net_upper(target: &StateVector, cfg: &SynthesisConfig) -> Option<usize> {
    synthesize(target, cfg).map(|c| encode_circuit(&c).len())
}

/// Every distinct state reachable within `max_gates`, in search order,
/// for answering many synthesis queries with one search.
pub struct Catalog {
    n: usize,
    nodes: Vec<Node>,
    states: Vec<StateVector>,
}

impl Catalog {
    pub fn build(n: usize, max_gates: usize) -> Self {
        let mut states = Vec::new();
        let (nodes, _) = search(n, max_gates, |_| false, |s| states.push(s.clone()));
        Self { n, nodes, states }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Same answer as [`synthesize`] with this catalog's depth cap.
    pub fn find(&self, target: &StateVector, epsilon: f64) -> Option<Circuit> {
        if target.n() != self.n {
            return None;
        }
        let bar = 1.0 - epsilon;
        self.states
            .par_iter()
            .position_first(|s| fidelity(s, target).is_ok_and(|f| f >= bar))
            .map(|i| trace(self.n, &self.nodes, i))
    }
}
