//! Schmidt ranks across bipartitions.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{NetError, StateVector};

/// Singular values above this count towards the rank.
const RANK_THRESHOLD: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Classification {
    Product,
    /// Every cut has the largest rank its dimensions allow.
    MaxRankAllCuts,
    Entangled,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EntanglementReport {
    /// `(qubits on side A, rank)` for each cut.
    pub ranks: Vec<(Vec<usize>, usize)>,
    pub classification: Classification,
}

/// Schmidt rank for the cut putting `side_a` against the other qubits.
pub fn schmidt_rank(s: &StateVector, side_a: &[usize]) -> Result<usize, NetError> {
    let n = s.n();
    let mut a: Vec<usize> = side_a.to_vec();
    a.sort_unstable();
    a.dedup();
    if a.is_empty() || a.len() >= n || a.iter().any(|&q| q >= n) {
        return Err(NetError::BadCut);
    }
    let b: Vec<usize> = (0..n).filter(|q| !a.contains(q)).collect();
    let bit = |i: usize, q: usize| (i >> (n - 1 - q)) & 1;
    let index = |i: usize, side: &[usize]| side.iter().fold(0, |acc, &q| (acc << 1) | bit(i, q));
    let mut m = DMatrix::<Complex64>::zeros(1 << a.len(), 1 << b.len());
    for (i, amp) in s.amplitudes().iter().enumerate() {
        m[(index(i, &a), index(i, &b))] = *amp;
    }
    let sv = m.singular_values();
    Ok(sv.iter().filter(|&&x| x > RANK_THRESHOLD).count())
}

/// One representative per unordered bipartition: the sides containing
/// qubit 0.
pub fn all_cuts(n: usize) -> Vec<Vec<usize>> {
    (1..(1usize << n) - 1)
        .filter(|m| m & 1 == 1)
        .map(|m| (0..n).filter(|q| (m >> q) & 1 == 1).collect())
        .collect()
}

pub fn classify_entanglement(s: &StateVector) -> Result<EntanglementReport, NetError> {
    let n = s.n();
    let mut ranks = Vec::new();
    for cut in all_cuts(n) {
        let r = schmidt_rank(s, &cut)?;
        ranks.push((cut, r));
    }
    let classification = if ranks.iter().all(|(_, r)| *r == 1) {
        Classification::Product
    } else if ranks
        .iter()
        .all(|(cut, r)| *r == 1 << cut.len().min(n - cut.len()))
    {
        Classification::MaxRankAllCuts
    } else {
        Classification::Entangled
    };
    Ok(EntanglementReport {
        ranks,
        classification,
    })
}

/// `log2` of the Schmidt rank; the Schmidt measure for two qubits.
pub fn schmidt_measure(s: &StateVector) -> Result<f64, NetError> {
    if s.n() != 2 {
        return Err(NetError::QubitCount(s.n()));
    }
    Ok((schmidt_rank(s, &[0])? as f64).log2())
}
