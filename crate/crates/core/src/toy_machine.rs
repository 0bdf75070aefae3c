//! A small register machine whose programs are self-delimiting by
//! execution.
//!
//! Instructions are 3-bit opcodes read on demand, most significant bit
//! first. Registers `A` and `B` are unbounded naturals starting at zero.
//!
//! | opcode | instruction | effect |
//! |--------|-------------|--------|
//! | `000`  | HALT        | stop, output `A` |
//! | `001`  | INC A       | `A += 1` |
//! | `010`  | INC B       | `B += 1` |
//! | `011`  | DBL A       | `A *= 2` |
//! | `100`  | ADD         | `A += B` |
//! | `101`  | MOVE        | `B = A` |
//! | `110`  | LOOP-BACK j | next 3 bits are `j`; if `B > 0`, `B -= 1` and jump back `j` instructions (clamped at the first one), else fall through |
//! | `111`  | SWAP        | swap `A` and `B` |
//!
//! A fresh opcode is requested only when the instruction pointer first
//! reaches a position past the code read so far, so a program is exactly
//! the bit sequence consumed before HALT and the set of halting programs is
//! prefix-free. Every executed instruction costs one step; step budgets
//! make all the quantities here computable lower bounds.

use std::io::{self, Write};

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::dyadic::SparseDyadic;
use crate::prefix_code::{BitSource, BitString, CodeSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Instruction {
    Halt,
    IncA,
    IncB,
    DoubleA,
    Add,
    Move,
    LoopBack(u8),
    Swap,
}

const LOOP_OPCODE: u8 = 0b110;

impl Instruction {
    fn from_opcode(op: u8) -> Self {
        match op & 0b111 {
            0b000 => Self::Halt,
            0b001 => Self::IncA,
            0b010 => Self::IncB,
            0b011 => Self::DoubleA,
            0b100 => Self::Add,
            0b101 => Self::Move,
            0b111 => Self::Swap,
            _ => unreachable!("LOOP-BACK needs its operand"),
        }
    }

    fn opcode(self) -> u8 {
        match self {
            Self::Halt => 0b000,
            Self::IncA => 0b001,
            Self::IncB => 0b010,
            Self::DoubleA => 0b011,
            Self::Add => 0b100,
            Self::Move => 0b101,
            Self::LoopBack(_) => LOOP_OPCODE,
            Self::Swap => 0b111,
        }
    }
}

fn push_chunk(out: &mut BitString, chunk: u8) {
    for i in (0..3).rev() {
        out.push((chunk >> i) & 1 == 1);
    }
}

/// Bit encoding of an instruction list.
pub fn assemble(program: &[Instruction]) -> BitString {
    let mut out = BitString::new();
    for &ins in program {
        push_chunk(&mut out, ins.opcode());
        if let Instruction::LoopBack(j) = ins {
            push_chunk(&mut out, j & 0b111);
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RunStatus {
    Halted(BigUint),
    BudgetExceeded,
    NeedsMoreBits,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunResult {
    pub status: RunStatus,
    pub bits_consumed: usize,
    pub steps_used: u64,
}

/// What a machine is waiting on after [`Machine::poll`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Poll {
    Halted,
    BudgetExceeded,
    /// Needs the next 3 bits (an opcode or a LOOP-BACK operand).
    NeedsChunk,
}

/// Resumable machine state.
#[derive(Clone, Debug, Default)]
pub struct Machine {
    code: Vec<Instruction>,
    pending_loop: bool,
    ip: usize,
    a: BigUint,
    b: BigUint,
    steps: u64,
    bits_consumed: usize,
}

impl Machine {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn output(&self) -> &BigUint {
        &self.a
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn bits_consumed(&self) -> usize {
        self.bits_consumed
    }

    /// Supplies the 3 bits the machine asked for.
    pub fn feed_chunk(&mut self, chunk: u8) {
        let chunk = chunk & 0b111;
        if self.pending_loop {
            self.code.push(Instruction::LoopBack(chunk));
            self.pending_loop = false;
        } else if chunk == LOOP_OPCODE {
            self.pending_loop = true;
        } else {
            self.code.push(Instruction::from_opcode(chunk));
        }
        self.bits_consumed += 3;
    }

    /// Executes one instruction. `false` when nothing was executed because
    /// the next instruction has not been read yet.
    fn exec(&mut self) -> Option<bool> {
        let ins = *self.code.get(self.ip)?;
        self.steps += 1;
        match ins {
            Instruction::Halt => return Some(true),
            Instruction::IncA => self.a += 1u32,
            Instruction::IncB => self.b += 1u32,
            Instruction::DoubleA => self.a <<= 1u32,
            Instruction::Add => self.a += &self.b,
            Instruction::Move => self.b.clone_from(&self.a),
            Instruction::Swap => std::mem::swap(&mut self.a, &mut self.b),
            Instruction::LoopBack(j) => {
                if !self.b.is_zero() {
                    self.b -= 1u32;
                    self.ip = self.ip.saturating_sub(j as usize);
                    return Some(false);
                }
            }
        }
        self.ip += 1;
        Some(false)
    }

    /// Runs until halt, budget exhaustion, or the next bit request.
    pub fn poll(&mut self, budget: u64) -> Poll {
        loop {
            if self.steps >= budget {
                return Poll::BudgetExceeded;
            }
            match self.exec() {
                None => return Poll::NeedsChunk,
                Some(true) => return Poll::Halted,
                Some(false) => {}
            }
        }
    }

    fn same_registers(&self, other: &Machine) -> bool {
        self.ip == other.ip && self.a == other.a && self.b == other.b
    }

    /// Looks for a repeated `(ip, A, B)` state within `probe` further steps
    /// that never needs new bits (Brent's cycle finder). A hit means no
    /// extension of the bits read so far can halt.
    pub fn proves_divergence(&self, probe: u64) -> bool {
        let mut tortoise = self.clone();
        let mut hare = self.clone();
        let (mut power, mut lam) = (1u64, 0u64);
        for _ in 0..probe {
            match hare.exec() {
                None | Some(true) => return false,
                Some(false) => {}
            }
            lam += 1;
            if hare.same_registers(&tortoise) {
                return true;
            }
            if lam == power {
                tortoise = hare.clone();
                power *= 2;
                lam = 0;
            }
        }
        false
    }
}

/// Runs a program read on demand from `bits`.
pub fn run<S: BitSource>(bits: &mut S, step_budget: u64) -> RunResult {
    let mut m = Machine::new();
    loop {
        match m.poll(step_budget) {
            Poll::Halted => {
                return RunResult {
                    status: RunStatus::Halted(m.a.clone()),
                    bits_consumed: m.bits_consumed,
                    steps_used: m.steps,
                }
            }
            Poll::BudgetExceeded => {
                return RunResult {
                    status: RunStatus::BudgetExceeded,
                    bits_consumed: m.bits_consumed,
                    steps_used: m.steps,
                }
            }
            Poll::NeedsChunk => {
                let mut chunk = 0u8;
                for i in 0..3 {
                    match bits.next_bit() {
                        Some(b) => chunk = (chunk << 1) | b as u8,
                        None => {
                            return RunResult {
                                status: RunStatus::NeedsMoreBits,
                                bits_consumed: m.bits_consumed + i,
                                steps_used: m.steps,
                            }
                        }
                    }
                }
                m.feed_chunk(chunk);
            }
        }
    }
}

pub fn run_program(program: &BitString, step_budget: u64) -> RunResult {
    run(&mut program.reader(), step_budget)
}

/// Steps spent looking for a cycle in a run that ran out of budget.
const DIVERGENCE_PROBE: u64 = 1 << 12;

/// Bit depth below which subtrees are explored in parallel.
const PARALLEL_DEPTH: usize = 6;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DomainEntry {
    pub program: BitString,
    pub output: BigUint,
    pub steps: u64,
}

/// Leaves of the exploration tree that did not halt, by bit depth.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
struct Tally {
    cut: Vec<u64>,
    censored: Vec<u64>,
    divergent: Vec<u64>,
}

impl Tally {
    fn new(len: usize) -> Self {
        Self {
            cut: vec![0; len],
            censored: vec![0; len],
            divergent: vec![0; len],
        }
    }

    fn merge(&mut self, other: &Tally) {
        for (dst, src) in [
            (&mut self.cut, &other.cut),
            (&mut self.censored, &other.censored),
            (&mut self.divergent, &other.divergent),
        ] {
            for (d, s) in dst.iter_mut().zip(src) {
                *d += s;
            }
        }
    }
}

/// The enumerated domain of the machine under a length cap and step budget.
///
/// Entries are the halting programs of length `< max_len`, in
/// lexicographic order of their bits.
#[derive(Clone, Debug)]
pub struct Domain {
    max_len: usize,
    step_budget: u64,
    entries: Vec<DomainEntry>,
    tally: Tally,
}

struct Subtree {
    entries: Vec<DomainEntry>,
    tally: Tally,
}

fn explore(mut m: Machine, prefix: BitString, max_len: usize, budget: u64) -> Subtree {
    let mut tally = Tally::new(max_len + 1);
    let depth = prefix.len();
    match m.poll(budget) {
        Poll::Halted => {
            let entry = DomainEntry {
                program: prefix,
                output: m.a,
                steps: m.steps,
            };
            return Subtree {
                entries: vec![entry],
                tally,
            };
        }
        Poll::BudgetExceeded => {
            if m.proves_divergence(DIVERGENCE_PROBE) {
                tally.divergent[depth] += 1;
            } else {
                tally.censored[depth] += 1;
            }
            return Subtree {
                entries: Vec::new(),
                tally,
            };
        }
        Poll::NeedsChunk => {}
    }
    if depth + 3 >= max_len {
        tally.cut[depth] += 1;
        return Subtree {
            entries: Vec::new(),
            tally,
        };
    }
    let child = |chunk: u8| {
        let mut cm = m.clone();
        cm.feed_chunk(chunk);
        let mut cp = prefix.clone();
        push_chunk(&mut cp, chunk);
        explore(cm, cp, max_len, budget)
    };
    let children: Vec<Subtree> = if depth < PARALLEL_DEPTH {
        (0u8..8).into_par_iter().map(child).collect()
    } else {
        (0u8..8).map(child).collect()
    };
    let mut entries = Vec::new();
    for c in children {
        entries.extend(c.entries);
        tally.merge(&c.tally);
    }
    Subtree { entries, tally }
}

/// `count · 2^{-depth}` added exactly.
fn add_mass(total: &mut SparseDyadic, count: u64, depth: usize) {
    for j in 0..64u64 {
        if (count >> j) & 1 == 1 {
            let e = depth as i64 - j as i64;
            if e >= 1 {
                total.add_power(e as u64);
            } else {
                let mut units = SparseDyadic::from_integer(BigUint::one() << (-e) as u64);
                units.add_assign_dyadic(total);
                *total = units;
            }
        }
    }
}

impl Domain {
    /// Explores the tree of bit-request histories, branching on every
    /// requested chunk, and keeps the programs of length `< max_len` that
    /// halt within `step_budget` steps.
    pub fn enumerate(max_len: usize, step_budget: u64) -> Self {
        let sub = explore(Machine::new(), BitString::new(), max_len, step_budget);
        Self {
            max_len,
            step_budget,
            entries: sub.entries,
            tally: sub.tally,
        }
    }

    pub fn max_len(&self) -> usize {
        self.max_len
    }

    pub fn step_budget(&self) -> u64 {
        self.step_budget
    }

    pub fn entries(&self) -> &[DomainEntry] {
        &self.entries
    }

    pub fn code_set(&self) -> CodeSet {
        CodeSet::new(self.entries.iter().map(|e| e.program.clone()))
            .expect("halting programs of a self-delimiting machine are prefix-free")
    }

    /// `Σ 2^{-|p|}` over the halting programs found.
    pub fn omega_lower_bound(&self) -> SparseDyadic {
        let mut total = SparseDyadic::zero();
        for e in &self.entries {
            total.add_power(e.program.len() as u64);
        }
        total
    }

    /// Mass of every leaf that might still lead to a halting program:
    /// length-capped branches and budget-censored runs without a
    /// divergence proof.
    pub fn unresolved_mass(&self) -> SparseDyadic {
        let mut total = SparseDyadic::zero();
        for (depth, (&cut, &censored)) in self.tally.cut.iter().zip(&self.tally.censored).enumerate() {
            add_mass(&mut total, cut + censored, depth);
        }
        total
    }

    /// Mass of runs proven never to halt.
    pub fn divergent_mass(&self) -> SparseDyadic {
        let mut total = SparseDyadic::zero();
        for (depth, &n) in self.tally.divergent.iter().enumerate() {
            add_mass(&mut total, n, depth);
        }
        total
    }

    /// Budget-censored leaves per bit depth (including proven divergent).
    pub fn censored_by_len(&self) -> Vec<u64> {
        self.tally
            .censored
            .iter()
            .zip(&self.tally.divergent)
            .map(|(a, b)| a + b)
            .collect()
    }

    /// Largest output among halting programs of length `≤ n`.
    pub fn busy_beaver(&self, n: usize) -> BigUint {
        self.entries
            .iter()
            .filter(|e| e.program.len() <= n)
            .map(|e| &e.output)
            .max()
            .cloned()
            .unwrap_or_default()
    }

    pub fn universal_probability(&self, target: &BigUint) -> SparseDyadic {
        let mut total = SparseDyadic::zero();
        for e in self.entries.iter().filter(|e| &e.output == target) {
            total.add_power(e.program.len() as u64);
        }
        total
    }

    pub fn complexity_upper(&self, target: &BigUint) -> Option<usize> {
        self.entries
            .iter()
            .filter(|e| &e.output == target)
            .map(|e| e.program.len())
            .min()
    }

    /// Distinct outputs in increasing order.
    pub fn outputs(&self) -> Vec<BigUint> {
        let mut outs: Vec<BigUint> = self.entries.iter().map(|e| e.output.clone()).collect();
        outs.sort();
        outs.dedup();
        outs
    }

    /// Golden-file form: `program-bits<TAB>output<TAB>steps` per line.
    pub fn write_tsv<W: Write>(&self, mut w: W) -> io::Result<()> {
        for e in &self.entries {
            writeln!(w, "{}\t{}\t{}", e.program, e.output, e.steps)?;
        }
        Ok(())
    }
}

pub fn enumerate_domain(max_len: usize, step_budget: u64) -> Vec<DomainEntry> {
    Domain::enumerate(max_len, step_budget).entries
}

pub fn omega_lower_bound(max_len: usize, step_budget: u64) -> SparseDyadic {
    Domain::enumerate(max_len, step_budget).omega_lower_bound()
}

/// Resource-bounded Busy Beaver: largest output of a program of length
/// `≤ n` halting within the budget.
pub fn busy_beaver(n: usize, step_budget: u64) -> BigUint {
    Domain::enumerate(n + 1, step_budget).busy_beaver(n)
}

pub fn universal_probability(target: u64, max_len: usize, step_budget: u64) -> SparseDyadic {
    Domain::enumerate(max_len, step_budget).universal_probability(&BigUint::from(target))
}

pub fn complexity_upper(target: u64, max_len: usize, step_budget: u64) -> Option<usize> {
    Domain::enumerate(max_len, step_budget).complexity_upper(&BigUint::from(target))
}

#[cfg(test)]
mod tests {
    use super::*;
    use Instruction::*;

    fn bits(s: &str) -> BitString {
        s.parse().unwrap()
    }

    #[test]
    fn halt_only() {
        let r = run_program(&bits("000"), 10);
        assert_eq!(r.status, RunStatus::Halted(BigUint::zero()));
        assert_eq!(r.bits_consumed, 3);
        assert_eq!(r.steps_used, 1);
    }

    #[test]
    fn two_increments() {
        let r = run_program(&bits("001 001 000"), 10);
        assert_eq!(r.status, RunStatus::Halted(BigUint::from(2u32)));
        assert_eq!(r.bits_consumed, 9);
    }

    #[test]
    fn empty_source_needs_bits() {
        let r = run_program(&BitString::new(), 10);
        assert_eq!(r.status, RunStatus::NeedsMoreBits);
        assert_eq!(r.bits_consumed, 0);
        let r = run_program(&bits("00"), 10);
        assert_eq!(r.status, RunStatus::NeedsMoreBits);
        assert_eq!(r.bits_consumed, 2);
    }

    #[test]
    fn never_reads_past_halt() {
        let p = bits("001 000 111 111");
        let mut r = p.reader();
        let out = run(&mut r, 10);
        assert_eq!(out.bits_consumed, 6);
        assert_eq!(r.position(), 6);
    }

    #[test]
    fn loop_doubles() {
        // A = 1; B = 3; loop { A *= 2 } three extra times -> 16
        let p = assemble(&[IncA, IncB, IncB, IncB, DoubleA, LoopBack(1), Halt]);
        let r = run_program(&p, 100);
        assert_eq!(r.status, RunStatus::Halted(BigUint::from(16u32)));
    }

    #[test]
    fn budget_is_enforced() {
        let p = assemble(&[IncB, IncB, LoopBack(0), Halt]);
        assert_eq!(run_program(&p, 3).status, RunStatus::BudgetExceeded);
        assert!(matches!(run_program(&p, 10).status, RunStatus::Halted(_)));
    }

    #[test]
    fn jump_clamps_to_start() {
        // LOOP-BACK 7 at index 1 jumps to index 0
        let p = assemble(&[IncA, IncB, LoopBack(7), Halt]);
        let r = run_program(&p, 100);
        // second pass: INC A, INC B (B=1), loop again... B never reaches 0
        assert_eq!(r.status, RunStatus::BudgetExceeded);
    }

    #[test]
    fn cycle_detection() {
        let mut m = Machine::new();
        for op in [0b010, 0b110, 0b001] {
            // INC B; LOOP-BACK 1 cycles on (ip, A, B) forever
            m.feed_chunk(op);
        }
        assert_eq!(m.poll(50), Poll::BudgetExceeded);
        assert!(m.proves_divergence(64));

        // a run that keeps growing B is not flagged
        let mut m = Machine::new();
        for op in [0b010, 0b010, 0b110, 0b010] {
            m.feed_chunk(op);
        }
        assert_eq!(m.poll(50), Poll::BudgetExceeded);
        assert!(!m.proves_divergence(64));
    }

    #[test]
    fn smallest_domain() {
        let d = Domain::enumerate(4, 100);
        assert_eq!(d.entries().len(), 1);
        assert_eq!(d.entries()[0].program, bits("000"));
        assert_eq!(d.omega_lower_bound(), SparseDyadic::power(3));
        assert_eq!(busy_beaver(3, 100), BigUint::zero());
        assert_eq!(complexity_upper(0, 12, 10_000), Some(3));
    }

    #[test]
    fn masses_partition_unit_interval() {
        let d = Domain::enumerate(13, 1000);
        let mut total = d.omega_lower_bound();
        total.add_assign_dyadic(&d.unresolved_mass());
        total.add_assign_dyadic(&d.divergent_mass());
        assert_eq!(total, SparseDyadic::one());
    }

    #[test]
    fn tsv_format() {
        let d = Domain::enumerate(7, 100);
        let mut buf = Vec::new();
        d.write_tsv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("000\t0\t1\n"));
        assert!(text.contains("001000\t1\t2\n"));
    }
}
