use std::fmt;

use crate::error::{config, Result};

/// Largest task size the exhaustive machinery accepts.
pub const MAX_DECISIONS: usize = 20;

/// A full assignment of the N binary decisions, bit `n` holding decision `n`
/// (decisions are zero-based in code).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Solution(pub u32);

impl Solution {
    pub fn bit(self, n: usize) -> bool {
        (self.0 >> n) & 1 == 1
    }

    pub fn flip(self, n: usize) -> Solution {
        Solution(self.0 ^ (1 << n))
    }

    /// Builds a solution from an explicit decision vector.
    pub fn from_bits(bits: &[u8]) -> Result<Solution> {
        if bits.len() > MAX_DECISIONS {
            return config(format!("solution has {} decisions, at most {MAX_DECISIONS} supported", bits.len()));
        }
        let mut value = 0u32;
        for (n, &b) in bits.iter().enumerate() {
            match b {
                0 => {}
                1 => value |= 1 << n,
                other => return config(format!("decision {n} has value {other}, expected 0 or 1")),
            }
        }
        Ok(Solution(value))
    }

    pub fn to_bits(self, n: usize) -> Vec<u8> {
        (0..n).map(|i| u8::from(self.bit(i))).collect()
    }
}

/// The decisions of one subtask, bit `j` holding the subtask's `j`-th decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct SubSolution(pub u32);

/// Split of the N decisions into M contiguous subtasks of S = N/M decisions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Partition {
    n: usize,
    m: usize,
    s: usize,
}

impl Partition {
    pub fn new(n: usize, m: usize) -> Result<Partition> {
        if n == 0 || n > MAX_DECISIONS {
            return config(format!("n = {n} must lie in 1..={MAX_DECISIONS}"));
        }
        if m == 0 || !n.is_multiple_of(m) {
            return config(format!("m_subtasks = {m} must be positive and divide n = {n}"));
        }
        Ok(Partition { n, m, s: n / m })
    }

    pub fn decisions(&self) -> usize {
        self.n
    }

    pub fn subtasks(&self) -> usize {
        self.m
    }

    pub fn subtask_len(&self) -> usize {
        self.s
    }

    /// Number of distinct sub-solutions of one subtask (2^S).
    pub fn sub_count(&self) -> usize {
        1 << self.s
    }

    /// Number of distinct solutions (2^N).
    pub fn solution_count(&self) -> usize {
        1 << self.n
    }

    fn sub_mask(&self) -> u32 {
        ((1u64 << self.s) - 1) as u32
    }

    pub fn sub_of(&self, solution: Solution, m: usize) -> SubSolution {
        SubSolution((solution.0 >> (self.s * m)) & self.sub_mask())
    }

    /// Replaces subtask `m` of `solution` with `sub`.
    pub fn with_sub(&self, solution: Solution, m: usize, sub: SubSolution) -> Solution {
        let shift = self.s * m;
        let cleared = solution.0 & !(self.sub_mask() << shift);
        Solution(cleared | ((sub.0 & self.sub_mask()) << shift))
    }

    /// Concatenates one sub-solution per subtask, in subtask order.
    pub fn concat(&self, subs: &[SubSolution]) -> Solution {
        debug_assert_eq!(subs.len(), self.m);
        subs.iter()
            .enumerate()
            .fold(Solution(0), |acc, (m, &sub)| self.with_sub(acc, m, sub))
    }

    /// Decision indices covered by subtask `m`.
    pub fn range(&self, m: usize) -> std::ops::Range<usize> {
        self.s * m..self.s * (m + 1)
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "N={} M={} S={}", self.n, self.m, self.s)
    }
}
