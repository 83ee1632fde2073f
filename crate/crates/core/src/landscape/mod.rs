//! NK performance landscapes.
//!
//! A landscape assigns each contribution `n` a lookup table over the joint
//! setting of the decisions in `rows[n]`; overall performance is the mean
//! contribution. Landscapes are small enough (N ≤ 20) to enumerate, so every
//! landscape carries its exact global optimum plus cached per-solution
//! performance and per-subtask performance for the simulation hot path.

mod matrix;
mod task;

pub use matrix::{InterdependenceMatrix, Structure};
pub use task::{Partition, Solution, SubSolution, MAX_DECISIONS};

use rand::Rng;

use crate::error::{config, usage, Result};

#[derive(Debug, Clone)]
pub struct Landscape {
    matrix: InterdependenceMatrix,
    partition: Partition,
    tables: Vec<Vec<f64>>,
    performance: Vec<f64>,
    subtask_perf: Vec<f64>,
    global_max: f64,
    global_argmax: Solution,
}

impl Landscape {
    /// Draws every table entry i.i.d. from U(0,1), contribution by contribution.
    pub fn generate<R: Rng + ?Sized>(matrix: InterdependenceMatrix, partition: Partition, rng: &mut R) -> Result<Self> {
        let tables = matrix
            .rows()
            .iter()
            .map(|row| (0..1usize << row.len()).map(|_| rng.gen::<f64>()).collect())
            .collect();
        Self::from_tables(matrix, partition, tables)
    }

    /// Wraps hand-built tables. `tables[n][idx]` is read with bit `j` of `idx`
    /// holding the decision `rows[n][j]`.
    pub fn from_tables(matrix: InterdependenceMatrix, partition: Partition, tables: Vec<Vec<f64>>) -> Result<Self> {
        if partition.decisions() != matrix.n() {
            return config(format!(
                "partition covers {} decisions but the matrix has {}",
                partition.decisions(),
                matrix.n()
            ));
        }
        if tables.len() != matrix.n() {
            return config(format!("expected {} tables, got {}", matrix.n(), tables.len()));
        }
        for (n, (table, row)) in tables.iter().zip(matrix.rows()).enumerate() {
            if table.len() != 1 << row.len() {
                return config(format!("table {n} has {} entries, expected {}", table.len(), 1usize << row.len()));
            }
            if table.iter().any(|v| !(0.0..=1.0).contains(v)) {
                return config(format!("table {n} holds a value outside [0, 1]"));
            }
        }
        let mut landscape = Landscape {
            matrix,
            partition,
            tables,
            performance: Vec::new(),
            subtask_perf: Vec::new(),
            global_max: 0.0,
            global_argmax: Solution(0),
        };
        landscape.enumerate();
        Ok(landscape)
    }

    // Walks all 2^N solutions in Gray-code order so each step only refreshes
    // the contributions that depend on the flipped decision.
    fn enumerate(&mut self) {
        let n = self.matrix.n();
        let m = self.partition.subtasks();
        let s = self.partition.subtask_len();
        let count = 1usize << n;

        let mut feeds: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
        for (c, row) in self.matrix.rows().iter().enumerate() {
            for (pos, &d) in row.iter().enumerate() {
                feeds[d].push((c, pos));
            }
        }

        let mut index = vec![0usize; n];
        let mut values: Vec<f64> = self.tables.iter().map(|t| t[0]).collect();
        let mut performance = vec![0.0; count];
        let mut subtask_perf = vec![0.0; count * m];

        for g in 0..count {
            if g > 0 {
                let flipped = g.trailing_zeros() as usize;
                for &(c, pos) in &feeds[flipped] {
                    index[c] ^= 1 << pos;
                    values[c] = self.tables[c][index[c]];
                }
            }
            let sol = g ^ (g >> 1);
            performance[sol] = mean_of(&values);
            for (sub, chunk) in values.chunks_exact(s).enumerate() {
                subtask_perf[sol * m + sub] = mean_of(chunk);
            }
        }

        let (argmax, max) = performance
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) });

        self.performance = performance;
        self.subtask_perf = subtask_perf;
        self.global_max = max;
        self.global_argmax = Solution(argmax as u32);
    }

    pub fn matrix(&self) -> &InterdependenceMatrix {
        &self.matrix
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn tables(&self) -> &[Vec<f64>] {
        &self.tables
    }

    pub fn n(&self) -> usize {
        self.matrix.n()
    }

    /// Value of contribution `n` under `solution`.
    pub fn contribution(&self, solution: Solution, n: usize) -> Result<f64> {
        if n >= self.n() {
            return usage(format!("contribution index {n} outside 0..{}", self.n()));
        }
        Ok(self.contribution_at(solution, n))
    }

    fn contribution_at(&self, solution: Solution, n: usize) -> f64 {
        let idx = self.matrix.row(n)
            .iter()
            .enumerate()
            .fold(0usize, |acc, (pos, &d)| acc | (usize::from(solution.bit(d)) << pos));
        self.tables[n][idx]
    }

    /// Mean contribution, computed directly from the tables.
    pub fn evaluate(&self, solution: Solution) -> f64 {
        let values: Vec<f64> = (0..self.n()).map(|n| self.contribution_at(solution, n)).collect();
        mean_of(&values)
    }

    /// Mean contribution of the decisions in subtask `m`, computed directly.
    pub fn subtask_performance(&self, solution: Solution, m: usize) -> Result<f64> {
        if m >= self.partition.subtasks() {
            return usage(format!("subtask index {m} outside 0..{}", self.partition.subtasks()));
        }
        let values: Vec<f64> = self.partition.range(m).map(|n| self.contribution_at(solution, n)).collect();
        Ok(mean_of(&values))
    }

    /// Cached overall performance; bit-identical to [`Landscape::evaluate`].
    #[inline]
    pub fn performance(&self, solution: Solution) -> f64 {
        self.performance[solution.0 as usize]
    }

    /// Cached per-subtask performances of `solution`, in subtask order.
    #[inline]
    pub fn subtask_performances(&self, solution: Solution) -> &[f64] {
        let m = self.partition.subtasks();
        let start = solution.0 as usize * m;
        &self.subtask_perf[start..start + m]
    }

    /// Exact optimum over all 2^N solutions; ties go to the lowest encoding.
    pub fn global_optimum(&self) -> (Solution, f64) {
        (self.global_argmax, self.global_max)
    }

    pub fn global_max(&self) -> f64 {
        self.global_max
    }

    /// Performance divided by this landscape's global maximum.
    pub fn normalized(&self, solution: Solution) -> f64 {
        self.performance(solution) / self.global_max
    }

    /// Number of solutions no single decision flip can improve on.
    pub fn local_optima_count(&self) -> usize {
        let n = self.n();
        (0..self.performance.len())
            .filter(|&s| {
                let v = self.performance[s];
                (0..n).all(|d| self.performance[s ^ (1 << d)] <= v)
            })
            .count()
    }
}

fn mean_of(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SimRng;
    use rand::SeedableRng;

    fn two_decision_landscape() -> Landscape {
        // N=2, K=1: both contributions read both decisions.
        let matrix = InterdependenceMatrix::from_rows(vec![vec![0, 1], vec![0, 1]], 1).unwrap();
        let tables = vec![vec![0.1, 0.2, 0.3, 0.4], vec![0.5, 0.6, 0.7, 0.8]];
        Landscape::from_tables(matrix, Partition::new(2, 2).unwrap(), tables).unwrap()
    }

    #[test]
    fn hand_built_two_decision_landscape() {
        let l = two_decision_landscape();
        // index bit 0 = d_1, bit 1 = d_2
        let expected = [(0b00, 0.1, 0.5), (0b01, 0.2, 0.6), (0b10, 0.3, 0.7), (0b11, 0.4, 0.8)];
        for (bits, c1, c2) in expected {
            let s = Solution(bits);
            assert_eq!(l.contribution(s, 0).unwrap(), c1);
            assert_eq!(l.contribution(s, 1).unwrap(), c2);
            assert_eq!(l.evaluate(s), (c1 + c2) / 2.0);
        }
        // solution (d_1, d_2) = (0, 1)
        let s = Solution::from_bits(&[0, 1]).unwrap();
        assert!((l.evaluate(s) - 0.5).abs() < 1e-15);
        assert_eq!(l.global_optimum(), (Solution(0b11), (0.4 + 0.8) / 2.0));
    }

    #[test]
    fn k0_direct_lookup() {
        let matrix = InterdependenceMatrix::from_rows(vec![vec![0]], 0).unwrap();
        let l = Landscape::from_tables(matrix, Partition::new(1, 1).unwrap(), vec![vec![0.2, 0.9]]).unwrap();
        assert_eq!(l.contribution(Solution(1), 0).unwrap(), 0.9);
        assert_eq!(l.contribution(Solution(0), 0).unwrap(), 0.2);
    }

    #[test]
    fn out_of_range_indices_are_usage_errors() {
        let l = two_decision_landscape();
        assert!(matches!(l.contribution(Solution(0), 2), Err(crate::Error::Usage(_))));
        assert!(matches!(l.subtask_performance(Solution(0), 2), Err(crate::Error::Usage(_))));
    }

    #[test]
    fn constant_contributions() {
        let matrix = InterdependenceMatrix::from_rows((0..4).map(|i| vec![i]).collect(), 0).unwrap();
        let tables = vec![vec![0.5, 0.5]; 4];
        let l = Landscape::from_tables(matrix, Partition::new(4, 2).unwrap(), tables).unwrap();
        assert_eq!(l.evaluate(Solution(0b1010)), 0.5);
        assert_eq!(l.subtask_performance(Solution(0b1010), 1).unwrap(), 0.5);
    }

    #[test]
    fn cache_matches_direct_computation() {
        let mut rng = SimRng::seed_from_u64(11);
        let partition = Partition::new(12, 3).unwrap();
        for st in Structure::ALL {
            let matrix = InterdependenceMatrix::build(st, 12, 3, &mut rng).unwrap();
            let l = Landscape::generate(matrix, partition, &mut rng).unwrap();
            for s in (0..4096).step_by(37).map(Solution) {
                assert_eq!(l.performance(s), l.evaluate(s));
                for m in 0..3 {
                    assert_eq!(l.subtask_performances(s)[m], l.subtask_performance(s, m).unwrap());
                }
            }
        }
    }

    #[test]
    fn subtask_mean_equals_performance() {
        let mut rng = SimRng::seed_from_u64(5);
        let partition = Partition::new(12, 3).unwrap();
        let matrix = InterdependenceMatrix::build(Structure::Random, 12, 5, &mut rng).unwrap();
        let l = Landscape::generate(matrix, partition, &mut rng).unwrap();
        for s in (0..4096).map(Solution) {
            let mean = l.subtask_performances(s).iter().sum::<f64>() / 3.0;
            assert!((mean - l.evaluate(s)).abs() < 1e-12);
        }
    }

    #[test]
    fn subtask_two_is_mean_of_decisions_five_to_eight() {
        let mut rng = SimRng::seed_from_u64(9);
        let partition = Partition::new(12, 3).unwrap();
        let matrix = InterdependenceMatrix::build(Structure::Local, 12, 3, &mut rng).unwrap();
        let l = Landscape::generate(matrix, partition, &mut rng).unwrap();
        let s = Solution(0b1011_0110_1001);
        let brute: f64 = (4..8).map(|n| l.contribution(s, n).unwrap()).sum::<f64>() / 4.0;
        assert!((l.subtask_performance(s, 1).unwrap() - brute).abs() < 1e-15);
    }

    #[test]
    fn same_seed_same_tables() {
        let partition = Partition::new(12, 3).unwrap();
        let build = |seed| {
            let mut rng = SimRng::seed_from_u64(seed);
            let matrix = InterdependenceMatrix::build(Structure::Random, 12, 3, &mut rng).unwrap();
            Landscape::generate(matrix, partition, &mut rng).unwrap()
        };
        assert_eq!(build(17).tables(), build(17).tables());
        assert_ne!(build(17).tables(), build(18).tables());
    }

    #[test]
    fn rejects_values_outside_unit_interval() {
        let matrix = InterdependenceMatrix::from_rows(vec![vec![0]], 0).unwrap();
        assert!(Landscape::from_tables(matrix, Partition::new(1, 1).unwrap(), vec![vec![0.2, 1.5]]).is_err());
    }
}
