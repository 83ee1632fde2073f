use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::task::MAX_DECISIONS;
use crate::error::{config, Error, Result};

/// Patterned interdependence structures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Structure {
    Block,
    Centralized,
    Dependent,
    Hierarchical,
    Local,
    Random,
}

impl Structure {
    pub const ALL: [Structure; 6] = [
        Structure::Block,
        Structure::Centralized,
        Structure::Dependent,
        Structure::Hierarchical,
        Structure::Local,
        Structure::Random,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Structure::Block => "block",
            Structure::Centralized => "centralized",
            Structure::Dependent => "dependent",
            Structure::Hierarchical => "hierarchical",
            Structure::Local => "local",
            Structure::Random => "random",
        }
    }

    /// Whether building the matrix consumes random draws.
    pub fn is_randomized(self) -> bool {
        self == Structure::Random
    }
}

impl fmt::Display for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Structure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Structure::ALL
            .into_iter()
            .find(|st| st.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown structure `{s}`")))
    }
}

/// Which decisions feed which contribution.
///
/// `rows[n]` lists, in ascending order, the decisions that contribution `n`
/// depends on; it always contains `n` itself.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InterdependenceMatrix {
    n: usize,
    k: usize,
    structure: Option<Structure>,
    rows: Vec<Vec<usize>>,
}

impl InterdependenceMatrix {
    /// Builds one of the patterned structures. Only `Random` draws from `rng`.
    pub fn build<R: Rng + ?Sized>(structure: Structure, n: usize, k: usize, rng: &mut R) -> Result<Self> {
        if n == 0 || n > MAX_DECISIONS {
            return config(format!("n = {n} must lie in 1..={MAX_DECISIONS}"));
        }
        if k >= n {
            return config(format!("k = {k} must satisfy 0 <= k <= n - 1 = {}", n - 1));
        }
        let rows: Vec<Vec<usize>> = match structure {
            Structure::Block => {
                if !n.is_multiple_of(k + 1) {
                    return config(format!("block structure needs k + 1 = {} to divide n = {n}", k + 1));
                }
                (0..n)
                    .map(|i| {
                        let start = i / (k + 1) * (k + 1);
                        (start..start + k + 1).collect()
                    })
                    .collect()
            }
            Structure::Centralized => centralized_rows(n, k),
            Structure::Dependent => {
                let central = centralized_rows(n, k);
                (0..n)
                    .map(|i| (0..n).filter(|&j| central[j].contains(&i)).collect())
                    .collect()
            }
            Structure::Hierarchical => (0..n).map(|i| (i - k.min(i)..=i).collect()).collect(),
            Structure::Local => (0..n)
                .map(|i| (0..=k).map(|back| (i + n - back) % n).collect())
                .collect(),
            Structure::Random => (0..n)
                .map(|i| {
                    let mut row: Vec<usize> = rand::seq::index::sample(rng, n - 1, k)
                        .into_iter()
                        .map(|j| if j >= i { j + 1 } else { j })
                        .collect();
                    row.push(i);
                    row
                })
                .collect(),
        };
        Self::assemble(n, k, Some(structure), rows)
    }

    /// Accepts an arbitrary dependency pattern. Indices are zero-based.
    pub fn from_rows(rows: Vec<Vec<usize>>, k: usize) -> Result<Self> {
        let n = rows.len();
        if n == 0 || n > MAX_DECISIONS {
            return config(format!("matrix has {n} rows, expected 1..={MAX_DECISIONS}"));
        }
        Self::assemble(n, k, None, rows)
    }

    fn assemble(n: usize, k: usize, structure: Option<Structure>, mut rows: Vec<Vec<usize>>) -> Result<Self> {
        for (i, row) in rows.iter_mut().enumerate() {
            row.sort_unstable();
            if row.windows(2).any(|w| w[0] == w[1]) {
                return config(format!("row {i} lists a decision twice"));
            }
            if let Some(&bad) = row.iter().find(|&&j| j >= n) {
                return config(format!("row {i} references decision {bad} outside 0..{n}"));
            }
            if row.binary_search(&i).is_err() {
                return config(format!("row {i} does not contain its own decision"));
            }
        }
        Ok(InterdependenceMatrix { n, k, structure, rows })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn structure(&self) -> Option<Structure> {
        self.structure
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.rows
    }

    pub fn row(&self, n: usize) -> &[usize] {
        &self.rows[n]
    }

    pub fn depends(&self, contribution: usize, decision: usize) -> bool {
        self.rows[contribution].binary_search(&decision).is_ok()
    }
}

// Rows 0..=k share the first k+1 decisions; later rows see themselves plus 0..k.
fn centralized_rows(n: usize, k: usize) -> Vec<Vec<usize>> {
    (0..n)
        .map(|i| {
            if i <= k {
                (0..=k).collect()
            } else {
                let mut row: Vec<usize> = (0..k).collect();
                row.push(i);
                row
            }
        })
        .collect()
}

/// Row = contribution, column = decision.
impl fmt::Display for InterdependenceMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.n {
            let line: String = (0..self.n).map(|j| if self.depends(i, j) { 'X' } else { '.' }).collect();
            writeln!(f, "{line}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SimRng;
    use rand::SeedableRng;

    fn one_based(m: &InterdependenceMatrix, n: usize) -> Vec<usize> {
        let mut row: Vec<usize> = m.row(n - 1).iter().map(|j| j + 1).collect();
        row.sort_unstable();
        row
    }

    fn rng() -> SimRng {
        SimRng::seed_from_u64(3)
    }

    #[test]
    fn block_groups_of_k_plus_one() {
        let m = InterdependenceMatrix::build(Structure::Block, 12, 3, &mut rng()).unwrap();
        for n in 1..=4 {
            assert_eq!(one_based(&m, n), vec![1, 2, 3, 4]);
        }
        for n in 5..=8 {
            assert_eq!(one_based(&m, n), vec![5, 6, 7, 8]);
        }
        for n in 9..=12 {
            assert_eq!(one_based(&m, n), vec![9, 10, 11, 12]);
        }
    }

    #[test]
    fn block_requires_divisibility() {
        let err = InterdependenceMatrix::build(Structure::Block, 12, 4, &mut rng()).unwrap_err();
        assert!(err.to_string().contains("divide"), "{err}");
    }

    #[test]
    fn local_wraps_around() {
        let m = InterdependenceMatrix::build(Structure::Local, 12, 3, &mut rng()).unwrap();
        assert_eq!(one_based(&m, 1), vec![1, 10, 11, 12]);
        assert_eq!(one_based(&m, 5), vec![2, 3, 4, 5]);
        // Column view: decision j feeds contributions j+1..j+K (cyclic).
        for j in 0..12 {
            let feeds: Vec<usize> = (0..12).filter(|&i| i != j && m.depends(i, j)).collect();
            let expected: Vec<usize> = {
                let mut e: Vec<usize> = (1..=3).map(|d| (j + d) % 12).collect();
                e.sort_unstable();
                e
            };
            assert_eq!(feeds, expected, "column {j}");
        }
    }

    #[test]
    fn random_rows_have_k_plus_one_entries() {
        let mut r = rng();
        for _ in 0..50 {
            let m = InterdependenceMatrix::build(Structure::Random, 12, 5, &mut r).unwrap();
            for i in 0..12 {
                assert_eq!(m.row(i).len(), 6);
                assert!(m.depends(i, i));
            }
        }
    }

    #[test]
    fn centralized_and_dependent_are_transposes() {
        for k in [0, 3, 5, 11] {
            let c = InterdependenceMatrix::build(Structure::Centralized, 12, k, &mut rng()).unwrap();
            let d = InterdependenceMatrix::build(Structure::Dependent, 12, k, &mut rng()).unwrap();
            for i in 0..12 {
                assert_eq!(c.row(i).len(), k + 1);
                for j in 0..12 {
                    assert_eq!(c.depends(i, j), d.depends(j, i));
                }
            }
        }
        let c = InterdependenceMatrix::build(Structure::Centralized, 12, 3, &mut rng()).unwrap();
        assert_eq!(one_based(&c, 2), vec![1, 2, 3, 4]);
        assert_eq!(one_based(&c, 9), vec![1, 2, 3, 9]);
    }

    #[test]
    fn hierarchical_uses_preceding_decisions() {
        let m = InterdependenceMatrix::build(Structure::Hierarchical, 12, 3, &mut rng()).unwrap();
        assert_eq!(one_based(&m, 1), vec![1]);
        assert_eq!(one_based(&m, 3), vec![1, 2, 3]);
        assert_eq!(one_based(&m, 10), vec![7, 8, 9, 10]);
        for i in 0..12 {
            assert!(m.row(i).iter().all(|&j| j <= i));
        }
    }

    #[test]
    fn every_structure_keeps_the_diagonal() {
        for st in Structure::ALL {
            for k in [0, 1, 3, 5] {
                let Ok(m) = InterdependenceMatrix::build(st, 12, k, &mut rng()) else {
                    assert_eq!(st, Structure::Block);
                    continue;
                };
                for i in 0..12 {
                    assert!(m.depends(i, i));
                    assert!(!m.row(i).is_empty() && m.row(i).len() <= 12);
                }
            }
        }
    }

    #[test]
    fn rejects_k_too_large() {
        assert!(InterdependenceMatrix::build(Structure::Local, 12, 12, &mut rng()).is_err());
    }

    #[test]
    fn from_rows_validates() {
        assert!(InterdependenceMatrix::from_rows(vec![vec![0, 1], vec![1]], 1).is_ok());
        assert!(InterdependenceMatrix::from_rows(vec![vec![1], vec![1]], 0).is_err());
        assert!(InterdependenceMatrix::from_rows(vec![vec![0, 2], vec![1]], 1).is_err());
    }

    #[test]
    fn prints_grid() {
        let m = InterdependenceMatrix::build(Structure::Block, 4, 1, &mut rng()).unwrap();
        assert_eq!(m.to_string(), "XX..\nXX..\n..XX\n..XX\n");
    }
}
