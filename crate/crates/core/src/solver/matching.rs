//! Maximum-weight perfect matching on a square bipartite graph with
//! forbidden cells, by successive shortest augmenting paths.

use crate::error::{structural, Error, Result};
use crate::rational::{zero, Rational};

/// Square weight matrix; `None` marks a forbidden cell (absent edge).
#[derive(Clone, Debug, PartialEq)]
pub struct WeightMatrix {
    entries: Vec<Vec<Option<Rational>>>,
}

impl WeightMatrix {
    pub fn new(entries: Vec<Vec<Option<Rational>>>) -> Result<Self> {
        let n = entries.len();
        if let Some((i, row)) = entries.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(structural(format!("row {i} has {} entries, matrix is {n}x{n}", row.len())));
        }
        Ok(Self { entries })
    }

    /// Dense matrix with every cell allowed.
    pub fn dense(w: Vec<Vec<Rational>>) -> Result<Self> {
        Self::new(w.into_iter().map(|r| r.into_iter().map(Some).collect()).collect())
    }

    /// Dense matrix with the diagonal forbidden.
    pub fn without_diagonal(w: Vec<Vec<Rational>>) -> Result<Self> {
        Self::new(
            w.into_iter()
                .enumerate()
                .map(|(i, r)| r.into_iter().enumerate().map(|(j, x)| (i != j).then_some(x)).collect())
                .collect(),
        )
    }

    pub fn n(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, i: usize, j: usize) -> Option<&Rational> {
        self.entries[i][j].as_ref()
    }

    /// Weight of `perm` (row `i` matched to column `perm[i]`), `None` if it
    /// uses a forbidden cell.
    pub fn weight_of(&self, perm: &[usize]) -> Option<Rational> {
        perm.iter()
            .enumerate()
            .try_fold(zero(), |acc, (i, &j)| self.get(i, j).map(|w| acc + w))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Matching {
    pub perm: Vec<usize>,
    pub value: Rational,
}

/// Optimal value over the rows in `rows` and columns in `cols` (equal
/// length), or `None` when no perfect matching exists.
fn optimum(w: &WeightMatrix, rows: &[usize], cols: &[usize]) -> Option<Rational> {
    let k = rows.len();
    // Min-cost flow with cost = -weight. Nodes: 0..k rows, k..2k cols.
    let mut row_match: Vec<Option<usize>> = vec![None; k];
    let mut col_match: Vec<Option<usize>> = vec![None; k];
    let mut total = zero();
    for _ in 0..k {
        // Bellman-Ford over the residual graph from all free rows.
        let mut dist: Vec<Option<Rational>> = vec![None; 2 * k];
        let mut parent: Vec<Option<usize>> = vec![None; 2 * k];
        for r in 0..k {
            if row_match[r].is_none() {
                dist[r] = Some(zero());
            }
        }
        for _ in 0..2 * k {
            let mut changed = false;
            for r in 0..k {
                let Some(dr) = dist[r].clone() else { continue };
                for c in 0..k {
                    if row_match[r] == Some(c) {
                        continue;
                    }
                    let Some(wt) = w.get(rows[r], cols[c]) else { continue };
                    let nd = &dr - wt;
                    if dist[k + c].as_ref().map_or(true, |d| nd < *d) {
                        dist[k + c] = Some(nd);
                        parent[k + c] = Some(r);
                        changed = true;
                    }
                }
            }
            for c in 0..k {
                let Some(r) = col_match[c] else { continue };
                let Some(dc) = dist[k + c].clone() else { continue };
                let wt = w.get(rows[r], cols[c]).expect("matched cell is allowed");
                let nd = dc + wt;
                if dist[r].as_ref().map_or(true, |d| nd < *d) {
                    dist[r] = Some(nd);
                    parent[r] = Some(k + c);
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        let end = (0..k)
            .filter(|&c| col_match[c].is_none())
            .filter_map(|c| dist[k + c].clone().map(|d| (c, d)))
            .min_by(|a, b| a.1.cmp(&b.1).then(a.0.cmp(&b.0)))?;
        total -= &end.1;
        // Flip the alternating path back to its free row.
        let mut c = end.0;
        loop {
            let r = parent[k + c].expect("path parent");
            let prev = row_match[r].replace(c);
            col_match[c] = Some(r);
            match prev {
                Some(pc) => c = pc,
                None => break,
            }
        }
    }
    let mut value = zero();
    for r in 0..k {
        value += w.get(rows[r], cols[row_match[r]?])?;
    }
    debug_assert_eq!(value, total);
    Some(value)
}

/// Maximum-weight perfect matching; among optimal matchings returns the
/// lexicographically smallest permutation.
pub fn max_weight_perfect_matching(w: &WeightMatrix) -> Result<Matching> {
    let n = w.n();
    let all: Vec<usize> = (0..n).collect();
    let best = optimum(w, &all, &all).ok_or_else(|| Error::Infeasible("no perfect matching avoids the forbidden cells".into()))?;

    let mut perm = Vec::with_capacity(n);
    let mut free_cols: Vec<usize> = all.clone();
    let mut fixed = zero();
    for r in 0..n {
        let rest_rows: Vec<usize> = (r + 1..n).collect();
        let chosen = free_cols
            .iter()
            .copied()
            .find(|&c| {
                let Some(wt) = w.get(r, c) else { return false };
                let rest_cols: Vec<usize> = free_cols.iter().copied().filter(|&x| x != c).collect();
                optimum(w, &rest_rows, &rest_cols).is_some_and(|v| &fixed + wt + v == best)
            })
            .expect("an optimal completion exists");
        fixed += w.get(r, chosen).unwrap();
        perm.push(chosen);
        free_cols.retain(|&x| x != chosen);
    }
    Ok(Matching { perm, value: best })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    fn m(rows: &[&[i64]]) -> Vec<Vec<Rational>> {
        rows.iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect()
    }

    #[test]
    fn single_cell() {
        let w = WeightMatrix::dense(m(&[&[5]])).unwrap();
        let s = max_weight_perfect_matching(&w).unwrap();
        assert_eq!(s.perm, vec![0]);
        assert_eq!(s.value, int(5));
    }

    #[test]
    fn two_by_two_picks_anti_diagonal() {
        let w = WeightMatrix::dense(m(&[&[1, 2], &[3, 1]])).unwrap();
        let s = max_weight_perfect_matching(&w).unwrap();
        assert_eq!(s.perm, vec![1, 0]);
        assert_eq!(s.value, int(5));
    }

    #[test]
    fn forbidden_diagonal_three() {
        // Derangements: (1,2,0) -> 2+6+7 = 15 and (2,0,1) -> 3+4+8 = 15; tie.
        let w = WeightMatrix::without_diagonal(m(&[&[0, 2, 3], &[4, 0, 6], &[7, 8, 0]])).unwrap();
        let s = max_weight_perfect_matching(&w).unwrap();
        assert_eq!(s.value, int(15));
        assert_eq!(s.perm, vec![1, 2, 0]);
    }

    #[test]
    fn infeasible_when_row_fully_forbidden() {
        let w = WeightMatrix::new(vec![vec![None, None], vec![Some(int(1)), Some(int(1))]]).unwrap();
        assert!(matches!(max_weight_perfect_matching(&w), Err(Error::Infeasible(_))));
        let n1 = WeightMatrix::without_diagonal(m(&[&[3]])).unwrap();
        assert!(max_weight_perfect_matching(&n1).is_err());
    }

    #[test]
    fn ragged_matrix_rejected() {
        assert!(WeightMatrix::dense(vec![vec![int(1), int(2)], vec![int(1)]]).is_err());
    }
}
