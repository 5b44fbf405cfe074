//! Two-phase tableau simplex over exact rationals with Bland's rule.

use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::error::{structural, Result};
use crate::rational::{zero, Rational};

/// `max objective·x  s.t.  constraints·x <= rhs,  x >= 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearProgram {
    pub objective: Vec<Rational>,
    pub constraints: Vec<Vec<Rational>>,
    pub rhs: Vec<Rational>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub assignment: Vec<Rational>,
    pub value: Rational,
}

impl LinearProgram {
    pub fn new(objective: Vec<Rational>) -> Self {
        Self {
            objective,
            constraints: Vec::new(),
            rhs: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    /// Appends `row·x <= bound`.
    pub fn push(&mut self, row: Vec<Rational>, bound: Rational) {
        self.constraints.push(row);
        self.rhs.push(bound);
    }

    /// Appends a sparse row given as `(var, coefficient)` pairs.
    pub fn push_sparse(&mut self, entries: &[(usize, Rational)], bound: Rational) {
        let mut row = vec![zero(); self.num_vars()];
        for (j, a) in entries {
            row[*j] += a;
        }
        self.push(row, bound);
    }

    pub fn validate(&self) -> Result<()> {
        if self.constraints.len() != self.rhs.len() {
            return Err(structural(format!(
                "{} constraint rows but {} right-hand sides",
                self.constraints.len(),
                self.rhs.len()
            )));
        }
        let n = self.num_vars();
        for (i, row) in self.constraints.iter().enumerate() {
            if row.len() != n {
                return Err(structural(format!("constraint row {i} has {} entries, expected {n}", row.len())));
            }
        }
        Ok(())
    }

    pub fn is_feasible(&self, x: &[Rational]) -> bool {
        x.len() == self.num_vars()
            && x.iter().all(|v| !v.is_negative())
            && self
                .constraints
                .iter()
                .zip(&self.rhs)
                .all(|(row, b)| dot(row, x) <= *b)
    }

    pub fn evaluate(&self, x: &[Rational]) -> Rational {
        dot(&self.objective, x)
    }
}

pub(crate) fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).fold(zero(), |acc, (x, y)| acc + x * y)
}

struct Tableau {
    /// rows x (cols + 1); last column is the right-hand side.
    rows: Vec<Vec<Rational>>,
    /// Reduced-cost row `z_j - c_j`; last entry is the objective value.
    obj: Vec<Rational>,
    basis: Vec<usize>,
    cols: usize,
}

enum Pivoting {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c].clone();
        for v in self.rows[r].iter_mut() {
            *v /= &p;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v -= &f * pv;
                }
            }
        }
        if !self.obj[c].is_zero() {
            let f = self.obj[c].clone();
            for (v, pv) in self.obj.iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v -= &f * pv;
                }
            }
        }
        self.basis[r] = c;
    }

    /// Bland's rule restricted to columns `< allowed`.
    fn run(&mut self, allowed: usize) -> Pivoting {
        loop {
            let Some(c) = (0..allowed).find(|&j| self.obj[j].is_negative()) else {
                return Pivoting::Optimal;
            };
            let rhs = self.cols;
            let mut best: Option<(usize, Rational)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if !row[c].is_positive() {
                    continue;
                }
                let ratio = &row[rhs] / &row[c];
                let better = match &best {
                    None => true,
                    Some((bi, br)) => ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi]),
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            match best {
                None => return Pivoting::Unbounded,
                Some((r, _)) => self.pivot(r, c),
            }
        }
    }

    /// Recomputes the reduced-cost row for maximizing `cost·x`.
    fn set_objective(&mut self, cost: &[Rational]) {
        let mut obj: Vec<Rational> = (0..=self.cols)
            .map(|j| if j < cost.len() && j < self.cols { -cost[j].clone() } else { zero() })
            .collect();
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            let cb = cost.get(b).cloned().unwrap_or_else(zero);
            if cb.is_zero() {
                continue;
            }
            for (o, v) in obj.iter_mut().zip(row) {
                *o += &cb * v;
            }
        }
        self.obj = obj;
    }
}

/// Solves the program exactly. The pivot rule is fixed, so equal inputs give
/// equal outputs.
pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution> {
    lp.validate()?;
    let n = lp.num_vars();
    let m = lp.constraints.len();

    let negative: Vec<usize> = (0..m).filter(|&i| lp.rhs[i].is_negative()).collect();
    let n_art = negative.len();
    let cols = n + m + n_art;

    let mut rows = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let mut art_of_row = vec![None; m];
    for (k, &i) in negative.iter().enumerate() {
        art_of_row[i] = Some(n + m + k);
    }
    for i in 0..m {
        let mut row = vec![zero(); cols + 1];
        let flip = lp.rhs[i].is_negative();
        for j in 0..n {
            row[j] = if flip { -lp.constraints[i][j].clone() } else { lp.constraints[i][j].clone() };
        }
        row[n + i] = if flip { -crate::rational::one() } else { crate::rational::one() };
        row[cols] = if flip { -lp.rhs[i].clone() } else { lp.rhs[i].clone() };
        match art_of_row[i] {
            Some(a) => {
                row[a] = crate::rational::one();
                basis.push(a);
            }
            None => basis.push(n + i),
        }
        rows.push(row);
    }

    let mut t = Tableau {
        rows,
        obj: Vec::new(),
        basis,
        cols,
    };

    if n_art > 0 {
        // Phase one: maximize minus the sum of artificials.
        let mut cost = vec![zero(); cols];
        for c in cost.iter_mut().skip(n + m) {
            *c = -crate::rational::one();
        }
        t.set_objective(&cost);
        if let Pivoting::Unbounded = t.run(cols) {
            unreachable!("phase one objective is bounded above by zero");
        }
        if t.obj[cols].is_negative() {
            return Ok(LpSolution {
                status: LpStatus::Infeasible,
                assignment: Vec::new(),
                value: zero(),
            });
        }
        // Drive zero-level artificials out of the basis; drop redundant rows.
        let mut i = 0;
        while i < t.rows.len() {
            if t.basis[i] >= n + m {
                match (0..n + m).find(|&j| !t.rows[i][j].is_zero()) {
                    Some(j) => {
                        t.pivot(i, j);
                        i += 1;
                    }
                    None => {
                        t.rows.remove(i);
                        t.basis.remove(i);
                    }
                }
            } else {
                i += 1;
            }
        }
        // Discard artificial columns.
        for row in t.rows.iter_mut() {
            let rhs = row[cols].clone();
            row.truncate(n + m);
            row.push(rhs);
        }
        t.cols = n + m;
    }

    t.set_objective(&lp.objective);
    if let Pivoting::Unbounded = t.run(t.cols) {
        return Ok(LpSolution {
            status: LpStatus::Unbounded,
            assignment: Vec::new(),
            value: zero(),
        });
    }

    let mut x = vec![zero(); n];
    for (row, &b) in t.rows.iter().zip(&t.basis) {
        if b < n {
            x[b] = row[t.cols].clone();
        }
    }
    let value = lp.evaluate(&x);
    debug_assert_eq!(value, t.obj[t.cols]);
    Ok(LpSolution {
        status: LpStatus::Optimal,
        assignment: x,
        value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    #[test]
    fn single_bound() {
        let mut lp = LinearProgram::new(vec![int(1)]);
        lp.push(vec![int(1)], int(1));
        let s = solve_lp(&lp).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert_eq!(s.value, int(1));
    }

    #[test]
    fn contradictory_bounds() {
        let mut lp = LinearProgram::new(vec![int(1)]);
        lp.push(vec![int(1)], int(1));
        lp.push(vec![int(-1)], int(-2));
        assert_eq!(solve_lp(&lp).unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn unbounded() {
        let mut lp = LinearProgram::new(vec![int(1), int(1)]);
        lp.push(vec![int(1), int(-1)], int(1));
        assert_eq!(solve_lp(&lp).unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn lower_bound_constraint_is_respected() {
        // max -x - y  s.t. x + y >= 3/2, x <= 1
        let mut lp = LinearProgram::new(vec![int(-1), int(-1)]);
        lp.push(vec![int(-1), int(-1)], ratio(-3, 2));
        lp.push(vec![int(1), int(0)], int(1));
        let s = solve_lp(&lp).unwrap();
        assert_eq!(s.value, ratio(-3, 2));
        assert!(lp.is_feasible(&s.assignment));
    }

    #[test]
    fn dimension_mismatch_is_structural() {
        let mut lp = LinearProgram::new(vec![int(1), int(1)]);
        lp.constraints.push(vec![int(1)]);
        lp.rhs.push(int(1));
        assert!(matches!(solve_lp(&lp), Err(crate::Error::Structural(_))));
        lp.rhs.push(int(1));
        assert!(solve_lp(&lp).is_err());
    }

    #[test]
    fn textbook_example() {
        // max 2x + 3y s.t. 2x + y <= 18, 6x + 5y <= 60, 2x + 5y <= 40
        let mut lp = LinearProgram::new(vec![int(2), int(3)]);
        lp.push(vec![int(2), int(1)], int(18));
        lp.push(vec![int(6), int(5)], int(60));
        lp.push(vec![int(2), int(5)], int(40));
        let s = solve_lp(&lp).unwrap();
        assert_eq!(s.value, int(28));
        assert_eq!(s.assignment, vec![int(5), int(6)]);
    }

    #[test]
    fn degenerate_cycling_instance_terminates() {
        // Beale's classic cycling example (for Dantzig's rule) in max form.
        let mut lp = LinearProgram::new(vec![ratio(3, 4), int(-150), ratio(1, 50), int(-6)]);
        lp.push(vec![ratio(1, 4), int(-60), ratio(-1, 25), int(9)], int(0));
        lp.push(vec![ratio(1, 2), int(-90), ratio(-1, 50), int(3)], int(0));
        lp.push(vec![int(0), int(0), int(1), int(0)], int(1));
        let s = solve_lp(&lp).unwrap();
        assert_eq!(s.value, ratio(1, 20));
    }
}
