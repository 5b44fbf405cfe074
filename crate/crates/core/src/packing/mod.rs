//! Sparse packing integer programs: each player picks at most one of `K`
//! options, and the chosen options share capacity rows `A x <= c`.

mod generate;
mod mechanism;
mod solve;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{structural, Result};
use crate::mechanism::Valuation;
use crate::rational::{self, zero, RatStr, Rational};

pub use generate::{gen_instance, gen_multiunit_counterexample, InstanceKind, MultiunitCounterexample, PackingGenParams};
pub use mechanism::{
    IntegralMechanism, LpMechanism, PackingRounding, RoundedLpMechanism,
};
pub use solve::{
    check_pip_social_cost, residual_welfare, solve_packing_integral, solve_packing_lp, PackingSolution,
    SocialCostCheck,
};

impl Valuation for Vec<Rational> {
    fn scaled(&self, theta: &Rational) -> Self {
        self.iter().map(|x| x * theta).collect()
    }

    fn flat(&self, level: &Rational) -> Self {
        self.iter()
            .map(|x| if x.is_positive() { level.clone() } else { zero() })
            .collect()
    }

    fn max_value(&self) -> Rational {
        self.iter().fold(zero(), |m, x| rational::max(&m, x))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PackingWire", into = "PackingWire")]
pub struct PackingInstance {
    pub n: usize,
    pub k: usize,
    pub l: usize,
    /// `values[i][k]`.
    pub values: Vec<Vec<Rational>>,
    /// `a[row][i][k]`.
    pub a: Vec<Vec<Vec<Rational>>>,
    pub c: Vec<Rational>,
}

#[derive(Serialize, Deserialize)]
struct PackingWire {
    n: usize,
    #[serde(rename = "K")]
    k: usize,
    #[serde(rename = "L")]
    l: usize,
    values: Vec<Vec<RatStr>>,
    #[serde(rename = "A")]
    a: Vec<Vec<Vec<RatStr>>>,
    c: Vec<RatStr>,
}

impl TryFrom<PackingWire> for PackingInstance {
    type Error = crate::Error;

    fn try_from(w: PackingWire) -> Result<Self> {
        let inst = PackingInstance {
            n: w.n,
            k: w.k,
            l: w.l,
            values: w.values.into_iter().map(rational::from_wire).collect(),
            a: w
                .a
                .into_iter()
                .map(|row| row.into_iter().map(rational::from_wire).collect())
                .collect(),
            c: rational::from_wire(w.c),
        };
        inst.validate()?;
        Ok(inst)
    }
}

impl From<PackingInstance> for PackingWire {
    fn from(p: PackingInstance) -> Self {
        PackingWire {
            n: p.n,
            k: p.k,
            l: p.l,
            values: p.values.iter().map(|r| rational::to_wire(r)).collect(),
            a: p.a.iter().map(|row| row.iter().map(|r| rational::to_wire(r)).collect()).collect(),
            c: rational::to_wire(&p.c),
        }
    }
}

impl PackingInstance {
    pub fn new(values: Vec<Vec<Rational>>, a: Vec<Vec<Vec<Rational>>>, c: Vec<Rational>) -> Result<Self> {
        let inst = PackingInstance {
            n: values.len(),
            k: values.first().map_or(0, Vec::len),
            l: c.len(),
            values,
            a,
            c,
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.len() != self.n || self.values.iter().any(|r| r.len() != self.k) {
            return Err(structural(format!("values must be {}x{}", self.n, self.k)));
        }
        if self.a.len() != self.l || self.c.len() != self.l {
            return Err(structural(format!("A and c must have {} rows", self.l)));
        }
        for (row, block) in self.a.iter().enumerate() {
            if block.len() != self.n || block.iter().any(|r| r.len() != self.k) {
                return Err(structural(format!("A row {row} must be {}x{}", self.n, self.k)));
            }
            if block.iter().flatten().any(|x| x.is_negative()) {
                return Err(structural(format!("A row {row} has a negative entry")));
            }
        }
        if self.values.iter().flatten().any(|x| x.is_negative()) {
            return Err(structural("values must be nonnegative"));
        }
        if self.c.iter().any(|x| !x.is_positive()) {
            return Err(structural("capacities must be positive"));
        }
        Ok(())
    }

    pub fn check_bids(&self, bids: &[Vec<Rational>]) -> Result<()> {
        if bids.len() != self.n || bids.iter().any(|b| b.len() != self.k) {
            return Err(structural(format!("bids must be {}x{}", self.n, self.k)));
        }
        if bids.iter().flatten().any(|x| x.is_negative()) {
            return Err(structural("bids must be nonnegative"));
        }
        Ok(())
    }

    /// Rows touched by option `k` of player `i`.
    pub fn support(&self, i: usize, k: usize) -> Vec<usize> {
        (0..self.l).filter(|&row| !self.a[row][i][k].is_zero()).collect()
    }

    /// `(A x)_row` restricted to player `i`'s share.
    pub fn usage(&self, x: &PackingAllocation, only: Option<usize>) -> Vec<Rational> {
        (0..self.l)
            .map(|row| {
                let mut total = zero();
                for i in (0..self.n).filter(|i| only.map_or(true, |o| o == *i)) {
                    for k in 0..self.k {
                        total += &self.a[row][i][k] * &x.x[i][k];
                    }
                }
                total
            })
            .collect()
    }

    pub fn is_feasible(&self, x: &PackingAllocation) -> bool {
        if x.x.len() != self.n || x.x.iter().any(|r| r.len() != self.k) {
            return false;
        }
        let bounded = x.x.iter().all(|r| {
            r.iter().all(|v| !v.is_negative() && *v <= rational::one()) && rational::sum(r) <= rational::one()
        });
        let binary = !x.integral || x.x.iter().flatten().all(|v| v.is_zero() || *v == rational::one());
        bounded && binary && self.usage(x, None).iter().zip(&self.c).all(|(u, c)| u <= c)
    }
}

/// Maximum number of capacity rows a single option touches.
pub fn column_sparsity(inst: &PackingInstance) -> usize {
    (0..inst.n)
        .flat_map(|i| (0..inst.k).map(move |k| (i, k)))
        .map(|(i, k)| inst.support(i, k).len())
        .max()
        .unwrap_or(0)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PackingAllocation {
    /// `x[i][k]` in `[0, 1]`.
    pub x: Vec<Vec<Rational>>,
    pub integral: bool,
}

impl PackingAllocation {
    pub fn zero(n: usize, k: usize) -> Self {
        Self {
            x: vec![vec![zero(); k]; n],
            integral: true,
        }
    }

    /// `sum_k v_k x_{i,k}`.
    pub fn value(&self, i: usize, v: &[Rational]) -> Rational {
        self.x[i].iter().zip(v).map(|(x, v)| x * v).sum()
    }

    pub fn welfare(&self, values: &[Vec<Rational>]) -> Rational {
        (0..self.x.len()).map(|i| self.value(i, &values[i])).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    fn ints(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| int(x)).collect()
    }

    #[test]
    fn sparsity_examples() {
        let mu = PackingInstance::new(vec![ints(&[1, 2]); 3], vec![vec![ints(&[1, 2]); 3]], ints(&[2])).unwrap();
        assert_eq!(column_sparsity(&mu), 1);

        let zero_a = PackingInstance::new(vec![ints(&[1])], vec![vec![ints(&[0])]], ints(&[1])).unwrap();
        assert_eq!(column_sparsity(&zero_a), 0);

        let two = PackingInstance::new(
            vec![ints(&[1, 1])],
            vec![vec![ints(&[1, 0])], vec![ints(&[1, 1])]],
            ints(&[1, 1]),
        )
        .unwrap();
        assert_eq!(column_sparsity(&two), 2);
    }

    #[test]
    fn json_round_trip() {
        let inst = PackingInstance::new(
            vec![vec![rational::ratio(1, 2), int(3)]],
            vec![vec![ints(&[1, 2])]],
            ints(&[2]),
        )
        .unwrap();
        let s = serde_json::to_string(&inst).unwrap();
        assert!(s.contains("\"K\":2") && s.contains("\"1/2\""));
        let back: PackingInstance = serde_json::from_str(&s).unwrap();
        assert_eq!(back, inst);
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(PackingInstance::new(vec![ints(&[1])], vec![vec![ints(&[-1])]], ints(&[1])).is_err());
        assert!(PackingInstance::new(vec![ints(&[1])], vec![vec![ints(&[1])]], ints(&[0])).is_err());
        assert!(PackingInstance::new(vec![ints(&[1])], vec![], ints(&[1])).is_err());
        let bad = r#"{"n":1,"K":1,"L":1,"values":[["1"]],"A":[[["1","2"]]],"c":["1"]}"#;
        assert!(serde_json::from_str::<PackingInstance>(bad).is_err());
    }
}
