use num_traits::{Signed, Zero};
use super::{ItemSet, MPHkValuation, SetValuation};
use crate::error::{precondition, structural, Error, Result};
use crate::mechanism::{Domain, Mechanism, OutcomeSpace};
use crate::rational::{int, one, zero, Rational};
use crate::solver::{solve_lp, LinearProgram, LpStatus};

/// Item guard for enumerating all `2^m` bundles.
pub const CONFIG_LP_ITEM_LIMIT: usize = 10;

/// Sparse `x_{i,S}`: nonzero entries per player, sorted by bundle.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ConfigLpSolution {
    pub m: usize,
    pub x: Vec<Vec<(ItemSet, Rational)>>,
}

impl ConfigLpSolution {
    pub fn zero(n: usize, m: usize) -> Self {
        ConfigLpSolution { m, x: vec![Vec::new(); n] }
    }

    /// `sum_{S containing j} x_{i,S}` for every item `j`.
    pub fn item_usage(&self, i: usize) -> Vec<Rational> {
        let mut u = vec![zero(); self.m];
        for (s, v) in &self.x[i] {
            for (j, slot) in u.iter_mut().enumerate() {
                if s >> j & 1 == 1 {
                    *slot += v;
                }
            }
        }
        u
    }

    pub fn is_feasible(&self) -> bool {
        let full: ItemSet = if self.m >= 32 { ItemSet::MAX } else { (1 << self.m) - 1 };
        let per_player = self.x.iter().all(|row| {
            row.iter().all(|(s, v)| !v.is_negative() && s & !full == 0) && row.iter().map(|(_, v)| v).sum::<Rational>() <= one()
        });
        let mut items = vec![zero(); self.m];
        for i in 0..self.x.len() {
            for (slot, u) in items.iter_mut().zip(self.item_usage(i)) {
                *slot += u;
            }
        }
        per_player && items.iter().all(|u| *u <= one())
    }

    pub fn value<V: SetValuation + ?Sized>(&self, i: usize, v: &V) -> Rational {
        self.x[i].iter().map(|(s, x)| x * v.eval(*s)).sum()
    }
}

/// Configuration LP over `players` with per-item capacities `caps`.
/// Bundles a player values at zero are left out.
pub fn solve_config_lp_with<V: SetValuation>(bids: &[V], m: usize, players: &[usize], caps: &[Rational]) -> Result<(ConfigLpSolution, Rational)> {
    if m > CONFIG_LP_ITEM_LIMIT {
        return Err(Error::SizeGuard {
            what: "configuration LP items",
            actual: m,
            limit: CONFIG_LP_ITEM_LIMIT,
        });
    }
    if caps.len() != m || caps.iter().any(|c| c.is_negative()) {
        return Err(structural(format!("expected {m} nonnegative item capacities")));
    }
    let mut vars: Vec<(usize, ItemSet)> = Vec::new();
    let mut objective = Vec::new();
    for &i in players {
        for s in 1..(1 as ItemSet) << m {
            let b = bids[i].eval(s);
            if b.is_negative() {
                return Err(structural(format!("bid of player {i} is negative on {s:#b}")));
            }
            if b.is_positive() {
                vars.push((i, s));
                objective.push(b);
            }
        }
    }
    let mut out = ConfigLpSolution::zero(bids.len(), m);
    if vars.is_empty() {
        return Ok((out, zero()));
    }
    let mut lp = LinearProgram::new(objective);
    for &i in players {
        let row: Vec<(usize, Rational)> = vars.iter().enumerate().filter(|(_, v)| v.0 == i).map(|(c, _)| (c, one())).collect();
        if !row.is_empty() {
            lp.push_sparse(&row, one());
        }
    }
    for (j, cap) in caps.iter().enumerate() {
        let row: Vec<(usize, Rational)> = vars.iter().enumerate().filter(|(_, v)| v.1 >> j & 1 == 1).map(|(c, _)| (c, one())).collect();
        if !row.is_empty() {
            lp.push_sparse(&row, cap.clone());
        }
    }
    let sol = solve_lp(&lp)?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::Infeasible(format!("configuration LP status {:?}", sol.status)));
    }
    for (&(i, s), x) in vars.iter().zip(sol.assignment) {
        if !x.is_zero() {
            out.x[i].push((s, x));
        }
    }
    Ok((out, sol.value))
}

/// `W^b(1)` and a maximizer.
pub fn solve_config_lp<V: SetValuation>(bids: &[V], m: usize) -> Result<(ConfigLpSolution, Rational)> {
    let all: Vec<usize> = (0..bids.len()).collect();
    solve_config_lp_with(bids, m, &all, &vec![one(); m])
}

#[derive(Clone, Debug, PartialEq)]
pub struct CaSocialCost {
    pub holds: bool,
    pub lhs: Rational,
    pub rhs: Rational,
}

/// `sum_i (W^{b_-i}(1) - W^{b_-i}(1 - x_i)) <= (k + 1) W^b(1)` where `x_i`
/// is player `i`'s per-item usage under `x`.
pub fn check_ca_social_cost<V: SetValuation>(bids: &[V], x: &ConfigLpSolution, k: usize) -> Result<CaSocialCost> {
    if x.x.len() != bids.len() {
        return Err(structural(format!("solution has {} players, bids {}", x.x.len(), bids.len())));
    }
    if !x.is_feasible() {
        return Err(precondition("x is not a feasible configuration LP point"));
    }
    let m = x.m;
    let (_, w) = solve_config_lp(bids, m)?;
    let mut lhs = zero();
    for i in 0..bids.len() {
        let others: Vec<usize> = (0..bids.len()).filter(|&p| p != i).collect();
        let (_, full) = solve_config_lp_with(bids, m, &others, &vec![one(); m])?;
        let caps: Vec<Rational> = x.item_usage(i).into_iter().map(|u| one() - u).collect();
        let (_, residual) = solve_config_lp_with(bids, m, &others, &caps)?;
        lhs += full - residual;
    }
    let rhs = int(k as i64 + 1) * w;
    Ok(CaSocialCost {
        holds: lhs <= rhs,
        lhs,
        rhs,
    })
}

/// Pay-your-bid mechanism that outputs the configuration LP optimum.
#[derive(Clone, Debug)]
pub struct ConfigLpMechanism {
    pub n: usize,
    pub m: usize,
}

impl Mechanism for ConfigLpMechanism {
    type Bid = MPHkValuation;
    type Relaxed = ConfigLpSolution;
    type Outcome = ConfigLpSolution;

    fn domain(&self) -> Domain {
        Domain::Auctions
    }

    fn num_players(&self) -> usize {
        self.n
    }

    fn space(&self) -> OutcomeSpace {
        OutcomeSpace::Relaxed
    }

    fn is_exact_maximizer(&self) -> bool {
        true
    }

    fn relax(&self, bids: &[MPHkValuation]) -> Result<ConfigLpSolution> {
        Ok(solve_config_lp(bids, self.m)?.0)
    }

    fn round(&self, relaxed: &ConfigLpSolution, _seed: u64) -> Result<ConfigLpSolution> {
        Ok(relaxed.clone())
    }

    fn value(&self, player: usize, valuation: &MPHkValuation, outcome: &ConfigLpSolution) -> Rational {
        outcome.value(player, valuation)
    }

    fn optimal_welfare(&self, values: &[MPHkValuation]) -> Result<Rational> {
        Ok(solve_config_lp(values, self.m)?.1)
    }
}
