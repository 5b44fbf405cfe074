use num_traits::{Signed, Zero};

use super::{column_sparsity, PackingAllocation, PackingInstance};
use crate::error::{precondition, structural, Error, Result};
use crate::rational::{int, one, zero, Rational};
use crate::solver::{solve_choice_program, solve_lp, ChoiceOption, ChoiceProgram, LinearProgram, LpStatus};

#[derive(Clone, Debug, PartialEq)]
pub struct PackingSolution {
    pub allocation: PackingAllocation,
    pub welfare: Rational,
}

fn lp_over(inst: &PackingInstance, bids: &[Vec<Rational>], players: &[usize], caps: &[Rational]) -> Result<PackingSolution> {
    let k = inst.k;
    let var = |slot: usize, opt: usize| slot * k + opt;
    let mut objective = vec![zero(); players.len() * k];
    for (slot, &i) in players.iter().enumerate() {
        for opt in 0..k {
            objective[var(slot, opt)] = bids[i][opt].clone();
        }
    }
    let mut lp = LinearProgram::new(objective);
    for slot in 0..players.len() {
        let row: Vec<(usize, Rational)> = (0..k).map(|opt| (var(slot, opt), one())).collect();
        lp.push_sparse(&row, one());
    }
    for (row, cap) in caps.iter().enumerate() {
        let entries: Vec<(usize, Rational)> = players
            .iter()
            .enumerate()
            .flat_map(|(slot, &i)| (0..k).map(move |opt| (slot, i, opt)))
            .filter(|&(_, i, opt)| !inst.a[row][i][opt].is_zero())
            .map(|(slot, i, opt)| (var(slot, opt), inst.a[row][i][opt].clone()))
            .collect();
        if !entries.is_empty() {
            lp.push_sparse(&entries, cap.clone());
        }
    }
    let sol = solve_lp(&lp)?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::Infeasible(format!("packing LP status {:?}", sol.status)));
    }
    let mut x = vec![vec![zero(); k]; inst.n];
    for (slot, &i) in players.iter().enumerate() {
        for opt in 0..k {
            x[i][opt] = sol.assignment[var(slot, opt)].clone();
        }
    }
    let integral = x.iter().flatten().all(|v| v.is_integer());
    Ok(PackingSolution {
        allocation: PackingAllocation { x, integral },
        welfare: sol.value,
    })
}

/// Fractional declared-welfare maximizer `W^b(c)`.
pub fn solve_packing_lp(inst: &PackingInstance, bids: &[Vec<Rational>]) -> Result<PackingSolution> {
    inst.check_bids(bids)?;
    let all: Vec<usize> = (0..inst.n).collect();
    lp_over(inst, bids, &all, &inst.c)
}

/// Integral declared-welfare maximizer. Ties go to the lexicographically
/// smallest choice vector with players in index order and each player's
/// options ordered `0 < 1 < ... < K-1 < unserved`.
pub fn solve_packing_integral(inst: &PackingInstance, bids: &[Vec<Rational>]) -> Result<PackingSolution> {
    inst.check_bids(bids)?;
    let prog = ChoiceProgram {
        capacities: inst.c.clone(),
        players: (0..inst.n)
            .map(|i| {
                (0..inst.k)
                    .map(|opt| ChoiceOption {
                        value: bids[i][opt].clone(),
                        usage: inst.support(i, opt).into_iter().map(|row| (row, inst.a[row][i][opt].clone())).collect(),
                    })
                    .collect()
            })
            .collect(),
    };
    let sol = solve_choice_program(&prog)?;
    let mut alloc = PackingAllocation::zero(inst.n, inst.k);
    for (i, choice) in sol.choices.iter().enumerate() {
        if let Some(opt) = choice {
            alloc.x[i][*opt] = one();
        }
    }
    Ok(PackingSolution {
        allocation: alloc,
        welfare: sol.value,
    })
}

/// `W^{b_-i}(c')`: LP optimum without player `excluded` under capacities `caps`.
pub fn residual_welfare(inst: &PackingInstance, bids: &[Vec<Rational>], excluded: usize, caps: &[Rational]) -> Result<Rational> {
    inst.check_bids(bids)?;
    if excluded >= inst.n {
        return Err(structural(format!("player {excluded} out of range")));
    }
    if caps.len() != inst.l {
        return Err(structural(format!("expected {} capacities", inst.l)));
    }
    if caps.iter().any(|c| c.is_negative()) {
        return Err(structural("reduced capacities must be nonnegative"));
    }
    let others: Vec<usize> = (0..inst.n).filter(|&i| i != excluded).collect();
    Ok(lp_over(inst, bids, &others, caps)?.welfare)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SocialCostCheck {
    pub holds: bool,
    pub lhs: Rational,
    pub rhs: Rational,
}

/// `sum_i (W^{b_-i}(c) - W^{b_-i}(c - A(x_i, 0))) <= (d + 1) W^b(c)`.
pub fn check_pip_social_cost(inst: &PackingInstance, bids: &[Vec<Rational>], xbar: &PackingAllocation) -> Result<SocialCostCheck> {
    inst.check_bids(bids)?;
    if !inst.is_feasible(xbar) {
        return Err(precondition("x-bar is not a feasible fractional allocation"));
    }
    let mut lhs = zero();
    for i in 0..inst.n {
        let used = inst.usage(xbar, Some(i));
        let reduced: Vec<Rational> = inst.c.iter().zip(&used).map(|(c, u)| c - u).collect();
        lhs += residual_welfare(inst, bids, i, &inst.c)? - residual_welfare(inst, bids, i, &reduced)?;
    }
    let d = column_sparsity(inst);
    let rhs = int(d as i64 + 1) * solve_packing_lp(inst, bids)?.welfare;
    Ok(SocialCostCheck { holds: lhs <= rhs, lhs, rhs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::packing::gen_multiunit_counterexample;

    #[test]
    fn single_option() {
        let inst = PackingInstance::new(vec![vec![int(3)]], vec![vec![vec![int(1)]]], vec![int(1)]).unwrap();
        let s = solve_packing_lp(&inst, &[vec![int(3)]]).unwrap();
        assert_eq!(s.welfare, int(3));
        assert_eq!(s.allocation.x, vec![vec![int(1)]]);
        assert_eq!(residual_welfare(&inst, &[vec![int(3)]], 0, &inst.c).unwrap(), int(0));
    }

    #[test]
    fn counterexample_solves() {
        let ce = gen_multiunit_counterexample(4).unwrap();
        let inst = &ce.instance;
        assert_eq!(solve_packing_lp(inst, &inst.values).unwrap().welfare, int(4));
        assert_eq!(solve_packing_integral(inst, &inst.values).unwrap().welfare, int(4));
        let eq = solve_packing_integral(inst, &ce.bids).unwrap();
        assert_eq!(eq.allocation.welfare(&inst.values), int(2));
        assert_eq!(eq.allocation.x[4][3], int(1));
        assert_eq!(residual_welfare(inst, &inst.values, 0, &inst.c).unwrap(), crate::rational::ratio(7, 2));
        assert_eq!(residual_welfare(inst, &inst.values, 0, &[int(0)]).unwrap(), int(0));
    }

    #[test]
    fn zero_bids_pick_first() {
        let inst = PackingInstance::new(vec![vec![int(1)]; 2], vec![vec![vec![int(1)]; 2]], vec![int(1)]).unwrap();
        let s = solve_packing_integral(&inst, &[vec![int(0)], vec![int(0)]]).unwrap();
        assert_eq!(s.welfare, int(0));
        assert_eq!(s.allocation.x, vec![vec![int(1)], vec![int(0)]]);
    }

    #[test]
    fn social_cost_zero_allocation() {
        let ce = gen_multiunit_counterexample(3).unwrap();
        let inst = &ce.instance;
        let r = check_pip_social_cost(inst, &inst.values, &PackingAllocation::zero(inst.n, inst.k)).unwrap();
        assert_eq!(r.lhs, int(0));
        assert!(r.holds);
        let mut bad = PackingAllocation::zero(inst.n, inst.k);
        bad.x[0][0] = int(2);
        assert!(matches!(check_pip_social_cost(inst, &inst.values, &bad), Err(Error::Precondition(_))));
    }

    #[test]
    fn negative_capacity_rejected() {
        let ce = gen_multiunit_counterexample(2).unwrap();
        let inst = &ce.instance;
        assert!(residual_welfare(inst, &inst.values, 0, &[int(-1)]).is_err());
    }
}
