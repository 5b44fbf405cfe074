//! Symmetric valuations (value depends only on bundle size), the cardinality
//! LP, and coin-flip fair rounding.

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{ConfigLpSolution, ItemSet, SetValuation, CONFIG_LP_ITEM_LIMIT};
use crate::error::{precondition, structural, Error, Result};
use crate::mechanism::{Lottery, Mechanism};
use crate::packing::{IntegralMechanism, PackingAllocation, PackingInstance, PackingRounding, RoundedLpMechanism};
use crate::rational::{half, int, one, pick, uniform_unit, zero, RatStr, Rational};
use crate::solver::{solve_lp, LinearProgram, LpStatus};

/// `values[j]` is the value of any bundle of `j` items; `values[0] = 0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<RatStr>", into = "Vec<RatStr>")]
pub struct SymmetricValuation {
    pub values: Vec<Rational>,
}

impl TryFrom<Vec<RatStr>> for SymmetricValuation {
    type Error = crate::Error;

    fn try_from(v: Vec<RatStr>) -> Result<Self> {
        SymmetricValuation::new(v.into_iter().map(|r| r.0).collect())
    }
}

impl From<SymmetricValuation> for Vec<RatStr> {
    fn from(v: SymmetricValuation) -> Self {
        v.values.into_iter().map(RatStr).collect()
    }
}

impl SymmetricValuation {
    pub fn new(values: Vec<Rational>) -> Result<Self> {
        if values.len() < 2 {
            return Err(structural("symmetric valuation needs values for sizes 0..=m with m >= 1"));
        }
        if !values[0].is_zero() || values.iter().any(|v| v.is_negative()) {
            return Err(structural("symmetric values must be nonnegative with v_0 = 0"));
        }
        Ok(Self { values })
    }

    pub fn m(&self) -> usize {
        self.values.len() - 1
    }

    /// Per-option bids for the cardinality packing instance (option `k` is
    /// `k + 1` items).
    pub fn to_bids(&self) -> Vec<Rational> {
        self.values[1..].to_vec()
    }
}

impl SetValuation for SymmetricValuation {
    fn eval(&self, s: ItemSet) -> Rational {
        self.values[(s.count_ones() as usize).min(self.m())].clone()
    }
}

/// Cardinality packing instance: one row with coefficient `k + 1` on option
/// `k` and capacity `m`.
pub fn symmetric_instance(values: &[SymmetricValuation]) -> Result<PackingInstance> {
    let m = values.first().ok_or_else(|| structural("need at least one bidder"))?.m();
    if values.iter().any(|v| v.m() != m) {
        return Err(structural("all bidders must share m"));
    }
    let row: Vec<Rational> = (1..=m as i64).map(int).collect();
    PackingInstance::new(values.iter().map(SymmetricValuation::to_bids).collect(), vec![vec![row; values.len()]], vec![int(m as i64)])
}

pub fn random_symmetric(n: usize, m: usize, seed: u64) -> Result<Vec<SymmetricValuation>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let mut acc = 0;
            let mut values = vec![zero()];
            for _ in 0..m {
                acc += rng.gen_range(0..=4);
                values.push(int(acc));
            }
            SymmetricValuation::new(values)
        })
        .collect()
}

/// `x[i][j]` for `j in 0..=m`; column 0 is unused and kept at zero.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CardinalityLpSolution {
    pub m: usize,
    pub x: Vec<Vec<Rational>>,
}

impl CardinalityLpSolution {
    pub fn zero(n: usize, m: usize) -> Self {
        Self { m, x: vec![vec![zero(); m + 1]; n] }
    }

    pub fn is_feasible(&self) -> bool {
        let shaped = self.x.iter().all(|r| r.len() == self.m + 1 && r[0].is_zero() && r.iter().all(|v| !v.is_negative()));
        let per_player = self.x.iter().all(|r| r.iter().sum::<Rational>() <= one());
        let used: Rational = self.x.iter().flat_map(|r| r.iter().enumerate().map(|(j, v)| int(j as i64) * v)).sum();
        shaped && per_player && used <= int(self.m as i64)
    }

    pub fn value(&self, i: usize, v: &SymmetricValuation) -> Rational {
        self.x[i].iter().zip(&v.values).map(|(x, v)| x * v).sum()
    }

    fn from_packing(x: &PackingAllocation, m: usize) -> Self {
        Self {
            m,
            x: x.x.iter().map(|r| std::iter::once(zero()).chain(r.iter().cloned()).collect()).collect(),
        }
    }
}

/// `max sum b_{i,j} x_{i,j}` s.t. `sum j x_{i,j} <= m`, `sum_j x_{i,j} <= 1`.
pub fn solve_cardinality_lp(m: usize, bids: &[SymmetricValuation]) -> Result<(CardinalityLpSolution, Rational)> {
    if bids.iter().any(|b| b.m() != m) {
        return Err(structural(format!("bids must cover sizes 0..={m}")));
    }
    let n = bids.len();
    let var = |i: usize, j: usize| i * m + (j - 1);
    let objective = (0..n).flat_map(|i| (1..=m).map(move |j| (i, j))).map(|(i, j)| bids[i].values[j].clone()).collect();
    let mut lp = LinearProgram::new(objective);
    for i in 0..n {
        let row: Vec<(usize, Rational)> = (1..=m).map(|j| (var(i, j), one())).collect();
        lp.push_sparse(&row, one());
    }
    let row: Vec<(usize, Rational)> = (0..n).flat_map(|i| (1..=m).map(move |j| (var(i, j), int(j as i64)))).collect();
    lp.push_sparse(&row, int(m as i64));
    let sol = solve_lp(&lp)?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::Infeasible(format!("cardinality LP status {:?}", sol.status)));
    }
    let mut out = CardinalityLpSolution::zero(n, m);
    for i in 0..n {
        for j in 1..=m {
            out.x[i][j] = sol.assignment[var(i, j)].clone();
        }
    }
    Ok((out, sol.value))
}

/// `xbar_{i,j} = sum_{|S| = j} x_{i,S}`. Every bid must be symmetric on
/// `m` items.
pub fn to_cardinality<V: SetValuation>(x: &ConfigLpSolution, bids: &[V]) -> Result<CardinalityLpSolution> {
    let m = x.m;
    if m > CONFIG_LP_ITEM_LIMIT {
        return Err(Error::SizeGuard {
            what: "configuration LP items",
            actual: m,
            limit: CONFIG_LP_ITEM_LIMIT,
        });
    }
    for (i, b) in bids.iter().enumerate() {
        let mut by_size: Vec<Option<Rational>> = vec![None; m + 1];
        for s in 0..(1 as ItemSet) << m {
            let v = b.eval(s);
            let slot = &mut by_size[s.count_ones() as usize];
            match slot {
                Some(prev) if *prev != v => return Err(precondition(format!("bid of player {i} is not symmetric"))),
                _ => *slot = Some(v),
            }
        }
    }
    let mut out = CardinalityLpSolution::zero(x.x.len(), m);
    for (i, row) in x.x.iter().enumerate() {
        for (s, v) in row {
            out.x[i][s.count_ones() as usize] += v;
        }
    }
    Ok(out)
}

fn binomial(n: usize, k: usize) -> Rational {
    (0..k).fold(one(), |acc, t| acc * int((n - t) as i64) / int(t as i64 + 1))
}

/// Spreads each `xbar_{i,j}` uniformly over the `C(m, j)` bundles of size `j`.
pub fn to_configuration(xbar: &CardinalityLpSolution) -> Result<ConfigLpSolution> {
    let m = xbar.m;
    if m > CONFIG_LP_ITEM_LIMIT {
        return Err(Error::SizeGuard {
            what: "configuration LP items",
            actual: m,
            limit: CONFIG_LP_ITEM_LIMIT,
        });
    }
    let share: Vec<Rational> = (0..=m).map(|j| one() / binomial(m, j)).collect();
    let x = xbar
        .x
        .iter()
        .map(|row| {
            (1..(1 as ItemSet) << m)
                .filter_map(|s| {
                    let j = s.count_ones() as usize;
                    (!row[j].is_zero()).then(|| (s, &row[j] * &share[j]))
                })
                .collect()
        })
        .collect();
    Ok(ConfigLpSolution { m, x })
}

/// Per player, the sizes kept by one coin side with `Pr[Q_i = j] = q_{i,j} / 4`.
fn coin_menu(xbar: &CardinalityLpSolution, heads: bool) -> Vec<Vec<(usize, Rational)>> {
    let cut = xbar.m / 2;
    xbar.x
        .iter()
        .map(|row| {
            (1..=xbar.m)
                .filter(|&j| (j <= cut) == heads && !row[j].is_zero())
                .map(|j| (j, &row[j] / int(4)))
                .collect()
        })
        .collect()
}

fn alter(q: Vec<usize>, m: usize) -> Vec<usize> {
    if q.iter().sum::<usize>() <= m {
        q
    } else {
        vec![0; q.len()]
    }
}

/// The draws `Q_i` of [`fair_round`] before alteration: a coin picks small
/// (`j <= floor(m/2)`) or large sizes and each bidder draws independently.
pub fn fair_draw(xbar: &CardinalityLpSolution, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let heads = uniform_unit(&mut rng) < half();
    coin_menu(xbar, heads)
        .iter()
        .map(|options| {
            let u = uniform_unit(&mut rng);
            let probs: Vec<Rational> = options.iter().map(|(_, p)| p.clone()).collect();
            options.get(pick(&u, &probs)).map_or(0, |(j, _)| *j)
        })
        .collect()
}

/// [`fair_draw`], reset to all zeros if the draws overflow `m`. Returns the
/// bundle size per bidder; never reads values.
pub fn fair_round(xbar: &CardinalityLpSolution, seed: u64) -> Vec<usize> {
    alter(fair_draw(xbar, seed), xbar.m)
}

/// Exact distribution of [`fair_round`] with equal outcomes merged, or `None`
/// when more than `limit` draw combinations would be enumerated.
pub fn fair_lottery(xbar: &CardinalityLpSolution, limit: usize) -> Result<Option<Lottery<Vec<usize>>>> {
    let mut dist: BTreeMap<Vec<usize>, Rational> = BTreeMap::new();
    let mut budget = limit;
    for heads in [true, false] {
        let menus: Vec<Vec<(usize, Rational)>> = coin_menu(xbar, heads)
            .into_iter()
            .map(|mut options| {
                let rest = one() - options.iter().map(|(_, p)| p).sum::<Rational>();
                if rest.is_positive() {
                    options.push((0, rest));
                }
                options
            })
            .collect();
        let mut size: usize = 1;
        for options in &menus {
            size = match size.checked_mul(options.len()) {
                Some(s) if s <= budget => s,
                _ => return Ok(None),
            };
        }
        budget -= size;
        let mut idx = vec![0; menus.len()];
        loop {
            let p = idx.iter().zip(&menus).fold(half(), |acc, (&k, options)| acc * &options[k].1);
            let q = idx.iter().zip(&menus).map(|(&k, options)| options[k].0).collect();
            *dist.entry(alter(q, xbar.m)).or_insert_with(zero) += p;
            let mut t = 0;
            while t < idx.len() {
                idx[t] += 1;
                if idx[t] < menus[t].len() {
                    break;
                }
                idx[t] = 0;
                t += 1;
            }
            if t == idx.len() {
                break;
            }
        }
    }
    Ok(Some(dist.into_iter().map(|(r, p)| (p, r)).collect()))
}

/// Pre-alteration marginals `Pr[Q_i = j] = xbar_{i,j} / 8` for `j >= 1`;
/// column 0 holds the rest.
pub fn fair_marginals(xbar: &CardinalityLpSolution) -> Vec<Vec<Rational>> {
    xbar.x
        .iter()
        .map(|row| {
            let mut p: Vec<Rational> = row.iter().map(|x| x / int(8)).collect();
            p[0] = one() - p[1..].iter().sum::<Rational>();
            p
        })
        .collect()
}

/// Fair rounding as a packing rounding on [`symmetric_instance`]s.
#[derive(Clone, Copy, Debug, Default)]
pub struct FairRounding;

impl FairRounding {
    fn sizes(instance: &PackingInstance) -> Result<usize> {
        let m = instance.k;
        let shaped = instance.l == 1
            && instance.c[0] == int(m as i64)
            && instance.a[0].iter().all(|r| r.iter().enumerate().all(|(k, a)| *a == int(k as i64 + 1)));
        if !shaped {
            return Err(precondition("fair rounding needs a cardinality instance"));
        }
        Ok(m)
    }

    fn to_allocation(r: &[usize], m: usize) -> PackingAllocation {
        let mut out = PackingAllocation::zero(r.len(), m);
        for (i, &j) in r.iter().enumerate() {
            if j > 0 {
                out.x[i][j - 1] = one();
            }
        }
        out
    }
}

impl PackingRounding for FairRounding {
    fn alpha(&self) -> Rational {
        int(16)
    }

    fn round(&self, instance: &PackingInstance, x: &PackingAllocation, seed: u64) -> Result<PackingAllocation> {
        let m = Self::sizes(instance)?;
        Ok(Self::to_allocation(&fair_round(&CardinalityLpSolution::from_packing(x, m), seed), m))
    }

    fn lottery(&self, instance: &PackingInstance, x: &PackingAllocation, limit: usize) -> Result<Option<Lottery<PackingAllocation>>> {
        let m = Self::sizes(instance)?;
        Ok(fair_lottery(&CardinalityLpSolution::from_packing(x, m), limit)?
            .map(|l| l.into_iter().map(|(p, r)| (p, Self::to_allocation(&r, m))).collect()))
    }
}

/// Cardinality LP followed by fair rounding.
pub type SymmetricRelaxRound = RoundedLpMechanism<FairRounding>;
/// Exact integral allocation by bundle size.
pub type SymmetricIntegralMechanism = IntegralMechanism;

#[derive(Clone, Debug)]
pub struct SymmetricCounterexample {
    pub values: Vec<SymmetricValuation>,
    pub instance: PackingInstance,
    pub bids: Vec<Vec<Rational>>,
    pub optimum: Rational,
    pub equilibrium_welfare: Rational,
    pub ratio: Rational,
}

/// `m` items and `m + 2` bidders: the first `m` value any nonempty bundle
/// at 1 and bid 0; the last two value only the grand bundle at 2 and bid
/// truthfully.
pub fn gen_symmetric_counterexample(m: usize) -> Result<SymmetricCounterexample> {
    if m < 2 {
        return Err(structural("counterexample needs m >= 2"));
    }
    let small = SymmetricValuation::new(std::iter::once(zero()).chain(std::iter::repeat(one()).take(m)).collect())?;
    let mut big = vec![zero(); m + 1];
    big[m] = int(2);
    let big = SymmetricValuation::new(big)?;
    let mut values = vec![small; m];
    values.push(big.clone());
    values.push(big);
    let instance = symmetric_instance(&values)?;
    let truth: Vec<Vec<Rational>> = values.iter().map(SymmetricValuation::to_bids).collect();
    let mut bids = vec![vec![zero(); m]; m];
    bids.push(truth[m].clone());
    bids.push(truth[m + 1].clone());
    let f = IntegralMechanism { instance: instance.clone() };
    let optimum = f.optimal_welfare(&truth)?;
    let eq = f.allocate(&bids, 0)?;
    let equilibrium_welfare = eq.welfare(&truth);
    if equilibrium_welfare.is_zero() {
        return Err(structural("equilibrium welfare vanished"));
    }
    let ratio = &optimum / &equilibrium_welfare;
    Ok(SymmetricCounterexample {
        values,
        instance,
        bids,
        optimum,
        equilibrium_welfare,
        ratio,
    })
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::auctions::solve_config_lp;
    use crate::mechanism::{deviation_grid, expected_run, verify_pure_nash, CheckOptions};
    use crate::rational::ratio;

    fn sym(v: &[i64]) -> SymmetricValuation {
        SymmetricValuation::new(v.iter().map(|&x| int(x)).collect()).unwrap()
    }

    #[test]
    fn cardinality_lp_examples() {
        let (x, w) = solve_cardinality_lp(3, &[sym(&[0, 1, 2, 5])]).unwrap();
        assert_eq!(w, int(5));
        assert_eq!(x.x[0][3], int(1));
        let ce = gen_symmetric_counterexample(4).unwrap();
        assert_eq!(solve_cardinality_lp(4, &ce.values).unwrap().1, int(4));
        assert_eq!(solve_config_lp(&ce.values, 4).unwrap().1, int(4));
    }

    #[test]
    fn relaxations_agree() {
        for seed in 0..10 {
            let bids = random_symmetric(2, 3, seed).unwrap();
            let (xc, wc) = solve_config_lp(&bids, 3).unwrap();
            let (xk, wk) = solve_cardinality_lp(3, &bids).unwrap();
            assert_eq!(wc, wk);
            let down = to_cardinality(&xc, &bids).unwrap();
            assert!(down.is_feasible());
            assert_eq!((0..2).map(|i| down.value(i, &bids[i])).sum::<Rational>(), wc);
            let up = to_configuration(&xk).unwrap();
            assert!(up.is_feasible());
            assert_eq!((0..2).map(|i| up.value(i, &bids[i])).sum::<Rational>(), wk);
        }
        let x = ConfigLpSolution { m: 2, x: vec![vec![(0b01, int(1))]] };
        let additive = crate::auctions::MPHkValuation::additive(&[int(1), int(2)]).unwrap();
        assert!(to_cardinality(&x, &[additive]).is_err());
        assert_eq!(to_cardinality(&x, &[sym(&[0, 3, 4])]).unwrap().x[0], vec![int(0), int(1), int(0)]);
    }

    #[test]
    fn single_bidder_grand_bundle() {
        let mut xbar = CardinalityLpSolution::zero(1, 4);
        xbar.x[0][4] = int(1);
        let l = fair_lottery(&xbar, 100).unwrap().unwrap();
        let p: Rational = l.iter().filter(|(_, r)| r[0] == 4).map(|(p, _)| p.clone()).sum();
        assert_eq!(p, ratio(1, 8));
        assert!(fair_lottery(&CardinalityLpSolution::zero(2, 4), 100).unwrap().unwrap().iter().all(|(_, r)| r == &vec![0, 0]));
    }

    #[test]
    fn two_bidders_closed_form() {
        let mut xbar = CardinalityLpSolution::zero(2, 4);
        xbar.x[0][1] = int(1);
        xbar.x[1][4] = int(1);
        let l = fair_lottery(&xbar, 100).unwrap().unwrap();
        let get = |r: &[usize]| l.iter().find(|(_, o)| o == r).map(|(p, _)| p.clone()).unwrap_or_else(zero);
        assert_eq!(get(&[1, 0]), ratio(1, 8));
        assert_eq!(get(&[0, 4]), ratio(1, 8));
        assert_eq!(get(&[0, 0]), ratio(3, 4));
        let samples = 100_000u64;
        let mut hits = [0u64; 2];
        for seed in 0..samples {
            let r = fair_round(&xbar, seed);
            assert!(r.iter().sum::<usize>() <= 4);
            hits[0] += u64::from(r[0] == 1);
            hits[1] += u64::from(r[1] == 4);
        }
        for h in hits {
            let sigma = (samples as f64 * 0.125 * 0.875).sqrt();
            assert!((h as f64 - samples as f64 * 0.125).abs() <= 3.0 * sigma);
        }
    }

    #[test]
    fn counterexample() {
        let ce = gen_symmetric_counterexample(10).unwrap();
        assert_eq!(ce.ratio, int(5));
        assert_eq!(gen_symmetric_counterexample(2).unwrap().ratio, int(1));
        let ce = gen_symmetric_counterexample(4).unwrap();
        let f = IntegralMechanism { instance: ce.instance.clone() };
        let truth: Vec<Vec<Rational>> = ce.values.iter().map(SymmetricValuation::to_bids).collect();
        let grid = deviation_grid(&truth, 20, &[int(0), int(1), int(2)]);
        assert!(verify_pure_nash(&f, &ce.bids, &truth, &grid, &CheckOptions::default()).unwrap().is_nash);
    }

    #[test]
    fn relax_round_mechanism_runs_exactly() {
        let values = random_symmetric(2, 3, 5).unwrap();
        let instance = symmetric_instance(&values).unwrap();
        let f = SymmetricRelaxRound { instance, rounding: FairRounding };
        let truth: Vec<Vec<Rational>> = values.iter().map(SymmetricValuation::to_bids).collect();
        let e = expected_run(&f, &truth, &truth, &CheckOptions::default()).unwrap();
        assert!(e.exact);
        assert!(e.welfare() * int(16) >= solve_cardinality_lp(3, &values).unwrap().1);
    }
}
