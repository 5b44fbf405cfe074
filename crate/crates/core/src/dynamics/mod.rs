//! Full-information Hedge over scaled-bid grids, with exact regret and
//! empirical price-of-anarchy bookkeeping.
//!
//! Player `i` playing `theta` bids `theta * v_i`. Each round samples a joint
//! profile from the players' weights, draws one rounding seed, and evaluates
//! every unilateral grid deviation against the same opponents and the same
//! seed. Weights are floats; utilities and regrets stay exact.

use std::collections::HashMap;

use num_traits::{Signed, Zero};
use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{precondition, structural, Result};
use crate::mechanism::{Mechanism, SmoothnessParams, Valuation};
use crate::rational::{self, half, int, one, ratio, to_f64, zero, Rational};

/// Bid multipliers per player. Every grid lies in `[0, 1]` and contains
/// `0` and `1/2`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrategyGrid {
    #[serde(with = "rational::matrix_as_str")]
    pub thetas: Vec<Vec<Rational>>,
}

impl StrategyGrid {
    pub fn new(thetas: Vec<Vec<Rational>>) -> Result<Self> {
        for (i, g) in thetas.iter().enumerate() {
            if g.iter().any(|t| t.is_negative() || *t > one()) {
                return Err(structural(format!("grid of player {i} leaves [0, 1]")));
            }
            if !g.contains(&zero()) || !g.contains(&half()) {
                return Err(structural(format!("grid of player {i} must contain 0 and 1/2")));
            }
        }
        Ok(Self { thetas })
    }

    /// `{0, 1/g, ..., 1}` for all `n` players; `g` must be even.
    pub fn uniform(n: usize, g: usize) -> Result<Self> {
        if g == 0 || g % 2 == 1 {
            return Err(structural("grid size must be even and positive"));
        }
        Self::new(vec![(0..=g as i64).map(|k| ratio(k, g as i64)).collect(); n])
    }

    pub fn half_index(&self, i: usize) -> Result<usize> {
        self.thetas[i]
            .iter()
            .position(|t| *t == half())
            .ok_or_else(|| precondition(format!("grid of player {i} lacks 1/2")))
    }
}

#[derive(Clone, Debug)]
pub struct HedgeConfig {
    pub rounds: usize,
    /// Defaults to `0.5 sqrt(ln |grid| / T)`.
    pub eta: Option<f64>,
    pub seed: u64,
    /// Initial log-weights per player and grid point.
    pub prior: Option<Vec<Vec<f64>>>,
}

impl HedgeConfig {
    pub fn new(rounds: usize, seed: u64) -> Self {
        Self {
            rounds,
            eta: None,
            seed,
            prior: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundRecord {
    /// Grid index played by each player.
    pub profile: Vec<usize>,
    pub seed: u64,
    #[serde(with = "rational::as_str")]
    pub welfare: Rational,
    #[serde(with = "rational::vec_as_str")]
    pub utilities: Vec<Rational>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlayTrace {
    pub grid: StrategyGrid,
    pub eta: f64,
    pub seed: u64,
    pub rounds: Vec<RoundRecord>,
    /// `cumulative[i][k]`: total utility player `i` would have had playing
    /// grid point `k` in every round against the recorded opponents.
    #[serde(with = "rational::matrix_as_str")]
    pub cumulative: Vec<Vec<Rational>>,
}

impl PlayTrace {
    pub fn len(&self) -> usize {
        self.rounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rounds.is_empty()
    }

    pub fn average_welfare(&self) -> Rational {
        if self.is_empty() {
            return zero();
        }
        self.rounds.iter().map(|r| &r.welfare).sum::<Rational>() / int(self.len() as i64)
    }

    fn realized(&self, i: usize) -> Rational {
        self.rounds.iter().map(|r| &r.utilities[i]).sum()
    }

    /// `(max_k cumulative[i][k] - realized_i) / T` per player.
    pub fn external_regret(&self) -> Vec<Rational> {
        let t = int(self.len().max(1) as i64);
        (0..self.cumulative.len())
            .map(|i| {
                let best = self.cumulative[i].iter().max().cloned().unwrap_or_else(zero);
                (best - self.realized(i)) / &t
            })
            .collect()
    }

    /// Regret against always bidding half the value, from the recorded
    /// counterfactuals.
    pub fn recorded_half_value_regret(&self) -> Result<Vec<Rational>> {
        let t = int(self.len().max(1) as i64);
        (0..self.cumulative.len())
            .map(|i| {
                let h = self.grid.half_index(i)?;
                Ok((&self.cumulative[i][h] - self.realized(i)) / &t)
            })
            .collect()
    }
}

/// Relaxations memoized by grid profile.
struct RelaxCache<'a, M: Mechanism> {
    f: &'a M,
    scaled: Vec<Vec<M::Bid>>,
    memo: HashMap<Vec<usize>, M::Relaxed>,
}

impl<'a, M: Mechanism> RelaxCache<'a, M> {
    fn new(f: &'a M, values: &[M::Bid], grid: &StrategyGrid) -> Self {
        let scaled = values
            .iter()
            .zip(&grid.thetas)
            .map(|(v, g)| g.iter().map(|t| v.scaled(t)).collect())
            .collect();
        Self {
            f,
            scaled,
            memo: HashMap::new(),
        }
    }

    fn bids(&self, profile: &[usize]) -> Vec<M::Bid> {
        profile.iter().enumerate().map(|(i, &k)| self.scaled[i][k].clone()).collect()
    }

    fn outcome(&mut self, profile: &[usize], seed: u64) -> Result<M::Outcome> {
        if !self.memo.contains_key(profile) {
            let relaxed = self.f.relax(&self.bids(profile))?;
            self.memo.insert(profile.to_vec(), relaxed);
        }
        self.f.round(&self.memo[profile], seed)
    }

    /// Utility of player `i` with true value `v` when `profile` is played.
    fn utility(&self, i: usize, v: &M::Bid, profile: &[usize], outcome: &M::Outcome) -> Rational {
        self.f.value(i, v, outcome) - self.f.value(i, &self.scaled[i][profile[i]], outcome)
    }
}

fn check_inputs<M: Mechanism>(f: &M, values: &[M::Bid], grid: &StrategyGrid) -> Result<()> {
    f.check_profile(values)?;
    if grid.thetas.len() != values.len() || grid.thetas.iter().any(Vec::is_empty) {
        return Err(structural("need a nonempty grid per player"));
    }
    Ok(())
}

/// Runs full-information Hedge for `cfg.rounds` rounds.
pub fn run_hedge<M: Mechanism>(f: &M, values: &[M::Bid], grid: &StrategyGrid, cfg: &HedgeConfig) -> Result<PlayTrace> {
    check_inputs(f, values, grid)?;
    if cfg.rounds == 0 {
        return Err(structural("need at least one round"));
    }
    let n = values.len();
    let sizes: Vec<usize> = grid.thetas.iter().map(Vec::len).collect();
    let max_size = *sizes.iter().max().expect("n >= 1");
    let eta = cfg
        .eta
        .unwrap_or_else(|| 0.5 * ((max_size as f64).ln() / cfg.rounds as f64).sqrt());
    if !(eta > 0.0) && max_size > 1 {
        return Err(structural("learning rate must be positive"));
    }
    let bounds: Vec<Rational> = values.iter().map(Valuation::max_value).collect();
    let mut logw: Vec<Vec<f64>> = match &cfg.prior {
        Some(p) if p.len() == n && p.iter().zip(&sizes).all(|(r, &s)| r.len() == s) => p.clone(),
        Some(_) => return Err(structural("prior must match the grid shape")),
        None => sizes.iter().map(|&s| vec![0.0; s]).collect(),
    };
    let mut cache = RelaxCache::new(f, values, grid);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut cumulative: Vec<Vec<Rational>> = sizes.iter().map(|&s| vec![zero(); s]).collect();
    let mut rounds = Vec::with_capacity(cfg.rounds);

    for _ in 0..cfg.rounds {
        let profile: Vec<usize> = logw
            .iter()
            .map(|lw| {
                let top = lw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let w: Vec<f64> = lw.iter().map(|x| (x - top).exp()).collect();
                WeightedIndex::new(&w).expect("weights are positive").sample(&mut rng)
            })
            .collect();
        let seed: u64 = rng.gen();
        let realized = cache.outcome(&profile, seed)?;
        let utilities: Vec<Rational> = (0..n).map(|i| cache.utility(i, &values[i], &profile, &realized)).collect();
        let welfare: Rational = (0..n).map(|i| f.value(i, &values[i], &realized)).sum();

        for i in 0..n {
            let mut dev = profile.clone();
            for k in 0..sizes[i] {
                let u = if k == profile[i] {
                    utilities[i].clone()
                } else {
                    dev[i] = k;
                    let o = cache.outcome(&dev, seed)?;
                    cache.utility(i, &values[i], &dev, &o)
                };
                if u.abs() > bounds[i] {
                    return Err(structural(format!("utility of player {i} exceeds its bound")));
                }
                if bounds[i].is_positive() {
                    logw[i][k] += eta * to_f64(&(&u / &bounds[i]));
                }
                cumulative[i][k] += u;
            }
        }
        rounds.push(RoundRecord {
            profile,
            seed,
            welfare,
            utilities,
        });
    }
    Ok(PlayTrace {
        grid: grid.clone(),
        eta,
        seed: cfg.seed,
        rounds,
        cumulative,
    })
}

/// `(1/T) sum_t [u_i((v_i / 2, b_-i,t), v_i) - u_i(b_t, v_i)]`, re-evaluated
/// with the recorded seeds.
pub fn half_value_regret<M: Mechanism>(f: &M, values: &[M::Bid], trace: &PlayTrace) -> Result<Vec<Rational>> {
    check_inputs(f, values, &trace.grid)?;
    let n = values.len();
    let halves = (0..n).map(|i| trace.grid.half_index(i)).collect::<Result<Vec<_>>>()?;
    let mut cache = RelaxCache::new(f, values, &trace.grid);
    let mut total = vec![zero(); n];
    for r in &trace.rounds {
        let realized = cache.outcome(&r.profile, r.seed)?;
        for i in 0..n {
            let mut dev = r.profile.clone();
            dev[i] = halves[i];
            let o = cache.outcome(&dev, r.seed)?;
            total[i] += cache.utility(i, &values[i], &dev, &o) - cache.utility(i, &values[i], &r.profile, &realized);
        }
    }
    let t = int(trace.len().max(1) as i64);
    Ok(total.into_iter().map(|x| x / &t).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EmpiricalPoAReport {
    #[serde(with = "rational::as_str")]
    pub opt: Rational,
    #[serde(with = "rational::as_str")]
    pub average_welfare: Rational,
    /// `opt / average_welfare`; 1 when both vanish, `None` (infinite) when
    /// only the welfare does.
    pub ratio: Option<RatioStr>,
    #[serde(with = "rational::vec_as_str")]
    pub external_regret: Vec<Rational>,
    #[serde(with = "rational::vec_as_str")]
    pub half_value_regret: Vec<Rational>,
    pub bound: Option<RatioStr>,
}

/// Serializable rational wrapper used in optional report fields.
pub type RatioStr = rational::RatStr;

pub fn empirical_poa(trace: &PlayTrace, opt: &Rational, bound: Option<Rational>) -> Result<EmpiricalPoAReport> {
    if opt.is_negative() {
        return Err(precondition("OPT must be nonnegative"));
    }
    let average_welfare = trace.average_welfare();
    let ratio = match (opt.is_zero(), average_welfare.is_zero()) {
        (true, true) => Some(one()),
        (false, true) => None,
        _ => Some(opt / &average_welfare),
    };
    Ok(EmpiricalPoAReport {
        opt: opt.clone(),
        average_welfare,
        ratio: ratio.map(Into::into),
        external_regret: trace.external_regret(),
        half_value_regret: trace.recorded_half_value_regret()?,
        bound: bound.map(Into::into),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceSmoothness {
    pub holds: bool,
    pub lhs: Rational,
    pub rhs: Rational,
}

/// `avg welfare >= (lambda / mu) OPT - (sum_i half-value regret_i) / mu` for
/// half-value `(lambda, mu)` with `mu >= 1`.
pub fn check_trace_smoothness(report: &EmpiricalPoAReport, p: &SmoothnessParams) -> Result<TraceSmoothness> {
    if p.mu < one() {
        return Err(precondition("trace smoothness needs mu >= 1"));
    }
    let regret: Rational = report.half_value_regret.iter().sum();
    let rhs = &p.lambda / &p.mu * &report.opt - regret / &p.mu;
    Ok(TraceSmoothness {
        holds: report.average_welfare >= rhs,
        lhs: report.average_welfare.clone(),
        rhs,
    })
}

/// Hedge's external-regret guarantee `2 U sqrt(T ln |grid|) / T`.
pub fn hedge_regret_bound(u_max: f64, rounds: usize, grid_size: usize) -> f64 {
    2.0 * u_max * (rounds as f64 * (grid_size as f64).ln()).sqrt() / rounds as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::packing::{IntegralMechanism, PackingInstance};

    fn single_item(values: &[i64]) -> (IntegralMechanism, Vec<Vec<Rational>>) {
        let vals: Vec<Vec<Rational>> = values.iter().map(|&v| vec![int(v)]).collect();
        let inst = PackingInstance::new(vals.clone(), vec![vec![vec![int(1)]; values.len()]], vec![int(1)]).unwrap();
        (IntegralMechanism { instance: inst }, vals)
    }

    #[test]
    fn lone_bidder_learns_zero() {
        let (f, values) = single_item(&[1]);
        let grid = StrategyGrid::new(vec![vec![zero(), half(), one()]]).unwrap();
        let trace = run_hedge(&f, &values, &grid, &HedgeConfig::new(2000, 1)).unwrap();
        assert!(trace.rounds.iter().all(|r| r.welfare == int(1)));
        let last = &trace.rounds[1999];
        assert_eq!(last.profile, vec![0]);
        let report = empirical_poa(&trace, &int(1), None).unwrap();
        assert_eq!(report.ratio, Some(one().into()));
    }

    #[test]
    fn first_price_duopoly_regret() {
        let (f, values) = single_item(&[2, 1]);
        let grid = StrategyGrid::uniform(2, 20).unwrap();
        let t = 10_000;
        let trace = run_hedge(&f, &values, &grid, &HedgeConfig::new(t, 7)).unwrap();
        for (i, r) in trace.external_regret().iter().enumerate() {
            assert!(to_f64(r) <= 0.05 * to_f64(&values[0][0]), "{i}: {r}");
            assert!(to_f64(r) <= hedge_regret_bound(to_f64(&values[i][0]), t, 21));
        }
        let replay = half_value_regret(&f, &values, &trace).unwrap();
        assert_eq!(replay, trace.recorded_half_value_regret().unwrap());
        let report = empirical_poa(&trace, &int(2), None).unwrap();
        let p = SmoothnessParams::half_value(half(), one()).unwrap();
        assert!(check_trace_smoothness(&report, &p).unwrap().holds);
    }

    #[test]
    fn deterministic_and_serializable() {
        let (f, values) = single_item(&[3, 2]);
        let grid = StrategyGrid::uniform(2, 4).unwrap();
        let a = run_hedge(&f, &values, &grid, &HedgeConfig::new(50, 3)).unwrap();
        let b = run_hedge(&f, &values, &grid, &HedgeConfig::new(50, 3)).unwrap();
        let ja = serde_json::to_string(&a).unwrap();
        assert_eq!(ja, serde_json::to_string(&b).unwrap());
        let back: PlayTrace = serde_json::from_str(&ja).unwrap();
        assert_eq!(back.rounds, a.rounds);
    }

    #[test]
    fn degenerate_and_fixed_traces() {
        let (f, values) = single_item(&[0, 0]);
        let grid = StrategyGrid::uniform(2, 2).unwrap();
        let trace = run_hedge(&f, &values, &grid, &HedgeConfig::new(10, 0)).unwrap();
        assert!(trace.rounds.iter().all(|r| r.welfare.is_zero()));
        assert_eq!(empirical_poa(&trace, &zero(), None).unwrap().ratio, Some(one().into()));

        let (f, values) = single_item(&[4, 1]);
        let mut trace = run_hedge(&f, &values, &grid, &HedgeConfig::new(4, 0)).unwrap();
        for r in &mut trace.rounds {
            r.profile = vec![1, 0];
        }
        assert!(half_value_regret(&f, &values, &trace).unwrap()[0] <= zero());

        for r in &mut trace.rounds {
            r.profile = vec![0, 2];
        }
        // Player 0 bids 0 and loses to the full bid of 1; half its value (2) would win and pay 2.
        assert_eq!(half_value_regret(&f, &values, &trace).unwrap()[0], int(2));
    }

    #[test]
    fn alternating_welfare_ratio() {
        let trace = PlayTrace {
            grid: StrategyGrid::uniform(1, 2).unwrap(),
            eta: 0.1,
            seed: 0,
            rounds: (0..4)
                .map(|t| RoundRecord {
                    profile: vec![0],
                    seed: 0,
                    welfare: if t % 2 == 0 { zero() } else { int(3) },
                    utilities: vec![zero()],
                })
                .collect(),
            cumulative: vec![vec![zero(); 3]],
        };
        assert_eq!(empirical_poa(&trace, &int(3), None).unwrap().ratio, Some(int(2).into()));
        let silent = PlayTrace { rounds: trace.rounds.iter().map(|r| RoundRecord { welfare: zero(), ..r.clone() }).collect(), ..trace };
        assert_eq!(empirical_poa(&silent, &int(3), None).unwrap().ratio, None);
    }
}
