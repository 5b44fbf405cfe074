//! Exact (or seeded statistical) verification of smoothness inequalities and
//! pure Nash equilibria for pay-your-bid mechanisms.

use serde::Serialize;

use super::{Domain, Mechanism, SmoothnessParams, Valuation};
use crate::error::{structural, Result};
use crate::rational::{self, int, ratio, zero, RatStr, Rational};

/// Largest outcome support enumerated exactly; beyond this expectations are
/// sampled.
pub const ENUMERATION_LIMIT: usize = 10_000;

#[derive(Clone, Debug)]
pub struct CheckOptions {
    /// Samples per randomized evaluation when the support is too large.
    pub samples: usize,
    pub seed: u64,
    /// Resolution of the scaled-bid search used in general mode.
    pub general_grid: usize,
    pub enumeration_limit: usize,
}

impl Default for CheckOptions {
    fn default() -> Self {
        Self {
            samples: 10_000,
            seed: 0,
            general_grid: 20,
            enumeration_limit: ENUMERATION_LIMIT,
        }
    }
}

/// Expected per-player values and payments of one bid profile.
#[derive(Clone, Debug)]
pub struct Expected {
    pub values: Vec<Rational>,
    pub payments: Vec<Rational>,
    pub exact: bool,
}

impl Expected {
    pub fn utility(&self, i: usize) -> Rational {
        &self.values[i] - &self.payments[i]
    }

    pub fn welfare(&self) -> Rational {
        rational::sum(&self.values)
    }
}

pub fn expected_run<M: Mechanism>(f: &M, bids: &[M::Bid], values: &[M::Bid], opts: &CheckOptions) -> Result<Expected> {
    f.check_profile(bids)?;
    f.check_profile(values)?;
    let n = f.num_players();
    let relaxed = f.relax(bids)?;
    let mut vals = vec![zero(); n];
    let mut pays = vec![zero(); n];
    if let Some(lottery) = f.lottery(&relaxed, opts.enumeration_limit)? {
        for (p, outcome) in &lottery {
            for i in 0..n {
                vals[i] += p * f.value(i, &values[i], outcome);
                pays[i] += p * f.value(i, &bids[i], outcome);
            }
        }
        return Ok(Expected {
            values: vals,
            payments: pays,
            exact: true,
        });
    }
    let samples = opts.samples.max(1);
    for s in 0..samples {
        let outcome = f.round(&relaxed, opts.seed.wrapping_add(s as u64))?;
        for i in 0..n {
            vals[i] += f.value(i, &values[i], &outcome);
            pays[i] += f.value(i, &bids[i], &outcome);
        }
    }
    let w = ratio(1, samples as i64);
    for i in 0..n {
        vals[i] *= &w;
        pays[i] *= &w;
    }
    Ok(Expected {
        values: vals,
        payments: pays,
        exact: false,
    })
}

/// `{0, v/g, 2v/g, ..., v}`.
pub fn scaled_grid<V: Valuation>(v: &V, g: usize) -> Vec<V> {
    let g = g.max(1);
    (0..=g).map(|k| v.scaled(&ratio(k as i64, g as i64))).collect()
}

/// Per-player deviation sets: the scaled grid of the true valuation plus
/// flat bids at each of `levels`.
pub fn deviation_grid<V: Valuation>(values: &[V], g: usize, levels: &[Rational]) -> Vec<Vec<V>> {
    values
        .iter()
        .map(|v| {
            let mut grid = scaled_grid(v, g);
            grid.extend(levels.iter().map(|l| v.flat(l)));
            grid
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct SmoothnessCertificate {
    pub holds: bool,
    /// False when some expectation was estimated by sampling.
    pub exact: bool,
    /// Minimum of `LHS - RHS` over the grid.
    pub slack: Rational,
    /// `(value profile index, bid profile index)` attaining the minimum.
    pub worst: (usize, usize),
    /// Same as `worst`, present only when the inequality fails.
    pub witness: Option<(usize, usize)>,
    pub lhs: Rational,
    pub rhs: Rational,
    pub points: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct SmoothnessReport {
    pub domain: Domain,
    pub lambda: RatStr,
    pub mu: RatStr,
    pub deviation_mode: super::DeviationMode,
    pub grid: String,
    pub verdict: String,
    pub witness: Option<(usize, usize)>,
    pub slack: RatStr,
}

impl SmoothnessCertificate {
    pub fn report(&self, domain: Domain, p: &SmoothnessParams, grid: impl Into<String>) -> SmoothnessReport {
        let verdict = match (self.holds, self.exact) {
            (true, true) => "holds",
            (false, true) => "violated",
            (true, false) => "holds (statistical)",
            (false, false) => "violated (statistical)",
        };
        SmoothnessReport {
            domain,
            lambda: p.lambda.clone().into(),
            mu: p.mu.clone().into(),
            deviation_mode: p.mode,
            grid: grid.into(),
            verdict: verdict.to_string(),
            witness: self.witness,
            slack: self.slack.clone().into(),
        }
    }
}

/// Checks `sum_i E[u_i(b'_i, b_-i; v_i)] >= lambda * OPT(v) - mu * sum_i p_i(b)`
/// for every pair of a value profile and a bid profile.
pub fn check_smoothness<M: Mechanism>(
    f: &M,
    value_grid: &[Vec<M::Bid>],
    bid_grid: &[Vec<M::Bid>],
    p: &SmoothnessParams,
    opts: &CheckOptions,
) -> Result<SmoothnessCertificate> {
    if value_grid.is_empty() || bid_grid.is_empty() {
        return Err(structural("smoothness check needs nonempty value and bid grids"));
    }
    let n = f.num_players();
    let mut exact = true;
    let mut best: Option<(Rational, (usize, usize), Rational, Rational)> = None;
    let mut paid = Vec::with_capacity(bid_grid.len());
    for b in bid_grid {
        let e = expected_run(f, b, b, opts)?;
        exact &= e.exact;
        paid.push(rational::sum(&e.payments));
    }
    for (vi, v) in value_grid.iter().enumerate() {
        f.check_profile(v)?;
        let opt = f.optimal_welfare(v)?;
        let deviations: Vec<Vec<M::Bid>> = match p.mode {
            super::DeviationMode::HalfValue => v.iter().map(|x| vec![x.scaled(&ratio(1, 2))]).collect(),
            super::DeviationMode::General => v.iter().map(|x| scaled_grid(x, opts.general_grid)).collect(),
        };
        for (bi, b) in bid_grid.iter().enumerate() {
            let mut lhs = zero();
            for i in 0..n {
                let mut top: Option<Rational> = None;
                for d in &deviations[i] {
                    let mut profile = b.clone();
                    profile[i] = d.clone();
                    let e = expected_run(f, &profile, v, opts)?;
                    exact &= e.exact;
                    let u = e.utility(i);
                    if top.as_ref().map_or(true, |t| u > *t) {
                        top = Some(u);
                    }
                }
                lhs += top.unwrap_or_else(zero);
            }
            let rhs = &p.lambda * &opt - &p.mu * &paid[bi];
            let slack = &lhs - &rhs;
            if best.as_ref().map_or(true, |(s, ..)| slack < *s) {
                best = Some((slack, (vi, bi), lhs, rhs));
            }
        }
    }
    let (slack, worst, lhs, rhs) = best.expect("grids are nonempty");
    let holds = slack >= zero();
    Ok(SmoothnessCertificate {
        holds,
        exact,
        slack,
        worst,
        witness: (!holds).then_some(worst),
        lhs,
        rhs,
        points: value_grid.len() * bid_grid.len(),
    })
}

#[derive(Clone, Debug)]
pub struct NashReport {
    pub is_nash: bool,
    pub max_regret: Rational,
    /// Best improving deviation per player as `(grid index, gain)`.
    pub best: Vec<Option<(usize, Rational)>>,
    pub exact: bool,
}

pub fn verify_pure_nash<M: Mechanism>(
    f: &M,
    bids: &[M::Bid],
    values: &[M::Bid],
    deviations: &[Vec<M::Bid>],
    opts: &CheckOptions,
) -> Result<NashReport> {
    let n = f.num_players();
    if !deviations.is_empty() && deviations.len() != n {
        return Err(structural(format!("deviation grid covers {} players, expected {n}", deviations.len())));
    }
    let base = expected_run(f, bids, values, opts)?;
    let mut exact = base.exact;
    let mut max_regret = zero();
    let mut best = vec![None; n];
    for (i, grid) in deviations.iter().enumerate() {
        let current = base.utility(i);
        for (k, d) in grid.iter().enumerate() {
            let mut profile = bids.to_vec();
            profile[i] = d.clone();
            let e = expected_run(f, &profile, values, opts)?;
            exact &= e.exact;
            let gain = e.utility(i) - &current;
            if gain > zero() && best[i].as_ref().map_or(true, |(_, g): &(usize, Rational)| gain > *g) {
                if gain > max_regret {
                    max_regret = gain.clone();
                }
                best[i] = Some((k, gain));
            }
        }
    }
    Ok(NashReport {
        is_nash: max_regret == int(0),
        max_regret,
        best,
        exact,
    })
}
