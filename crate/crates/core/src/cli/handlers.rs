use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::Value;

use super::{load, Action, AuctionInstance, ExperimentConfig, Sink};
use crate::auctions::{
    check_ca_social_cost, fair_round, gen_symmetric_counterexample, random_mph_profile, random_symmetric,
    solve_cardinality_lp, solve_config_lp, symmetric_instance, ConfigLpMechanism, FairRounding, MPHkValuation,
    SymmetricIntegralMechanism, SymmetricRelaxRound, SymmetricValuation,
};
use crate::dynamics::{check_trace_smoothness, empirical_poa, run_hedge, HedgeConfig, StrategyGrid};
use crate::error::{Error, Result};
use crate::flow::{
    gen_flow_counterexample, gen_flow_instance, greedy_fractional_flow, rt_round, solve_path_lp, FlowGenParams,
    FlowInstance, GreedyFlowMechanism, IntegralFlowMechanism, RelaxRoundFlowMechanism, Request,
};
use crate::maxtsp::{
    check_cc_social_cost, check_half_edge_social_cost, fisher_lottery, fisher_round, half_edge_cover,
    max_weight_cycle_cover, max_weight_tour, CompleteDigraph, CycleCoverMechanism, FisherMechanism, HALF_EDGE_LIMIT,
};
use crate::mechanism::{
    check_smoothness, compose_smoothness, deviation_grid, poa_from_smoothness, scaled_grid, verify_pure_nash,
    CheckOptions, Mechanism, SmoothnessParams,
};
use crate::packing::{
    check_pip_social_cost, column_sparsity, gen_instance, gen_multiunit_counterexample, solve_packing_integral,
    solve_packing_lp, InstanceKind, IntegralMechanism, LpMechanism, PackingAllocation, PackingGenParams,
    PackingInstance, PackingRounding,
};
use crate::rational::{self, half, int, one, ratio, zero, Rational};
use crate::solver::CapacitatedDigraph;

/// Largest bid-profile product enumerated by `check-smoothness`.
const PROFILE_LIMIT: usize = 20_000;
const TOUR_LIMIT: usize = 9;

fn unsupported(cfg: &ExperimentConfig) -> Error {
    Error::Precondition(format!("{} does not support {}", cfg.domain.as_str(), cfg.action))
}

fn artifact<T: serde::Serialize>(x: &T) -> Result<Option<Value>> {
    Ok(Some(serde_json::to_value(x)?))
}

fn opts(cfg: &ExperimentConfig) -> CheckOptions {
    CheckOptions {
        seed: cfg.seed,
        ..CheckOptions::default()
    }
}

/// Every combination of one entry per player, or a size-guard error.
fn product<V: Clone>(per: &[Vec<V>]) -> Result<Vec<Vec<V>>> {
    let total = per.iter().try_fold(1usize, |acc, g| acc.checked_mul(g.len()).filter(|&t| t <= PROFILE_LIMIT));
    let Some(total) = total else {
        return Err(Error::SizeGuard {
            what: "bid profiles",
            actual: usize::MAX,
            limit: PROFILE_LIMIT,
        });
    };
    let mut out = Vec::with_capacity(total);
    for mut idx in 0..total {
        let mut profile = Vec::with_capacity(per.len());
        for g in per {
            profile.push(g[idx % g.len()].clone());
            idx /= g.len();
        }
        out.push(profile);
    }
    Ok(out)
}

fn theta_label(idx: usize, players: usize, g: usize) -> String {
    let mut idx = idx;
    let thetas: Vec<String> = (0..players)
        .map(|_| {
            let k = idx % (g + 1);
            idx /= g + 1;
            rational::format(&ratio(k as i64, g as i64))
        })
        .collect();
    format!("theta=({})", thetas.join(","))
}

fn smoothness<M: Mechanism>(sink: &mut Sink, cfg: &ExperimentConfig, f: &M, values: Vec<M::Bid>, p: &SmoothnessParams, default_grid: usize) -> Result<()> {
    let g = cfg.grid.unwrap_or(default_grid).max(1);
    let per: Vec<Vec<M::Bid>> = values.iter().map(|v| scaled_grid(v, g)).collect();
    let bids = product(&per)?;
    let players = values.len();
    let cert = check_smoothness(f, &[values], &bids, p, &opts(cfg))?;
    sink.rat("", "lambda", &p.lambda);
    sink.rat("", "mu", &p.mu);
    sink.count("", "profiles", cert.points);
    sink.rat("", "lhs", &cert.lhs);
    sink.rat("", "rhs", &cert.rhs);
    let verdict = if cert.exact { "smoothness" } else { "smoothness (statistical)" };
    sink.verdict("", verdict, Some(&cert.slack), cert.holds, theta_label(cert.worst.1, players, g));
    Ok(())
}

/// Certifies a constructed profile by grid best response over scaled bids
/// plus flat bids at the construction's values.
fn nash<M: Mechanism>(
    sink: &mut Sink,
    f: &M,
    bids: &[M::Bid],
    values: &[M::Bid],
    optimum: &Rational,
    eq: &Rational,
    ratio: &Rational,
) -> Result<()> {
    let grid = deviation_grid(values, 20, &[zero(), one(), int(2)]);
    let r = verify_pure_nash(f, bids, values, &grid, &CheckOptions::default())?;
    sink.rat("", "optimum", optimum);
    sink.rat("", "equilibrium_welfare", eq);
    sink.rat("", "ratio", ratio);
    let witness = r
        .best
        .iter()
        .enumerate()
        .find_map(|(i, b)| b.as_ref().map(|(k, g)| format!("player {i} deviation {k} gains {}", rational::format(g))))
        .unwrap_or_default();
    sink.verdict("", "is_nash", Some(&r.max_regret), r.is_nash, witness);
    Ok(())
}

fn dynamics<M: Mechanism>(sink: &mut Sink, cfg: &ExperimentConfig, f: &M, values: &[M::Bid], p: &SmoothnessParams) -> Result<()> {
    let grid = StrategyGrid::uniform(values.len(), cfg.grid.map_or(10, |g| g + g % 2))?;
    let hedge = HedgeConfig {
        eta: cfg.eta,
        ..HedgeConfig::new(cfg.rounds.unwrap_or(10_000), cfg.seed)
    };
    let trace = run_hedge(f, values, &grid, &hedge)?;
    let opt = f.optimal_welfare(values)?;
    let bound = poa_from_smoothness(p)?;
    let report = empirical_poa(&trace, &opt, Some(bound.clone()))?;
    sink.count("", "rounds", trace.len());
    sink.float("", "eta", trace.eta);
    sink.rat("", "opt", &opt);
    sink.rat("", "average_welfare", &report.average_welfare);
    sink.rat("", "bound", &bound);
    match &report.ratio {
        Some(r) => sink.verdict("", "ratio", Some(&r.0), r.0 <= bound, String::new()),
        None => sink.verdict("", "ratio", None, false, "zero average welfare".into()),
    }
    for (i, (ext, hv)) in report.external_regret.iter().zip(&report.half_value_regret).enumerate() {
        let who = format!("player {i}");
        sink.rat(&who, "external_regret", ext);
        sink.rat(&who, "half_value_regret", hv);
    }
    let t = check_trace_smoothness(&report, p)?;
    sink.rat("", "trace_rhs", &t.rhs);
    sink.verdict("", "trace_smoothness", Some(&(&t.lhs - &t.rhs)), t.holds, String::new());
    Ok(())
}

/// Lemma sweep over `count` seeds in parallel. Each case reports whether
/// the bound held and whether the optional `audit` check passed.
fn sweep<F>(sink: &mut Sink, cfg: &ExperimentConfig, default_count: usize, label: &str, audit: Option<&str>, check: F) -> Result<()>
where
    F: Fn(u64) -> Result<(bool, bool)> + Sync,
{
    let count = cfg.count.unwrap_or(default_count);
    let results: Vec<(u64, bool, bool)> = (0..count as u64)
        .into_par_iter()
        .map(|s| {
            let seed = cfg.seed.wrapping_add(s);
            check(seed).map(|(a, b)| (seed, a, b))
        })
        .collect::<Result<_>>()?;
    let failed: Vec<u64> = results.iter().filter(|r| !r.1).map(|r| r.0).collect();
    let extra: Vec<u64> = results.iter().filter(|r| !r.2).map(|r| r.0).collect();
    sink.count(label, "instances", count);
    let witness = |v: &[u64]| v.first().map(|s| format!("seed {s}")).unwrap_or_default();
    sink.verdict(label, "violations", Some(&int(failed.len() as i64)), failed.is_empty(), witness(&failed));
    if let Some(audit) = audit {
        sink.verdict(label, audit, Some(&int(extra.len() as i64)), extra.is_empty(), witness(&extra));
    }
    Ok(())
}

fn random_bids(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<Vec<Rational>> {
    (0..n).map(|_| (0..k).map(|_| int(rng.gen_range(0..=10))).collect()).collect()
}

// Packing.

fn packing_instance(cfg: &ExperimentConfig) -> Result<PackingInstance> {
    if let Some(p) = &cfg.instance {
        return load(p);
    }
    let default_kind = if cfg.action == Action::Round { InstanceKind::MultiUnit } else { InstanceKind::SparseRandom };
    let d = cfg.d.unwrap_or(2);
    let params = PackingGenParams {
        n: cfg.n.unwrap_or(3),
        k: cfg.k.unwrap_or(2),
        m: cfg.m.unwrap_or(4),
        l: d.max(3),
        d,
    };
    gen_instance(cfg.kind.unwrap_or(default_kind), &params, cfg.seed)
}

fn pip_params(inst: &PackingInstance) -> Result<SmoothnessParams> {
    SmoothnessParams::half_value(half(), int(column_sparsity(inst).max(1) as i64 + 1))
}

fn pip_random_case(seed: u64) -> Result<bool> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = rng.gen_range(1..=3);
    let params = PackingGenParams {
        n: rng.gen_range(1..=5),
        k: rng.gen_range(1..=3),
        m: 2,
        l: rng.gen_range(d..=4),
        d,
    };
    let inst = gen_instance(InstanceKind::SparseRandom, &params, rng.gen())?;
    let bids = random_bids(&mut rng, inst.n, inst.k);
    let xbar = match rng.gen_range(0..3) {
        0 => PackingAllocation::zero(inst.n, inst.k),
        1 => solve_packing_lp(&inst, &bids)?.allocation,
        _ => {
            let other = random_bids(&mut rng, inst.n, inst.k);
            let mut x = solve_packing_lp(&inst, &other)?.allocation;
            let theta = ratio(rng.gen_range(0..=4), 4);
            x.x.iter_mut().flatten().for_each(|v| *v *= &theta);
            x.integral = false;
            x
        }
    };
    Ok(check_pip_social_cost(&inst, &bids, &xbar)?.holds)
}

pub(super) fn packing(cfg: &ExperimentConfig, sink: &mut Sink) -> Result<Option<Value>> {
    if cfg.action == Action::Counterexample {
        let ce = gen_multiunit_counterexample(cfg.m.unwrap_or(10))?;
        let f = IntegralMechanism { instance: ce.instance.clone() };
        nash(sink, &f, &ce.bids, &ce.instance.values, &ce.optimum, &ce.equilibrium_welfare, &ce.ratio)?;
        return Ok(None);
    }
    if cfg.action == Action::CheckLemma && cfg.instance.is_none() {
        sweep(sink, cfg, 1000, "pip", None, |s| Ok((pip_random_case(s)?, true)))?;
        return Ok(None);
    }
    let inst = packing_instance(cfg)?;
    match cfg.action {
        Action::Gen => {
            sink.count("", "players", inst.n);
            sink.count("", "options", inst.k);
            sink.count("", "rows", inst.l);
            sink.count("", "sparsity", column_sparsity(&inst));
            return artifact(&inst);
        }
        Action::Solve => {
            sink.count("", "sparsity", column_sparsity(&inst));
            sink.rat("", "lp_welfare", &solve_packing_lp(&inst, &inst.values)?.welfare);
            sink.rat("", "integral_welfare", &solve_packing_integral(&inst, &inst.values)?.welfare);
        }
        Action::Round => {
            let lp = solve_packing_lp(&inst, &inst.values)?;
            let rounded = FairRounding.round(&inst, &lp.allocation, cfg.seed)?;
            sink.rat("", "lp_welfare", &lp.welfare);
            sink.rat("", "rounded_welfare", &rounded.welfare(&inst.values));
            sink.verdict("", "feasible", None, inst.is_feasible(&rounded), String::new());
        }
        Action::CheckSmoothness => {
            let p = pip_params(&inst)?;
            smoothness(sink, cfg, &LpMechanism { instance: inst.clone() }, inst.values.clone(), &p, 4)?;
        }
        Action::CheckLemma => {
            let lp = solve_packing_lp(&inst, &inst.values)?.allocation;
            for (name, xbar) in [("zero", PackingAllocation::zero(inst.n, inst.k)), ("lp-optimum", lp)] {
                let r = check_pip_social_cost(&inst, &inst.values, &xbar)?;
                sink.rat(name, "lhs", &r.lhs);
                sink.verdict(name, "pip_social_cost", Some(&r.rhs), r.holds, String::new());
            }
        }
        Action::Dynamics => {
            let p = pip_params(&inst)?;
            dynamics(sink, cfg, &LpMechanism { instance: inst.clone() }, &inst.values, &p)?;
        }
        Action::Counterexample | Action::PaperTable => unreachable!("handled above"),
    }
    Ok(None)
}

// Flow.

fn flow_instance(cfg: &ExperimentConfig) -> Result<FlowInstance> {
    if let Some(p) = &cfg.instance {
        return load(p);
    }
    if cfg.action == Action::Dynamics && cfg.n.is_none() {
        return duopoly();
    }
    gen_flow_instance(&FlowGenParams { players: cfg.n.unwrap_or(3), ..FlowGenParams::default() }, cfg.seed)
}

/// Two unit-demand players valuing 2 and 1 on one unit-capacity edge.
fn duopoly() -> Result<FlowInstance> {
    let mut g = CapacitatedDigraph::new(2);
    g.add_edge(0, 1, one());
    let request = |value| Request { sink: 1, demand: one(), value };
    FlowInstance::new(g, 0, vec![request(int(2)), request(one())])
}

fn flow_random_case(seed: u64) -> Result<bool> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vertices = rng.gen_range(2..=7);
    let params = FlowGenParams {
        vertices,
        edges: rng.gen_range(vertices - 1..=3 * vertices),
        players: rng.gen_range(1..=4),
        max_cap: 3,
    };
    let inst = gen_flow_instance(&params, rng.gen())?;
    let bids: Vec<Rational> = (0..inst.n()).map(|_| int(rng.gen_range(0..=10))).collect();
    Ok(greedy_fractional_flow(&inst, &bids)?.welfare == solve_path_lp(&inst, &bids)?)
}

pub(super) fn flow(cfg: &ExperimentConfig, sink: &mut Sink) -> Result<Option<Value>> {
    if cfg.action == Action::Counterexample {
        let ce = gen_flow_counterexample(cfg.m.unwrap_or(10))?;
        let f = IntegralFlowMechanism { instance: ce.instance.clone() };
        nash(sink, &f, &ce.bids, &ce.instance.values(), &ce.optimum, &ce.equilibrium_welfare, &ce.ratio)?;
        return Ok(None);
    }
    if cfg.action == Action::CheckLemma && cfg.instance.is_none() {
        sweep(sink, cfg, 200, "greedy-lp", None, |s| Ok((flow_random_case(s)?, true)))?;
        return Ok(None);
    }
    let inst = flow_instance(cfg)?;
    let values = inst.values();
    let eps = cfg.eps();
    match cfg.action {
        Action::Gen => {
            sink.count("", "vertices", inst.graph.vertices);
            sink.count("", "edges", inst.graph.edges.len());
            sink.count("", "players", inst.n());
            return artifact(&inst);
        }
        Action::Solve | Action::CheckLemma => {
            let greedy = greedy_fractional_flow(&inst, &values)?;
            let lp = solve_path_lp(&inst, &values)?;
            sink.rat("", "greedy_welfare", &greedy.welfare);
            sink.rat("", "lp_welfare", &lp);
            sink.verdict("", "greedy_equals_lp", None, greedy.welfare == lp, String::new());
        }
        Action::Round => {
            let greedy = greedy_fractional_flow(&inst, &values)?;
            let a = rt_round(&greedy.flow, &inst, &eps, cfg.seed)?;
            let routed: Rational = (0..inst.n()).filter(|&i| a.is_routed(i)).map(|i| &values[i]).sum();
            sink.rat("", "fractional_welfare", &greedy.welfare);
            sink.rat("", "rounded_welfare", &routed);
            sink.count("", "dropped", a.dropped.len());
            sink.verdict("", "feasible", None, a.is_feasible(&inst), String::new());
        }
        Action::CheckSmoothness => {
            let p = SmoothnessParams::half_value(half(), one())?;
            smoothness(sink, cfg, &GreedyFlowMechanism { instance: inst.clone() }, values, &p, 4)?;
        }
        Action::Dynamics => {
            let p = compose_smoothness(&SmoothnessParams::half_value(half(), one())?, &(one() + &eps))?;
            let f = RelaxRoundFlowMechanism {
                instance: inst.clone(),
                epsilon: eps,
            };
            dynamics(sink, cfg, &f, &values, &p)?;
        }
        Action::Counterexample | Action::PaperTable => unreachable!("handled above"),
    }
    Ok(None)
}

// Max-TSP.

fn graph(cfg: &ExperimentConfig) -> Result<CompleteDigraph> {
    if let Some(p) = &cfg.instance {
        return load(p);
    }
    let n = cfg.n.unwrap_or(match cfg.action {
        Action::CheckSmoothness | Action::Dynamics => 3,
        _ => 5,
    });
    CompleteDigraph::random(n, 9, cfg.seed)
}

/// Cycle-cover bound (with force-edge audit) and, for `n <= 5`, the
/// half-edge bound against the best tour.
fn tsp_case(g: &CompleteDigraph, bids: &[Rational]) -> Result<(bool, bool, Option<bool>)> {
    let (reference, _) = max_weight_cycle_cover(g)?;
    let cc = check_cc_social_cost(g, bids, &reference)?;
    let he = if g.n <= 5 {
        let (tour, _) = max_weight_tour(g)?;
        Some(check_half_edge_social_cost(g, bids, &tour)?.holds)
    } else {
        None
    };
    Ok((cc.holds, cc.force_bound_ok, he))
}

pub(super) fn maxtsp(cfg: &ExperimentConfig, sink: &mut Sink) -> Result<Option<Value>> {
    if cfg.action == Action::Counterexample {
        return Err(unsupported(cfg));
    }
    if cfg.action == Action::CheckLemma && cfg.instance.is_none() {
        let fixed = cfg.n;
        let case = |seed: u64| -> Result<(CompleteDigraph, Vec<Rational>)> {
            let n = fixed.unwrap_or(4 + (seed % 3) as usize);
            let g = CompleteDigraph::random(n, 9, seed)?;
            let bids = CompleteDigraph::random(n, 9, seed ^ 0x9e37_79b9)?.edge_weights();
            Ok((g, bids))
        };
        sweep(sink, cfg, 300, "cycle-cover", Some("force_edge"), |s| {
            let (g, b) = case(s)?;
            let (cc, force, _) = tsp_case(&g, &b)?;
            Ok((cc, force))
        })?;
        sweep(sink, cfg, 100, "half-edge", None, |s| {
            let (g, b) = case(s)?;
            if g.n > 5 {
                return Ok((true, true));
            }
            Ok((tsp_case(&g, &b)?.2.unwrap_or(true), true))
        })?;
        return Ok(None);
    }
    let g = graph(cfg)?;
    let weights = g.edge_weights();
    match cfg.action {
        Action::Gen => {
            sink.count("", "vertices", g.n);
            return artifact(&g);
        }
        Action::Solve => {
            let (cover, w) = max_weight_cycle_cover(&g)?;
            sink.rat("", "cycle_cover_weight", &w);
            sink.text("", "cycle_cover", format!("{:?}", cover.succ));
            if g.n <= TOUR_LIMIT {
                let (tour, t) = max_weight_tour(&g)?;
                sink.rat("", "tour_weight", &t);
                sink.text("", "tour", format!("{:?}", tour.order));
            }
            if g.n <= HALF_EDGE_LIMIT && g.n >= 3 {
                sink.rat("", "half_edge_weight", &half_edge_cover(&g)?.1);
            }
        }
        Action::Round => {
            let (cover, w) = max_weight_cycle_cover(&g)?;
            let tour = fisher_round(&cover, cfg.seed);
            sink.rat("", "cycle_cover_weight", &w);
            sink.rat("", "tour_weight", &tour.weight(&g));
            sink.text("", "tour", format!("{:?}", tour.order));
            if let Some(lottery) = fisher_lottery(&cover, 100_000)? {
                let expected: Rational = lottery.iter().map(|(p, t)| p * t.weight(&g)).sum();
                let holds = &expected * int(2) >= w;
                sink.verdict("", "expected_tour_weight", Some(&expected), holds, String::new());
            }
        }
        Action::CheckSmoothness => {
            let p = SmoothnessParams::half_value(half(), int(3))?;
            smoothness(sink, cfg, &CycleCoverMechanism { n: g.n }, weights, &p, 2)?;
        }
        Action::CheckLemma => {
            let (cc, force, he) = tsp_case(&g, &weights)?;
            sink.verdict("", "cycle_cover", None, cc, String::new());
            sink.verdict("", "force_edge", None, force, String::new());
            if let Some(he) = he {
                sink.verdict("", "half_edge", None, he, String::new());
            }
        }
        Action::Dynamics => {
            let p = compose_smoothness(&SmoothnessParams::half_value(half(), int(3))?, &int(2))?;
            dynamics(sink, cfg, &FisherMechanism { n: g.n }, &weights, &p)?;
        }
        Action::Counterexample | Action::PaperTable => unreachable!("handled above"),
    }
    Ok(None)
}

// Auctions.

fn auction_instance(cfg: &ExperimentConfig) -> Result<AuctionInstance> {
    let inst = if let Some(p) = &cfg.instance {
        load(p)?
    } else {
        let symmetric = cfg.symmetric || matches!(cfg.action, Action::Round | Action::Dynamics);
        let m = cfg.m.unwrap_or(4);
        if symmetric {
            AuctionInstance {
                m,
                valuations: Vec::new(),
                symmetric: random_symmetric(cfg.n.unwrap_or(4), m, cfg.seed)?,
            }
        } else {
            AuctionInstance {
                m,
                valuations: random_mph_profile(cfg.n.unwrap_or(3), cfg.k.unwrap_or(1), m, cfg.seed)?,
                symmetric: Vec::new(),
            }
        }
    };
    inst.validate()?;
    Ok(inst)
}

fn symmetric_only(cfg: &ExperimentConfig, inst: &AuctionInstance) -> Result<Vec<SymmetricValuation>> {
    if inst.symmetric.is_empty() {
        return Err(Error::Precondition(format!("auctions {} needs symmetric valuations", cfg.action)));
    }
    Ok(inst.symmetric.clone())
}

fn mph_only(cfg: &ExperimentConfig, inst: &AuctionInstance) -> Result<Vec<MPHkValuation>> {
    if inst.valuations.is_empty() {
        return Err(Error::Precondition(format!("auctions {} needs MPH-k valuations", cfg.action)));
    }
    Ok(inst.valuations.clone())
}

fn ca_random_case(seed: u64, k: Option<usize>) -> Result<bool> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = k.unwrap_or(if seed % 5 == 4 { 2 } else { 1 });
    let n = rng.gen_range(1..=3);
    let m = rng.gen_range(k.max(1)..=4);
    let bids = random_mph_profile(n, k, m, rng.gen())?;
    let x = if rng.gen_bool(0.5) {
        solve_config_lp(&bids, m)?.0
    } else {
        solve_config_lp(&random_mph_profile(n, k, m, rng.gen())?, m)?.0
    };
    Ok(check_ca_social_cost(&bids, &x, k)?.holds)
}

pub(super) fn auctions(cfg: &ExperimentConfig, sink: &mut Sink) -> Result<Option<Value>> {
    if cfg.action == Action::Counterexample {
        let ce = gen_symmetric_counterexample(cfg.m.unwrap_or(10))?;
        let f = SymmetricIntegralMechanism { instance: ce.instance.clone() };
        let truth: Vec<Vec<Rational>> = ce.values.iter().map(SymmetricValuation::to_bids).collect();
        nash(sink, &f, &ce.bids, &truth, &ce.optimum, &ce.equilibrium_welfare, &ce.ratio)?;
        return Ok(None);
    }
    if cfg.action == Action::CheckLemma && cfg.instance.is_none() {
        sweep(sink, cfg, 250, "configuration-lp", None, |s| Ok((ca_random_case(s, cfg.k)?, true)))?;
        return Ok(None);
    }
    let inst = auction_instance(cfg)?;
    match cfg.action {
        Action::Gen => {
            sink.count("", "bidders", inst.valuations.len() + inst.symmetric.len());
            sink.count("", "items", inst.m);
            return artifact(&inst);
        }
        Action::Solve => {
            if inst.symmetric.is_empty() {
                sink.rat("", "config_lp_welfare", &solve_config_lp(&inst.valuations, inst.m)?.1);
            } else {
                sink.rat("", "cardinality_lp_welfare", &solve_cardinality_lp(inst.m, &inst.symmetric)?.1);
                let truth: Vec<Vec<Rational>> = inst.symmetric.iter().map(SymmetricValuation::to_bids).collect();
                let f = SymmetricIntegralMechanism { instance: symmetric_instance(&inst.symmetric)? };
                sink.rat("", "integral_welfare", &f.optimal_welfare(&truth)?);
            }
        }
        Action::Round => {
            let values = symmetric_only(cfg, &inst)?;
            let (xbar, w) = solve_cardinality_lp(inst.m, &values)?;
            let sizes = fair_round(&xbar, cfg.seed);
            let welfare: Rational = sizes.iter().zip(&values).map(|(&j, v)| v.values[j].clone()).sum();
            sink.rat("", "lp_welfare", &w);
            sink.rat("", "rounded_welfare", &welfare);
            sink.text("", "bundle_sizes", format!("{sizes:?}"));
            sink.verdict("", "feasible", None, sizes.iter().sum::<usize>() <= inst.m, String::new());
        }
        Action::CheckSmoothness => {
            let values = mph_only(cfg, &inst)?;
            let p = SmoothnessParams::half_value(half(), int(inst.k() as i64 + 1))?;
            let f = ConfigLpMechanism { n: values.len(), m: inst.m };
            smoothness(sink, cfg, &f, values, &p, 4)?;
        }
        Action::CheckLemma => {
            let values = mph_only(cfg, &inst)?;
            let x = solve_config_lp(&values, inst.m)?.0;
            let r = check_ca_social_cost(&values, &x, inst.k())?;
            sink.rat("", "lhs", &r.lhs);
            sink.verdict("", "ca_social_cost", Some(&r.rhs), r.holds, String::new());
        }
        Action::Dynamics => {
            let values = symmetric_only(cfg, &inst)?;
            let truth: Vec<Vec<Rational>> = values.iter().map(SymmetricValuation::to_bids).collect();
            let f = SymmetricRelaxRound {
                instance: symmetric_instance(&values)?,
                rounding: FairRounding,
            };
            let p = compose_smoothness(&SmoothnessParams::half_value(half(), int(2))?, &FairRounding.alpha())?;
            dynamics(sink, cfg, &f, &truth, &p)?;
        }
        Action::Counterexample | Action::PaperTable => unreachable!("handled above"),
    }
    Ok(None)
}
