use anarchy::auctions::{
    eval_mph, fair_round, random_mph_profile, random_symmetric, solve_cardinality_lp, symmetric_instance,
    to_cardinality, to_configuration, ItemSet,
};
use anarchy::dynamics::{
    check_trace_smoothness, empirical_poa, half_value_regret, hedge_regret_bound, run_hedge, HedgeConfig, StrategyGrid,
};
use anarchy::flow::{
    exchange_matching, gen_flow_instance, greedy_fractional_flow, matroid_greedy, rt_lottery, rt_round, solve_path_lp,
    FlowGenParams, GraphicMatroid, MatroidOracle,
};
use anarchy::maxtsp::{fisher_inclusion, fisher_round, max_weight_cycle_cover, CompleteDigraph, CycleCover};
use anarchy::mechanism::{
    compose_smoothness, poa_from_smoothness, run_pay_your_bid, verify_pure_nash, CheckOptions, Mechanism,
    SmoothnessParams,
};
use anarchy::packing::{
    check_pip_social_cost, gen_instance, solve_packing_integral, solve_packing_lp, InstanceKind, IntegralMechanism,
    LpMechanism, PackingGenParams, PackingInstance,
};
use anarchy::rational::{half, int, one, ratio, to_f64, zero, Rational};
use anarchy::solver::{max_weight_perfect_matching, WeightMatrix};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn kind() -> impl Strategy<Value = InstanceKind> {
    prop_oneof![Just(InstanceKind::MultiUnit), Just(InstanceKind::Gap), Just(InstanceKind::SparseRandom)]
}

fn packing(kind: InstanceKind, n: usize, k: usize, d: usize, seed: u64) -> PackingInstance {
    let p = PackingGenParams { n, k, m: k, l: 3, d };
    gen_instance(kind, &p, seed).unwrap()
}

fn bids(seed: u64, n: usize, k: usize) -> Vec<Vec<Rational>> {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| (0..k).map(|_| int(r.gen_range(0..=10))).collect()).collect()
}

fn rat() -> impl Strategy<Value = Rational> {
    (1i64..40, 1i64..10).prop_map(|(p, q)| ratio(p, q))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn payments_are_declared_values(kind in kind(), n in 1usize..4, d in 1usize..3, seed: u64, bseed: u64) {
        let inst = packing(kind, n, 2, d, seed);
        let f = LpMechanism { instance: inst.clone() };
        let b = bids(bseed, inst.n, inst.k);
        let run = run_pay_your_bid(&f, &b, &inst.values, 0).unwrap();
        for i in 0..inst.n {
            prop_assert_eq!(&run.payments[i], &f.value(i, &b[i], &run.outcome));
            prop_assert_eq!(&run.utilities[i], &(&run.values[i] - &run.payments[i]));
        }
        prop_assert_eq!(run.welfare, run.values.iter().sum::<Rational>());
    }

    #[test]
    fn composition_scales_poa(lambda in rat(), mu in rat(), a1 in rat(), a2 in rat()) {
        let lambda = anarchy::rational::min(&lambda, &one());
        let p = SmoothnessParams::half_value(lambda, mu.clone()).unwrap();
        let base = poa_from_smoothness(&p).unwrap();
        let (lo, hi) = if a1 <= a2 { (a1, a2) } else { (a2, a1) };
        let lo = anarchy::rational::max(&lo, &one());
        let hi = anarchy::rational::max(&hi, &one());
        let p_lo = poa_from_smoothness(&compose_smoothness(&p, &lo).unwrap()).unwrap();
        let p_hi = poa_from_smoothness(&compose_smoothness(&p, &hi).unwrap()).unwrap();
        prop_assert!(p_lo <= p_hi);
        prop_assert!(base <= p_lo);
        if mu >= one() {
            prop_assert_eq!(p_lo, &lo * &base);
        }
    }

    #[test]
    fn nash_with_no_deviations(n in 1usize..4, seed: u64) {
        let inst = packing(InstanceKind::MultiUnit, n, 2, 1, seed);
        let f = IntegralMechanism { instance: inst.clone() };
        let r = verify_pure_nash(&f, &inst.values, &inst.values, &[], &CheckOptions::default()).unwrap();
        prop_assert!(r.is_nash);
        prop_assert_eq!(r.max_regret, zero());
    }

    #[test]
    fn lp_dominates_integral(kind in kind(), n in 1usize..4, d in 1usize..3, seed: u64) {
        let inst = packing(kind, n, 2, d, seed);
        let lp = solve_packing_lp(&inst, &inst.values).unwrap();
        let int_sol = solve_packing_integral(&inst, &inst.values).unwrap();
        prop_assert!(lp.welfare >= int_sol.welfare);
        prop_assert!(int_sol.welfare >= zero());
        prop_assert!(inst.is_feasible(&lp.allocation) && inst.is_feasible(&int_sol.allocation));
    }

    #[test]
    fn pip_social_cost_bound(kind in kind(), n in 1usize..4, d in 1usize..3, seed: u64, bseed: u64, theta in 0i64..=4) {
        let inst = packing(kind, n, 2, d, seed);
        let b = bids(bseed, inst.n, inst.k);
        let mut xbar = solve_packing_lp(&inst, &bids(bseed ^ 1, inst.n, inst.k)).unwrap().allocation;
        xbar.x.iter_mut().flatten().for_each(|v| *v *= ratio(theta, 4));
        xbar.integral = false;
        let c = check_pip_social_cost(&inst, &b, &xbar).unwrap();
        prop_assert!(c.holds, "{} > {}", c.lhs, c.rhs);
    }

    #[test]
    fn greedy_flow_is_optimal(players in 1usize..4, seed: u64, bseed: u64) {
        let inst = gen_flow_instance(&FlowGenParams { players, ..FlowGenParams::default() }, seed).unwrap();
        let mut r = ChaCha8Rng::seed_from_u64(bseed);
        let b: Vec<Rational> = (0..players).map(|_| int(r.gen_range(0..=10))).collect();
        prop_assert_eq!(greedy_fractional_flow(&inst, &b).unwrap().welfare, solve_path_lp(&inst, &b).unwrap());
    }

    #[test]
    fn rt_round_is_feasible_and_oblivious(players in 1usize..4, seed: u64, rseed: u64, vseed: u64) {
        let inst = gen_flow_instance(&FlowGenParams { players, ..FlowGenParams::default() }, seed).unwrap();
        let g = greedy_fractional_flow(&inst, &inst.values()).unwrap();
        let eps = half();
        let a = rt_round(&g.flow, &inst, &eps, rseed).unwrap();
        prop_assert!(a.is_feasible(&inst));
        let mut other = inst.clone();
        let mut r = ChaCha8Rng::seed_from_u64(vseed);
        other.requests.iter_mut().for_each(|q| q.value = int(r.gen_range(0..=20)));
        prop_assert_eq!(&a, &rt_round(&g.flow, &other, &eps, rseed).unwrap());
        if let Some(lottery) = rt_lottery(&g.flow, &inst, &eps, 4096).unwrap() {
            prop_assert_eq!(lottery.iter().map(|(p, _)| p).sum::<Rational>(), one());
            for i in 0..players {
                let routed: Rational = lottery.iter().filter(|(_, o)| o.is_routed(i)).map(|(p, _)| p).sum();
                let cap = &g.flow.routed[i] / (&inst.requests[i].demand * (one() + &eps));
                prop_assert!(routed <= cap);
            }
            prop_assert!(lottery.iter().all(|(_, o)| o.is_feasible(&inst)));
        }
    }

    #[test]
    fn graphic_exchange_is_a_bijection(vertices in 2usize..6, seed: u64) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let edges: Vec<(usize, usize)> = (0..r.gen_range(1..=8)).map(|_| (r.gen_range(0..vertices), r.gen_range(0..vertices))).collect();
        let g = GraphicMatroid { vertices, edges: edges.clone() };
        let w = |r: &mut ChaCha8Rng| -> Vec<Rational> { (0..edges.len()).map(|_| int(r.gen_range(0..=5))).collect() };
        let a = matroid_greedy(&g, &w(&mut r)).unwrap();
        let b = matroid_greedy(&g, &w(&mut r)).unwrap();
        prop_assert!(g.is_basis(&a) && g.is_basis(&b));
        let pairs = exchange_matching(&g, &a, &b).unwrap();
        let mut right: Vec<usize> = pairs.iter().map(|p| p.1).collect();
        right.sort_unstable();
        prop_assert_eq!(right, b.clone());
        for (x, y) in pairs {
            let swapped: Vec<usize> = a.iter().map(|&e| if e == x { y } else { e }).collect();
            prop_assert!(g.is_independent(&swapped));
        }
    }

    #[test]
    fn fisher_inclusion_from_cycle_lengths(n in 2usize..7, seed: u64) {
        let mut succ: Vec<usize> = (0..n).collect();
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        while succ.iter().enumerate().any(|(u, &v)| u == v) {
            succ.shuffle(&mut r);
        }
        let cover = CycleCover::new(succ).unwrap();
        let cycles = cover.cycles();
        let inc = fisher_inclusion(&cover, 10_000).unwrap().unwrap();
        for c in &cycles {
            let l = c.len() as i64;
            for &u in c {
                let want = if cycles.len() == 1 { one() } else { ratio(l - 1, l) };
                prop_assert_eq!(&inc[u], &want);
            }
        }
        let t = fisher_round(&cover, seed);
        prop_assert!(t.is_valid(n));
    }

    #[test]
    fn mph_is_monotone(k in 1usize..3, m in 2usize..5, seed: u64, s: u32, t: u32) {
        let vals = random_mph_profile(1, k, m, seed).unwrap();
        let mask = (1u32 << m) - 1;
        let (s, t) = ((s & mask) as ItemSet, (t & mask) as ItemSet);
        prop_assert!(eval_mph(&vals[0], s & t) <= eval_mph(&vals[0], s));
        prop_assert!(eval_mph(&vals[0], s) <= eval_mph(&vals[0], s | t));
        prop_assert_eq!(eval_mph(&vals[0], 0), zero());
    }

    #[test]
    fn cardinality_translation_preserves_value(n in 1usize..4, m in 1usize..6, seed: u64) {
        let vals = random_symmetric(n, m, seed).unwrap();
        let (xbar, w) = solve_cardinality_lp(m, &vals).unwrap();
        let config = to_configuration(&xbar).unwrap();
        prop_assert!(config.is_feasible());
        let total: Rational = (0..n).map(|i| config.value(i, &vals[i])).sum();
        prop_assert_eq!(&total, &w);
        prop_assert_eq!(to_cardinality(&config, &vals).unwrap(), xbar);
    }

    #[test]
    fn fair_round_is_feasible_and_oblivious(n in 1usize..5, m in 1usize..8, seed: u64, rseed: u64) {
        let vals = random_symmetric(n, m, seed).unwrap();
        let (xbar, _) = solve_cardinality_lp(m, &vals).unwrap();
        let sizes = fair_round(&xbar, rseed);
        prop_assert!(sizes.iter().sum::<usize>() <= m);
        prop_assert!(sizes.iter().enumerate().all(|(i, &j)| j == 0 || xbar.x[i][j] != zero()));
        prop_assert_eq!(sizes, fair_round(&xbar.clone(), rseed));
        prop_assert!(symmetric_instance(&vals).is_ok());
    }

    #[test]
    fn matching_beats_random_permutations(n in 1usize..6, seed: u64) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let w: Vec<Vec<Rational>> = (0..n).map(|_| (0..n).map(|_| int(r.gen_range(-5..=9))).collect()).collect();
        let m = max_weight_perfect_matching(&WeightMatrix::dense(w.clone()).unwrap()).unwrap();
        let mut perm: Vec<usize> = (0..n).collect();
        for _ in 0..20 {
            perm.shuffle(&mut r);
            let v: Rational = perm.iter().enumerate().map(|(i, &j)| &w[i][j]).sum();
            prop_assert!(m.value >= v);
        }
    }

    #[test]
    fn cycle_cover_weight_is_consistent(n in 2usize..6, seed: u64) {
        let g = CompleteDigraph::random(n, 9, seed).unwrap();
        let (c, w) = max_weight_cycle_cover(&g).unwrap();
        prop_assert!(c.is_valid());
        prop_assert_eq!(c.weight(&g), w);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    /// First-price single item: Hedge regret within its guarantee, trace
    /// smoothness exact for this deterministic rule, replay identical.
    #[test]
    fn hedge_on_first_price(v1 in 1i64..6, v2 in 1i64..6, seed: u64) {
        let vals = vec![vec![int(v1)], vec![int(v2)]];
        let inst = PackingInstance::new(vals.clone(), vec![vec![vec![one()]; 2]], vec![one()]).unwrap();
        let f = IntegralMechanism { instance: inst };
        let grid = StrategyGrid::uniform(2, 6).unwrap();
        let rounds = 400;
        let trace = run_hedge(&f, &vals, &grid, &HedgeConfig::new(rounds, seed)).unwrap();
        prop_assert_eq!(&trace, &run_hedge(&f, &vals, &grid, &HedgeConfig::new(rounds, seed)).unwrap());
        for (i, r) in trace.external_regret().iter().enumerate() {
            prop_assert!(to_f64(r) <= hedge_regret_bound(to_f64(&vals[i][0]), rounds, 7) + 1e-9);
        }
        prop_assert_eq!(half_value_regret(&f, &vals, &trace).unwrap(), trace.recorded_half_value_regret().unwrap());
        let opt = f.optimal_welfare(&vals).unwrap();
        let report = empirical_poa(&trace, &opt, None).unwrap();
        let p = SmoothnessParams::half_value(half(), one()).unwrap();
        prop_assert!(check_trace_smoothness(&report, &p).unwrap().holds);
    }
}
