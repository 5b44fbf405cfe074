//! Randomized path rounding with alteration. Reads only the instance, the
//! fractional flow, `epsilon` and the seed.

use num_traits::{Signed, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{flow_decompose, FlowInstance, FractionalFlow, PathAssignment};
use crate::error::{structural, Result};
use crate::mechanism::Lottery;
use crate::rational::{one, pick, uniform_unit, Rational};

/// Per player: the decomposed paths with their selection probabilities
/// `amount / ((1 + eps) d_i)`.
fn path_menu(inst: &FlowInstance, flow: &FractionalFlow, eps: &Rational) -> Result<Vec<Vec<(Vec<usize>, Rational)>>> {
    if !eps.is_positive() {
        return Err(structural("epsilon must be positive"));
    }
    let scale = one() + eps;
    Ok((0..inst.n())
        .map(|i| {
            let denom = &scale * &inst.requests[i].demand;
            flow_decompose(inst, flow, i)
                .into_iter()
                .filter(|(_, a)| !a.is_zero())
                .map(|(p, a)| (p, a / &denom))
                .collect()
        })
        .collect())
}

/// Drops routed players until every edge fits: among players using an
/// overloaded edge, the one with the smallest `r_i / d_i` goes first (ties:
/// higher index first).
fn alter(inst: &FlowInstance, flow: &FractionalFlow, paths: Vec<Option<Vec<usize>>>) -> PathAssignment {
    let mut a = PathAssignment {
        paths,
        overloaded: false,
        dropped: Vec::new(),
    };
    loop {
        let load = a.loads(inst);
        let over: Vec<bool> = load.iter().zip(&inst.graph.edges).map(|(l, e)| *l > e.cap).collect();
        if !over.iter().any(|&o| o) {
            return a;
        }
        a.overloaded = true;
        let victim = (0..inst.n())
            .filter(|&i| a.paths[i].as_ref().is_some_and(|p| p.iter().any(|&e| over[e])))
            .min_by(|&x, &y| {
                let rx = &flow.routed[x] / &inst.requests[x].demand;
                let ry = &flow.routed[y] / &inst.requests[y].demand;
                rx.cmp(&ry).then(y.cmp(&x))
            })
            .expect("an overloaded edge carries a routed player");
        a.paths[victim] = None;
        a.dropped.push(victim);
    }
}

/// Independently per player, routes along decomposed path `P` with
/// probability `amount_P / ((1 + eps) d_i)`, then alters to feasibility.
pub fn rt_round(flow: &FractionalFlow, inst: &FlowInstance, eps: &Rational, seed: u64) -> Result<PathAssignment> {
    let menu = path_menu(inst, flow, eps)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let paths = menu
        .iter()
        .map(|options| {
            let u = uniform_unit(&mut rng);
            let probs: Vec<Rational> = options.iter().map(|(_, p)| p.clone()).collect();
            options.get(pick(&u, &probs)).map(|(p, _)| p.clone())
        })
        .collect();
    Ok(alter(inst, flow, paths))
}

/// Exact distribution of [`rt_round`] when the joint support has at most
/// `limit` atoms.
pub fn rt_lottery(flow: &FractionalFlow, inst: &FlowInstance, eps: &Rational, limit: usize) -> Result<Option<Lottery<PathAssignment>>> {
    let menu = path_menu(inst, flow, eps)?;
    let mut size: usize = 1;
    for options in &menu {
        size = match size.checked_mul(options.len() + 1) {
            Some(s) if s <= limit => s,
            _ => return Ok(None),
        };
    }
    let choices: Vec<Vec<(Rational, Option<Vec<usize>>)>> = menu
        .into_iter()
        .map(|options| {
            let rest = one() - options.iter().map(|(_, p)| p).sum::<Rational>();
            let mut c: Vec<(Rational, Option<Vec<usize>>)> = options.into_iter().map(|(path, p)| (p, Some(path))).collect();
            if rest.is_positive() {
                c.push((rest, None));
            }
            c
        })
        .collect();
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(choices.len());
    enumerate(&choices, one(), &mut current, &mut |p, paths| {
        out.push((p, alter(inst, flow, paths.to_vec())));
    });
    Ok(Some(out))
}

fn enumerate(
    choices: &[Vec<(Rational, Option<Vec<usize>>)>],
    p: Rational,
    current: &mut Vec<Option<Vec<usize>>>,
    emit: &mut impl FnMut(Rational, &[Option<Vec<usize>>]),
) {
    let depth = current.len();
    if depth == choices.len() {
        emit(p, current);
        return;
    }
    for (q, path) in &choices[depth] {
        current.push(path.clone());
        enumerate(choices, &p * q, current, emit);
        current.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::Request;
    use crate::rational::{int, ratio, zero};
    use crate::solver::CapacitatedDigraph;

    fn two_paths() -> (FlowInstance, FractionalFlow) {
        let mut g = CapacitatedDigraph::new(4);
        g.add_edge(0, 1, int(1));
        g.add_edge(1, 3, int(1));
        g.add_edge(0, 2, int(1));
        g.add_edge(2, 3, int(1));
        let inst = FlowInstance::new(
            g,
            0,
            vec![Request {
                sink: 3,
                demand: int(1),
                value: int(1),
            }],
        )
        .unwrap();
        let half = ratio(1, 2);
        let flow = FractionalFlow {
            edge_flows: vec![vec![half.clone(); 4]],
            routed: vec![int(1)],
        };
        (inst, flow)
    }

    #[test]
    fn exact_probabilities_on_two_paths() {
        let (inst, flow) = two_paths();
        let lottery = rt_lottery(&flow, &inst, &int(1), 100).unwrap().unwrap();
        let probs: Vec<(Rational, Option<Vec<usize>>)> = lottery.into_iter().map(|(p, a)| (p, a.paths[0].clone())).collect();
        assert_eq!(
            probs,
            vec![
                (ratio(1, 4), Some(vec![0, 1])),
                (ratio(1, 4), Some(vec![2, 3])),
                (ratio(1, 2), None)
            ]
        );
    }

    #[test]
    fn monte_carlo_matches_analytic() {
        let (inst, flow) = two_paths();
        let samples = 100_000;
        let mut counts = [0usize; 3];
        for seed in 0..samples {
            let a = rt_round(&flow, &inst, &int(1), seed).unwrap();
            match a.paths[0].as_deref() {
                Some([0, 1]) => counts[0] += 1,
                Some(_) => counts[1] += 1,
                None => counts[2] += 1,
            }
        }
        for (c, p) in counts.iter().zip([0.25, 0.25, 0.5]) {
            let sigma = (samples as f64 * p * (1.0 - p)).sqrt();
            assert!((*c as f64 - samples as f64 * p).abs() <= 3.0 * sigma, "{counts:?}");
        }
    }

    #[test]
    fn fully_routed_probability() {
        let mut g = CapacitatedDigraph::new(2);
        g.add_edge(0, 1, int(1));
        let inst = FlowInstance::new(
            g,
            0,
            vec![Request {
                sink: 1,
                demand: int(1),
                value: int(1),
            }],
        )
        .unwrap();
        let flow = FractionalFlow {
            edge_flows: vec![vec![int(1)]],
            routed: vec![int(1)],
        };
        let lottery = rt_lottery(&flow, &inst, &ratio(1, 100), 10).unwrap().unwrap();
        assert_eq!(lottery[0].0, ratio(100, 101));

        let empty = FractionalFlow {
            edge_flows: vec![vec![zero()]],
            routed: vec![zero()],
        };
        for seed in 0..20 {
            assert_eq!(rt_round(&empty, &inst, &int(1), seed).unwrap(), PathAssignment::unrouted(1));
        }
        assert!(rt_round(&flow, &inst, &int(0), 0).is_err());
    }

    #[test]
    fn alteration_restores_feasibility() {
        let mut g = CapacitatedDigraph::new(2);
        g.add_edge(0, 1, int(1));
        let reqs = (0..2)
            .map(|_| Request {
                sink: 1,
                demand: int(1),
                value: int(1),
            })
            .collect();
        let inst = FlowInstance::new(g, 0, reqs).unwrap();
        let flow = FractionalFlow {
            edge_flows: vec![vec![ratio(1, 2)], vec![ratio(1, 2)]],
            routed: vec![ratio(1, 2), ratio(1, 2)],
        };
        let lottery = rt_lottery(&flow, &inst, &ratio(1, 10), 100).unwrap().unwrap();
        assert_eq!(lottery.iter().map(|(p, _)| p).sum::<Rational>(), one());
        for (_, a) in &lottery {
            assert!(a.is_feasible(&inst));
            if a.overloaded {
                assert_eq!(a.dropped, vec![1]);
            }
        }
    }
}
