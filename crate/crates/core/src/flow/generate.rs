use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{FlowInstance, Request};
use crate::error::{structural, Result};
use crate::rational::{int, ratio, zero, Rational};
use crate::solver::CapacitatedDigraph;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlowGenParams {
    pub vertices: usize,
    pub edges: usize,
    pub players: usize,
    /// Capacities are drawn from `1..=max_cap`.
    pub max_cap: i64,
}

impl Default for FlowGenParams {
    fn default() -> Self {
        Self {
            vertices: 5,
            edges: 9,
            players: 3,
            max_cap: 3,
        }
    }
}

/// Random digraph with source 0, demands in `{1/2, 1, 3/2, 2}` and integer
/// values in `0..=10`; deterministic in `seed`.
pub fn gen_flow_instance(p: &FlowGenParams, seed: u64) -> Result<FlowInstance> {
    if p.vertices < 2 || p.max_cap < 1 {
        return Err(structural("flow instances need at least two vertices and max_cap >= 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = CapacitatedDigraph::new(p.vertices);
    for _ in 0..p.edges {
        let u = rng.gen_range(0..p.vertices);
        let mut v = rng.gen_range(0..p.vertices - 1);
        if v >= u {
            v += 1;
        }
        g.add_edge(u, v, int(rng.gen_range(1..=p.max_cap)));
    }
    let requests = (0..p.players)
        .map(|_| Request {
            sink: rng.gen_range(1..p.vertices),
            demand: ratio(rng.gen_range(1..=4), 2),
            value: int(rng.gen_range(0..=10)),
        })
        .collect();
    FlowInstance::new(g, 0, requests)
}

#[derive(Clone, Debug)]
pub struct FlowCounterexample {
    pub instance: FlowInstance,
    pub bids: Vec<Rational>,
    pub optimum: Rational,
    pub equilibrium_welfare: Rational,
    pub ratio: Rational,
}

/// One unit-capacity edge from source to sink. Players `0..m` demand `1/m`
/// and value routing at 1; the last two demand 1 and value it at 2. In the
/// equilibrium profile the small players bid 0 and the big ones bid 2.
pub fn gen_flow_counterexample(m: usize) -> Result<FlowCounterexample> {
    if m < 2 {
        return Err(structural("counterexample needs m >= 2"));
    }
    let mut g = CapacitatedDigraph::new(2);
    g.add_edge(0, 1, int(1));
    let mut requests: Vec<Request> = (0..m)
        .map(|_| Request {
            sink: 1,
            demand: ratio(1, m as i64),
            value: int(1),
        })
        .collect();
    for _ in 0..2 {
        requests.push(Request {
            sink: 1,
            demand: int(1),
            value: int(2),
        });
    }
    let mut bids = vec![zero(); m];
    bids.extend([int(2), int(2)]);
    Ok(FlowCounterexample {
        instance: FlowInstance::new(g, 0, requests)?,
        bids,
        optimum: int(m as i64),
        equilibrium_welfare: int(2),
        ratio: ratio(m as i64, 2),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generator_is_deterministic() {
        let p = FlowGenParams::default();
        assert_eq!(gen_flow_instance(&p, 3).unwrap(), gen_flow_instance(&p, 3).unwrap());
        assert!(gen_flow_instance(&FlowGenParams { vertices: 1, ..p }, 0).is_err());
    }

    #[test]
    fn counterexample_ratios() {
        assert_eq!(gen_flow_counterexample(10).unwrap().ratio, int(5));
        assert_eq!(gen_flow_counterexample(2).unwrap().ratio, int(1));
        assert!(gen_flow_counterexample(1).is_err());
    }
}
