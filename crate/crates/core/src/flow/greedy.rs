use num_traits::{Signed, Zero};

use super::{FlowInstance, FractionalFlow};
use crate::error::Result;
use crate::rational::{min, zero, Rational};
use crate::solver::{CapacitatedDigraph, Residual};

#[derive(Clone, Debug, PartialEq)]
pub struct GreedyFlow {
    pub flow: FractionalFlow,
    /// `sum_i (b_i / d_i) r_i`.
    pub welfare: Rational,
    /// Processing order (decreasing `b_i / d_i`, ties by index).
    pub order: Vec<usize>,
}

/// Augmenting-path routing that serves players in decreasing order of bid
/// per unit of demand, each up to its demand, in one shared residual network.
pub fn greedy_fractional_flow(inst: &FlowInstance, bids: &[Rational]) -> Result<GreedyFlow> {
    inst.check_bids(bids)?;
    let n = inst.n();
    let rate: Vec<Rational> = (0..n).map(|i| &bids[i] / &inst.requests[i].demand).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| rate[b].cmp(&rate[a]).then(a.cmp(&b)));

    let mut residual = Residual::new(&inst.graph);
    let mut routed = vec![zero(); n];
    for &i in &order {
        let r = &inst.requests[i];
        routed[i] = residual.push(inst.source, r.sink, Some(&r.demand));
    }

    let mut needs = vec![zero(); inst.graph.vertices];
    for (i, r) in inst.requests.iter().enumerate() {
        needs[r.sink] += &routed[i];
    }
    let mut total = residual.flow;
    let paths = decompose(&inst.graph, &mut total, inst.source, &mut needs);

    let mut edge_flows = vec![vec![zero(); inst.graph.edges.len()]; n];
    let mut remaining = routed.clone();
    for (end, path, mut amount) in paths {
        for i in (0..n).filter(|&i| inst.requests[i].sink == end) {
            if amount.is_zero() {
                break;
            }
            let take = min(&amount, &remaining[i]);
            if take.is_zero() {
                continue;
            }
            for &e in &path {
                edge_flows[i][e] += &take;
            }
            remaining[i] -= &take;
            amount -= take;
        }
    }
    let welfare = (0..n).map(|i| &rate[i] * &routed[i]).sum();
    Ok(GreedyFlow {
        flow: FractionalFlow { edge_flows, routed },
        welfare,
        order,
    })
}

/// Splits `flow` (rooted at `s`) into paths that end at vertices with
/// positive `needs`, cancelling any flow cycle met on the way. Both inputs
/// are consumed. Paths follow the lowest-index positive edge at each step.
pub(crate) fn decompose(
    graph: &CapacitatedDigraph,
    flow: &mut [Rational],
    s: usize,
    needs: &mut [Rational],
) -> Vec<(usize, Vec<usize>, Rational)> {
    let mut out = vec![Vec::new(); graph.vertices];
    for (e, edge) in graph.edges.iter().enumerate() {
        out[edge.from].push(e);
    }
    let mut paths = Vec::new();
    'walks: while needs.iter().enumerate().any(|(v, x)| v != s && x.is_positive()) {
        let mut position = vec![None; graph.vertices];
        position[s] = Some(0);
        let mut edges: Vec<usize> = Vec::new();
        let mut v = s;
        loop {
            if v != s && needs[v].is_positive() {
                let mut amount = needs[v].clone();
                for &e in &edges {
                    amount = min(&amount, &flow[e]);
                }
                for &e in &edges {
                    flow[e] -= &amount;
                }
                needs[v] -= &amount;
                paths.push((v, edges, amount));
                continue 'walks;
            }
            let Some(&e) = out[v].iter().find(|&&e| flow[e].is_positive()) else {
                // Flow does not conserve at `v`; nothing more can be extracted.
                break 'walks;
            };
            let w = graph.edges[e].to;
            if let Some(start) = position[w] {
                let cycle: Vec<usize> = edges[start..].iter().copied().chain([e]).collect();
                let mut amount = flow[e].clone();
                for &c in &cycle {
                    amount = min(&amount, &flow[c]);
                }
                for &c in &cycle {
                    flow[c] -= &amount;
                }
                continue 'walks;
            }
            edges.push(e);
            position[w] = Some(edges.len());
            v = w;
        }
    }
    paths
}

/// Path decomposition `(edges, amount)` of player `i`'s flow after cycle
/// cancellation. Amounts sum to the routed amount.
pub fn flow_decompose(inst: &FlowInstance, flow: &FractionalFlow, i: usize) -> Vec<(Vec<usize>, Rational)> {
    let mut f = flow.edge_flows[i].clone();
    let mut needs = vec![zero(); inst.graph.vertices];
    needs[inst.requests[i].sink] = flow.routed[i].clone();
    decompose(&inst.graph, &mut f, inst.source, &mut needs)
        .into_iter()
        .map(|(_, p, a)| (p, a))
        .collect()
}
