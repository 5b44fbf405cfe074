//! Maximum asymmetric TSP on complete digraphs where every directed edge is
//! a player: cycle-cover relaxation, random-drop rounding, edge forcing and
//! half-edge covers.

mod cover;
mod fisher;
mod half_edge;
mod mechanism;

use num_traits::Signed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{structural, Result};
use crate::rational::{int, zero, RatStr, Rational};

pub use cover::{
    check_cc_social_cost, derangements, force_edge, max_weight_cycle_cover, max_weight_tour, CcSocialCost, ForcedEdge,
    Role, BRUTE_FORCE_LIMIT,
};
pub use fisher::{fisher_inclusion, fisher_lottery, fisher_round};
pub use half_edge::{
    check_half_edge_social_cost, half_edge_cover, HalfEdgeCover, HalfEdgeSocialCost, PairState, HALF_EDGE_LIMIT,
};
pub use mechanism::{CycleCoverMechanism, FisherMechanism};

/// Complete digraph with `w[u][v]` for `u != v`; the diagonal is unused.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GraphWire", into = "GraphWire")]
pub struct CompleteDigraph {
    pub n: usize,
    pub w: Vec<Vec<Rational>>,
}

#[derive(Serialize, Deserialize)]
struct GraphWire {
    n: usize,
    weights: Vec<RatStr>,
}

impl TryFrom<GraphWire> for CompleteDigraph {
    type Error = crate::Error;

    fn try_from(g: GraphWire) -> Result<Self> {
        CompleteDigraph::from_edge_weights(g.n, g.weights.into_iter().map(|r| r.0).collect())
    }
}

impl From<CompleteDigraph> for GraphWire {
    fn from(g: CompleteDigraph) -> Self {
        GraphWire {
            n: g.n,
            weights: g.edge_weights().into_iter().map(RatStr).collect(),
        }
    }
}

impl CompleteDigraph {
    pub fn new(w: Vec<Vec<Rational>>) -> Result<Self> {
        let n = w.len();
        if n < 2 {
            return Err(structural("complete digraph needs at least two vertices"));
        }
        if w.iter().any(|r| r.len() != n) {
            return Err(structural("weight matrix must be square"));
        }
        let mut w = w;
        for (u, row) in w.iter_mut().enumerate() {
            row[u] = zero();
            if row.iter().any(|x| x.is_negative()) {
                return Err(structural("weights must be nonnegative"));
            }
        }
        Ok(Self { n, w })
    }

    /// Builds the graph from weights listed in edge (player) order.
    pub fn from_edge_weights(n: usize, weights: Vec<Rational>) -> Result<Self> {
        if n < 2 || weights.len() != n * (n - 1) {
            return Err(structural(format!("expected n >= 2 and n(n-1) weights, got n = {n} and {}", weights.len())));
        }
        let mut w = vec![vec![zero(); n]; n];
        for (e, x) in weights.into_iter().enumerate() {
            let (u, v) = edge_endpoints(n, e);
            w[u][v] = x;
        }
        Self::new(w)
    }

    pub fn num_edges(&self) -> usize {
        self.n * (self.n - 1)
    }

    /// Weights in edge (player) order.
    pub fn edge_weights(&self) -> Vec<Rational> {
        (0..self.num_edges())
            .map(|e| {
                let (u, v) = edge_endpoints(self.n, e);
                self.w[u][v].clone()
            })
            .collect()
    }

    /// Same vertex set with weights replaced by per-edge bids.
    pub fn with_bids(&self, bids: &[Rational]) -> Result<Self> {
        Self::from_edge_weights(self.n, bids.to_vec())
    }

    pub fn random(n: usize, max_weight: i64, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let weights = (0..n * n.saturating_sub(1)).map(|_| int(rng.gen_range(0..=max_weight))).collect();
        Self::from_edge_weights(n, weights)
    }
}

/// Player index of the directed edge `(u, v)`: row-major with the diagonal
/// skipped.
pub fn edge_index(n: usize, u: usize, v: usize) -> usize {
    debug_assert!(u != v && u < n && v < n);
    u * (n - 1) + if v < u { v } else { v - 1 }
}

pub fn edge_endpoints(n: usize, e: usize) -> (usize, usize) {
    let u = e / (n - 1);
    let r = e % (n - 1);
    (u, if r < u { r } else { r + 1 })
}

/// Fixed-point-free successor permutation.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct CycleCover {
    pub succ: Vec<usize>,
}

impl CycleCover {
    pub fn new(succ: Vec<usize>) -> Result<Self> {
        let c = CycleCover { succ };
        if !c.is_valid() {
            return Err(structural("successor map is not a fixed-point-free permutation"));
        }
        Ok(c)
    }

    pub fn is_valid(&self) -> bool {
        let n = self.succ.len();
        let mut seen = vec![false; n];
        self.succ
            .iter()
            .enumerate()
            .all(|(u, &v)| v < n && v != u && !std::mem::replace(&mut seen[v], true))
    }

    pub fn contains(&self, u: usize, v: usize) -> bool {
        self.succ[u] == v
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.succ.iter().enumerate().map(|(u, &v)| (u, v)).collect()
    }

    pub fn weight(&self, g: &CompleteDigraph) -> Rational {
        self.edges().iter().map(|&(u, v)| &g.w[u][v]).sum()
    }

    /// Cycles as vertex sequences, ordered by their smallest vertex and each
    /// starting there.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let n = self.succ.len();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut cycle = Vec::new();
            let mut v = start;
            while !seen[v] {
                seen[v] = true;
                cycle.push(v);
                v = self.succ[v];
            }
            out.push(cycle);
        }
        out
    }
}

/// Cyclic vertex order visiting every vertex once.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct HamiltonianCycle {
    pub order: Vec<usize>,
}

impl HamiltonianCycle {
    pub fn is_valid(&self, n: usize) -> bool {
        let mut seen = vec![false; n];
        self.order.len() == n && self.order.iter().all(|&v| v < n && !std::mem::replace(&mut seen[v], true))
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let k = self.order.len();
        (0..k).map(|i| (self.order[i], self.order[(i + 1) % k])).collect()
    }

    pub fn contains(&self, u: usize, v: usize) -> bool {
        self.edges().contains(&(u, v))
    }

    pub fn weight(&self, g: &CompleteDigraph) -> Rational {
        self.edges().iter().map(|&(u, v)| &g.w[u][v]).sum()
    }

    pub fn as_cover(&self) -> CycleCover {
        let mut succ = vec![0; self.order.len()];
        for (u, v) in self.edges() {
            succ[u] = v;
        }
        CycleCover { succ }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_indexing_round_trips() {
        for n in 2..6 {
            for e in 0..n * (n - 1) {
                let (u, v) = edge_endpoints(n, e);
                assert_ne!(u, v);
                assert_eq!(edge_index(n, u, v), e);
            }
        }
        assert_eq!(edge_endpoints(3, 0), (0, 1));
        assert_eq!(edge_endpoints(3, 2), (1, 0));
    }

    #[test]
    fn json_round_trip() {
        let g = CompleteDigraph::random(4, 9, 1).unwrap();
        let s = serde_json::to_string(&g).unwrap();
        assert_eq!(serde_json::from_str::<CompleteDigraph>(&s).unwrap(), g);
        assert!(serde_json::from_str::<CompleteDigraph>(r#"{"n":3,"weights":["1"]}"#).is_err());
    }

    #[test]
    fn cover_validity() {
        assert!(CycleCover::new(vec![1, 0, 2]).is_err());
        assert!(CycleCover::new(vec![1, 1, 0]).is_err());
        let c = CycleCover::new(vec![2, 3, 0, 1]).unwrap();
        assert_eq!(c.cycles(), vec![vec![0, 2], vec![1, 3]]);
    }
}
