//! Cycle covers without 2-cycles but with half-edges.
//!
//! Each unordered pair `{u, v}` is a gadget vertex with four arcs; a cover
//! picks none or two of them so that every original vertex has one outgoing
//! and one incoming arc and never uses one pair for both. The chosen pairs
//! therefore form an undirected 2-factor with cycles of length at least
//! three, and each vertex independently decides which of its two pairs is
//! its out-side. Vertex `u` collects `w(u, out(u)) / 2` and
//! `w(in(u), u) / 2`, so the directed edge `(u, v)` is worth its full weight
//! exactly when `out(u) = v` and `in(v) = u`.

use serde::Serialize;

use super::{derangements, edge_index, CompleteDigraph, HamiltonianCycle};
use crate::error::{structural, Error, Result};
use crate::rational::{int, ratio, zero, Rational};

pub const HALF_EDGE_LIMIT: usize = 6;
const SOCIAL_COST_LIMIT: usize = 5;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct HalfEdgeCover {
    /// Neighbour whose pair carries `u`'s outgoing half.
    pub out: Vec<usize>,
    /// Neighbour whose pair carries `u`'s incoming half.
    pub inn: Vec<usize>,
}

/// What a gadget pair `{u, v}` with `u < v` contributes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairState {
    Unused,
    Forward,
    Backward,
    BothOut,
    BothIn,
}

impl HalfEdgeCover {
    pub fn from_tour(t: &HamiltonianCycle) -> Self {
        let n = t.order.len();
        let mut out = vec![0; n];
        let mut inn = vec![0; n];
        for (u, v) in t.edges() {
            out[u] = v;
            inn[v] = u;
        }
        HalfEdgeCover { out, inn }
    }

    pub fn is_valid(&self) -> bool {
        let n = self.out.len();
        if self.inn.len() != n || n < 3 {
            return false;
        }
        let ok = (0..n).all(|u| self.out[u] < n && self.inn[u] < n && self.out[u] != u && self.inn[u] != u && self.out[u] != self.inn[u]);
        // The pair {u, v} must be used from both ends or from neither.
        ok && (0..n).all(|u| {
            let v = self.out[u];
            let w = self.inn[u];
            (self.out[v] == u || self.inn[v] == u) && (self.out[w] == u || self.inn[w] == u)
        })
    }

    pub fn pair_state(&self, u: usize, v: usize) -> PairState {
        let (u_out, u_in) = (self.out[u] == v, self.inn[u] == v);
        let (v_out, v_in) = (self.out[v] == u, self.inn[v] == u);
        match (u_out || u_in, u_out, v_out) {
            (false, _, _) => PairState::Unused,
            (true, true, false) if v_in => PairState::Forward,
            (true, false, true) if u_in => PairState::Backward,
            (true, true, true) => PairState::BothOut,
            _ => PairState::BothIn,
        }
    }

    /// Fraction (0, 1/2 or 1) of the directed edge `(u, v)` in the cover.
    pub fn share(&self, u: usize, v: usize) -> Rational {
        let halves = i64::from(self.out[u] == v) + i64::from(self.inn[v] == u);
        ratio(halves, 2)
    }

    pub fn contains_full(&self, u: usize, v: usize) -> bool {
        self.out[u] == v && self.inn[v] == u
    }

    pub fn weight(&self, g: &CompleteDigraph) -> Rational {
        let total: Rational = (0..self.out.len())
            .map(|u| &g.w[u][self.out[u]] + &g.w[self.inn[u]][u])
            .sum();
        total / int(2)
    }
}

/// Undirected 2-factors without 2-cycles, as neighbour pairs per vertex
/// (each factor appears once per orientation of each cycle).
fn two_factors(n: usize) -> Result<Vec<Vec<(usize, usize)>>> {
    if n < 3 {
        return Err(structural("half-edge covers need n >= 3"));
    }
    Ok(derangements(n)?
        .into_iter()
        .filter(|s| (0..n).all(|u| s[s[u]] != u))
        .map(|s| {
            let mut pred = vec![0; n];
            for (u, &v) in s.iter().enumerate() {
                pred[v] = u;
            }
            (0..n).map(|u| (s[u], pred[u])).collect()
        })
        .collect())
}

/// Best orientation of one 2-factor, optionally forcing the full edge `(a, b)`.
/// Returns `None` when the factor does not contain `{a, b}`.
fn best_orientation(w: &[Vec<Rational>], nbrs: &[(usize, usize)], forced: Option<(usize, usize)>) -> Option<(Rational, HalfEdgeCover)> {
    let n = nbrs.len();
    let mut out = vec![0; n];
    let mut inn = vec![0; n];
    let mut total = zero();
    for (u, &(x, y)) in nbrs.iter().enumerate() {
        let keep = &w[u][x] + &w[y][u];
        let flip = &w[u][y] + &w[x][u];
        let first = match forced {
            Some((a, b)) if a == u => {
                if x != b && y != b {
                    return None;
                }
                x == b
            }
            Some((a, b)) if b == u => {
                if x != a && y != a {
                    return None;
                }
                y == a
            }
            _ => keep >= flip,
        };
        let (o, i, v) = if first { (x, y, keep) } else { (y, x, flip) };
        out[u] = o;
        inn[u] = i;
        total += v;
    }
    Some((total / int(2), HalfEdgeCover { out, inn }))
}

fn best_over(w: &[Vec<Rational>], factors: &[Vec<(usize, usize)>], forced: Option<(usize, usize)>) -> Option<(HalfEdgeCover, Rational)> {
    let mut best: Option<(HalfEdgeCover, Rational)> = None;
    for f in factors {
        if let Some((v, c)) = best_orientation(w, f, forced) {
            if best.as_ref().map_or(true, |(_, b)| v > *b) {
                best = Some((c, v));
            }
        }
    }
    best
}

fn guard(n: usize, limit: usize) -> Result<()> {
    if n > limit {
        return Err(Error::SizeGuard {
            what: "half-edge cover vertices",
            actual: n,
            limit,
        });
    }
    Ok(())
}

/// Maximum-weight half-edge cover by exhaustive search over 2-factors.
pub fn half_edge_cover(g: &CompleteDigraph) -> Result<(HalfEdgeCover, Rational)> {
    guard(g.n, HALF_EDGE_LIMIT)?;
    let factors = two_factors(g.n)?;
    Ok(best_over(&g.w, &factors, None).expect("a Hamiltonian cycle is a half-edge cover"))
}

#[derive(Clone, Debug, PartialEq)]
pub struct HalfEdgeSocialCost {
    pub holds: bool,
    pub lhs: Rational,
    pub rhs: Rational,
}

/// `sum_{e in T} (W^{b_-e}(all) - W^{b_-e}(covers holding all of e)) <= 3 W^b`
/// over half-edge covers, by exhaustive search.
pub fn check_half_edge_social_cost(g: &CompleteDigraph, bids: &[Rational], tour: &HamiltonianCycle) -> Result<HalfEdgeSocialCost> {
    guard(g.n, SOCIAL_COST_LIMIT)?;
    if bids.len() != g.num_edges() {
        return Err(structural(format!("expected {} bids", g.num_edges())));
    }
    if !tour.is_valid(g.n) {
        return Err(structural("reference is not a tour of the graph"));
    }
    let declared = g.with_bids(bids)?;
    let factors = two_factors(g.n)?;
    let (_, w_total) = best_over(&declared.w, &factors, None).expect("tours are feasible");
    let mut lhs = zero();
    for (u, v) in tour.edges() {
        let mut w = declared.w.clone();
        w[u][v] = zero();
        debug_assert_eq!(bids[edge_index(g.n, u, v)], declared.w[u][v]);
        let (_, without) = best_over(&w, &factors, None).expect("tours are feasible");
        let (_, forced) = best_over(&w, &factors, Some((u, v))).expect("some tour uses every edge");
        lhs += without - forced;
    }
    let rhs = int(3) * w_total;
    Ok(HalfEdgeSocialCost {
        holds: lhs <= rhs,
        lhs,
        rhs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maxtsp::{max_weight_cycle_cover, max_weight_tour};

    fn graph(rows: &[&[i64]]) -> CompleteDigraph {
        CompleteDigraph::new(rows.iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect()).unwrap()
    }

    #[test]
    fn triangle_relaxes_cycle_cover() {
        let g = graph(&[&[0, 4, 1], &[1, 0, 4], &[4, 1, 0]]);
        assert_eq!(half_edge_cover(&g).unwrap().1, max_weight_cycle_cover(&g).unwrap().1);
        for seed in 0..10 {
            let g = CompleteDigraph::random(3, 9, seed).unwrap();
            let (c, w) = half_edge_cover(&g).unwrap();
            assert!(c.is_valid());
            assert!(w >= max_weight_cycle_cover(&g).unwrap().1);
            assert_eq!(c.weight(&g), w);
        }
        // Vertex 1 takes both heavy edges as incoming halves.
        let g = graph(&[&[0, 10, 0], &[0, 0, 0], &[0, 10, 0]]);
        let (c, w) = half_edge_cover(&g).unwrap();
        assert_eq!(w, int(15));
        assert_eq!(c.pair_state(0, 1), PairState::Forward);
        assert_eq!(max_weight_cycle_cover(&g).unwrap().1, int(10));
    }

    #[test]
    fn uniform_weights() {
        for n in 3..=6 {
            let g = CompleteDigraph::new(vec![vec![int(1); n]; n]).unwrap();
            assert_eq!(half_edge_cover(&g).unwrap().1, int(n as i64));
        }
        assert!(half_edge_cover(&CompleteDigraph::new(vec![vec![int(1); 7]; 7]).unwrap()).is_err());
    }

    #[test]
    fn half_edges_beat_tours() {
        let g = graph(&[&[0, 1, 0, 5], &[0, 0, 0, 1], &[0, 1, 0, 5], &[0, 1, 1, 0]]);
        let (c, w) = half_edge_cover(&g).unwrap();
        assert_eq!(w, ratio(17, 2));
        assert_eq!(max_weight_tour(&g).unwrap().1, int(7));
        assert!(c.is_valid());
    }

    #[test]
    fn tours_are_covers() {
        let t = HamiltonianCycle { order: vec![0, 2, 1, 3] };
        let c = HalfEdgeCover::from_tour(&t);
        assert!(c.is_valid());
        assert!(c.contains_full(0, 2) && !c.contains_full(2, 0));
        assert_eq!(c.pair_state(0, 2), PairState::Forward);
        assert_eq!(c.pair_state(1, 2), PairState::Backward);
        assert_eq!(c.pair_state(0, 1), PairState::Unused);
        assert_eq!(c.share(0, 2), int(1));
    }

    #[test]
    fn social_cost_bound() {
        for seed in 0..5 {
            let g = CompleteDigraph::random(4, 9, seed).unwrap();
            let bids = g.edge_weights();
            let (tour, _) = max_weight_tour(&g).unwrap();
            let r = check_half_edge_social_cost(&g, &bids, &tour).unwrap();
            assert!(r.holds, "{r:?}");
        }
        let g = CompleteDigraph::random(4, 9, 0).unwrap();
        let zero_bids = vec![zero(); g.num_edges()];
        let t = HamiltonianCycle { order: vec![0, 1, 2, 3] };
        assert_eq!(check_half_edge_social_cost(&g, &zero_bids, &t).unwrap().lhs, zero());
    }
}
