use serde::Serialize;

use super::{edge_index, CompleteDigraph, CycleCover, HamiltonianCycle};
use crate::error::{structural, Error, Result};
use crate::rational::{int, zero, Rational};
use crate::solver::{max_weight_perfect_matching, WeightMatrix};

/// Largest `n` for brute force over cycle covers.
pub const BRUTE_FORCE_LIMIT: usize = 7;
const TOUR_LIMIT: usize = 9;

/// Maximum-weight cycle cover via assignment with the diagonal forbidden;
/// ties go to the lexicographically smallest successor vector.
pub fn max_weight_cycle_cover(g: &CompleteDigraph) -> Result<(CycleCover, Rational)> {
    if g.n < 2 {
        return Err(structural("cycle covers need n >= 2"));
    }
    let m = max_weight_perfect_matching(&WeightMatrix::without_diagonal(g.w.clone())?)?;
    Ok((CycleCover { succ: m.perm }, m.value))
}

/// All fixed-point-free permutations of `0..n` in lexicographic order.
pub fn derangements(n: usize) -> Result<Vec<Vec<usize>>> {
    if n > BRUTE_FORCE_LIMIT {
        return Err(Error::SizeGuard {
            what: "cycle cover brute force vertices",
            actual: n,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    fn extend(n: usize, used: &mut [bool], cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        let u = cur.len();
        if u == n {
            out.push(cur.clone());
            return;
        }
        for v in 0..n {
            if v != u && !used[v] {
                used[v] = true;
                cur.push(v);
                extend(n, used, cur, out);
                cur.pop();
                used[v] = false;
            }
        }
    }
    let mut out = Vec::new();
    extend(n, &mut vec![false; n], &mut Vec::new(), &mut out);
    Ok(out)
}

/// Best Hamiltonian cycle by enumeration (vertex 0 fixed first).
pub fn max_weight_tour(g: &CompleteDigraph) -> Result<(HamiltonianCycle, Rational)> {
    if g.n > TOUR_LIMIT {
        return Err(Error::SizeGuard {
            what: "tour brute force vertices",
            actual: g.n,
            limit: TOUR_LIMIT,
        });
    }
    let mut rest: Vec<usize> = (1..g.n).collect();
    let mut best: Option<(Vec<usize>, Rational)> = None;
    loop {
        let mut order = vec![0];
        order.extend(&rest);
        let tour = HamiltonianCycle { order };
        let w = tour.weight(g);
        if best.as_ref().map_or(true, |(_, b)| w > *b) {
            best = Some((tour.order, w));
        }
        if !next_permutation(&mut rest) {
            break;
        }
    }
    let (order, w) = best.expect("at least one tour");
    Ok((HamiltonianCycle { order }, w))
}

fn next_permutation(v: &mut [usize]) -> bool {
    let Some(i) = (1..v.len()).rev().find(|&i| v[i - 1] < v[i]) else {
        return false;
    };
    let j = (i..v.len()).rev().find(|&j| v[j] > v[i - 1]).expect("successor exists");
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// Position an edge of the old cover plays relative to the forced edge
/// `(v3, v4)`: `v3 -> v1`, `v4 -> v2` and `v6 -> v4` in the old cover.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Role {
    V3V1,
    V4V2,
    V6V4,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ForcedEdge {
    pub cover: CycleCover,
    pub removed: Vec<(Role, (usize, usize))>,
    pub added: Vec<(usize, usize)>,
}

/// Local surgery that puts `(v3, v4)` into `cover` while keeping every
/// in- and out-degree at one.
pub fn force_edge(cover: &CycleCover, e: (usize, usize)) -> Result<ForcedEdge> {
    let n = cover.succ.len();
    let (v3, v4) = e;
    if v3 >= n || v4 >= n || v3 == v4 || !cover.is_valid() {
        return Err(structural("force_edge needs a valid cover and a non-loop edge"));
    }
    if cover.contains(v3, v4) {
        return Ok(ForcedEdge {
            cover: cover.clone(),
            removed: Vec::new(),
            added: Vec::new(),
        });
    }
    let mut pred = vec![0; n];
    for (u, &v) in cover.succ.iter().enumerate() {
        pred[v] = u;
    }
    let v1 = cover.succ[v3];
    let v2 = cover.succ[v4];
    let v6 = pred[v4];
    let mut succ = cover.succ.clone();
    let (removed, added) = if v1 != v6 {
        succ[v3] = v4;
        succ[v6] = v1;
        (vec![(Role::V3V1, (v3, v1)), (Role::V6V4, (v6, v4))], vec![(v3, v4), (v6, v1)])
    } else {
        succ[v3] = v4;
        succ[v4] = v1;
        succ[v6] = v2;
        (
            vec![(Role::V3V1, (v3, v1)), (Role::V6V4, (v6, v4)), (Role::V4V2, (v4, v2))],
            vec![(v3, v4), (v4, v1), (v6, v2)],
        )
    };
    let forced = CycleCover { succ };
    debug_assert!(forced.is_valid());
    Ok(ForcedEdge {
        cover: forced,
        removed,
        added,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct CcSocialCost {
    pub holds: bool,
    pub lhs: Rational,
    pub rhs: Rational,
    /// Every forced cover was valid, removed at most three edges, and its
    /// removed weight bounded the exact loss.
    pub force_bound_ok: bool,
}

/// `sum_{e in C'} (W^{b_-e}(all covers) - W^{b_-e}(covers with e)) <= 3 W^b`,
/// with both maxima by brute force over derangements.
pub fn check_cc_social_cost(g: &CompleteDigraph, bids: &[Rational], reference: &CycleCover) -> Result<CcSocialCost> {
    if bids.len() != g.num_edges() {
        return Err(structural(format!("expected {} bids", g.num_edges())));
    }
    if reference.succ.len() != g.n || !reference.is_valid() {
        return Err(structural("reference is not a cycle cover of the graph"));
    }
    let declared = g.with_bids(bids)?;
    let all = derangements(g.n)?;
    let weights: Vec<Rational> = all
        .iter()
        .map(|d| CycleCover { succ: d.clone() }.weight(&declared))
        .collect();
    let (best, w_total) = max_weight_cycle_cover(&declared)?;
    let mut lhs = zero();
    let mut force_bound_ok = true;
    for (u, v) in reference.edges() {
        let be = &bids[edge_index(g.n, u, v)];
        let mut without = zero();
        let mut forced = zero();
        for (d, w) in all.iter().zip(&weights) {
            let has = d[u] == v;
            let w = if has { w - be } else { w.clone() };
            if w > without {
                without = w.clone();
            }
            if has && w > forced {
                forced = w;
            }
        }
        let loss = &without - &forced;
        let f = force_edge(&best, (u, v))?;
        // An edge already in the cover plays the (v3, v1) role against itself.
        let removed: Rational = if best.contains(u, v) {
            be.clone()
        } else {
            f.removed.iter().map(|&(_, (a, b))| &declared.w[a][b]).sum()
        };
        force_bound_ok &= f.cover.is_valid() && f.cover.contains(u, v) && f.removed.len() <= 3 && loss <= removed;
        lhs += loss;
    }
    let rhs = int(3) * w_total;
    Ok(CcSocialCost {
        holds: lhs <= rhs,
        lhs,
        rhs,
        force_bound_ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    fn graph(rows: &[&[i64]]) -> CompleteDigraph {
        CompleteDigraph::new(rows.iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect()).unwrap()
    }

    #[test]
    fn triangle_orientation() {
        let g = graph(&[&[0, 5, 1], &[1, 0, 5], &[5, 1, 0]]);
        let (c, w) = max_weight_cycle_cover(&g).unwrap();
        assert_eq!(c.succ, vec![1, 2, 0]);
        assert_eq!(w, int(15));
    }

    #[test]
    fn uniform_weight_is_n() {
        let g = CompleteDigraph::new(vec![vec![int(1); 5]; 5]).unwrap();
        assert_eq!(max_weight_cycle_cover(&g).unwrap().1, int(5));
    }

    #[test]
    fn derangement_counts() {
        let counts: Vec<usize> = (2..=6).map(|n| derangements(n).unwrap().len()).collect();
        assert_eq!(counts, vec![1, 2, 9, 44, 265]);
        assert!(derangements(8).is_err());
    }

    #[test]
    fn force_edge_cases() {
        let c = CycleCover::new(vec![1, 2, 3, 4, 0]).unwrap();
        assert!(force_edge(&c, (0, 1)).unwrap().removed.is_empty());

        let f = force_edge(&c, (0, 3)).unwrap();
        assert_eq!(f.removed.len(), 2);
        assert!(f.cover.is_valid() && f.cover.contains(0, 3));

        let f = force_edge(&c, (0, 2)).unwrap();
        assert_eq!(f.removed.len(), 3);
        assert!(f.cover.is_valid() && f.cover.contains(0, 2));

        let square = CycleCover::new(vec![1, 2, 3, 0]).unwrap();
        let f = force_edge(&square, (0, 2)).unwrap();
        assert_eq!(f.removed.len(), 3);
        assert!(f.cover.is_valid());
    }

    #[test]
    fn optimal_reference_holds() {
        let g = CompleteDigraph::random(5, 9, 3).unwrap();
        let bids = g.edge_weights();
        let (best, w) = max_weight_cycle_cover(&g).unwrap();
        let r = check_cc_social_cost(&g, &bids, &best).unwrap();
        assert!(r.holds && r.force_bound_ok);
        assert_eq!(r.rhs, int(3) * w);
        let zero_bids = vec![ratio(0, 1); g.num_edges()];
        assert_eq!(check_cc_social_cost(&g, &zero_bids, &best).unwrap().lhs, int(0));
    }

    #[test]
    fn tour_brute_force() {
        let g = graph(&[&[0, 1, 0, 5], &[0, 0, 0, 1], &[0, 1, 0, 5], &[0, 1, 1, 0]]);
        assert_eq!(max_weight_tour(&g).unwrap().1, int(7));
    }
}
