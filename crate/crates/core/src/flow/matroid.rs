//! Matroids given by independence oracles, the greedy algorithm, and basis
//! exchange bijections.

use crate::error::{precondition, structural, Result};
use crate::rational::{int, zero, Rational};
use crate::solver::{max_flow, max_weight_perfect_matching, CapacitatedDigraph, WeightMatrix};

pub trait MatroidOracle {
    fn ground_size(&self) -> usize;
    fn is_independent(&self, set: &[usize]) -> bool;

    fn is_basis(&self, set: &[usize]) -> bool {
        self.is_independent(set)
            && (0..self.ground_size()).filter(|e| !set.contains(e)).all(|e| {
                let mut bigger = set.to_vec();
                bigger.push(e);
                !self.is_independent(&bigger)
            })
    }
}

#[derive(Clone, Debug)]
pub struct UniformMatroid {
    pub size: usize,
    pub rank: usize,
}

impl MatroidOracle for UniformMatroid {
    fn ground_size(&self) -> usize {
        self.size
    }

    fn is_independent(&self, set: &[usize]) -> bool {
        set.len() <= self.rank && distinct_in_range(set, self.size)
    }
}

/// Forests of an undirected multigraph; elements are edges.
#[derive(Clone, Debug)]
pub struct GraphicMatroid {
    pub vertices: usize,
    pub edges: Vec<(usize, usize)>,
}

impl MatroidOracle for GraphicMatroid {
    fn ground_size(&self) -> usize {
        self.edges.len()
    }

    fn is_independent(&self, set: &[usize]) -> bool {
        if !distinct_in_range(set, self.edges.len()) {
            return false;
        }
        let mut parent: Vec<usize> = (0..self.vertices).collect();
        fn root(parent: &mut [usize], mut v: usize) -> usize {
            while parent[v] != v {
                parent[v] = parent[parent[v]];
                v = parent[v];
            }
            v
        }
        for &e in set {
            let (u, v) = self.edges[e];
            let (ru, rv) = (root(&mut parent, u), root(&mut parent, v));
            if ru == rv {
                return false;
            }
            parent[ru] = rv;
        }
        true
    }
}

/// Terminal sets that can be served simultaneously with one unit each from
/// `source` in an integrally capacitated network; elements are terminals.
#[derive(Clone, Debug)]
pub struct GammoidMatroid {
    pub graph: CapacitatedDigraph,
    pub source: usize,
    pub terminals: Vec<usize>,
}

impl MatroidOracle for GammoidMatroid {
    fn ground_size(&self) -> usize {
        self.terminals.len()
    }

    fn is_independent(&self, set: &[usize]) -> bool {
        if !distinct_in_range(set, self.terminals.len()) {
            return false;
        }
        if set.is_empty() {
            return true;
        }
        let sink = self.graph.vertices;
        let mut g = self.graph.clone();
        g.vertices += 1;
        for &t in set {
            g.add_edge(self.terminals[t], sink, int(1));
        }
        max_flow(&g, self.source, sink).is_ok_and(|f| f.value == int(set.len() as i64))
    }
}

fn distinct_in_range(set: &[usize], size: usize) -> bool {
    let mut seen = vec![false; size];
    set.iter().all(|&e| e < size && !std::mem::replace(&mut seen[e], true))
}

/// Scans elements by decreasing bid (ties by index) and keeps each one that
/// preserves independence. Zero bids are scanned too, so the result is a
/// basis.
pub fn matroid_greedy<M: MatroidOracle + ?Sized>(oracle: &M, bids: &[Rational]) -> Result<Vec<usize>> {
    if bids.len() != oracle.ground_size() {
        return Err(structural(format!("expected {} bids, got {}", oracle.ground_size(), bids.len())));
    }
    if bids.iter().any(|b| *b < zero()) {
        return Err(structural("bids must be nonnegative"));
    }
    if !oracle.is_independent(&[]) {
        return Err(structural("oracle rejects the empty set"));
    }
    let mut order: Vec<usize> = (0..bids.len()).collect();
    order.sort_by(|&a, &b| bids[b].cmp(&bids[a]).then(a.cmp(&b)));
    let mut chosen = Vec::new();
    for e in order {
        chosen.push(e);
        if oracle.is_independent(&chosen) {
            for skip in 0..chosen.len() {
                let mut subset = chosen.clone();
                subset.remove(skip);
                if !oracle.is_independent(&subset) {
                    return Err(structural(format!("oracle is not hereditary at element {e}")));
                }
            }
        } else {
            chosen.pop();
        }
    }
    chosen.sort_unstable();
    Ok(chosen)
}

/// Bijection `m: I -> J` with `I - i + m(i)` independent for every `i`,
/// returned as pairs sorted by the element of `I`.
pub fn exchange_matching<M: MatroidOracle + ?Sized>(oracle: &M, basis_i: &[usize], basis_j: &[usize]) -> Result<Vec<(usize, usize)>> {
    if !oracle.is_basis(basis_i) || !oracle.is_basis(basis_j) {
        return Err(precondition("exchange matching needs two bases"));
    }
    let mut left = basis_i.to_vec();
    left.sort_unstable();
    let mut right = basis_j.to_vec();
    right.sort_unstable();
    if left.len() != right.len() {
        return Err(precondition("bases differ in size"));
    }
    let swap = |a: usize, b: usize| -> Vec<usize> { left.iter().map(|&x| if x == a { b } else { x }).collect() };
    let cells = left
        .iter()
        .map(|&a| {
            right
                .iter()
                .map(|&b| {
                    let ok = a == b || (!left.contains(&b) && oracle.is_independent(&swap(a, b)));
                    ok.then(zero)
                })
                .collect()
        })
        .collect();
    let m = max_weight_perfect_matching(&WeightMatrix::new(cells)?)?;
    let pairs: Vec<(usize, usize)> = m.perm.iter().enumerate().map(|(r, &c)| (left[r], right[c])).collect();
    for &(a, b) in &pairs {
        if !oracle.is_independent(&swap(a, b)) {
            return Err(structural(format!("exchange {a} -> {b} failed verification")));
        }
    }
    Ok(pairs)
}
