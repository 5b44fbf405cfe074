//! Edmonds-Karp maximum flow with exact capacities.

use std::collections::VecDeque;

use num_traits::{Signed, Zero};

use crate::error::{structural, Result};
use crate::rational::{min, zero, Rational};

#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub cap: Rational,
}

/// Directed multigraph on vertices `0..vertices`.
#[derive(Clone, Debug, PartialEq)]
pub struct CapacitatedDigraph {
    pub vertices: usize,
    pub edges: Vec<Edge>,
}

impl CapacitatedDigraph {
    pub fn new(vertices: usize) -> Self {
        Self {
            vertices,
            edges: Vec::new(),
        }
    }

    pub fn add_edge(&mut self, from: usize, to: usize, cap: Rational) -> usize {
        self.edges.push(Edge { from, to, cap });
        self.edges.len() - 1
    }

    pub fn validate(&self) -> Result<()> {
        for (i, e) in self.edges.iter().enumerate() {
            if e.from >= self.vertices || e.to >= self.vertices {
                return Err(structural(format!("edge {i} references a vertex outside 0..{}", self.vertices)));
            }
            if e.cap.is_negative() {
                return Err(structural(format!("edge {i} has negative capacity")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MaxFlow {
    pub value: Rational,
    pub edge_flows: Vec<Rational>,
}

/// Residual network over an edge list. Flow on edge `e` may be pushed
/// forward up to `cap - flow` and cancelled back down to zero.
#[derive(Clone, Debug)]
pub struct Residual<'a> {
    graph: &'a CapacitatedDigraph,
    pub flow: Vec<Rational>,
    out: Vec<Vec<usize>>,
    inc: Vec<Vec<usize>>,
}

impl<'a> Residual<'a> {
    pub fn new(graph: &'a CapacitatedDigraph) -> Self {
        Self::with_flow(graph, vec![zero(); graph.edges.len()])
    }

    pub fn with_flow(graph: &'a CapacitatedDigraph, flow: Vec<Rational>) -> Self {
        let mut out = vec![Vec::new(); graph.vertices];
        let mut inc = vec![Vec::new(); graph.vertices];
        for (i, e) in graph.edges.iter().enumerate() {
            out[e.from].push(i);
            inc[e.to].push(i);
        }
        Self { graph, flow, out, inc }
    }

    /// Shortest augmenting path by BFS; steps are `(edge, forward)`.
    fn augmenting_path(&self, s: usize, t: usize) -> Option<(Vec<(usize, bool)>, Rational)> {
        let n = self.graph.vertices;
        let mut via: Vec<Option<(usize, bool)>> = vec![None; n];
        let mut seen = vec![false; n];
        seen[s] = true;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            if u == t {
                break;
            }
            for &e in &self.out[u] {
                let v = self.graph.edges[e].to;
                if !seen[v] && self.flow[e] < self.graph.edges[e].cap {
                    seen[v] = true;
                    via[v] = Some((e, true));
                    queue.push_back(v);
                }
            }
            for &e in &self.inc[u] {
                let v = self.graph.edges[e].from;
                if !seen[v] && self.flow[e].is_positive() {
                    seen[v] = true;
                    via[v] = Some((e, false));
                    queue.push_back(v);
                }
            }
        }
        if !seen[t] {
            return None;
        }
        let mut path = Vec::new();
        let mut v = t;
        let mut bottleneck: Option<Rational> = None;
        while v != s {
            let (e, fwd) = via[v].expect("bfs parent");
            let room = if fwd {
                &self.graph.edges[e].cap - &self.flow[e]
            } else {
                self.flow[e].clone()
            };
            bottleneck = Some(match bottleneck {
                None => room,
                Some(b) => min(&b, &room),
            });
            path.push((e, fwd));
            v = if fwd { self.graph.edges[e].from } else { self.graph.edges[e].to };
        }
        path.reverse();
        Some((path, bottleneck.unwrap_or_else(zero)))
    }

    /// Pushes up to `limit` units (unbounded when `None`) from `s` to `t`
    /// along shortest augmenting paths; returns the amount pushed.
    pub fn push(&mut self, s: usize, t: usize, limit: Option<&Rational>) -> Rational {
        let mut pushed = zero();
        loop {
            if limit.is_some_and(|l| pushed >= *l) {
                break;
            }
            let Some((path, bottleneck)) = self.augmenting_path(s, t) else { break };
            let amount = match limit {
                Some(l) => min(&bottleneck, &(l - &pushed)),
                None => bottleneck,
            };
            if amount.is_zero() {
                break;
            }
            for (e, fwd) in path {
                if fwd {
                    self.flow[e] += &amount;
                } else {
                    self.flow[e] -= &amount;
                }
            }
            pushed += amount;
        }
        pushed
    }
}

pub fn max_flow(g: &CapacitatedDigraph, s: usize, t: usize) -> Result<MaxFlow> {
    g.validate()?;
    if s >= g.vertices || t >= g.vertices {
        return Err(structural(format!("terminal outside 0..{}", g.vertices)));
    }
    if s == t {
        return Err(structural("source equals sink"));
    }
    let mut res = Residual::new(g);
    let value = res.push(s, t, None);
    Ok(MaxFlow {
        value,
        edge_flows: res.flow,
    })
}
