//! Single-source unsplittable flow: every player asks for one path from the
//! shared source to its sink carrying its whole demand.

mod generate;
mod greedy;
mod matroid;
mod mechanism;
mod rounding;

use num_traits::Signed;
use serde::{Deserialize, Serialize};

use crate::error::{structural, Error, Result};
use crate::rational::{zero, RatStr, Rational};
use crate::solver::{solve_lp, CapacitatedDigraph, Edge, LinearProgram, LpStatus};

pub use generate::{gen_flow_counterexample, gen_flow_instance, FlowCounterexample, FlowGenParams};
pub use greedy::{flow_decompose, greedy_fractional_flow, GreedyFlow};
pub use matroid::{
    exchange_matching, matroid_greedy, GammoidMatroid, GraphicMatroid, MatroidOracle, UniformMatroid,
};
pub use mechanism::{GreedyFlowMechanism, IntegralFlowMechanism, MatroidGreedyMechanism, RelaxRoundFlowMechanism};
pub use rounding::{rt_lottery, rt_round};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Request {
    pub sink: usize,
    pub demand: Rational,
    pub value: Rational,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FlowWire", into = "FlowWire")]
pub struct FlowInstance {
    pub graph: CapacitatedDigraph,
    pub source: usize,
    pub requests: Vec<Request>,
}

#[derive(Serialize, Deserialize)]
struct EdgeWire {
    u: usize,
    v: usize,
    cap: RatStr,
}

#[derive(Serialize, Deserialize)]
struct RequestWire {
    sink: usize,
    demand: RatStr,
    value: RatStr,
}

#[derive(Serialize, Deserialize)]
struct FlowWire {
    vertices: usize,
    edges: Vec<EdgeWire>,
    source: usize,
    requests: Vec<RequestWire>,
}

impl TryFrom<FlowWire> for FlowInstance {
    type Error = Error;

    fn try_from(w: FlowWire) -> Result<Self> {
        let graph = CapacitatedDigraph {
            vertices: w.vertices,
            edges: w
                .edges
                .into_iter()
                .map(|e| Edge {
                    from: e.u,
                    to: e.v,
                    cap: e.cap.0,
                })
                .collect(),
        };
        let requests = w
            .requests
            .into_iter()
            .map(|r| Request {
                sink: r.sink,
                demand: r.demand.0,
                value: r.value.0,
            })
            .collect();
        FlowInstance::new(graph, w.source, requests)
    }
}

impl From<FlowInstance> for FlowWire {
    fn from(f: FlowInstance) -> Self {
        FlowWire {
            vertices: f.graph.vertices,
            edges: f
                .graph
                .edges
                .iter()
                .map(|e| EdgeWire {
                    u: e.from,
                    v: e.to,
                    cap: e.cap.clone().into(),
                })
                .collect(),
            source: f.source,
            requests: f
                .requests
                .iter()
                .map(|r| RequestWire {
                    sink: r.sink,
                    demand: r.demand.clone().into(),
                    value: r.value.clone().into(),
                })
                .collect(),
        }
    }
}

impl FlowInstance {
    pub fn new(graph: CapacitatedDigraph, source: usize, requests: Vec<Request>) -> Result<Self> {
        let inst = FlowInstance { graph, source, requests };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<()> {
        self.graph.validate()?;
        if self.source >= self.graph.vertices {
            return Err(structural("source outside the vertex range"));
        }
        for (i, r) in self.requests.iter().enumerate() {
            if r.sink >= self.graph.vertices {
                return Err(structural(format!("player {i} has a sink outside the vertex range")));
            }
            if r.sink == self.source {
                return Err(structural(format!("player {i} requests a path from the source to itself")));
            }
            if !r.demand.is_positive() {
                return Err(structural(format!("player {i} has a nonpositive demand")));
            }
            if r.value.is_negative() {
                return Err(structural(format!("player {i} has a negative value")));
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.requests.len()
    }

    pub fn values(&self) -> Vec<Rational> {
        self.requests.iter().map(|r| r.value.clone()).collect()
    }

    pub fn check_bids(&self, bids: &[Rational]) -> Result<()> {
        if bids.len() != self.n() {
            return Err(structural(format!("expected {} bids, got {}", self.n(), bids.len())));
        }
        if bids.iter().any(|b| b.is_negative()) {
            return Err(structural("bids must be nonnegative"));
        }
        Ok(())
    }

    /// Simple source-to-sink paths as edge lists, in depth-first order over
    /// increasing edge indices.
    pub fn simple_paths(&self, sink: usize, limit: usize) -> Result<Vec<Vec<usize>>> {
        let mut out_edges = vec![Vec::new(); self.graph.vertices];
        for (e, edge) in self.graph.edges.iter().enumerate() {
            out_edges[edge.from].push(e);
        }
        let mut paths = Vec::new();
        let mut on_path = vec![false; self.graph.vertices];
        let mut stack = Vec::new();
        on_path[self.source] = true;
        self.extend_paths(self.source, sink, &out_edges, &mut on_path, &mut stack, &mut paths, limit)?;
        Ok(paths)
    }

    #[allow(clippy::too_many_arguments)]
    fn extend_paths(
        &self,
        v: usize,
        sink: usize,
        out_edges: &[Vec<usize>],
        on_path: &mut [bool],
        stack: &mut Vec<usize>,
        paths: &mut Vec<Vec<usize>>,
        limit: usize,
    ) -> Result<()> {
        if v == sink {
            if paths.len() >= limit {
                return Err(Error::SizeGuard {
                    what: "simple paths",
                    actual: paths.len() + 1,
                    limit,
                });
            }
            paths.push(stack.clone());
            return Ok(());
        }
        for &e in &out_edges[v] {
            let w = self.graph.edges[e].to;
            if on_path[w] {
                continue;
            }
            on_path[w] = true;
            stack.push(e);
            self.extend_paths(w, sink, out_edges, on_path, stack, paths, limit)?;
            stack.pop();
            on_path[w] = false;
        }
        Ok(())
    }
}

pub const PATH_LIMIT: usize = 10_000;

/// Optimum of the path-formulated LP with per-unit objective `b_i / d_i`.
pub fn solve_path_lp(inst: &FlowInstance, bids: &[Rational]) -> Result<Rational> {
    inst.check_bids(bids)?;
    let mut columns = Vec::new();
    for (i, r) in inst.requests.iter().enumerate() {
        for p in inst.simple_paths(r.sink, PATH_LIMIT)? {
            columns.push((i, p));
        }
    }
    let objective = columns
        .iter()
        .map(|(i, _)| &bids[*i] / &inst.requests[*i].demand)
        .collect();
    let mut lp = LinearProgram::new(objective);
    for (e, edge) in inst.graph.edges.iter().enumerate() {
        let row: Vec<(usize, Rational)> = columns
            .iter()
            .enumerate()
            .filter(|(_, (_, p))| p.contains(&e))
            .map(|(col, _)| (col, crate::rational::one()))
            .collect();
        if !row.is_empty() {
            lp.push_sparse(&row, edge.cap.clone());
        }
    }
    for (i, r) in inst.requests.iter().enumerate() {
        let row: Vec<(usize, Rational)> = columns
            .iter()
            .enumerate()
            .filter(|(_, (j, _))| *j == i)
            .map(|(col, _)| (col, crate::rational::one()))
            .collect();
        if !row.is_empty() {
            lp.push_sparse(&row, r.demand.clone());
        }
    }
    let sol = solve_lp(&lp)?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::Infeasible(format!("path LP status {:?}", sol.status)));
    }
    Ok(sol.value)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FractionalFlow {
    /// `edge_flows[i][e]`.
    pub edge_flows: Vec<Vec<Rational>>,
    /// Amount delivered to each player's sink.
    pub routed: Vec<Rational>,
}

impl FractionalFlow {
    pub fn total(&self, edges: usize) -> Vec<Rational> {
        let mut t = vec![zero(); edges];
        for f in &self.edge_flows {
            for (e, x) in f.iter().enumerate() {
                t[e] += x;
            }
        }
        t
    }
}

/// Integral routing: each player gets one path carrying its whole demand or
/// nothing.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct PathAssignment {
    pub paths: Vec<Option<Vec<usize>>>,
    /// Whether the independent sample overloaded an edge before alteration.
    pub overloaded: bool,
    /// Players removed by the alteration step, in removal order.
    pub dropped: Vec<usize>,
}

impl PathAssignment {
    pub fn unrouted(n: usize) -> Self {
        Self {
            paths: vec![None; n],
            overloaded: false,
            dropped: Vec::new(),
        }
    }

    pub fn is_routed(&self, i: usize) -> bool {
        self.paths[i].is_some()
    }

    pub fn loads(&self, inst: &FlowInstance) -> Vec<Rational> {
        let mut load = vec![zero(); inst.graph.edges.len()];
        for (i, p) in self.paths.iter().enumerate() {
            for &e in p.iter().flatten() {
                load[e] += &inst.requests[i].demand;
            }
        }
        load
    }

    pub fn is_feasible(&self, inst: &FlowInstance) -> bool {
        self.loads(inst).iter().zip(&inst.graph.edges).all(|(l, e)| *l <= e.cap)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    #[test]
    fn json_round_trip() {
        let text = r#"{"vertices":2,"edges":[{"u":0,"v":1,"cap":"1"}],"source":0,
            "requests":[{"sink":1,"demand":"1/2","value":"3"}]}"#;
        let inst: FlowInstance = serde_json::from_str(text).unwrap();
        assert_eq!(inst.requests[0].demand, crate::rational::ratio(1, 2));
        let back: FlowInstance = serde_json::from_str(&serde_json::to_string(&inst).unwrap()).unwrap();
        assert_eq!(back, inst);
    }

    #[test]
    fn rejects_self_request_and_bad_demand() {
        let mut g = CapacitatedDigraph::new(2);
        g.add_edge(0, 1, int(1));
        let r = |sink, demand| Request { sink, demand, value: int(1) };
        assert!(FlowInstance::new(g.clone(), 0, vec![r(0, int(1))]).is_err());
        assert!(FlowInstance::new(g.clone(), 0, vec![r(1, int(0))]).is_err());
        assert!(FlowInstance::new(g, 0, vec![r(1, int(1))]).is_ok());
    }

    #[test]
    fn path_enumeration_and_lp() {
        let mut g = CapacitatedDigraph::new(3);
        g.add_edge(0, 1, int(1));
        g.add_edge(1, 2, int(1));
        g.add_edge(0, 2, int(1));
        g.add_edge(2, 1, int(1));
        let inst = FlowInstance::new(
            g,
            0,
            vec![Request {
                sink: 2,
                demand: int(2),
                value: int(4),
            }],
        )
        .unwrap();
        assert_eq!(inst.simple_paths(2, 10).unwrap(), vec![vec![0, 1], vec![2]]);
        assert_eq!(inst.simple_paths(1, 10).unwrap(), vec![vec![0], vec![2, 3]]);
        assert!(inst.simple_paths(2, 1).is_err());
        assert_eq!(solve_path_lp(&inst, &[int(4)]).unwrap(), int(4));
    }
}
