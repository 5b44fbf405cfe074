use super::{greedy_fractional_flow, matroid_greedy, rt_lottery, rt_round, FlowInstance, FractionalFlow, MatroidOracle, PathAssignment, PATH_LIMIT};
use crate::error::Result;
use crate::mechanism::{Domain, Lottery, Mechanism, OutcomeSpace};
use crate::rational::{zero, Rational};
use crate::solver::{solve_choice_program, ChoiceOption, ChoiceProgram};

/// Pay-your-bid mechanism that outputs the greedy fractional flow; a player
/// routed `r_i` of its demand receives `(r_i / d_i) v_i`.
#[derive(Clone, Debug)]
pub struct GreedyFlowMechanism {
    pub instance: FlowInstance,
}

impl Mechanism for GreedyFlowMechanism {
    type Bid = Rational;
    type Relaxed = FractionalFlow;
    type Outcome = FractionalFlow;

    fn domain(&self) -> Domain {
        Domain::Flow
    }

    fn num_players(&self) -> usize {
        self.instance.n()
    }

    fn space(&self) -> OutcomeSpace {
        OutcomeSpace::Relaxed
    }

    fn is_exact_maximizer(&self) -> bool {
        true
    }

    fn relax(&self, bids: &[Rational]) -> Result<FractionalFlow> {
        Ok(greedy_fractional_flow(&self.instance, bids)?.flow)
    }

    fn round(&self, relaxed: &FractionalFlow, _seed: u64) -> Result<FractionalFlow> {
        Ok(relaxed.clone())
    }

    fn value(&self, player: usize, valuation: &Rational, outcome: &FractionalFlow) -> Rational {
        valuation * &outcome.routed[player] / &self.instance.requests[player].demand
    }

    fn optimal_welfare(&self, values: &[Rational]) -> Result<Rational> {
        Ok(greedy_fractional_flow(&self.instance, values)?.welfare)
    }
}

/// Greedy fractional flow followed by randomized path rounding.
#[derive(Clone, Debug)]
pub struct RelaxRoundFlowMechanism {
    pub instance: FlowInstance,
    pub epsilon: Rational,
}

impl Mechanism for RelaxRoundFlowMechanism {
    type Bid = Rational;
    type Relaxed = FractionalFlow;
    type Outcome = PathAssignment;

    fn domain(&self) -> Domain {
        Domain::Flow
    }

    fn num_players(&self) -> usize {
        self.instance.n()
    }

    fn space(&self) -> OutcomeSpace {
        OutcomeSpace::Original
    }

    fn is_exact_maximizer(&self) -> bool {
        false
    }

    fn is_randomized(&self) -> bool {
        true
    }

    fn relax(&self, bids: &[Rational]) -> Result<FractionalFlow> {
        Ok(greedy_fractional_flow(&self.instance, bids)?.flow)
    }

    fn round(&self, relaxed: &FractionalFlow, seed: u64) -> Result<PathAssignment> {
        rt_round(relaxed, &self.instance, &self.epsilon, seed)
    }

    fn lottery(&self, relaxed: &FractionalFlow, limit: usize) -> Result<Option<Lottery<PathAssignment>>> {
        rt_lottery(relaxed, &self.instance, &self.epsilon, limit)
    }

    fn value(&self, player: usize, valuation: &Rational, outcome: &PathAssignment) -> Rational {
        if outcome.is_routed(player) {
            valuation.clone()
        } else {
            zero()
        }
    }

    fn optimal_welfare(&self, values: &[Rational]) -> Result<Rational> {
        IntegralFlowMechanism {
            instance: self.instance.clone(),
        }
        .optimal_welfare(values)
    }
}

/// Exact integral declared-welfare maximizer over simple paths. Ties go to
/// the lexicographically smallest choice vector (paths in enumeration order,
/// unrouted last).
#[derive(Clone, Debug)]
pub struct IntegralFlowMechanism {
    pub instance: FlowInstance,
}

impl IntegralFlowMechanism {
    fn solve(&self, bids: &[Rational]) -> Result<(PathAssignment, Rational)> {
        let inst = &self.instance;
        inst.check_bids(bids)?;
        let menus = inst
            .requests
            .iter()
            .map(|r| inst.simple_paths(r.sink, PATH_LIMIT))
            .collect::<Result<Vec<_>>>()?;
        let prog = ChoiceProgram {
            capacities: inst.graph.edges.iter().map(|e| e.cap.clone()).collect(),
            players: menus
                .iter()
                .enumerate()
                .map(|(i, paths)| {
                    paths
                        .iter()
                        .map(|p| ChoiceOption {
                            value: bids[i].clone(),
                            usage: p.iter().map(|&e| (e, inst.requests[i].demand.clone())).collect(),
                        })
                        .collect()
                })
                .collect(),
        };
        let sol = solve_choice_program(&prog)?;
        let mut out = PathAssignment::unrouted(inst.n());
        for (i, c) in sol.choices.iter().enumerate() {
            out.paths[i] = c.map(|k| menus[i][k].clone());
        }
        Ok((out, sol.value))
    }
}

impl Mechanism for IntegralFlowMechanism {
    type Bid = Rational;
    type Relaxed = PathAssignment;
    type Outcome = PathAssignment;

    fn domain(&self) -> Domain {
        Domain::Flow
    }

    fn num_players(&self) -> usize {
        self.instance.n()
    }

    fn space(&self) -> OutcomeSpace {
        OutcomeSpace::Original
    }

    fn is_exact_maximizer(&self) -> bool {
        true
    }

    fn relax(&self, bids: &[Rational]) -> Result<PathAssignment> {
        Ok(self.solve(bids)?.0)
    }

    fn round(&self, relaxed: &PathAssignment, _seed: u64) -> Result<PathAssignment> {
        Ok(relaxed.clone())
    }

    fn value(&self, player: usize, valuation: &Rational, outcome: &PathAssignment) -> Rational {
        if outcome.is_routed(player) {
            valuation.clone()
        } else {
            zero()
        }
    }

    fn optimal_welfare(&self, values: &[Rational]) -> Result<Rational> {
        Ok(self.solve(values)?.1)
    }
}

/// Pay-your-bid greedy over a matroid whose elements are the players.
#[derive(Clone, Debug)]
pub struct MatroidGreedyMechanism<M> {
    pub oracle: M,
}

impl<M: MatroidOracle> Mechanism for MatroidGreedyMechanism<M> {
    type Bid = Rational;
    type Relaxed = Vec<bool>;
    type Outcome = Vec<bool>;

    fn domain(&self) -> Domain {
        Domain::Flow
    }

    fn num_players(&self) -> usize {
        self.oracle.ground_size()
    }

    fn space(&self) -> OutcomeSpace {
        OutcomeSpace::Original
    }

    fn is_exact_maximizer(&self) -> bool {
        true
    }

    fn relax(&self, bids: &[Rational]) -> Result<Vec<bool>> {
        let mut chosen = vec![false; self.oracle.ground_size()];
        for e in matroid_greedy(&self.oracle, bids)? {
            chosen[e] = true;
        }
        Ok(chosen)
    }

    fn round(&self, relaxed: &Vec<bool>, _seed: u64) -> Result<Vec<bool>> {
        Ok(relaxed.clone())
    }

    fn value(&self, player: usize, valuation: &Rational, outcome: &Vec<bool>) -> Rational {
        if outcome[player] {
            valuation.clone()
        } else {
            zero()
        }
    }

    fn optimal_welfare(&self, values: &[Rational]) -> Result<Rational> {
        Ok(matroid_greedy(&self.oracle, values)?.iter().map(|&e| &values[e]).sum())
    }
}
