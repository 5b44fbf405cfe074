use super::{edge_endpoints, fisher_lottery, fisher_round, max_weight_cycle_cover, max_weight_tour, CompleteDigraph, CycleCover, HamiltonianCycle};
use crate::error::Result;
use crate::mechanism::{Domain, Lottery, Mechanism, OutcomeSpace};
use crate::rational::{zero, Rational};

fn declared_cover(n: usize, bids: &[Rational]) -> Result<CycleCover> {
    Ok(max_weight_cycle_cover(&CompleteDigraph::from_edge_weights(n, bids.to_vec())?)?.0)
}

/// Pay-your-bid mechanism that outputs the declared-welfare maximizing cycle
/// cover on `n` vertices. Player `e` is the directed edge `edge_endpoints(n, e)`.
#[derive(Clone, Debug)]
pub struct CycleCoverMechanism {
    pub n: usize,
}

impl Mechanism for CycleCoverMechanism {
    type Bid = Rational;
    type Relaxed = CycleCover;
    type Outcome = CycleCover;

    fn domain(&self) -> Domain {
        Domain::Maxtsp
    }

    fn num_players(&self) -> usize {
        self.n * self.n.saturating_sub(1)
    }

    fn space(&self) -> OutcomeSpace {
        OutcomeSpace::Relaxed
    }

    fn is_exact_maximizer(&self) -> bool {
        true
    }

    fn relax(&self, bids: &[Rational]) -> Result<CycleCover> {
        declared_cover(self.n, bids)
    }

    fn round(&self, relaxed: &CycleCover, _seed: u64) -> Result<CycleCover> {
        Ok(relaxed.clone())
    }

    fn value(&self, player: usize, valuation: &Rational, outcome: &CycleCover) -> Rational {
        let (u, v) = edge_endpoints(self.n, player);
        if outcome.contains(u, v) {
            valuation.clone()
        } else {
            zero()
        }
    }

    fn optimal_welfare(&self, values: &[Rational]) -> Result<Rational> {
        Ok(max_weight_cycle_cover(&CompleteDigraph::from_edge_weights(self.n, values.to_vec())?)?.1)
    }
}

/// Optimal declared cycle cover followed by uniform edge dropping.
#[derive(Clone, Debug)]
pub struct FisherMechanism {
    pub n: usize,
}

impl Mechanism for FisherMechanism {
    type Bid = Rational;
    type Relaxed = CycleCover;
    type Outcome = HamiltonianCycle;

    fn domain(&self) -> Domain {
        Domain::Maxtsp
    }

    fn num_players(&self) -> usize {
        self.n * self.n.saturating_sub(1)
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

    fn relax(&self, bids: &[Rational]) -> Result<CycleCover> {
        declared_cover(self.n, bids)
    }

    fn round(&self, relaxed: &CycleCover, seed: u64) -> Result<HamiltonianCycle> {
        Ok(fisher_round(relaxed, seed))
    }

    fn lottery(&self, relaxed: &CycleCover, limit: usize) -> Result<Option<Lottery<HamiltonianCycle>>> {
        fisher_lottery(relaxed, limit)
    }

    fn value(&self, player: usize, valuation: &Rational, outcome: &HamiltonianCycle) -> Rational {
        let (u, v) = edge_endpoints(self.n, player);
        if outcome.contains(u, v) {
            valuation.clone()
        } else {
            zero()
        }
    }

    fn optimal_welfare(&self, values: &[Rational]) -> Result<Rational> {
        Ok(max_weight_tour(&CompleteDigraph::from_edge_weights(self.n, values.to_vec())?)?.1)
    }
}
