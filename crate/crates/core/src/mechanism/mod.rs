//! Pay-your-bid mechanisms built as "solve a relaxation, then round".
//!
//! Every domain implements [`Mechanism`]: `relax` computes the (possibly
//! fractional) declared-welfare maximizer and `round` turns it into an
//! outcome using only a seed. Deterministic rules use the identity rounding.
//! Payments are always the bidder's own bid evaluated on the outcome, and
//! utilities are measured against the true valuations supplied separately.

mod check;
mod smoothness;

use std::fmt::Debug;

use serde::{Deserialize, Serialize};

use crate::error::{structural, Result};
use crate::rational::{one, sum, Rational};

pub use check::{
    check_smoothness, deviation_grid, expected_run, scaled_grid, verify_pure_nash, CheckOptions, Expected,
    NashReport, SmoothnessCertificate, SmoothnessReport, ENUMERATION_LIMIT,
};
pub use smoothness::{
    compose_smoothness, compose_symbolic, poa_from_smoothness, poa_symbolic, DeviationMode, Monomial,
    SmoothnessParams, Symbol, SymbolicParams,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Domain {
    Packing,
    Flow,
    Maxtsp,
    Auctions,
}

impl Domain {
    pub fn as_str(&self) -> &'static str {
        match self {
            Domain::Packing => "packing",
            Domain::Flow => "flow",
            Domain::Maxtsp => "maxtsp",
            Domain::Auctions => "auctions",
        }
    }
}

impl std::str::FromStr for Domain {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "packing" => Ok(Domain::Packing),
            "flow" => Ok(Domain::Flow),
            "maxtsp" => Ok(Domain::Maxtsp),
            "auctions" => Ok(Domain::Auctions),
            _ => Err(crate::Error::Parse(format!("unknown domain {s:?}"))),
        }
    }
}

/// Which feasible set the allocation rule optimizes over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutcomeSpace {
    Original,
    Relaxed,
}

/// A per-player valuation (also used as that player's bid).
pub trait Valuation: Clone + Debug {
    /// Pointwise multiple `theta * v`.
    fn scaled(&self, theta: &Rational) -> Self;
    /// Constant `level` wherever `v` is positive, zero elsewhere.
    fn flat(&self, level: &Rational) -> Self;
    /// Upper bound on the value of any outcome.
    fn max_value(&self) -> Rational;
}

impl Valuation for Rational {
    fn scaled(&self, theta: &Rational) -> Self {
        self * theta
    }

    fn flat(&self, level: &Rational) -> Self {
        if num_traits::Signed::is_positive(self) {
            level.clone()
        } else {
            crate::rational::zero()
        }
    }

    fn max_value(&self) -> Rational {
        self.clone()
    }
}

pub type Lottery<O> = Vec<(Rational, O)>;

pub trait Mechanism {
    type Bid: Valuation;
    type Relaxed: Clone;
    type Outcome: Clone + Debug;

    fn domain(&self) -> Domain;
    fn num_players(&self) -> usize;
    fn space(&self) -> OutcomeSpace;
    /// Whether `relax` maximizes declared welfare exactly over its space.
    fn is_exact_maximizer(&self) -> bool;
    fn is_randomized(&self) -> bool {
        false
    }

    fn relax(&self, bids: &[Self::Bid]) -> Result<Self::Relaxed>;
    fn round(&self, relaxed: &Self::Relaxed, seed: u64) -> Result<Self::Outcome>;

    /// Full outcome distribution of the rounding when its support has at
    /// most `limit` atoms.
    fn lottery(&self, relaxed: &Self::Relaxed, limit: usize) -> Result<Option<Lottery<Self::Outcome>>> {
        if self.is_randomized() || limit == 0 {
            Ok(None)
        } else {
            Ok(Some(vec![(one(), self.round(relaxed, 0)?)]))
        }
    }

    fn value(&self, player: usize, valuation: &Self::Bid, outcome: &Self::Outcome) -> Rational;

    /// Optimal welfare for `values` over the space this rule is measured
    /// against (relaxed optimum for relaxations, integral optimum otherwise).
    fn optimal_welfare(&self, values: &[Self::Bid]) -> Result<Rational>;

    fn allocate(&self, bids: &[Self::Bid], seed: u64) -> Result<Self::Outcome> {
        self.check_profile(bids)?;
        let relaxed = self.relax(bids)?;
        self.round(&relaxed, seed)
    }

    fn check_profile(&self, profile: &[Self::Bid]) -> Result<()> {
        if profile.len() != self.num_players() {
            return Err(structural(format!(
                "{} mechanism has {} players, profile has {}",
                self.domain().as_str(),
                self.num_players(),
                profile.len()
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct MechanismRun<O> {
    pub outcome: O,
    pub values: Vec<Rational>,
    pub payments: Vec<Rational>,
    pub utilities: Vec<Rational>,
    pub welfare: Rational,
}

/// Runs `f` on `bids` and charges every bidder its bid on its own share.
pub fn run_pay_your_bid<M: Mechanism>(
    f: &M,
    bids: &[M::Bid],
    values: &[M::Bid],
    seed: u64,
) -> Result<MechanismRun<M::Outcome>> {
    f.check_profile(bids)?;
    f.check_profile(values)?;
    let outcome = f.allocate(bids, seed)?;
    Ok(settle(f, bids, values, outcome))
}

pub(crate) fn settle<M: Mechanism>(f: &M, bids: &[M::Bid], values: &[M::Bid], outcome: M::Outcome) -> MechanismRun<M::Outcome> {
    let vals: Vec<Rational> = (0..f.num_players()).map(|i| f.value(i, &values[i], &outcome)).collect();
    let payments: Vec<Rational> = (0..f.num_players()).map(|i| f.value(i, &bids[i], &outcome)).collect();
    let utilities = vals.iter().zip(&payments).map(|(v, p)| v - p).collect();
    let welfare = sum(&vals);
    MechanismRun {
        outcome,
        values: vals,
        payments,
        utilities,
        welfare,
    }
}

/// Pointwise `theta * v` for every player.
pub fn scale_profile<V: Valuation>(values: &[V], theta: &Rational) -> Vec<V> {
    values.iter().map(|v| v.scaled(theta)).collect()
}
