//! Combinatorial auctions: MPH-k valuations over explicit clause lists, the
//! configuration LP, and the symmetric (cardinality) specialization with
//! fair rounding.

mod config;
mod symmetric;

use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{structural, Result};
use crate::mechanism::Valuation;
use crate::rational::{int, zero, RatStr, Rational};

pub use config::{check_ca_social_cost, solve_config_lp, solve_config_lp_with, CaSocialCost, ConfigLpMechanism, ConfigLpSolution, CONFIG_LP_ITEM_LIMIT};
pub use symmetric::{
    fair_draw, fair_lottery, fair_marginals, fair_round, gen_symmetric_counterexample, random_symmetric, solve_cardinality_lp, symmetric_instance,
    to_cardinality, to_configuration, CardinalityLpSolution, FairRounding, SymmetricCounterexample, SymmetricIntegralMechanism,
    SymmetricRelaxRound, SymmetricValuation,
};

/// Bitmask over items `0..m`.
pub type ItemSet = u32;

/// Largest item count a bitmask can hold.
pub const MAX_ITEMS: usize = 31;

pub fn items_of(s: ItemSet) -> Vec<usize> {
    (0..MAX_ITEMS).filter(|&j| s >> j & 1 == 1).collect()
}

pub fn set_of(items: &[usize]) -> Result<ItemSet> {
    items.iter().try_fold(0, |s, &j| {
        if j >= MAX_ITEMS {
            Err(structural(format!("item {j} out of range")))
        } else {
            Ok(s | 1 << j)
        }
    })
}

/// A set function `v: 2^[m] -> Q`.
pub trait SetValuation {
    fn eval(&self, s: ItemSet) -> Rational;
}

/// `v(S) = max_l sum_{T subset S} v^l_T` with every hyperedge of size at most
/// `k`. XOS is `k = 1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "MphWire", into = "MphWire")]
pub struct MPHkValuation {
    pub k: usize,
    pub clauses: Vec<Vec<(ItemSet, Rational)>>,
}

#[derive(Serialize, Deserialize)]
struct HyperedgeWire {
    #[serde(rename = "T")]
    t: Vec<usize>,
    v: RatStr,
}

#[derive(Serialize, Deserialize)]
struct MphWire {
    k: usize,
    clauses: Vec<Vec<HyperedgeWire>>,
}

impl TryFrom<MphWire> for MPHkValuation {
    type Error = crate::Error;

    fn try_from(w: MphWire) -> Result<Self> {
        let clauses = w
            .clauses
            .into_iter()
            .map(|c| c.into_iter().map(|h| Ok((set_of(&h.t)?, h.v.0))).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        MPHkValuation::new(w.k, clauses)
    }
}

impl From<MPHkValuation> for MphWire {
    fn from(v: MPHkValuation) -> Self {
        MphWire {
            k: v.k,
            clauses: v
                .clauses
                .into_iter()
                .map(|c| c.into_iter().map(|(t, x)| HyperedgeWire { t: items_of(t), v: RatStr(x) }).collect())
                .collect(),
        }
    }
}

impl MPHkValuation {
    pub fn new(k: usize, clauses: Vec<Vec<(ItemSet, Rational)>>) -> Result<Self> {
        if k == 0 {
            return Err(structural("MPH level k must be at least 1"));
        }
        for (t, v) in clauses.iter().flatten() {
            let size = t.count_ones() as usize;
            if size == 0 || size > k {
                return Err(structural(format!("hyperedge {:?} has size {size}, allowed 1..={k}", items_of(*t))));
            }
            if v.is_negative() {
                return Err(structural("hyperedge values must be nonnegative"));
            }
        }
        Ok(Self { k, clauses })
    }

    /// One additive clause.
    pub fn additive(values: &[Rational]) -> Result<Self> {
        Self::new(1, vec![values.iter().enumerate().map(|(j, v)| (1 << j, v.clone())).collect()])
    }

    /// Largest item index mentioned plus one.
    pub fn span(&self) -> usize {
        let all = self.clauses.iter().flatten().fold(0, |s, (t, _)| s | t);
        (ItemSet::BITS - all.leading_zeros()) as usize
    }
}

pub fn eval_mph(v: &MPHkValuation, s: ItemSet) -> Rational {
    v.clauses
        .iter()
        .map(|c| c.iter().filter(|(t, _)| t & s == *t).map(|(_, x)| x).sum::<Rational>())
        .max()
        .unwrap_or_else(zero)
}

impl SetValuation for MPHkValuation {
    fn eval(&self, s: ItemSet) -> Rational {
        eval_mph(self, s)
    }
}

impl Valuation for MPHkValuation {
    fn scaled(&self, theta: &Rational) -> Self {
        MPHkValuation {
            k: self.k,
            clauses: self.clauses.iter().map(|c| c.iter().map(|(t, x)| (*t, x * theta)).collect()).collect(),
        }
    }

    /// `level` on every positive hyperedge.
    fn flat(&self, level: &Rational) -> Self {
        MPHkValuation {
            k: self.k,
            clauses: self
                .clauses
                .iter()
                .map(|c| c.iter().map(|(t, x)| (*t, if x.is_zero() { zero() } else { level.clone() })).collect())
                .collect(),
        }
    }

    fn max_value(&self) -> Rational {
        eval_mph(self, ItemSet::MAX)
    }
}

/// Random MPH-k valuation on `m` items: `clauses` clauses of `edges`
/// hyperedges each, sizes uniform in `1..=k`, values in `0..=max_value`.
pub fn random_mph(k: usize, m: usize, clauses: usize, edges: usize, max_value: i64, rng: &mut impl Rng) -> Result<MPHkValuation> {
    if m == 0 || m > MAX_ITEMS || k == 0 {
        return Err(structural("need 1 <= m <= 31 items and k >= 1"));
    }
    let cs = (0..clauses)
        .map(|_| {
            (0..edges)
                .map(|_| {
                    let size = rng.gen_range(1..=k.min(m));
                    let mut t: ItemSet = 0;
                    while (t.count_ones() as usize) < size {
                        t |= 1 << rng.gen_range(0..m);
                    }
                    (t, int(rng.gen_range(0..=max_value)))
                })
                .collect()
        })
        .collect();
    MPHkValuation::new(k, cs)
}

/// `n` random valuations; XOS (one item per hyperedge, one edge per item) when `k = 1`.
pub fn random_mph_profile(n: usize, k: usize, m: usize, seed: u64) -> Result<Vec<MPHkValuation>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            if k == 1 {
                let clauses = (0..rng.gen_range(1..=3))
                    .map(|_| (0..m).map(|j| (1 << j, int(rng.gen_range(0..=6)))).collect())
                    .collect();
                MPHkValuation::new(1, clauses)
            } else {
                let c = rng.gen_range(1..=3);
                random_mph(k, m, c, m, 6, &mut rng)
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| int(x)).collect()
    }

    #[test]
    fn additive_and_xos() {
        let v = MPHkValuation::additive(&ints(&[1, 2, 3])).unwrap();
        assert_eq!(eval_mph(&v, 0b101), int(4));
        let x = MPHkValuation::new(1, vec![vec![(1, int(3)), (2, int(0))], vec![(1, int(0)), (2, int(3))]]).unwrap();
        assert_eq!(eval_mph(&x, 0b11), int(3));
        assert_eq!(eval_mph(&MPHkValuation::new(1, vec![]).unwrap(), 0b11), int(0));
    }

    #[test]
    fn hyperedges() {
        let v = MPHkValuation::new(2, vec![vec![(0b11, int(5))]]).unwrap();
        assert_eq!(eval_mph(&v, 0b01), int(0));
        assert_eq!(eval_mph(&v, 0b11), int(5));
        assert!(MPHkValuation::new(1, vec![vec![(0b11, int(5))]]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let v: MPHkValuation = serde_json::from_str(r#"{"k":2,"clauses":[[{"T":[0,1],"v":"5/2"},{"T":[2],"v":1}]]}"#).unwrap();
        assert_eq!(eval_mph(&v, 0b111), Rational::new(7.into(), 2.into()));
        let s = serde_json::to_string(&v).unwrap();
        assert_eq!(serde_json::from_str::<MPHkValuation>(&s).unwrap(), v);
        assert!(serde_json::from_str::<MPHkValuation>(r#"{"k":1,"clauses":[[{"T":[0,1],"v":"1"}]]}"#).is_err());
    }

    #[test]
    fn random_profiles_are_monotone() {
        for seed in 0..20 {
            for v in random_mph_profile(3, 2, 4, seed).unwrap() {
                for s in 0..16u32 {
                    for j in 0..4 {
                        assert!(eval_mph(&v, s | 1 << j) >= eval_mph(&v, s));
                    }
                }
            }
        }
    }
}
