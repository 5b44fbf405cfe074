//! Oblivious tour rounding: drop a uniformly random edge from every cycle of
//! the cover and chain the resulting paths.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{CycleCover, HamiltonianCycle};
use crate::error::{Error, Result};
use crate::mechanism::Lottery;
use crate::rational::{ratio, zero, Rational};

/// Cuts `cycle` after position `k` and returns the path starting right after
/// the dropped edge.
fn open_at(cycle: &[usize], k: usize) -> impl Iterator<Item = usize> + '_ {
    cycle[k + 1..].iter().chain(&cycle[..=k]).copied()
}

fn chain(cycles: &[Vec<usize>], drops: &[usize]) -> HamiltonianCycle {
    HamiltonianCycle {
        order: cycles.iter().zip(drops).flat_map(|(c, &k)| open_at(c, k)).collect(),
    }
}

/// Paths are joined in the order of their cycles' smallest vertices. Weights
/// are never read.
pub fn fisher_round(cover: &CycleCover, seed: u64) -> HamiltonianCycle {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cycles = cover.cycles();
    let drops: Vec<usize> = cycles.iter().map(|c| rng.gen_range(0..c.len())).collect();
    chain(&cycles, &drops)
}

/// All equally likely outcomes of [`fisher_round`], or `None` when there are
/// more than `limit`.
pub fn fisher_lottery(cover: &CycleCover, limit: usize) -> Result<Option<Lottery<HamiltonianCycle>>> {
    let cycles = cover.cycles();
    let mut total: usize = 1;
    for c in &cycles {
        total = match total.checked_mul(c.len()) {
            Some(t) if t <= limit => t,
            _ => return Ok(None),
        };
    }
    if total == 0 {
        return Err(Error::Structural("empty cover".into()));
    }
    let p = ratio(1, total as i64);
    let mut drops = vec![0; cycles.len()];
    let mut out = Vec::with_capacity(total);
    loop {
        out.push((p.clone(), chain(&cycles, &drops)));
        let mut i = 0;
        loop {
            if i == drops.len() {
                return Ok(Some(out));
            }
            drops[i] += 1;
            if drops[i] < cycles[i].len() {
                break;
            }
            drops[i] = 0;
            i += 1;
        }
    }
}

/// Exact probability that each cover edge `(u, succ[u])` appears in the
/// rounded tour, indexed by `u`.
pub fn fisher_inclusion(cover: &CycleCover, limit: usize) -> Result<Option<Vec<Rational>>> {
    let Some(lottery) = fisher_lottery(cover, limit)? else {
        return Ok(None);
    };
    let mut probs = vec![zero(); cover.succ.len()];
    for (p, tour) in &lottery {
        for (u, v) in tour.edges() {
            if cover.succ[u] == v {
                probs[u] += p;
            }
        }
    }
    Ok(Some(probs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maxtsp::CompleteDigraph;
    use crate::rational::int;

    #[test]
    fn single_cycle_is_kept() {
        let c = CycleCover::new(vec![2, 0, 3, 1]).unwrap();
        for seed in 0..10 {
            assert_eq!(fisher_round(&c, seed).as_cover(), c);
        }
    }

    #[test]
    fn two_two_cycles() {
        let c = CycleCover::new(vec![1, 0, 3, 2]).unwrap();
        let g = CompleteDigraph::new(vec![
            vec![int(0), int(3), int(0), int(0)],
            vec![int(1), int(0), int(0), int(0)],
            vec![int(0), int(0), int(0), int(2)],
            vec![int(0), int(0), int(2), int(0)],
        ])
        .unwrap();
        let lottery = fisher_lottery(&c, 100).unwrap().unwrap();
        assert_eq!(lottery.len(), 4);
        let expected: Rational = lottery.iter().map(|(p, t)| p * t.weight(&g)).sum();
        assert_eq!(expected, int(4));
        assert_eq!(fisher_inclusion(&c, 100).unwrap().unwrap(), vec![ratio(1, 2); 4]);
        for seed in 0..10 {
            assert!(fisher_round(&c, seed).is_valid(4));
        }
    }

    #[test]
    fn mixed_lengths() {
        let c = CycleCover::new(vec![1, 2, 0, 4, 3]).unwrap();
        let probs = fisher_inclusion(&c, 100).unwrap().unwrap();
        assert_eq!(probs, vec![ratio(2, 3), ratio(2, 3), ratio(2, 3), ratio(1, 2), ratio(1, 2)]);
        assert!(fisher_lottery(&c, 5).unwrap().is_none());
    }
}
