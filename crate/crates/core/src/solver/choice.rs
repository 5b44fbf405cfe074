//! Exhaustive integral optimization for "each player takes at most one
//! option" programs with shared packing capacities.
//!
//! Search is a memoized depth-first recursion over `(player, residual
//! capacities)`. Options are tried in index order with "no option" last, and
//! the first optimum in that order is kept, so among optimal outcomes the
//! lexicographically smallest choice vector wins.

use std::collections::HashMap;

use num_traits::Signed;

use crate::error::{Error, Result};
use crate::rational::{zero, Rational};

#[derive(Clone, Debug, PartialEq)]
pub struct ChoiceOption {
    pub value: Rational,
    /// `(capacity row, amount consumed)`.
    pub usage: Vec<(usize, Rational)>,
}

#[derive(Clone, Debug)]
pub struct ChoiceProgram {
    pub capacities: Vec<Rational>,
    pub players: Vec<Vec<ChoiceOption>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChoiceSolution {
    /// Chosen option per player, `None` for unserved.
    pub choices: Vec<Option<usize>>,
    pub value: Rational,
}

pub const MEMO_LIMIT: usize = 2_000_000;

struct Search<'a> {
    prog: &'a ChoiceProgram,
    memo: HashMap<(usize, Vec<Rational>), (Rational, Option<usize>)>,
}

impl Search<'_> {
    fn best(&mut self, player: usize, residual: &[Rational]) -> Result<(Rational, Option<usize>)> {
        if player == self.prog.players.len() {
            return Ok((zero(), None));
        }
        let key = (player, residual.to_vec());
        if let Some(hit) = self.memo.get(&key) {
            return Ok(hit.clone());
        }
        if self.memo.len() >= MEMO_LIMIT {
            return Err(Error::SizeGuard {
                what: "integral search states",
                actual: self.memo.len(),
                limit: MEMO_LIMIT,
            });
        }
        let mut best: Option<(Rational, Option<usize>)> = None;
        for (k, opt) in self.prog.players[player].iter().enumerate() {
            let mut next = residual.to_vec();
            for (row, amount) in &opt.usage {
                next[*row] -= amount;
            }
            if next.iter().any(|r| r.is_negative()) {
                continue;
            }
            let (rest, _) = self.best(player + 1, &next)?;
            let total = rest + &opt.value;
            if best.as_ref().map_or(true, |(b, _)| total > *b) {
                best = Some((total, Some(k)));
            }
        }
        let (rest, _) = self.best(player + 1, residual)?;
        if best.as_ref().map_or(true, |(b, _)| rest > *b) {
            best = Some((rest, None));
        }
        let best = best.expect("skipping is always feasible");
        self.memo.insert(key, best.clone());
        Ok(best)
    }
}

pub fn solve_choice_program(prog: &ChoiceProgram) -> Result<ChoiceSolution> {
    let mut search = Search {
        prog,
        memo: HashMap::new(),
    };
    let mut residual = prog.capacities.clone();
    let (value, _) = search.best(0, &residual)?;
    let mut choices = Vec::with_capacity(prog.players.len());
    for p in 0..prog.players.len() {
        let (_, pick) = search.best(p, &residual)?;
        if let Some(k) = pick {
            for (row, amount) in &prog.players[p][k].usage {
                residual[*row] -= amount;
            }
        }
        choices.push(pick);
    }
    Ok(ChoiceSolution { choices, value })
}
