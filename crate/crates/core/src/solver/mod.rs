//! Exact combinatorial and linear-programming solvers shared by every domain.

mod choice;
mod matching;
mod maxflow;
mod simplex;

pub use choice::{solve_choice_program, ChoiceOption, ChoiceProgram, ChoiceSolution, MEMO_LIMIT};
pub use matching::{max_weight_perfect_matching, Matching, WeightMatrix};
pub use maxflow::{max_flow, CapacitatedDigraph, Edge, MaxFlow, Residual};
pub use simplex::{solve_lp, LinearProgram, LpSolution, LpStatus};

