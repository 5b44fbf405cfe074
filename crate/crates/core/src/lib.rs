//! Exact relax-and-round pay-your-bid mechanisms and tools for checking
//! their smoothness and price of anarchy.

pub mod auctions;
pub mod cli;
pub mod dynamics;
pub mod error;
pub mod flow;
pub mod maxtsp;
pub mod mechanism;
pub mod packing;
pub mod rational;
pub mod solver;

pub use error::{Error, Result};
pub use rational::Rational;
