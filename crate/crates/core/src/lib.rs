//! Exact and sampled δ-relevance for Boolean functions.
//!
//! A set `S` of input variables is δ-relevant for a Boolean function `f` and an
//! assignment `x` when fixing `x` on `S` and drawing the remaining inputs
//! uniformly at random preserves the output `f(x)` with probability at least δ.
//!
//! The crate is organised in layers:
//!
//! - [`formula`]: the formula AST, its text syntax, bit-parallel evaluation and
//!   the compilation of a formula into an equivalent ReLU network.
//! - [`counting`]: exact satisfaction and conditional agreement probabilities
//!   as dyadic rationals, with independence decomposition.
//! - [`relevance`]: exact and Monte-Carlo relevance checks, subset search,
//!   minimisation and brute-force oracles for the related decision problems.
//! - [`gadgets`]: monotone DNF constructions whose satisfaction probability is
//!   steered towards a target, used to move probability thresholds.
//! - [`reductions`]: instance transformers between the decision problems and a
//!   verifier that checks answer preservation with exact oracles.
//! - [`shapley`]: exact Shapley values of the conditional-expectation game.

pub mod counting;
pub mod error;
pub mod formula;
pub mod gadgets;
mod limits;
pub mod rational;
pub mod reductions;
pub mod relevance;
pub mod shapley;

pub use counting::DyadicProb;
pub use error::{Error, Result};
pub use formula::{Assignment, Expr, Formula, SubsetMask};
pub use limits::Limits;
pub use rational::Rational;
