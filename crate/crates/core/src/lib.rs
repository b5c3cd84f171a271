//! Two-player zero-sum recursive stochastic games.
//!
//! A recursive game has a set of active states, where the stage payoff is
//! zero, and a set of absorbing states carrying a fixed payoff. This crate
//! computes the n-stage and discounted values by Shapley iteration, builds
//! the uniform ε-optimal strategies for player 1 (block strategies on
//! positive-valued games, auxiliary games, the alternating strategy), and
//! checks their guarantees by exact best-response dynamic programming and
//! Monte Carlo play.

pub mod builtin;
pub mod explore;
pub mod format;
pub mod game;
pub mod lp;
pub mod matrix;
pub mod simulate;
pub mod state;
pub mod strategy;
pub mod values;

pub use game::{Diagnostic, Game, GameError, GameModel, RecursiveGame, StateKind};
pub use matrix::{MatrixGame, MatrixSolution};
pub use state::{Rational, StateId};
pub use values::{ValueFunction, ValueSequence};
