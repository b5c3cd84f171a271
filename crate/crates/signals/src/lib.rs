//! Recursive games with signals where player 1 is more informed than
//! player 2.
//!
//! Player 1's first-order belief over the state and player 2's
//! second-order belief over it are computed exactly in rational arithmetic.
//! The n-stage value depends on the initial distribution only through the
//! law of player 2's second-order belief (its image), which turns the game
//! into a recursive game on second-order beliefs. This crate builds that
//! belief game, solves it, and checks it against a direct sequence-form
//! solution of the original game.

pub mod belief;
pub mod belief_game;
pub mod direct;
pub mod format;
pub mod game;
pub mod mimic;
pub mod wasserstein;

pub use belief::{canonical_pi, image, update_p, update_x, Belief, ImageDist, SecondOrder};
pub use belief_game::{BeliefGame, BeliefState, BeliefValues};
pub use direct::direct_value;
pub use game::{builtin, signal_2x2, symmetric_2, InitialDist, SignalError, SignalGame};
pub use wasserstein::{wasserstein, wasserstein_dual};
