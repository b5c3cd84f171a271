//! The alternating strategy of a finite game, built from its value
//! estimate, with everything needed to check it.

use recgame_core::game::GameModel;
use recgame_core::strategy::{
    auxiliary_game, block_strategy, markov_optimal, s_star_unchecked, sigma_bar,
    target_certificate, Certificate, ConcatenatedStrategy, Player, StationaryProfile,
};
use recgame_core::values::{compute_vn, estimate_limsup, VnOptions};
use recgame_core::{RecursiveGame, StateId, ValueFunction};

use crate::error::CliError;

/// Number of final values the limit estimate looks at.
pub const LIMSUP_WINDOW: usize = 10;

#[derive(Clone, Debug)]
pub struct Alternating {
    pub x1: StateId,
    pub eps: f64,
    /// Horizon of the value computation behind `v`.
    pub horizon: usize,
    /// `‖v_N − v_{N−1}‖∞` at that horizon.
    pub drift: f64,
    pub v: ValueFunction,
    /// The game with every state of value below `eps` made absorbing.
    pub aux: RecursiveGame,
    pub cert: Certificate,
    /// Block strategy of the auxiliary game.
    pub block: ConcatenatedStrategy,
    pub s_star: StationaryProfile,
    pub sigma: ConcatenatedStrategy,
}

impl Alternating {
    pub fn build(
        game: &RecursiveGame,
        x1: &StateId,
        eps: f64,
        horizon: usize,
    ) -> Result<Alternating, CliError> {
        if !game.contains(x1) {
            return Err(CliError::config(format!(
                "state {x1} is not in {}",
                game.name
            )));
        }
        let roots: Vec<StateId> = game.states().cloned().collect();
        let opts = VnOptions {
            record_profiles: false,
            ..Default::default()
        };
        let seq = compute_vn(game, &roots, horizon, &opts)?;
        let v = estimate_limsup(&seq, LIMSUP_WINDOW);
        let drift = seq.drift.last().copied().unwrap_or(0.0);

        let aux = auxiliary_game(game, &v, |x| v.get(x).is_some_and(|w| w < eps))?;
        let aux_seq = compute_vn(&aux, &roots, horizon, &VnOptions::default())?;
        let cert = target_certificate(&aux_seq, &v, eps * eps / 2.0, eps / 2.0, horizon)?;
        let profiles = markov_optimal(&aux_seq, cert.max_length(), Player::One)?;
        let block = block_strategy(&aux, &cert, &profiles)?;
        let s_star = s_star_unchecked(game, &v, 1e-12)?;
        let sigma = sigma_bar(game, &v, eps, &block, &s_star)?;
        Ok(Alternating {
            x1: x1.clone(),
            eps,
            horizon,
            drift,
            v,
            aux,
            cert,
            block,
            s_star,
            sigma,
        })
    }

    pub fn value_at_start(&self) -> f64 {
        self.v.get(&self.x1).unwrap_or(f64::NAN)
    }

    /// A stage by which the auxiliary block strategy has absorbed with
    /// probability at least `1 − ε³`.
    pub fn n1(&self) -> usize {
        self.cert.termination_horizon(self.eps.powi(3))
    }

    /// `N_1 / ε³`, the horizon of the long-run guarantee.
    pub fn guarantee_horizon(&self) -> usize {
        (self.n1() as f64 / self.eps.powi(3)).ceil() as usize
    }

    /// `n0 · l*` with `l* = ⌈ln ε / ln(1 − M)⌉`.
    pub fn termination_horizon(&self) -> usize {
        self.cert.termination_horizon(self.eps)
    }
}
