//! Playing a belief-game strategy in the signal game.
//!
//! Player 1 tracks both beliefs along the play and, at each stage, plays
//! what the belief-game strategy prescribes at the current second-order
//! belief for his own first-order belief. The play then induces the same
//! law of belief sequences as the belief game, with player 2's strategy
//! replaced by its average over histories inducing the same beliefs.

use std::cell::RefCell;
use std::collections::BTreeMap;

use num_traits::Zero;
use recgame_core::Rational;

use crate::belief::{
    image, play_law, update_p, update_x, Belief, P1History, P1Strategy, P2History, P2Strategy,
};
use crate::belief_game::{BeliefGame, BeliefState};
use crate::game::{InitialDist, SignalError, SignalGame};

/// A player 1 strategy in the belief game: a mixed action for each belief
/// in the support of the current state, given the sequence of states.
pub trait BeliefStrategy {
    fn mixed(&self, xs: &[BeliefState], p: &Belief) -> Vec<Rational>;
}

impl<F: Fn(&[BeliefState], &Belief) -> Vec<Rational>> BeliefStrategy for F {
    fn mixed(&self, xs: &[BeliefState], p: &Belief) -> Vec<Rational> {
        self(xs, p)
    }
}

/// The signal-game strategy that follows a belief-game strategy.
pub struct Mimic<'a> {
    bg: &'a BeliefGame<'a>,
    pi: &'a InitialDist,
    d_of_c: BTreeMap<usize, usize>,
    hat: &'a dyn BeliefStrategy,
    xs: RefCell<BTreeMap<P2History, BeliefState>>,
}

impl<'a> Mimic<'a> {
    pub fn new(
        bg: &'a BeliefGame<'a>,
        pi: &'a InitialDist,
        hat: &'a dyn BeliefStrategy,
    ) -> Result<Self, SignalError> {
        Ok(Mimic {
            bg,
            pi,
            d_of_c: pi.d_of_c()?,
            hat,
            xs: RefCell::new(BTreeMap::new()),
        })
    }

    /// Player 2's belief state after `h`, when player 1 follows this strategy.
    pub fn state_after(&self, h: &P2History) -> Result<BeliefState, SignalError> {
        if let Some(x) = self.xs.borrow().get(h) {
            return Ok(x.clone());
        }
        let x = self.bg.state_of(update_x(self.bg.game, self.pi, self, h)?);
        self.xs.borrow_mut().insert(h.clone(), x.clone());
        Ok(x)
    }

    /// The belief states along `h`, one per stage.
    pub fn states_along(&self, h: &P2History) -> Result<Vec<BeliefState>, SignalError> {
        (1..=h.stage())
            .map(|s| self.state_after(&h.prefix(s)))
            .collect()
    }

    fn try_mixed(&self, h: &P1History) -> Result<Vec<Rational>, SignalError> {
        let p = update_p(self.bg.game, self.pi, h)?;
        let h2 = h
            .public(self.bg.game, &self.d_of_c)
            .ok_or(SignalError::ZeroProbability)?;
        Ok(self.hat.mixed(&self.states_along(&h2)?, &p))
    }
}

impl P1Strategy for Mimic<'_> {
    /// Histories of probability zero get the uniform action.
    fn mixed(&self, h: &P1History) -> Vec<Rational> {
        self.try_mixed(h).unwrap_or_else(|_| {
            let n = self.bg.game.actions_1.len();
            vec![Rational::new(1.into(), (n as i64).into()); n]
        })
    }
}

/// Laws of belief sequences of length `t`, computed on both sides, with the
/// expected stage payoffs.
#[derive(Clone, Debug)]
pub struct MimicCheck {
    pub signal_law: BTreeMap<Vec<BeliefState>, Rational>,
    pub belief_law: BTreeMap<Vec<BeliefState>, Rational>,
    /// `E[g(k_s)]` in the signal game, `s = 1..=t`.
    pub signal_payoffs: Vec<Rational>,
    /// `E[G(x_s)]` in the belief game.
    pub belief_payoffs: Vec<Rational>,
}

impl MimicCheck {
    pub fn laws_agree(&self) -> bool {
        self.signal_law == self.belief_law
    }

    pub fn payoffs_agree(&self) -> bool {
        self.signal_payoffs == self.belief_payoffs
    }
}

fn add_to<K: Ord>(m: &mut BTreeMap<K, Rational>, k: K, w: Rational) {
    *m.entry(k).or_insert_with(Rational::zero) += w;
}

/// Plays the mimic of `hat` against `tau` in the signal game and `hat`
/// against the averaged `tau` in the belief game, for `t` stages.
pub fn check_mimic(
    sg: &SignalGame,
    pi: &InitialDist,
    hat: &dyn BeliefStrategy,
    tau: &dyn P2Strategy,
    t: usize,
) -> Result<MimicCheck, SignalError> {
    let bg = BeliefGame::new(sg);
    let sigma = Mimic::new(&bg, pi, hat)?;

    // Signal side, stage by stage, collecting the averaged player 2 action
    // at each belief sequence.
    let mut signal_law = BTreeMap::new();
    let mut signal_payoffs = Vec::with_capacity(t);
    let mut tau_hat: BTreeMap<Vec<BeliefState>, (Rational, Vec<Rational>)> = BTreeMap::new();
    for s in 1..=t {
        let law = play_law(sg, pi, &sigma, tau, s);
        let mut g = Rational::zero();
        let mut by_seq = BTreeMap::new();
        for (play, p) in &law {
            if p.is_zero() {
                continue;
            }
            g += p * sg.payoff(*play.states.last().unwrap());
            let xs = sigma.states_along(&play.h2)?;
            if s < t {
                let entry = tau_hat.entry(xs.clone()).or_insert_with(|| {
                    (Rational::zero(), vec![Rational::zero(); sg.actions_2.len()])
                });
                entry.0 += p;
                for (acc, b) in entry.1.iter_mut().zip(tau.mixed(&play.h2)) {
                    *acc += p * b;
                }
            }
            add_to(&mut by_seq, xs, p.clone());
        }
        signal_payoffs.push(g);
        if s == t {
            signal_law = by_seq;
        }
    }

    // Belief side.
    let mut layer: BTreeMap<Vec<BeliefState>, Rational> = BTreeMap::new();
    for (x, w) in bg.states_of(&image(pi, sg.n_states())?) {
        add_to(&mut layer, vec![x], w);
    }
    let mut belief_payoffs = Vec::with_capacity(t);
    for s in 1..=t {
        let g = layer.iter().fold(Rational::zero(), |acc, (xs, w)| {
            acc + w * bg.payoff(xs.last().unwrap())
        });
        belief_payoffs.push(g);
        if s == t {
            break;
        }
        let mut next = BTreeMap::new();
        for (xs, w) in layer {
            let last = xs.last().unwrap();
            let a: Vec<Vec<Rational>> = match last {
                BeliefState::Active(x) => x.atoms().map(|(p, _)| hat.mixed(&xs, p)).collect(),
                BeliefState::Absorbed(_) => Vec::new(),
            };
            let b: Vec<Rational> = match tau_hat.get(&xs) {
                Some((m, acc)) => acc.iter().map(|v| v / m).collect(),
                None => return Err(SignalError::ZeroProbability),
            };
            for (y, q) in bg.transition(last, &a, &b)? {
                let mut ys = xs.clone();
                ys.push(y);
                add_to(&mut next, ys, &w * q);
            }
        }
        layer = next;
    }
    Ok(MimicCheck {
        signal_law,
        belief_law: layer,
        signal_payoffs,
        belief_payoffs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::belief::P2Fn;
    use crate::game::{signal_2x2, symmetric_2};
    use recgame_core::state::rat;

    fn hat(xs: &[BeliefState], p: &Belief) -> Vec<Rational> {
        // Stop more eagerly the more confident in the high state.
        let stop = (&p.0[1] * rat(xs.len() as i64, xs.len() as i64 + 1)).min(rat(1, 1));
        vec![rat(1, 1) - &stop, stop]
    }

    fn tau(h: &P2History) -> Vec<Rational> {
        let block = rat(1, 3 + (h.later.len() as i64) * (1 + h.first as i64));
        vec![rat(1, 1) - &block, block]
    }

    #[test]
    fn mimic_matches_belief_game() {
        for sg in [signal_2x2(), symmetric_2()] {
            let check = check_mimic(&sg, &sg.prior, &hat, &P2Fn(tau), 3).unwrap();
            assert!(check.laws_agree(), "{}", sg.name);
            assert!(check.payoffs_agree(), "{}", sg.name);
            assert_eq!(
                check
                    .signal_law
                    .values()
                    .fold(Rational::zero(), |a, b| a + b),
                rat(1, 1)
            );
        }
    }

    #[test]
    fn mimic_plays_the_belief_strategy() {
        let sg = signal_2x2();
        let bg = BeliefGame::new(&sg);
        let sigma = Mimic::new(&bg, &sg.prior, &hat).unwrap();
        let h = P1History {
            first: 1,
            later: Vec::new(),
        };
        let p = update_p(&sg, &sg.prior, &h).unwrap();
        assert_eq!(sigma.mixed(&h), hat(&[BeliefState::Absorbed(0)], &p));
    }
}
