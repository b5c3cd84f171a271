//! Bundled games.

use std::collections::BTreeMap;

use num_bigint::BigInt;

use crate::game::{Diagnostic, Game, GameModel, RecursiveGame, StateKind};
use crate::state::{rat, Rational, StateId};

pub const BUILTIN_GAMES: &[&str] = &["lehrer_sorin", "quitting_simple"];

/// One-player climbing game on integer pairs.
///
/// From `(x,0)` the player either moves right to `(x+1,0)` or jumps: with
/// probability 1/2 to `(x,-1)` (absorbing, payoff 1) and with probability 1/2
/// to `(x,1)`. From `(x,y)` with `y ≥ 1` the state climbs deterministically to
/// `(x,y+1)`; `(x,x+1)` is absorbing with payoff `-penalty`. States with
/// `x > bound` are outside the truncated game.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LehrerSorin {
    pub bound: i64,
    pub penalty: i64,
}

impl Default for LehrerSorin {
    fn default() -> Self {
        LehrerSorin {
            bound: 3000,
            penalty: 2,
        }
    }
}

impl LehrerSorin {
    pub fn new(bound: i64) -> Self {
        LehrerSorin {
            bound,
            ..Default::default()
        }
    }

    pub(crate) fn check_parameters(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        if self.bound < 0 {
            out.push(Diagnostic::BadParameter(format!(
                "bound {} < 0",
                self.bound
            )));
        }
        if self.penalty < 0 {
            out.push(Diagnostic::BadParameter(format!(
                "penalty {} < 0",
                self.penalty
            )));
        }
        out
    }
}

impl GameModel for LehrerSorin {
    fn name(&self) -> &str {
        "lehrer_sorin"
    }

    fn payoff_bound(&self) -> Rational {
        Rational::from_integer(BigInt::from(self.penalty.max(1)))
    }

    fn kind(&self, x: &StateId) -> StateKind {
        let StateId::Pair(x, y) = *x else {
            return StateKind::Outside;
        };
        if x < 0 || x > self.bound {
            return StateKind::Outside;
        }
        if y == -1 {
            StateKind::Absorbing(rat(1, 1))
        } else if y == x + 1 {
            StateKind::Absorbing(rat(-self.penalty, 1))
        } else if (0..=x).contains(&y) {
            StateKind::Active
        } else {
            StateKind::Outside
        }
    }

    fn actions_a(&self, x: &StateId) -> Vec<String> {
        match (self.kind(x), x) {
            (StateKind::Active, StateId::Pair(_, 0)) => vec!["R".into(), "J".into()],
            (StateKind::Active, _) => vec!["up".into()],
            _ => Vec::new(),
        }
    }

    fn actions_b(&self, x: &StateId) -> Vec<String> {
        match self.kind(x) {
            StateKind::Active => vec!["-".into()],
            _ => Vec::new(),
        }
    }

    fn action_counts(&self, x: &StateId) -> (usize, usize) {
        match (self.kind(x), x) {
            (StateKind::Active, StateId::Pair(_, 0)) => (2, 1),
            (StateKind::Active, _) => (1, 1),
            _ => (0, 0),
        }
    }

    fn transition(&self, s: &StateId, a: usize, b: usize) -> Vec<(StateId, Rational)> {
        let (na, nb) = self.action_counts(s);
        if a >= na || b >= nb {
            return Vec::new();
        }
        let StateId::Pair(x, y) = *s else {
            return Vec::new();
        };
        match (y, a) {
            (0, 0) => vec![(StateId::pair(x + 1, 0), rat(1, 1))],
            (0, _) => vec![
                (StateId::pair(x, -1), rat(1, 2)),
                (StateId::pair(x, 1), rat(1, 2)),
            ],
            _ => vec![(StateId::pair(x, y + 1), rat(1, 1))],
        }
    }
}

/// One active state `s`. Player 1 continues or quits, player 2 passes or blocks.
///
/// | | pass | block |
/// |---|---|---|
/// | continue | 1/2 win, 1/2 s | draw |
/// | quit | lose | win |
///
/// The n-stage values converge to √5 − 2, where the stage game is fully mixed.
pub fn quitting_simple() -> RecursiveGame {
    let mut g = RecursiveGame::new("quitting_simple");
    let s = StateId::name("s");
    let (win, lose, draw) = (
        StateId::name("win"),
        StateId::name("lose"),
        StateId::name("draw"),
    );
    g.add_absorbing(win.clone(), rat(1, 1))
        .add_absorbing(lose.clone(), rat(-1, 1))
        .add_absorbing(draw.clone(), rat(0, 1))
        .add_active(s.clone(), &["continue", "quit"], &["pass", "block"]);
    g.set_transition(
        &s,
        0,
        0,
        vec![(win.clone(), rat(1, 2)), (s.clone(), rat(1, 2))],
    )
    .set_transition(&s, 0, 1, vec![(draw, rat(1, 1))])
    .set_transition(&s, 1, 0, vec![(lose, rat(1, 1))])
    .set_transition(&s, 1, 1, vec![(win, rat(1, 1))]);
    g
}

/// Limit of the n-stage values of [`quitting_simple`] at `s`: the positive root of v² + 4v − 1.
pub fn quitting_simple_limit() -> f64 {
    5f64.sqrt() - 2.0
}

/// Instantiates a bundled game by name with `key=value` parameters.
pub fn builtin(name: &str, params: &BTreeMap<String, String>) -> Result<Game, String> {
    let int = |key: &str, default: i64| -> Result<i64, String> {
        match params.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| format!("parameter {key}={v} is not an integer")),
        }
    };
    let check_keys = |allowed: &[&str]| -> Result<(), String> {
        match params.keys().find(|k| !allowed.contains(&k.as_str())) {
            Some(k) => Err(format!("unknown parameter `{k}` for builtin {name}")),
            None => Ok(()),
        }
    };
    match name {
        "lehrer_sorin" => {
            check_keys(&["bound", "penalty"])?;
            Ok(Game::LehrerSorin(LehrerSorin {
                bound: int("bound", 3000)?,
                penalty: int("penalty", 2)?,
            }))
        }
        "quitting_simple" => {
            check_keys(&[])?;
            Ok(Game::Finite(quitting_simple()))
        }
        _ => Err(format!("unknown builtin game `{name}`")),
    }
}

/// Canonical root state of a bundled game.
pub fn default_root(game: &Game) -> StateId {
    match game {
        Game::LehrerSorin(_) => StateId::pair(0, 0),
        Game::Finite(g) => g
            .active
            .iter()
            .next()
            .or_else(|| g.absorbing.keys().next())
            .cloned()
            .unwrap_or_else(|| StateId::name("s")),
    }
}
