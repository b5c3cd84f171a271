//! Recursive games: the model trait, the eager finite representation, and validation.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::builtin::LehrerSorin;
use crate::state::{format_rational, rational_to_f64, Rational, StateId};

/// How a game classifies a state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StateKind {
    Active,
    Absorbing(Rational),
    /// Not a state of this game (for generators: beyond the coordinate bound).
    Outside,
}

/// Anything that can answer local questions about a recursive game.
///
/// Implementations must be pure: the same query always gives the same answer.
/// Action lists and transitions are only meaningful at active states.
pub trait GameModel: Send + Sync {
    fn name(&self) -> &str;

    /// Bound on the absolute value of absorbing payoffs.
    fn payoff_bound(&self) -> Rational {
        Rational::one()
    }

    fn kind(&self, x: &StateId) -> StateKind;

    fn actions_a(&self, x: &StateId) -> Vec<String>;

    fn actions_b(&self, x: &StateId) -> Vec<String>;

    fn action_counts(&self, x: &StateId) -> (usize, usize) {
        (self.actions_a(x).len(), self.actions_b(x).len())
    }

    /// Distribution of the next state after actions `a`, `b` (indices) at active `x`.
    fn transition(&self, x: &StateId, a: usize, b: usize) -> Vec<(StateId, Rational)>;

    fn payoff(&self, x: &StateId) -> Option<Rational> {
        match self.kind(x) {
            StateKind::Absorbing(g) => Some(g),
            _ => None,
        }
    }

    fn payoff_f64(&self, x: &StateId) -> f64 {
        self.payoff(x).map(|g| rational_to_f64(&g)).unwrap_or(0.0)
    }

    fn is_active(&self, x: &StateId) -> bool {
        matches!(self.kind(x), StateKind::Active)
    }

    fn is_absorbing(&self, x: &StateId) -> bool {
        matches!(self.kind(x), StateKind::Absorbing(_))
    }

    fn contains(&self, x: &StateId) -> bool {
        !matches!(self.kind(x), StateKind::Outside)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GameError {
    #[error("unknown state {0}")]
    UnknownState(StateId),
    #[error("state {0} is not active")]
    NotActive(StateId),
    #[error("explored set exceeds the cap of {0} states")]
    StateCap(usize),
    #[error("action index out of range at {state}: ({a},{b})")]
    ActionOutOfRange { state: StateId, a: usize, b: usize },
}

/// One violated invariant.
#[derive(Clone, Debug, PartialEq)]
pub enum Diagnostic {
    Overlap(StateId),
    PayoffOutOfRange {
        state: StateId,
        payoff: Rational,
        bound: Rational,
    },
    MissingActions {
        state: StateId,
        player: u8,
    },
    ActionsOnInactive {
        state: StateId,
    },
    MissingTransition {
        state: StateId,
        a: String,
        b: String,
    },
    TransitionOnInactive {
        state: StateId,
    },
    ActionIndexOutOfRange {
        state: StateId,
        a: usize,
        b: usize,
    },
    NegativeProbability {
        state: StateId,
        a: String,
        b: String,
        target: StateId,
    },
    UnknownTarget {
        state: StateId,
        a: String,
        b: String,
        target: StateId,
    },
    MassNotOne {
        state: StateId,
        a: String,
        b: String,
        mass: Rational,
    },
    BadParameter(String),
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Diagnostic::*;
        match self {
            Overlap(x) => write!(f, "state {x} is both active and absorbing"),
            PayoffOutOfRange {
                state,
                payoff,
                bound,
            } => write!(
                f,
                "payoff {} out of [−{b},{b}] at {state}",
                format_rational(payoff),
                b = format_rational(bound)
            ),
            MissingActions { state, player } => {
                write!(f, "player {player} has no actions at active state {state}")
            }
            ActionsOnInactive { state } => {
                write!(f, "actions declared at non-active state {state}")
            }
            MissingTransition { state, a, b } => {
                write!(f, "missing transition at ({state},{a},{b})")
            }
            TransitionOnInactive { state } => {
                write!(f, "transition declared at non-active state {state}")
            }
            ActionIndexOutOfRange { state, a, b } => {
                write!(
                    f,
                    "transition for undeclared action pair ({a},{b}) at {state}"
                )
            }
            NegativeProbability {
                state,
                a,
                b,
                target,
            } => {
                write!(f, "negative probability to {target} at ({state},{a},{b})")
            }
            UnknownTarget {
                state,
                a,
                b,
                target,
            } => {
                write!(
                    f,
                    "transition to unknown state {target} at ({state},{a},{b})"
                )
            }
            MassNotOne { state, a, b, mass } => write!(
                f,
                "transition mass {} ≠ 1 at ({state},{a},{b})",
                format_rational(mass)
            ),
            BadParameter(msg) => write!(f, "bad parameter: {msg}"),
        }
    }
}

/// Eager finite recursive game.
#[derive(Clone, Debug, PartialEq)]
pub struct RecursiveGame {
    pub name: String,
    pub payoff_bound: Rational,
    pub active: BTreeSet<StateId>,
    pub absorbing: BTreeMap<StateId, Rational>,
    pub actions_a: BTreeMap<StateId, Vec<String>>,
    pub actions_b: BTreeMap<StateId, Vec<String>>,
    pub transitions: BTreeMap<(StateId, usize, usize), Vec<(StateId, Rational)>>,
}

impl RecursiveGame {
    pub fn new(name: impl Into<String>) -> Self {
        RecursiveGame {
            name: name.into(),
            payoff_bound: Rational::one(),
            active: BTreeSet::new(),
            absorbing: BTreeMap::new(),
            actions_a: BTreeMap::new(),
            actions_b: BTreeMap::new(),
            transitions: BTreeMap::new(),
        }
    }

    pub fn add_absorbing(&mut self, x: StateId, payoff: Rational) -> &mut Self {
        self.absorbing.insert(x, payoff);
        self
    }

    pub fn add_active(&mut self, x: StateId, a: &[&str], b: &[&str]) -> &mut Self {
        self.active.insert(x.clone());
        self.actions_a
            .insert(x.clone(), a.iter().map(|s| s.to_string()).collect());
        self.actions_b
            .insert(x, b.iter().map(|s| s.to_string()).collect());
        self
    }

    pub fn set_transition(
        &mut self,
        x: &StateId,
        a: usize,
        b: usize,
        dist: Vec<(StateId, Rational)>,
    ) -> &mut Self {
        self.transitions.insert((x.clone(), a, b), dist);
        self
    }

    pub fn states(&self) -> impl Iterator<Item = &StateId> {
        self.active.iter().chain(self.absorbing.keys())
    }

    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        for x in &self.active {
            if self.absorbing.contains_key(x) {
                out.push(Diagnostic::Overlap(x.clone()));
            }
        }
        for (x, g) in &self.absorbing {
            if g.abs() > self.payoff_bound {
                out.push(Diagnostic::PayoffOutOfRange {
                    state: x.clone(),
                    payoff: g.clone(),
                    bound: self.payoff_bound.clone(),
                });
            }
        }
        for (map, player) in [(&self.actions_a, 1u8), (&self.actions_b, 2u8)] {
            for x in map.keys() {
                if !self.active.contains(x) {
                    out.push(Diagnostic::ActionsOnInactive { state: x.clone() });
                }
            }
            for x in &self.active {
                if map.get(x).is_none_or(|v| v.is_empty()) {
                    out.push(Diagnostic::MissingActions {
                        state: x.clone(),
                        player,
                    });
                }
            }
        }
        for (x, a, b) in self.transitions.keys() {
            if !self.active.contains(x) {
                out.push(Diagnostic::TransitionOnInactive { state: x.clone() });
                continue;
            }
            let (na, nb) = self.action_counts(x);
            if *a >= na || *b >= nb {
                out.push(Diagnostic::ActionIndexOutOfRange {
                    state: x.clone(),
                    a: *a,
                    b: *b,
                });
            }
        }
        for x in &self.active {
            let (na, nb) = self.action_counts(x);
            for a in 0..na {
                for b in 0..nb {
                    let an = self.actions_a[x][a].clone();
                    let bn = self.actions_b[x][b].clone();
                    let Some(dist) = self.transitions.get(&(x.clone(), a, b)) else {
                        out.push(Diagnostic::MissingTransition {
                            state: x.clone(),
                            a: an,
                            b: bn,
                        });
                        continue;
                    };
                    out.extend(check_distribution(x, &an, &bn, dist, |t| self.contains(t)));
                }
            }
        }
        out
    }
}

fn check_distribution(
    x: &StateId,
    a: &str,
    b: &str,
    dist: &[(StateId, Rational)],
    known: impl Fn(&StateId) -> bool,
) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut mass = Rational::zero();
    for (t, p) in dist {
        if p.is_negative() {
            out.push(Diagnostic::NegativeProbability {
                state: x.clone(),
                a: a.to_string(),
                b: b.to_string(),
                target: t.clone(),
            });
        }
        if !known(t) {
            out.push(Diagnostic::UnknownTarget {
                state: x.clone(),
                a: a.to_string(),
                b: b.to_string(),
                target: t.clone(),
            });
        }
        mass += p;
    }
    if !mass.is_one() {
        out.push(Diagnostic::MassNotOne {
            state: x.clone(),
            a: a.to_string(),
            b: b.to_string(),
            mass,
        });
    }
    out
}

impl GameModel for RecursiveGame {
    fn name(&self) -> &str {
        &self.name
    }

    fn payoff_bound(&self) -> Rational {
        self.payoff_bound.clone()
    }

    fn kind(&self, x: &StateId) -> StateKind {
        if let Some(g) = self.absorbing.get(x) {
            StateKind::Absorbing(g.clone())
        } else if self.active.contains(x) {
            StateKind::Active
        } else {
            StateKind::Outside
        }
    }

    fn actions_a(&self, x: &StateId) -> Vec<String> {
        self.actions_a.get(x).cloned().unwrap_or_default()
    }

    fn actions_b(&self, x: &StateId) -> Vec<String> {
        self.actions_b.get(x).cloned().unwrap_or_default()
    }

    fn action_counts(&self, x: &StateId) -> (usize, usize) {
        (
            self.actions_a.get(x).map_or(0, Vec::len),
            self.actions_b.get(x).map_or(0, Vec::len),
        )
    }

    fn transition(&self, x: &StateId, a: usize, b: usize) -> Vec<(StateId, Rational)> {
        self.transitions
            .get(&(x.clone(), a, b))
            .cloned()
            .unwrap_or_default()
    }
}

/// A game either given eagerly or produced by a named generator.
#[derive(Clone, Debug, PartialEq)]
pub enum Game {
    Finite(RecursiveGame),
    LehrerSorin(LehrerSorin),
}

impl Game {
    pub fn as_finite(&self) -> Option<&RecursiveGame> {
        match self {
            Game::Finite(g) => Some(g),
            _ => None,
        }
    }

    fn model(&self) -> &dyn GameModel {
        match self {
            Game::Finite(g) => g,
            Game::LehrerSorin(g) => g,
        }
    }

    /// Checks every invariant. Generators are checked on the states within
    /// their coordinate bound reachable from their canonical root.
    pub fn validate(&self) -> Vec<Diagnostic> {
        match self {
            Game::Finite(g) => g.validate(),
            Game::LehrerSorin(g) => {
                let mut out = g.check_parameters();
                if out.is_empty() {
                    let depth = (2 * g.bound as usize + 2).min(400);
                    out = validate_model(g, &[StateId::pair(0, 0)], depth);
                }
                out
            }
        }
    }
}

impl GameModel for Game {
    fn name(&self) -> &str {
        self.model().name()
    }
    fn payoff_bound(&self) -> Rational {
        self.model().payoff_bound()
    }
    fn kind(&self, x: &StateId) -> StateKind {
        self.model().kind(x)
    }
    fn actions_a(&self, x: &StateId) -> Vec<String> {
        self.model().actions_a(x)
    }
    fn actions_b(&self, x: &StateId) -> Vec<String> {
        self.model().actions_b(x)
    }
    fn action_counts(&self, x: &StateId) -> (usize, usize) {
        self.model().action_counts(x)
    }
    fn transition(&self, x: &StateId, a: usize, b: usize) -> Vec<(StateId, Rational)> {
        self.model().transition(x, a, b)
    }
}

/// Local invariant check of a lazily generated game on the states reachable
/// from `roots` within `depth` steps. Targets outside the model (the
/// truncation frontier of a generator) are allowed.
pub fn validate_model<G: GameModel + ?Sized>(
    game: &G,
    roots: &[StateId],
    depth: usize,
) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let bound = game.payoff_bound();
    let mut seen: BTreeSet<StateId> = BTreeSet::new();
    let mut queue: VecDeque<(StateId, usize)> = VecDeque::new();
    for r in roots {
        if seen.insert(r.clone()) {
            queue.push_back((r.clone(), 0));
        }
    }
    while let Some((x, d)) = queue.pop_front() {
        match game.kind(&x) {
            StateKind::Outside => {}
            StateKind::Absorbing(g) => {
                if g.abs() > bound {
                    out.push(Diagnostic::PayoffOutOfRange {
                        state: x.clone(),
                        payoff: g,
                        bound: bound.clone(),
                    });
                }
            }
            StateKind::Active => {
                let an = game.actions_a(&x);
                let bn = game.actions_b(&x);
                if an.is_empty() {
                    out.push(Diagnostic::MissingActions {
                        state: x.clone(),
                        player: 1,
                    });
                }
                if bn.is_empty() {
                    out.push(Diagnostic::MissingActions {
                        state: x.clone(),
                        player: 2,
                    });
                }
                for (a, aname) in an.iter().enumerate() {
                    for (b, bname) in bn.iter().enumerate() {
                        let dist = game.transition(&x, a, b);
                        out.extend(check_distribution(&x, aname, bname, &dist, |_| true));
                        if d < depth {
                            for (t, p) in dist {
                                if p.is_positive() && seen.insert(t.clone()) {
                                    queue.push_back((t, d + 1));
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    out
}
