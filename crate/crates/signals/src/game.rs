//! Recursive games with private signals.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Signed, Zero};
use recgame_core::state::{format_rational, rat};
use recgame_core::Rational;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SignalError {
    #[error("invalid signal game: {0}")]
    Invalid(String),
    #[error("initial distribution is not more-informed: signal {0} appears with several player 2 signals")]
    NotMoreInformed(String),
    #[error("history has probability zero")]
    ZeroProbability,
    #[error("{what} has {size} elements, above the cap of {cap}")]
    TooLarge {
        what: &'static str,
        size: usize,
        cap: usize,
    },
    #[error("linear program failed: {0}")]
    Lp(#[from] recgame_core::lp::LpError),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// A distribution over (state, player 1 signal, player 2 signal) used to
/// start the game. Its signal alphabets are its own: stage-1 signals need
/// not belong to the game's alphabets.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct InitialDist {
    pub signals_1: Vec<String>,
    pub signals_2: Vec<String>,
    /// `(k, c, d) → mass`, positive entries only.
    pub mass: BTreeMap<(usize, usize, usize), Rational>,
}

impl InitialDist {
    /// The player 2 signal attached to each player 1 signal, checking that
    /// it is unique on the support.
    pub fn d_of_c(&self) -> Result<BTreeMap<usize, usize>, SignalError> {
        let mut out = BTreeMap::new();
        for &(_, c, d) in self.mass.keys() {
            if *out.entry(c).or_insert(d) != d {
                let name = self
                    .signals_1
                    .get(c)
                    .cloned()
                    .unwrap_or_else(|| c.to_string());
                return Err(SignalError::NotMoreInformed(name));
            }
        }
        Ok(out)
    }

    pub fn total(&self) -> Rational {
        self.mass.values().fold(Rational::zero(), |a, b| a + b)
    }

    pub fn c_label(&self, c: usize) -> String {
        self.signals_1
            .get(c)
            .cloned()
            .unwrap_or_else(|| format!("c{c}"))
    }

    pub fn d_label(&self, d: usize) -> String {
        self.signals_2
            .get(d)
            .cloned()
            .unwrap_or_else(|| format!("d{d}"))
    }
}

/// One outcome of a transition: next state and both signals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub state: usize,
    pub c: usize,
    pub d: usize,
    pub prob: Rational,
}

/// A finite recursive game with signals where player 1 is more informed.
///
/// Every player 1 signal `c` names the action `i_hat[c]` it reveals and the
/// player 2 signal `d_hat[c]` it determines; every player 2 signal `d`
/// names the action `j_hat[d]`.
#[derive(Clone, Debug, PartialEq)]
pub struct SignalGame {
    pub name: String,
    pub states: Vec<String>,
    /// `Some(g)` on absorbing states.
    pub payoffs: Vec<Option<Rational>>,
    pub actions_1: Vec<String>,
    pub actions_2: Vec<String>,
    pub signals_1: Vec<String>,
    pub signals_2: Vec<String>,
    pub i_hat: Vec<usize>,
    pub d_hat: Vec<usize>,
    pub j_hat: Vec<usize>,
    /// Indexed by `(k · |I| + i) · |J| + j`.
    pub transitions: Vec<Vec<Outcome>>,
    pub prior: InitialDist,
}

impl SignalGame {
    /// A game with no signals or transitions yet.
    pub fn new(
        name: impl Into<String>,
        active: &[&str],
        absorbing: &[(&str, Rational)],
        actions_1: &[&str],
        actions_2: &[&str],
    ) -> Self {
        let mut states: Vec<String> = active.iter().map(|s| s.to_string()).collect();
        let mut payoffs = vec![None; active.len()];
        for (s, g) in absorbing {
            states.push(s.to_string());
            payoffs.push(Some(g.clone()));
        }
        let cells = states.len() * actions_1.len() * actions_2.len();
        SignalGame {
            name: name.into(),
            states,
            payoffs,
            actions_1: actions_1.iter().map(|s| s.to_string()).collect(),
            actions_2: actions_2.iter().map(|s| s.to_string()).collect(),
            signals_1: Vec::new(),
            signals_2: Vec::new(),
            i_hat: Vec::new(),
            d_hat: Vec::new(),
            j_hat: Vec::new(),
            transitions: vec![Vec::new(); cells],
            prior: InitialDist::default(),
        }
    }

    pub fn n_states(&self) -> usize {
        self.states.len()
    }

    pub fn is_absorbing(&self, k: usize) -> bool {
        self.payoffs[k].is_some()
    }

    pub fn active_states(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.states.len()).filter(|&k| !self.is_absorbing(k))
    }

    /// Stage payoff of a state: zero when active.
    pub fn payoff(&self, k: usize) -> Rational {
        self.payoffs[k].clone().unwrap_or_else(Rational::zero)
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|s| s == name)
    }

    pub fn signal_2(&mut self, name: impl Into<String>, j: usize) -> usize {
        self.signals_2.push(name.into());
        self.j_hat.push(j);
        self.signals_2.len() - 1
    }

    pub fn signal_1(&mut self, name: impl Into<String>, i: usize, d: usize) -> usize {
        self.signals_1.push(name.into());
        self.i_hat.push(i);
        self.d_hat.push(d);
        self.signals_1.len() - 1
    }

    fn cell(&self, k: usize, i: usize, j: usize) -> usize {
        (k * self.actions_1.len() + i) * self.actions_2.len() + j
    }

    pub fn transition(&self, k: usize, i: usize, j: usize) -> &[Outcome] {
        &self.transitions[self.cell(k, i, j)]
    }

    pub fn set_transition(
        &mut self,
        k: usize,
        i: usize,
        j: usize,
        outcomes: Vec<(usize, usize, usize, Rational)>,
    ) {
        let cell = self.cell(k, i, j);
        self.transitions[cell] = outcomes
            .into_iter()
            .map(|(state, c, d, prob)| Outcome { state, c, d, prob })
            .collect();
    }

    /// Adds a public signal pair for every absorbing state and action pair,
    /// and makes absorbing states loop on them. Player 2's signal shows
    /// player 1's action only when `show_action_1`. Returns the lookup
    /// `(k, i, j) → (c, d)`.
    pub fn add_absorption_signals(
        &mut self,
        show_action_1: bool,
    ) -> BTreeMap<(usize, usize, usize), (usize, usize)> {
        let mut out = BTreeMap::new();
        let absorbing: Vec<usize> = (0..self.n_states())
            .filter(|&k| self.is_absorbing(k))
            .collect();
        for k in absorbing {
            for j in 0..self.actions_2.len() {
                let mut shared = None;
                for i in 0..self.actions_1.len() {
                    let d = match shared {
                        Some(d) => d,
                        None if show_action_1 => self.signal_2(
                            format!(
                                "{}.{}.{}",
                                self.actions_1[i], self.actions_2[j], self.states[k]
                            ),
                            j,
                        ),
                        None => {
                            let d = self
                                .signal_2(format!("{}.{}", self.actions_2[j], self.states[k]), j);
                            shared = Some(d);
                            d
                        }
                    };
                    let c = self.signal_1(
                        format!(
                            "{}.{}.{}",
                            self.actions_1[i], self.actions_2[j], self.states[k]
                        ),
                        i,
                        d,
                    );
                    out.insert((k, i, j), (c, d));
                    self.set_transition(k, i, j, vec![(k, c, d, Rational::one())]);
                }
            }
        }
        out
    }

    /// For each player 2 signal, the absorbing state it announces, if any.
    pub fn absorbing_signal_states(&self) -> Vec<Option<usize>> {
        let mut out = vec![None; self.signals_2.len()];
        for outs in &self.transitions {
            for o in outs {
                if self.is_absorbing(o.state) {
                    out[o.d] = Some(o.state);
                }
            }
        }
        out
    }

    /// Checks every structural invariant.
    pub fn validate(&self) -> Result<(), SignalError> {
        let bad = |m: String| Err(SignalError::Invalid(m));
        let (nk, ni, nj) = (
            self.states.len(),
            self.actions_1.len(),
            self.actions_2.len(),
        );
        if self.active_states().next().is_none() {
            return bad("no active state".into());
        }
        if ni == 0 || nj == 0 {
            return bad("empty action set".into());
        }
        if self.i_hat.len() != self.signals_1.len() || self.d_hat.len() != self.signals_1.len() {
            return bad("player 1 signal maps have the wrong length".into());
        }
        if self.j_hat.len() != self.signals_2.len() {
            return bad("player 2 signal map has the wrong length".into());
        }
        if self.i_hat.iter().any(|&i| i >= ni) || self.j_hat.iter().any(|&j| j >= nj) {
            return bad("signal map points outside the action sets".into());
        }
        if self.d_hat.iter().any(|&d| d >= self.signals_2.len()) {
            return bad("d_hat points outside the player 2 signals".into());
        }
        for (k, g) in self.payoffs.iter().enumerate() {
            if let Some(g) = g {
                if g.abs() > Rational::one() {
                    return bad(format!(
                        "payoff {} at {} outside [-1, 1]",
                        format_rational(g),
                        self.states[k]
                    ));
                }
            }
        }
        // Which absorbing state each player 2 signal announces, and whether it
        // also appears on a transition to an active state.
        let mut announces: Vec<BTreeSet<Option<usize>>> =
            vec![BTreeSet::new(); self.signals_2.len()];
        for k in 0..nk {
            for i in 0..ni {
                for j in 0..nj {
                    let outs = self.transition(k, i, j);
                    let here = format!(
                        "{} {} {}",
                        self.states[k], self.actions_1[i], self.actions_2[j]
                    );
                    let mut total = Rational::zero();
                    for o in outs {
                        if o.state >= nk
                            || o.c >= self.signals_1.len()
                            || o.d >= self.signals_2.len()
                        {
                            return bad(format!("{here}: outcome out of range"));
                        }
                        if !o.prob.is_positive() {
                            return bad(format!("{here}: non-positive probability"));
                        }
                        if self.i_hat[o.c] != i || self.j_hat[o.d] != j {
                            return bad(format!(
                                "{here}: signals {} / {} do not reveal the actions played",
                                self.signals_1[o.c], self.signals_2[o.d]
                            ));
                        }
                        if self.d_hat[o.c] != o.d {
                            return bad(format!(
                                "{here}: player 1 signal {} does not determine {}",
                                self.signals_1[o.c], self.signals_2[o.d]
                            ));
                        }
                        if self.is_absorbing(k) && o.state != k {
                            return bad(format!("{here}: absorbing state does not loop"));
                        }
                        announces[o.d].insert(self.is_absorbing(o.state).then_some(o.state));
                        total += &o.prob;
                    }
                    if total != Rational::one() {
                        return bad(format!(
                            "{here}: probabilities sum to {}",
                            format_rational(&total)
                        ));
                    }
                }
            }
        }
        for (d, set) in announces.iter().enumerate() {
            if set.len() > 1 && set.iter().any(Option::is_some) {
                return bad(format!(
                    "player 2 signal {} does not reveal absorption publicly",
                    self.signals_2[d]
                ));
            }
        }
        self.validate_prior(&self.prior)
    }

    /// Checks that `prior` is a distribution on the more-informed set with
    /// absorption, if any, announced publicly.
    pub fn validate_prior(&self, prior: &InitialDist) -> Result<(), SignalError> {
        if prior.total() != Rational::one() {
            return Err(SignalError::Invalid(format!(
                "initial mass sums to {}",
                format_rational(&prior.total())
            )));
        }
        let mut announces: BTreeMap<usize, BTreeSet<Option<usize>>> = BTreeMap::new();
        for ((k, _, d), p) in &prior.mass {
            if *k >= self.n_states() || !p.is_positive() {
                return Err(SignalError::Invalid(
                    "initial distribution entry out of range".into(),
                ));
            }
            announces
                .entry(*d)
                .or_default()
                .insert(self.is_absorbing(*k).then_some(*k));
        }
        for (d, set) in announces {
            if set.len() > 1 && set.iter().any(Option::is_some) {
                return Err(SignalError::Invalid(format!(
                    "initial signal {} hides absorption",
                    prior.d_label(d)
                )));
            }
        }
        prior.d_of_c().map(|_| ())
    }

    /// Whether player 2 is also more informed: every player 2 signal
    /// determines the player 1 signal on the support of the transitions and
    /// of the prior.
    pub fn is_symmetric(&self) -> bool {
        let mut c_of_d: BTreeMap<usize, usize> = BTreeMap::new();
        for o in self.transitions.iter().flatten() {
            if *c_of_d.entry(o.d).or_insert(o.c) != o.c {
                return false;
            }
        }
        let mut c_of_d: BTreeMap<usize, usize> = BTreeMap::new();
        prior_pairs(&self.prior).all(|(c, d)| *c_of_d.entry(d).or_insert(c) == c)
    }
}

fn prior_pairs(p: &InitialDist) -> impl Iterator<Item = (usize, usize)> + '_ {
    p.mass.keys().map(|&(_, c, d)| (c, d))
}

/// Noisy private observation of the state after a wait.
fn noisy(correct: &Rational) -> [Rational; 2] {
    [correct.clone(), Rational::one() - correct]
}

/// Two hidden active states and two private signal values; player 2 sees
/// only his own action and absorption.
///
/// Player 1 waits or stops; player 2 passes or blocks. Stopping at `hi`
/// wins against a pass and loses against a block, stopping at `lo` loses.
/// Waiting against a block wins with probability 1/3 and otherwise leaves
/// the state unchanged; waiting against a pass keeps the state with
/// probability 3/4. After every wait player 1 observes the new state
/// correctly with probability 2/3.
pub fn signal_2x2() -> SignalGame {
    noisy_stopping_game("signal_2x2", false, [rat(1, 2), rat(1, 2)], rat(2, 3))
}

/// Bundled signal games by name.
pub fn builtin(name: &str) -> Option<SignalGame> {
    match name {
        "signal_2x2" => Some(signal_2x2()),
        "symmetric_2" => Some(symmetric_2()),
        _ => None,
    }
}

/// The same dynamics as [`signal_2x2`], with every signal public.
pub fn symmetric_2() -> SignalGame {
    noisy_stopping_game("symmetric_2", true, [rat(1, 3), rat(2, 3)], rat(3, 4))
}

fn noisy_stopping_game(
    name: &str,
    public: bool,
    start: [Rational; 2],
    accuracy: Rational,
) -> SignalGame {
    let mut g = SignalGame::new(
        name,
        &["lo", "hi"],
        &[("win", rat(1, 1)), ("lose", rat(-1, 1))],
        &["wait", "stop"],
        &["pass", "block"],
    );
    let (lo, hi, win, lose) = (0, 1, 2, 3);
    let (wait, stop) = (0, 1);
    let absorb = g.add_absorption_signals(public);
    let obs = ["lo?", "hi?"];
    // Signals after a wait: player 1 sees j and the noisy reading; player 2
    // sees j, and the reading too when signals are public.
    let mut after_wait = BTreeMap::new();
    for j in 0..2 {
        let hidden = (!public).then(|| g.signal_2(format!("{}.on", g.actions_2[j]), j));
        for (s, o) in obs.iter().enumerate() {
            let d = match hidden {
                Some(d) => d,
                None => g.signal_2(format!("wait.{}.{o}", g.actions_2[j]), j),
            };
            let c = g.signal_1(format!("wait.{}.{o}", g.actions_2[j]), wait, d);
            after_wait.insert((j, s), (c, d));
        }
    }
    let read = noisy(&accuracy);
    for k in [lo, hi] {
        // Law of the next active state after a wait.
        let moves: [Vec<(usize, Rational)>; 2] = [
            vec![(k, rat(3, 4)), (1 - k, rat(1, 4))],
            vec![(k, rat(2, 3))],
        ];
        for j in 0..2 {
            let mut outs = Vec::new();
            if j == 1 {
                let (c, d) = absorb[&(win, wait, j)];
                outs.push((win, c, d, rat(1, 3)));
            }
            for (k2, p) in &moves[j] {
                for s in 0..2 {
                    let (c, d) = after_wait[&(j, s)];
                    let q = if s == *k2 { &read[0] } else { &read[1] };
                    outs.push((*k2, c, d, p * q));
                }
            }
            g.set_transition(k, wait, j, outs);
            let target = if k == hi && j == 0 { win } else { lose };
            let (c, d) = absorb[&(target, stop, j)];
            g.set_transition(k, stop, j, vec![(target, c, d, Rational::one())]);
        }
    }
    // Stage 1: player 1 gets a noisy reading of the initial state.
    let mut prior = InitialDist {
        signals_1: Vec::new(),
        signals_2: vec!["start".into()],
        mass: BTreeMap::new(),
    };
    for o in obs {
        prior.signals_1.push(format!("start.{o}"));
        if public {
            prior.signals_2.push(format!("start.{o}"));
        }
    }
    if public {
        prior.signals_2.remove(0);
    }
    for k in [lo, hi] {
        for s in 0..2 {
            let d = if public { s } else { 0 };
            let q = if s == k { &read[0] } else { &read[1] };
            prior.mass.insert((k, s, d), &start[k] * q);
        }
    }
    g.prior = prior;
    g
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_games_are_valid() {
        for g in [signal_2x2(), symmetric_2()] {
            g.validate().unwrap();
        }
        assert!(!signal_2x2().is_symmetric());
        assert!(symmetric_2().is_symmetric());
    }

    #[test]
    fn hidden_action_is_rejected() {
        let mut g = signal_2x2();
        // Claim the wait signal reveals a stop.
        g.i_hat[g
            .signals_1
            .iter()
            .position(|s| s == "wait.pass.lo?")
            .unwrap()] = 1;
        assert!(matches!(g.validate(), Err(SignalError::Invalid(_))));
    }

    #[test]
    fn private_absorption_is_rejected() {
        let mut g = signal_2x2();
        let on = g.signals_2.iter().position(|s| s == "pass.on").unwrap();
        let c = g
            .signals_1
            .iter()
            .position(|s| s == "stop.pass.win")
            .unwrap();
        // Route a win through the signal used while the game goes on.
        let cell = g.cell(1, 1, 0);
        g.d_hat[c] = on;
        g.transitions[cell][0].d = on;
        assert!(g.validate().is_err());
    }

    #[test]
    fn prior_must_be_more_informed() {
        let mut g = signal_2x2();
        g.prior.signals_2.push("other".into());
        let key = *g.prior.mass.keys().next().unwrap();
        let p = g.prior.mass.remove(&key).unwrap();
        g.prior.mass.insert((key.0, key.1, 1), p);
        assert!(matches!(g.validate(), Err(SignalError::NotMoreInformed(_))));
    }
}
