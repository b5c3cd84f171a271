//! Strategy synthesis: Markov optimal profiles, block strategies on
//! positive-valued games, auxiliary games, the one-shot profile, the
//! alternating strategy, pure stopping times and reduced opponents.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt::{self, Write as _};
use std::hash::Hash;

use num_traits::Signed;

use crate::game::{GameError, GameModel, RecursiveGame};
use crate::matrix::{self, MatrixGame, SolveError};
use crate::state::{format_rational, rat_abs_le, rational_from_f64, rational_to_f64, StateId};
use crate::values::{ValueFunction, ValueSequence};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Player {
    One,
    Two,
}

impl Player {
    pub fn other(self) -> Player {
        match self {
            Player::One => Player::Two,
            Player::Two => Player::One,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StrategyError {
    #[error("no recorded profiles for {remaining} remaining stages")]
    MissingRecords { remaining: usize },
    #[error("horizon {n} exceeds the computed horizon {available}")]
    Horizon { n: usize, available: usize },
    #[error("no value for state {0}")]
    MissingValue(StateId),
    #[error("value {value} at {state} exceeds the payoff bound")]
    ValueOutOfRange { state: StateId, value: f64 },
    #[error("slack {slack:e} at {state} is below -{tol:e}")]
    Slack {
        state: StateId,
        slack: f64,
        tol: f64,
    },
    #[error("state {0} is active but outside the certificate domain")]
    OutsideDomain(StateId),
    #[error("stage game at {state}: {source}")]
    Solve { state: StateId, source: SolveError },
    #[error(transparent)]
    Game(#[from] GameError),
    #[error("{0}")]
    BadParameter(String),
}

/// A finite-memory strategy that sees only the sequence of states.
///
/// `advance` receives the next state and nothing else, so any strategy
/// written this way ignores the opponent's actions.
pub trait Automaton: Send + Sync {
    type Mem: Clone + Eq + Ord + Hash + fmt::Debug + Send + Sync;

    fn owner(&self) -> Player;

    /// Distribution of the memory at the first stage.
    fn start(&self, x1: &StateId) -> Vec<(Self::Mem, f64)>;

    /// Mixed action at state `x` in memory `mem`.
    fn action(&self, mem: &Self::Mem, x: &StateId) -> Vec<f64>;

    fn advance(&self, mem: &Self::Mem, next: &StateId) -> Vec<(Self::Mem, f64)>;
}

/// A strategy that depends on the sequence of past states only.
pub trait StateHistoryStrategy {
    /// Mixed action at the last state of `history` (stage `history.len()`).
    fn mixed(&self, history: &[StateId]) -> Vec<f64>;
}

/// A full history: states `x_1..x_t` and the action pairs of stages `1..t−1`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FullHistory {
    pub states: Vec<StateId>,
    pub actions: Vec<(usize, usize)>,
}

pub trait FullHistoryStrategy {
    fn mixed(&self, h: &FullHistory) -> Vec<f64>;
}

impl<F: Fn(&FullHistory) -> Vec<f64>> FullHistoryStrategy for F {
    fn mixed(&self, h: &FullHistory) -> Vec<f64> {
        self(h)
    }
}

/// Views a state-history strategy as a full-history one.
pub struct StatesOnly<'a, S: ?Sized>(pub &'a S);

impl<S: StateHistoryStrategy + ?Sized> FullHistoryStrategy for StatesOnly<'_, S> {
    fn mixed(&self, h: &FullHistory) -> Vec<f64> {
        self.0.mixed(&h.states)
    }
}

fn uniform(k: usize) -> Vec<f64> {
    vec![1.0 / k.max(1) as f64; k]
}

fn own_count<G: GameModel + ?Sized>(game: &G, x: &StateId, owner: Player) -> usize {
    let (na, nb) = game.action_counts(x);
    match owner {
        Player::One => na,
        Player::Two => nb,
    }
}

fn write_mixed(out: &mut String, p: &[f64]) {
    out.push('[');
    for (k, v) in p.iter().enumerate() {
        if k > 0 {
            out.push_str(", ");
        }
        let _ = write!(out, "{v:.6}");
    }
    out.push(']');
}

/// Stage-dependent profile: `table[x][m − 1]` is the mixed action at `x`
/// with `m` stages remaining. Empty entries are unknown.
#[derive(Clone, Debug, Default)]
pub struct MarkovProfile {
    pub horizon: usize,
    pub owner: Option<Player>,
    pub table: HashMap<StateId, Vec<Vec<f64>>>,
}

impl MarkovProfile {
    pub fn get(&self, remaining: usize, x: &StateId) -> Option<&[f64]> {
        let row = self.table.get(x)?;
        let p = row.get(remaining.checked_sub(1)?)?;
        (!p.is_empty()).then_some(p.as_slice())
    }

    pub fn describe(&self) -> String {
        let mut out = format!("markov profile, horizon {}\n", self.horizon);
        let mut keys: Vec<&StateId> = self.table.keys().collect();
        keys.sort();
        for x in keys {
            for (m, p) in self.table[x].iter().enumerate() {
                if !p.is_empty() {
                    let _ = write!(out, "  {x} remaining {}: ", m + 1);
                    write_mixed(&mut out, p);
                    out.push('\n');
                }
            }
        }
        out
    }
}

impl Automaton for MarkovProfile {
    /// The current stage, starting at 1.
    type Mem = usize;

    fn owner(&self) -> Player {
        self.owner.unwrap_or(Player::One)
    }

    fn start(&self, _: &StateId) -> Vec<(usize, f64)> {
        vec![(1, 1.0)]
    }

    fn action(&self, t: &usize, x: &StateId) -> Vec<f64> {
        // Past the horizon the one-stage profile is replayed.
        let remaining = self.horizon.saturating_sub(*t - 1).max(1);
        match self.get(remaining, x) {
            Some(p) => p.to_vec(),
            None => self
                .table
                .get(x)
                .and_then(|r| r.iter().find(|p| !p.is_empty()))
                .map_or_else(Vec::new, |p| uniform(p.len())),
        }
    }

    fn advance(&self, t: &usize, _: &StateId) -> Vec<(usize, f64)> {
        vec![(t + 1, 1.0)]
    }
}

impl StateHistoryStrategy for MarkovProfile {
    fn mixed(&self, history: &[StateId]) -> Vec<f64> {
        self.action(&history.len(), history.last().expect("non-empty history"))
    }
}

/// Assembles the recorded stage-game strategies of `seq` for steps `1..=n`.
pub fn markov_optimal(
    seq: &ValueSequence,
    n: usize,
    owner: Player,
) -> Result<MarkovProfile, StrategyError> {
    if n == 0 || n > seq.horizon {
        return Err(StrategyError::Horizon {
            n,
            available: seq.horizon,
        });
    }
    let mut table: HashMap<StateId, Vec<Vec<f64>>> = HashMap::new();
    for m in 1..=n {
        let mut any = false;
        for (i, x) in seq.states.iter().enumerate() {
            if let Some(p) = &seq.profiles[m][i] {
                let mixed = match owner {
                    Player::One => p.row.clone(),
                    Player::Two => p.col.clone(),
                };
                let row = table
                    .entry(x.clone())
                    .or_insert_with(|| vec![Vec::new(); n]);
                row[m - 1] = mixed;
                any = true;
            }
        }
        let has_active =
            (0..seq.states.len()).any(|i| seq.is_active(i) && seq.lower[m][i].is_finite());
        if !any && has_active {
            return Err(StrategyError::MissingRecords { remaining: m });
        }
    }
    Ok(MarkovProfile {
        horizon: n,
        owner: Some(owner),
        table,
    })
}

/// A state-only mixed action per state, with its recorded slack.
#[derive(Clone, Debug, Default)]
pub struct StationaryProfile {
    pub owner: Option<Player>,
    pub table: HashMap<StateId, Vec<f64>>,
    /// `min_b E[v(next)] − v(x)` for profiles built against a target.
    pub slack: BTreeMap<StateId, f64>,
}

impl StationaryProfile {
    pub fn min_slack(&self) -> Option<(StateId, f64)> {
        self.slack
            .iter()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(x, s)| (x.clone(), *s))
    }

    pub fn describe(&self) -> String {
        let mut out = String::from("stationary profile\n");
        let mut keys: Vec<&StateId> = self.table.keys().collect();
        keys.sort();
        for x in keys {
            let _ = write!(out, "  {x}: ");
            write_mixed(&mut out, &self.table[x]);
            if let Some(s) = self.slack.get(x) {
                let _ = write!(out, "  slack {s:.3e}");
            }
            out.push('\n');
        }
        out
    }
}

impl Automaton for StationaryProfile {
    type Mem = ();

    fn owner(&self) -> Player {
        self.owner.unwrap_or(Player::One)
    }

    fn start(&self, _: &StateId) -> Vec<((), f64)> {
        vec![((), 1.0)]
    }

    fn action(&self, _: &(), x: &StateId) -> Vec<f64> {
        self.table.get(x).cloned().unwrap_or_default()
    }

    fn advance(&self, _: &(), _: &StateId) -> Vec<((), f64)> {
        vec![((), 1.0)]
    }
}

impl StateHistoryStrategy for StationaryProfile {
    fn mixed(&self, history: &[StateId]) -> Vec<f64> {
        self.action(&(), history.last().expect("non-empty history"))
    }
}

/// Per-state block lengths `n(x)` with `v_{n(x)}(x) ≥ level`.
#[derive(Clone, Debug, PartialEq)]
pub struct Certificate {
    pub level: f64,
    pub n0: usize,
    pub lengths: BTreeMap<StateId, usize>,
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
#[error("no n ≤ {n0} reaches the required level at {} state(s), first {}", states.len(), states.first().map(|s| s.to_string()).unwrap_or_default())]
pub struct CertificateFailure {
    pub n0: usize,
    pub states: Vec<StateId>,
}

impl Certificate {
    pub fn max_length(&self) -> usize {
        self.lengths.values().copied().max().unwrap_or(1)
    }

    /// Number of blocks after which absorption has probability at least `1 − eps`.
    pub fn blocks_for(&self, eps: f64) -> usize {
        if self.level >= 1.0 {
            return 1;
        }
        (eps.ln() / (1.0 - self.level).ln()).ceil().max(1.0) as usize
    }

    /// A stage by which absorption has probability at least `1 − eps`.
    pub fn termination_horizon(&self, eps: f64) -> usize {
        self.max_length() * self.blocks_for(eps)
    }
}

fn certify(
    seq: &ValueSequence,
    n0: usize,
    required: impl Fn(usize) -> Option<f64>,
) -> Result<Certificate, CertificateFailure> {
    let n0 = n0.min(seq.horizon);
    let mut lengths = BTreeMap::new();
    let mut failed = Vec::new();
    for (i, x) in seq.states.iter().enumerate() {
        if !seq.is_active(i) {
            continue;
        }
        let Some(level) = required(i) else {
            failed.push(x.clone());
            continue;
        };
        match (1..=n0).find(|&n| seq.lower[n][i] >= level) {
            Some(n) => {
                lengths.insert(x.clone(), n);
            }
            None => failed.push(x.clone()),
        }
    }
    if failed.is_empty() {
        Ok(Certificate {
            level: 0.0,
            n0,
            lengths,
        })
    } else {
        Err(CertificateFailure { n0, states: failed })
    }
}

/// For each recorded active state, the smallest `n ≤ n0` with `v_n(x) ≥ m`.
pub fn positive_certificate(
    seq: &ValueSequence,
    m: f64,
    n0: usize,
) -> Result<Certificate, CertificateFailure> {
    certify(seq, n0, |_| Some(m)).map(|c| Certificate { level: m, ..c })
}

/// Like [`positive_certificate`], but each state must also come within
/// `slack` of its target: `v_n(x) ≥ max(m, target(x) − slack)`.
pub fn target_certificate(
    seq: &ValueSequence,
    target: &ValueFunction,
    slack: f64,
    m: f64,
    n0: usize,
) -> Result<Certificate, CertificateFailure> {
    certify(seq, n0, |i| {
        target.get(&seq.states[i]).map(|t| (t - slack).max(m))
    })
    .map(|c| Certificate { level: m, ..c })
}

/// Copy of `game` where every active state with `theta(x)` is absorbing with payoff `v(x)`.
pub fn auxiliary_game(
    game: &RecursiveGame,
    v: &ValueFunction,
    theta: impl Fn(&StateId) -> bool,
) -> Result<RecursiveGame, StrategyError> {
    let mut aux = game.clone();
    aux.name = format!("{}_aux", game.name);
    for x in &game.active {
        if !theta(x) {
            continue;
        }
        let value = v
            .get(x)
            .ok_or_else(|| StrategyError::MissingValue(x.clone()))?;
        let payoff = rational_from_f64(value);
        if !value.is_finite() || !rat_abs_le(&payoff, &game.payoff_bound) {
            return Err(StrategyError::ValueOutOfRange {
                state: x.clone(),
                value,
            });
        }
        aux.active.remove(x);
        aux.actions_a.remove(x);
        aux.actions_b.remove(x);
        aux.absorbing.insert(x.clone(), payoff);
    }
    aux.transitions
        .retain(|(x, _, _), _| aux.active.contains(x));
    Ok(aux)
}

/// The game seen by player 2: payoffs negated and the roles of the action sets swapped.
pub fn swap_roles(game: &RecursiveGame) -> RecursiveGame {
    let mut out = game.clone();
    out.name = format!("{}_swapped", game.name);
    out.absorbing = game
        .absorbing
        .iter()
        .map(|(x, g)| (x.clone(), -g.clone()))
        .collect();
    out.actions_a = game.actions_b.clone();
    out.actions_b = game.actions_a.clone();
    out.transitions = game
        .transitions
        .iter()
        .map(|((x, a, b), t)| ((x.clone(), *b, *a), t.clone()))
        .collect();
    out
}

fn value_at<G: GameModel + ?Sized>(
    game: &G,
    v: &ValueFunction,
    x: &StateId,
) -> Result<f64, StrategyError> {
    if let Some(g) = game.payoff(x) {
        return Ok(v.get(x).unwrap_or_else(|| rational_to_f64(&g)));
    }
    v.get(x)
        .ok_or_else(|| StrategyError::MissingValue(x.clone()))
}

/// The one-shot game at `x` with payoff `E_q[v]`.
pub fn one_shot_game<G: GameModel + ?Sized>(
    game: &G,
    v: &ValueFunction,
    x: &StateId,
) -> Result<MatrixGame, StrategyError> {
    let (na, nb) = game.action_counts(x);
    let mut data = Vec::with_capacity(na * nb);
    for a in 0..na {
        for b in 0..nb {
            let mut e = 0.0;
            for (y, p) in game.transition(x, a, b) {
                if p.is_positive() {
                    e += rational_to_f64(&p) * value_at(game, v, &y)?;
                }
            }
            data.push(e);
        }
    }
    MatrixGame::new(na, nb, data).map_err(|source| StrategyError::Solve {
        state: x.clone(),
        source,
    })
}

/// Optimal one-shot strategies against `v` at every active state of `v`,
/// with slacks recorded but not checked.
pub fn s_star_unchecked<G: GameModel + ?Sized>(
    game: &G,
    v: &ValueFunction,
    tol: f64,
) -> Result<StationaryProfile, StrategyError> {
    let mut prof = StationaryProfile {
        owner: Some(Player::One),
        ..Default::default()
    };
    for (x, vx) in v.iter() {
        if !game.is_active(x) {
            continue;
        }
        let g = one_shot_game(game, v, x)?;
        let sol = matrix::solve(&g, tol).map_err(|source| StrategyError::Solve {
            state: x.clone(),
            source,
        })?;
        prof.slack
            .insert(x.clone(), g.row_guarantee(&sol.row_strategy) - vx);
        prof.table.insert(x.clone(), sol.row_strategy);
    }
    Ok(prof)
}

/// [`s_star_unchecked`], failing on the worst state whose slack is below `−tol`.
pub fn s_star<G: GameModel + ?Sized>(
    game: &G,
    v: &ValueFunction,
    tol: f64,
) -> Result<StationaryProfile, StrategyError> {
    let prof = s_star_unchecked(game, v, tol.min(matrix::DEFAULT_TOL))?;
    if let Some((state, slack)) = prof.min_slack() {
        if slack < -tol {
            return Err(StrategyError::Slack { state, slack, tol });
        }
    }
    Ok(prof)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Restart an optimal block strategy at random times until absorption.
    BlockTerminating,
    /// Alternate between the one-shot profile and block play according to thresholds on `v`.
    Alternating,
}

/// Memory of a concatenated strategy.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Phase {
    Absorbed,
    /// Playing the one-shot profile.
    Even,
    /// Stage `step` of a block of `len` stages anchored at `anchor`.
    Block {
        anchor: StateId,
        len: usize,
        step: usize,
    },
}

/// Block play with random restarts, optionally alternating with a stationary profile.
#[derive(Clone, Debug)]
pub struct ConcatenatedStrategy {
    pub mode: Mode,
    pub eps: f64,
    pub target: ValueFunction,
    pub s_star: Option<StationaryProfile>,
    pub lengths: HashMap<StateId, usize>,
    pub block: MarkovProfile,
    /// States where play has stopped for good.
    pub terminal: HashSet<StateId>,
    counts: HashMap<StateId, usize>,
}

fn known_states<G: GameModel + ?Sized>(
    game: &G,
    seeds: impl IntoIterator<Item = StateId>,
) -> BTreeSet<StateId> {
    let mut out = BTreeSet::new();
    for x in seeds {
        if game.is_active(&x) {
            let (na, nb) = game.action_counts(&x);
            for a in 0..na {
                for b in 0..nb {
                    out.extend(game.transition(&x, a, b).into_iter().map(|(y, _)| y));
                }
            }
        }
        out.insert(x);
    }
    out
}

/// Block strategy for a positive-valued game: at each anchor draw a length
/// uniformly in `1..=n(anchor)`, play the anchor's Markov profile that long,
/// then re-anchor at the current state.
pub fn block_strategy<G: GameModel + ?Sized>(
    game: &G,
    cert: &Certificate,
    profiles: &MarkovProfile,
) -> Result<ConcatenatedStrategy, StrategyError> {
    if profiles.horizon < cert.max_length() {
        return Err(StrategyError::MissingRecords {
            remaining: cert.max_length(),
        });
    }
    let states = known_states(
        game,
        profiles
            .table
            .keys()
            .cloned()
            .chain(cert.lengths.keys().cloned()),
    );
    for x in &states {
        if game.is_active(x) && !cert.lengths.contains_key(x) && profiles.table.contains_key(x) {
            return Err(StrategyError::OutsideDomain(x.clone()));
        }
    }
    let terminal = states
        .iter()
        .filter(|x| game.is_absorbing(x))
        .cloned()
        .collect();
    let counts = states
        .iter()
        .filter(|x| game.is_active(x))
        .map(|x| (x.clone(), own_count(game, x, Player::One)))
        .collect();
    Ok(ConcatenatedStrategy {
        mode: Mode::BlockTerminating,
        eps: 0.0,
        target: ValueFunction::new(),
        s_star: None,
        lengths: cert.lengths.iter().map(|(x, n)| (x.clone(), *n)).collect(),
        block: profiles.clone(),
        terminal,
        counts,
    })
}

/// The alternating strategy: the one-shot profile while `v ≤ 2ε` has not been
/// exceeded, block play from the first state with `v > 2ε` until `v < ε`, and so on.
pub fn sigma_bar<G: GameModel + ?Sized>(
    game: &G,
    v: &ValueFunction,
    eps: f64,
    block: &ConcatenatedStrategy,
    s_star: &StationaryProfile,
) -> Result<ConcatenatedStrategy, StrategyError> {
    if !(eps > 0.0 && eps <= 0.5) {
        return Err(StrategyError::BadParameter(format!(
            "ε must lie in (0, 1/2], got {eps}"
        )));
    }
    let seeds = v
        .iter()
        .map(|(x, _)| x.clone())
        .chain(block.counts.keys().cloned());
    let states = known_states(game, seeds);
    let terminal = states
        .iter()
        .filter(|x| game.is_absorbing(x))
        .cloned()
        .collect();
    let counts = states
        .iter()
        .filter(|x| game.is_active(x))
        .map(|x| (x.clone(), own_count(game, x, Player::One)))
        .collect();
    Ok(ConcatenatedStrategy {
        mode: Mode::Alternating,
        eps,
        target: v.clone(),
        s_star: Some(s_star.clone()),
        lengths: block.lengths.clone(),
        block: block.block.clone(),
        terminal,
        counts,
    })
}

impl ConcatenatedStrategy {
    fn anchor(&self, x: &StateId) -> Vec<(Phase, f64)> {
        // Outside the certificate a block lasts one stage.
        let n = self.lengths.get(x).copied().unwrap_or(1).max(1);
        let w = 1.0 / n as f64;
        (1..=n)
            .map(|len| {
                (
                    Phase::Block {
                        anchor: x.clone(),
                        len,
                        step: 1,
                    },
                    w,
                )
            })
            .collect()
    }

    fn continue_block(&self, prev: &Phase, x: &StateId) -> Vec<(Phase, f64)> {
        match prev {
            Phase::Block { anchor, len, step } if step < len => {
                vec![(
                    Phase::Block {
                        anchor: anchor.clone(),
                        len: *len,
                        step: step + 1,
                    },
                    1.0,
                )]
            }
            _ => self.anchor(x),
        }
    }

    fn enter(&self, prev: Option<&Phase>, x: &StateId) -> Vec<(Phase, f64)> {
        if self.terminal.contains(x) {
            return vec![(Phase::Absorbed, 1.0)];
        }
        match self.mode {
            Mode::BlockTerminating => match prev {
                Some(p) => self.continue_block(p, x),
                None => self.anchor(x),
            },
            Mode::Alternating => {
                let vx = self.target.get(x).unwrap_or(f64::NAN);
                match prev {
                    Some(p @ Phase::Block { .. }) => {
                        if vx < self.eps {
                            vec![(Phase::Even, 1.0)]
                        } else {
                            self.continue_block(p, x)
                        }
                    }
                    _ => {
                        if vx > 2.0 * self.eps {
                            self.anchor(x)
                        } else {
                            vec![(Phase::Even, 1.0)]
                        }
                    }
                }
            }
        }
    }

    fn fallback(&self, x: &StateId) -> Vec<f64> {
        self.counts.get(x).map_or_else(Vec::new, |&k| uniform(k))
    }

    pub fn describe(&self) -> String {
        let mut out = String::new();
        match self.mode {
            Mode::BlockTerminating => out.push_str("block strategy\n"),
            Mode::Alternating => {
                let _ = writeln!(
                    out,
                    "alternating strategy, eps {}, thresholds {} / {}",
                    self.eps,
                    self.eps,
                    2.0 * self.eps
                );
            }
        }
        let lengths: BTreeMap<_, _> = self.lengths.iter().collect();
        out.push_str("block lengths\n");
        for (x, n) in lengths {
            let _ = write!(out, "  {x}: {n}");
            if let Some(v) = self.target.get(x) {
                let _ = write!(out, "  target {v:.6}");
            }
            out.push('\n');
        }
        if let Some(s) = &self.s_star {
            out.push_str(&s.describe());
        }
        out.push_str(&self.block.describe());
        out
    }
}

impl Automaton for ConcatenatedStrategy {
    type Mem = Phase;

    fn owner(&self) -> Player {
        Player::One
    }

    fn start(&self, x1: &StateId) -> Vec<(Phase, f64)> {
        self.enter(None, x1)
    }

    fn action(&self, mem: &Phase, x: &StateId) -> Vec<f64> {
        let found = match mem {
            Phase::Absorbed => None,
            Phase::Even => self.s_star.as_ref().and_then(|s| s.table.get(x).cloned()),
            Phase::Block { anchor, step, .. } => {
                let n = self.lengths.get(anchor).copied().unwrap_or(1);
                self.block.get(n + 1 - step, x).map(<[f64]>::to_vec)
            }
        };
        found.unwrap_or_else(|| self.fallback(x))
    }

    fn advance(&self, mem: &Phase, next: &StateId) -> Vec<(Phase, f64)> {
        self.enter(Some(mem), next)
    }
}

/// Stop-or-continue decisions on state histories of length at most `horizon`.
#[derive(Clone, Debug, PartialEq)]
pub struct PureStoppingTime {
    pub horizon: usize,
    /// Decision at every reachable history on which play has not stopped earlier.
    pub decisions: BTreeMap<Vec<StateId>, bool>,
}

impl PureStoppingTime {
    /// Whether play has stopped by the end of `history`.
    pub fn stops(&self, history: &[StateId]) -> bool {
        if history.len() >= self.horizon {
            return true;
        }
        (1..=history.len()).any(|t| self.decisions.get(&history[..t]).copied().unwrap_or(false))
    }

    /// Stage at which play stops along `history`, if within it.
    pub fn stage(&self, history: &[StateId]) -> Option<usize> {
        (1..=history.len()).find(|&t| self.stops(&history[..t]))
    }
}

/// Successor distribution, with absorbing states looping on themselves.
fn step_law<G: GameModel + ?Sized>(
    game: &G,
    x: &StateId,
    a: usize,
    b: usize,
) -> Vec<(StateId, f64)> {
    if !game.is_active(x) {
        return vec![(x.clone(), 1.0)];
    }
    game.transition(x, a, b)
        .into_iter()
        .filter(|(_, p)| p.is_positive())
        .map(|(y, p)| (y, rational_to_f64(&p)))
        .collect()
}

/// `min_b Σ_a σ[a] Σ q(y) f(y)` at `x`.
fn min_over_b<G: GameModel + ?Sized>(
    game: &G,
    x: &StateId,
    sigma: &[f64],
    mut f: impl FnMut(&StateId) -> f64,
) -> f64 {
    if !game.is_active(x) {
        return f(x);
    }
    let (na, nb) = game.action_counts(x);
    let mut cache: HashMap<StateId, f64> = HashMap::new();
    let mut best = f64::INFINITY;
    for b in 0..nb {
        let mut e = 0.0;
        for a in 0..na {
            let w = sigma.get(a).copied().unwrap_or(0.0);
            if w == 0.0 {
                continue;
            }
            for (y, p) in step_law(game, x, a, b) {
                let fy = match cache.get(&y) {
                    Some(v) => *v,
                    None => {
                        let v = f(&y);
                        cache.insert(y, v);
                        v
                    }
                };
                e += w * p * fy;
            }
        }
        best = best.min(e);
    }
    best
}

struct StopSolver<'a, G: ?Sized, S: ?Sized> {
    game: &'a G,
    sigma: &'a S,
    n: usize,
    sums: HashMap<Vec<StateId>, f64>,
}

impl<G: GameModel + ?Sized, S: StateHistoryStrategy + ?Sized> StopSolver<'_, G, S> {
    /// `min_τ E[Σ_{s=t}^{n} g(x_s) | h]` for a history `h` of length `t`.
    fn sum(&mut self, h: &mut Vec<StateId>) -> f64 {
        if let Some(v) = self.sums.get(h.as_slice()) {
            return *v;
        }
        let x = h.last().unwrap().clone();
        let m = self.n + 1 - h.len();
        let g = self.game.payoff_f64(&x);
        let v = if m == 1 {
            g
        } else if !self.game.is_active(&x) {
            g * m as f64
        } else {
            g + self.continuation(h)
        };
        self.sums.insert(h.clone(), v);
        v
    }

    fn continuation(&mut self, h: &mut Vec<StateId>) -> f64 {
        let x = h.last().unwrap().clone();
        let sigma = self.sigma.mixed(h);
        let game = self.game;
        min_over_b(game, &x, &sigma, |y| {
            h.push(y.clone());
            let v = self.sum(h);
            h.pop();
            v
        })
    }

    fn decide(&mut self, h: &mut Vec<StateId>, out: &mut BTreeMap<Vec<StateId>, bool>) {
        let x = h.last().unwrap().clone();
        let m = self.n + 1 - h.len();
        let stop = m == 1 || {
            let w = self.continuation(h) / (m - 1) as f64;
            self.game.payoff_f64(&x) >= w
        };
        out.insert(h.clone(), stop);
        if stop {
            return;
        }
        let sigma = self.sigma.mixed(h);
        let (na, nb) = self.game.action_counts(&x);
        let mut next = BTreeSet::new();
        for a in 0..na {
            if sigma.get(a).copied().unwrap_or(0.0) > 0.0 {
                for b in 0..nb {
                    next.extend(step_law(self.game, &x, a, b).into_iter().map(|(y, _)| y));
                }
            }
        }
        for y in next {
            h.push(y);
            self.decide(h, out);
            h.pop();
        }
    }
}

/// Backward-induction stopping time on state histories: stop when the current
/// payoff is at least the worst-case average of the remaining stages.
pub fn pure_stopping_time<G: GameModel + ?Sized, S: StateHistoryStrategy + ?Sized>(
    game: &G,
    sigma: &S,
    x1: &StateId,
    n: usize,
) -> Result<PureStoppingTime, StrategyError> {
    if n == 0 {
        return Err(StrategyError::BadParameter(
            "horizon must be at least 1".into(),
        ));
    }
    if !game.contains(x1) {
        return Err(GameError::UnknownState(x1.clone()).into());
    }
    let mut solver = StopSolver {
        game,
        sigma,
        n,
        sums: HashMap::new(),
    };
    let mut decisions = BTreeMap::new();
    solver.decide(&mut vec![x1.clone()], &mut decisions);
    Ok(PureStoppingTime {
        horizon: n,
        decisions,
    })
}

/// Both sides of the stopping guarantee, by exhaustive dynamic programming:
/// `(min_τ E[g(x_θ)], min_τ E[(1/n) Σ_t g(x_t)])`.
pub fn stopping_guarantee<G: GameModel + ?Sized, S: StateHistoryStrategy + ?Sized>(
    game: &G,
    sigma: &S,
    theta: &PureStoppingTime,
    x1: &StateId,
) -> (f64, f64) {
    fn stopped<G: GameModel + ?Sized, S: StateHistoryStrategy + ?Sized>(
        game: &G,
        sigma: &S,
        theta: &PureStoppingTime,
        h: &mut Vec<StateId>,
    ) -> f64 {
        let x = h.last().unwrap().clone();
        if theta.stops(h) {
            return game.payoff_f64(&x);
        }
        let s = sigma.mixed(h);
        min_over_b(game, &x, &s, |y| {
            h.push(y.clone());
            let v = stopped(game, sigma, theta, h);
            h.pop();
            v
        })
    }
    let n = theta.horizon;
    let mut solver = StopSolver {
        game,
        sigma,
        n,
        sums: HashMap::new(),
    };
    let rhs = solver.sum(&mut vec![x1.clone()]) / n as f64;
    let lhs = stopped(game, sigma, theta, &mut vec![x1.clone()]);
    (lhs, rhs)
}

/// A state-history strategy given by an explicit table, uniform where missing.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct StateHistoryTable {
    pub table: BTreeMap<Vec<StateId>, Vec<f64>>,
    pub counts: BTreeMap<StateId, usize>,
}

impl StateHistoryStrategy for StateHistoryTable {
    fn mixed(&self, history: &[StateId]) -> Vec<f64> {
        if let Some(p) = self.table.get(history) {
            return p.clone();
        }
        uniform(
            history
                .last()
                .and_then(|x| self.counts.get(x))
                .copied()
                .unwrap_or(0),
        )
    }
}

/// Probability of each full history of `horizon` stages under `(σ, τ)`.
pub fn history_law<G, S, T>(
    game: &G,
    sigma: &S,
    tau: &T,
    x1: &StateId,
    horizon: usize,
) -> Vec<(FullHistory, f64)>
where
    G: GameModel + ?Sized,
    S: FullHistoryStrategy + ?Sized,
    T: FullHistoryStrategy + ?Sized,
{
    let mut layer = vec![(
        FullHistory {
            states: vec![x1.clone()],
            actions: Vec::new(),
        },
        1.0,
    )];
    for _ in 1..horizon {
        let mut next = Vec::new();
        for (h, p) in layer {
            let x = h.states.last().unwrap().clone();
            if !game.is_active(&x) {
                let mut h2 = h.clone();
                h2.states.push(x);
                h2.actions.push((0, 0));
                next.push((h2, p));
                continue;
            }
            let sa = sigma.mixed(&h);
            let tb = tau.mixed(&h);
            for (a, &pa) in sa.iter().enumerate() {
                for (b, &pb) in tb.iter().enumerate() {
                    if pa * pb == 0.0 {
                        continue;
                    }
                    for (y, q) in step_law(game, &x, a, b) {
                        let mut h2 = h.clone();
                        h2.states.push(y);
                        h2.actions.push((a, b));
                        next.push((h2, p * pa * pb * q));
                    }
                }
            }
        }
        layer = next;
    }
    layer
}

/// Law of the state sequence `x_1..x_horizon` under `(σ, τ)`.
pub fn state_path_law<G, S, T>(
    game: &G,
    sigma: &S,
    tau: &T,
    x1: &StateId,
    horizon: usize,
) -> BTreeMap<Vec<StateId>, f64>
where
    G: GameModel + ?Sized,
    S: FullHistoryStrategy + ?Sized,
    T: FullHistoryStrategy + ?Sized,
{
    let mut out = BTreeMap::new();
    for (h, p) in history_law(game, sigma, tau, x1, horizon) {
        *out.entry(h.states).or_insert(0.0) += p;
    }
    out
}

/// Player 2's strategy averaged over action histories with the same states:
/// `τ̂_t(s_t) = Σ_{h ∈ H_t(s_t)} P(h | s_t) τ_t(h)`.
pub fn reduce_tau<G, S, T>(
    game: &G,
    sigma: &S,
    tau: &T,
    x1: &StateId,
    horizon: usize,
) -> StateHistoryTable
where
    G: GameModel + ?Sized,
    S: StateHistoryStrategy + ?Sized,
    T: FullHistoryStrategy + ?Sized,
{
    let mut sums: BTreeMap<Vec<StateId>, (f64, Vec<f64>)> = BTreeMap::new();
    for t in 1..=horizon {
        for (h, p) in history_law(game, &StatesOnly(sigma), tau, x1, t) {
            if p == 0.0 || !game.is_active(h.states.last().unwrap()) {
                continue;
            }
            let mixed = tau.mixed(&h);
            let entry = sums
                .entry(h.states.clone())
                .or_insert_with(|| (0.0, vec![0.0; mixed.len()]));
            entry.0 += p;
            for (acc, m) in entry.1.iter_mut().zip(&mixed) {
                *acc += p * m;
            }
        }
    }
    let mut out = StateHistoryTable::default();
    for (s, (p, acc)) in sums {
        let x = s.last().unwrap().clone();
        out.counts.insert(x, acc.len());
        out.table
            .insert(s, acc.into_iter().map(|v| v / p).collect());
    }
    out
}

impl fmt::Display for Certificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "certificate level {} n0 {} max length {}",
            self.level,
            self.n0,
            self.max_length()
        )?;
        for (x, n) in &self.lengths {
            writeln!(f, "  {x}: {n}")?;
        }
        Ok(())
    }
}

/// Text form of an auxiliary game's new absorbing payoffs, for audit.
pub fn describe_absorbing(game: &RecursiveGame) -> String {
    let mut out = String::new();
    for (x, g) in &game.absorbing {
        let _ = writeln!(out, "{x} = {}", format_rational(g));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtin::{quitting_simple, quitting_simple_limit, LehrerSorin};
    use crate::state::rat;
    use crate::values::{compute_vn, VnOptions};

    fn s(x: &str) -> StateId {
        StateId::name(x)
    }

    fn quitting_seq(n: usize) -> ValueSequence {
        let g = quitting_simple();
        compute_vn(
            &g,
            &[s("s")],
            n,
            &VnOptions {
                record_profiles: true,
                ..Default::default()
            },
        )
        .unwrap()
    }

    #[test]
    fn one_stage_profile_is_stage_optimal() {
        // With one stage left every action is optimal; the profile is still a distribution.
        let p = markov_optimal(&quitting_seq(3), 1, Player::One).unwrap();
        assert!((p.get(1, &s("s")).unwrap().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let p2 = markov_optimal(&quitting_seq(3), 2, Player::One).unwrap();
        let mixed = p2.get(2, &s("s")).unwrap();
        assert!((mixed[0] - 0.8).abs() < 1e-9);
    }

    #[test]
    fn markov_profile_needs_records() {
        let g = quitting_simple();
        let seq = compute_vn(
            &g,
            &[s("s")],
            3,
            &VnOptions {
                record_profiles: false,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(matches!(
            markov_optimal(&seq, 2, Player::One),
            Err(StrategyError::MissingRecords { .. })
        ));
        assert!(matches!(
            markov_optimal(&seq, 4, Player::One),
            Err(StrategyError::Horizon { .. })
        ));
    }

    #[test]
    fn jump_game_goes_right_then_jumps() {
        let g = LehrerSorin::new(200);
        let root = StateId::pair(0, 0);
        let n = 100;
        let seq = compute_vn(
            &g,
            std::slice::from_ref(&root),
            n,
            &VnOptions {
                record_profiles: true,
                ..Default::default()
            },
        )
        .unwrap();
        let p = markov_optimal(&seq, n, Player::One).unwrap();
        // Stage t at (t−1, 0): jump is index 1.
        let jump_stage = (1..=n)
            .find(|&t| p.action(&t, &StateId::pair(t as i64 - 1, 0))[1] == 1.0)
            .unwrap();
        assert!(
            (jump_stage as i64 - n as i64 / 2).abs() <= 2,
            "jumped at stage {jump_stage}"
        );
    }

    #[test]
    fn certificates() {
        let seq = quitting_seq(10);
        let c = positive_certificate(&seq, 0.05, 10).unwrap();
        assert_eq!(c.lengths[&s("s")], 2);
        assert_eq!(c.blocks_for(0.1), 45);
        assert_eq!(c.termination_horizon(0.1), 90);
        let high = positive_certificate(&seq, 0.5, 10).unwrap_err();
        assert_eq!(high.states, vec![s("s")]);
        let target: ValueFunction = [(s("s"), quitting_simple_limit())].into_iter().collect();
        let t = target_certificate(&seq, &target, 0.03, 0.05, 10).unwrap();
        assert_eq!(t.lengths[&s("s")], 10);
    }

    #[test]
    fn jump_game_climbing_states_fail_certificate() {
        let g = LehrerSorin::new(50);
        let seq = compute_vn(&g, &[StateId::pair(5, 1)], 20, &VnOptions::default()).unwrap();
        let f = positive_certificate(&seq, 0.1, 20).unwrap_err();
        assert!(f.states.contains(&StateId::pair(5, 1)));
    }

    #[test]
    fn auxiliary_game_absorbs_marked_states() {
        let g = quitting_simple();
        let v: ValueFunction = [(s("s"), 0.25)].into_iter().collect();
        let same = auxiliary_game(&g, &v, |_| false).unwrap();
        assert_eq!(same.active, g.active);
        let aux = auxiliary_game(&g, &v, |_| true).unwrap();
        assert!(aux.active.is_empty());
        assert_eq!(aux.absorbing[&s("s")], rat(1, 4));
        assert!(aux.validate().is_empty());
        let seq = compute_vn(&aux, &[s("s")], 5, &VnOptions::default()).unwrap();
        for n in 1..=5 {
            assert_eq!(seq.value(n, &s("s")), Some(0.25));
        }
        let bad: ValueFunction = [(s("s"), 1.5)].into_iter().collect();
        assert!(matches!(
            auxiliary_game(&g, &bad, |_| true),
            Err(StrategyError::ValueOutOfRange { .. })
        ));
        assert!(matches!(
            auxiliary_game(&g, &ValueFunction::new(), |_| true),
            Err(StrategyError::MissingValue(_))
        ));
    }

    #[test]
    fn swapped_game_negates() {
        let g = quitting_simple();
        let w = swap_roles(&g);
        assert_eq!(w.absorbing[&s("win")], rat(-1, 1));
        assert_eq!(w.actions_a[&s("s")], g.actions_b[&s("s")]);
        assert!(w.validate().is_empty());
        let v = compute_vn(&w, &[s("s")], 30, &VnOptions::default()).unwrap();
        let u = compute_vn(&g, &[s("s")], 30, &VnOptions::default()).unwrap();
        assert!((v.value(30, &s("s")).unwrap() + u.value(30, &s("s")).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn s_star_at_the_limit_has_no_slack_deficit() {
        let g = quitting_simple();
        let v: ValueFunction = [
            (s("s"), quitting_simple_limit()),
            (s("win"), 1.0),
            (s("lose"), -1.0),
            (s("draw"), 0.0),
        ]
        .into_iter()
        .collect();
        let p = s_star(&g, &v, 1e-9).unwrap();
        let mixed = &p.table[&s("s")];
        assert!((mixed[0] - 4.0 / (5.0 + quitting_simple_limit())).abs() < 1e-9);
        let high: ValueFunction = [
            (s("s"), 0.3),
            (s("win"), 1.0),
            (s("lose"), -1.0),
            (s("draw"), 0.0),
        ]
        .into_iter()
        .collect();
        assert!(matches!(
            s_star(&g, &high, 1e-6),
            Err(StrategyError::Slack { .. })
        ));
    }

    fn chain(steps: usize) -> RecursiveGame {
        let mut g = RecursiveGame::new("chain");
        g.add_absorbing(s("win"), rat(1, 1));
        for k in 0..steps {
            let x = s(&format!("c{k}"));
            let next = if k + 1 == steps {
                s("win")
            } else {
                s(&format!("c{}", k + 1))
            };
            g.add_active(x.clone(), &["go"], &["-"]);
            g.set_transition(&x, 0, 0, vec![(next, rat(1, 1))]);
        }
        g
    }

    #[test]
    fn stopping_time_on_chains() {
        let sigma = StationaryProfile {
            table: [(s("c0"), vec![1.0]), (s("c1"), vec![1.0])]
                .into_iter()
                .collect(),
            ..Default::default()
        };
        let g = chain(2);
        let theta = pure_stopping_time(&g, &sigma, &s("c0"), 3).unwrap();
        let path = vec![s("c0"), s("c1"), s("win")];
        assert_eq!(theta.stage(&path), Some(3));
        let (lhs, rhs) = stopping_guarantee(&g, &sigma, &theta, &s("c0"));
        assert_eq!(lhs, 1.0);
        assert!((rhs - 1.0 / 3.0).abs() < 1e-15);

        let g1 = chain(1);
        let theta = pure_stopping_time(&g1, &sigma, &s("c0"), 3).unwrap();
        assert_eq!(theta.stage(&[s("c0"), s("win")]), Some(2));
        let (lhs, rhs) = stopping_guarantee(&g1, &sigma, &theta, &s("c0"));
        assert_eq!(lhs, 1.0);
        assert!((rhs - 2.0 / 3.0).abs() < 1e-15);

        let theta = pure_stopping_time(&g1, &sigma, &s("c0"), 1).unwrap();
        assert_eq!(theta.stage(&[s("c0")]), Some(1));
        assert_eq!(
            stopping_guarantee(&g1, &sigma, &theta, &s("c0")),
            (0.0, 0.0)
        );
    }

    #[test]
    fn stopping_time_stops_at_once_when_nothing_is_gained() {
        let mut g = RecursiveGame::new("doom");
        g.add_absorbing(s("lose"), rat(-1, 1));
        g.add_active(s("x"), &["a"], &["b"]);
        g.set_transition(&s("x"), 0, 0, vec![(s("lose"), rat(1, 1))]);
        let sigma = StationaryProfile {
            table: [(s("x"), vec![1.0])].into_iter().collect(),
            ..Default::default()
        };
        let theta = pure_stopping_time(&g, &sigma, &s("x"), 4).unwrap();
        assert_eq!(theta.stage(&[s("x"), s("lose")]), Some(1));
        let (lhs, rhs) = stopping_guarantee(&g, &sigma, &theta, &s("x"));
        assert_eq!(lhs, 0.0);
        assert!((rhs + 0.75).abs() < 1e-15);
    }

    /// Two actions for player 2, deterministic moves: from `x`, `l` goes to `y`
    /// whatever player 1 does; `r` goes to `y` after `up` and `z` after `down`.
    fn fork() -> RecursiveGame {
        let mut g = RecursiveGame::new("fork");
        g.add_absorbing(s("y"), rat(1, 1));
        g.add_absorbing(s("z"), rat(-1, 1));
        g.add_active(s("x"), &["up", "down"], &["l", "r"]);
        g.add_active(s("w"), &["up", "down"], &["l", "r"]);
        g.set_transition(&s("x"), 0, 0, vec![(s("w"), rat(1, 1))]);
        g.set_transition(&s("x"), 1, 0, vec![(s("w"), rat(1, 1))]);
        g.set_transition(&s("x"), 0, 1, vec![(s("w"), rat(1, 1))]);
        g.set_transition(
            &s("x"),
            1,
            1,
            vec![(s("w"), rat(1, 2)), (s("z"), rat(1, 2))],
        );
        for a in 0..2 {
            g.set_transition(&s("w"), a, 0, vec![(s("y"), rat(1, 1))]);
            g.set_transition(&s("w"), a, 1, vec![(s("z"), rat(1, 1))]);
        }
        g
    }

    #[test]
    fn reduced_opponent_matches_state_law() {
        let g = fork();
        let sigma = StationaryProfile {
            table: [(s("x"), vec![0.3, 0.7]), (s("w"), vec![0.5, 0.5])]
                .into_iter()
                .collect(),
            ..Default::default()
        };
        // Player 2 reacts to player 1's first action.
        let tau = |h: &FullHistory| -> Vec<f64> {
            match h.actions.first() {
                None => vec![0.4, 0.6],
                Some((0, _)) => vec![1.0, 0.0],
                Some(_) => vec![0.0, 1.0],
            }
        };
        let reduced = reduce_tau(&g, &sigma, &tau, &s("x"), 3);
        for t in 1..=3 {
            let full = state_path_law(&g, &StatesOnly(&sigma), &tau, &s("x"), t);
            let red = state_path_law(&g, &StatesOnly(&sigma), &StatesOnly(&reduced), &s("x"), t);
            assert_eq!(full.len(), red.len());
            for (k, p) in &full {
                assert!((p - red[k]).abs() <= 1e-12, "{k:?}");
            }
        }
        // At (x, w): P(up | w) = 0.3 / (0.3 + 0.7·(0.4 + 0.6/2)) and τ plays l after up.
        let p_up = 0.3 / (0.3 + 0.7 * (0.4 + 0.3));
        let m = reduced.mixed(&[s("x"), s("w")]);
        assert!((m[0] - p_up).abs() < 1e-12);
    }

    #[test]
    fn reduced_opponent_keeps_state_strategies() {
        let g = fork();
        let sigma = StationaryProfile {
            table: [(s("x"), vec![0.3, 0.7]), (s("w"), vec![0.5, 0.5])]
                .into_iter()
                .collect(),
            ..Default::default()
        };
        let tau = StationaryProfile {
            table: [(s("x"), vec![0.2, 0.8]), (s("w"), vec![0.9, 0.1])]
                .into_iter()
                .collect(),
            ..Default::default()
        };
        let reduced = reduce_tau(&g, &sigma, &StatesOnly(&tau), &s("x"), 2);
        for (h, p) in &reduced.table {
            let expect = tau.mixed(h);
            assert!(p.iter().zip(&expect).all(|(a, b)| (a - b).abs() < 1e-12));
        }
    }

    #[test]
    fn block_strategy_memory() {
        let g = quitting_simple();
        let seq = quitting_seq(4);
        let cert = positive_certificate(&seq, 0.05, 4).unwrap();
        let prof = markov_optimal(&seq, 4, Player::One).unwrap();
        let st = block_strategy(&g, &cert, &prof).unwrap();
        let start = st.start(&s("s"));
        assert_eq!(start.len(), 2);
        assert!(start.iter().all(|(_, p)| *p == 0.5));
        // First block stage of a 2-stage block plays the 2-stage optimal action.
        let (mem, _) = &start[1];
        assert!((st.action(mem, &s("s"))[0] - 0.8).abs() < 1e-9);
        let next = st.advance(mem, &s("s"));
        assert_eq!(
            next,
            vec![(
                Phase::Block {
                    anchor: s("s"),
                    len: 2,
                    step: 2
                },
                1.0
            )]
        );
        assert_eq!(
            st.action(&next[0].0, &s("s")),
            prof.get(1, &s("s")).unwrap()
        );
        assert_eq!(
            st.advance(&next[0].0, &s("win")),
            vec![(Phase::Absorbed, 1.0)]
        );
        assert_eq!(st.advance(&next[0].0, &s("s")).len(), 2);
    }

    #[test]
    fn alternating_thresholds() {
        let g = quitting_simple();
        let seq = quitting_seq(4);
        let cert = positive_certificate(&seq, 0.05, 4).unwrap();
        let prof = markov_optimal(&seq, 4, Player::One).unwrap();
        let block = block_strategy(&g, &cert, &prof).unwrap();
        let mut v: ValueFunction = [(s("win"), 1.0), (s("lose"), -1.0), (s("draw"), 0.0)]
            .into_iter()
            .collect();
        let sstar = StationaryProfile {
            table: [(s("s"), vec![0.5, 0.5])].into_iter().collect(),
            ..Default::default()
        };
        for (vs, odd) in [
            (0.05, false),
            (0.15, false),
            (0.2, false),
            (0.2000001, true),
        ] {
            v.insert(s("s"), vs);
            let sb = sigma_bar(&g, &v, 0.1, &block, &sstar).unwrap();
            let start = sb.start(&s("s"));
            assert_eq!(matches!(start[0].0, Phase::Block { .. }), odd, "v = {vs}");
        }
        // In odd phase, staying above ε keeps the block; dropping below ε ends it.
        v.insert(s("s"), 0.15);
        let sb = sigma_bar(&g, &v, 0.1, &block, &sstar).unwrap();
        let odd = Phase::Block {
            anchor: s("s"),
            len: 2,
            step: 1,
        };
        assert_eq!(
            sb.advance(&odd, &s("s"))[0].0,
            Phase::Block {
                anchor: s("s"),
                len: 2,
                step: 2
            }
        );
        v.insert(s("s"), 0.05);
        let sb = sigma_bar(&g, &v, 0.1, &block, &sstar).unwrap();
        assert_eq!(sb.advance(&odd, &s("s")), vec![(Phase::Even, 1.0)]);
        assert_eq!(sb.action(&Phase::Even, &s("s")), vec![0.5, 0.5]);
        assert!(sigma_bar(&g, &v, 0.6, &block, &sstar).is_err());
    }
}
