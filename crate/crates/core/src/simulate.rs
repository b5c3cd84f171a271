//! Play engine, Monte Carlo estimation, exact best responses against
//! automaton strategies, and empirical checks of the alternating strategy.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_traits::Signed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::game::{GameError, GameModel};
use crate::state::{rational_to_f64, StateId};
use crate::strategy::{Automaton, Player, StationaryProfile};
use crate::values::{
    compute_v_lambda, DiscountedValues, LambdaOptions, Recording, ValueFunction, ValuesError,
};

/// Two-sided 99% normal quantile.
pub const Z99: f64 = 2.576;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("player {player:?} emitted {got:?} at {state}, which is not a distribution over {expected} actions")]
    IllegalAction {
        state: StateId,
        player: Player,
        got: Vec<f64>,
        expected: usize,
    },
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Values(#[from] ValuesError),
    #[error("more than {0} information states")]
    InfoStateExplosion(usize),
    #[error("{0}")]
    BadParameter(String),
}

/// The random stream of one role in one run.
///
/// Streams: 0 for nature, 1 for player 1, 2 for player 2.
pub fn run_rng(seed: u64, run: u64, stream: u64) -> ChaCha8Rng {
    let mut z = seed ^ run.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    // splitmix64 finalizer
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^= z >> 31;
    let mut rng = ChaCha8Rng::seed_from_u64(z);
    rng.set_stream(stream);
    rng
}

/// Index drawn from `p` by inversion.
pub fn sample(p: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut last = 0;
    for (k, &w) in p.iter().enumerate() {
        if w > 0.0 {
            acc += w;
            last = k;
            if u < acc {
                return k;
            }
        }
    }
    last
}

fn sample_pair<T: Clone>(d: &[(T, f64)], rng: &mut ChaCha8Rng) -> T {
    let w: Vec<f64> = d.iter().map(|(_, p)| *p).collect();
    d[sample(&w, rng)].0.clone()
}

/// A participant in a simulated play.
pub trait Agent {
    fn begin(&mut self, x1: &StateId, rng: &mut ChaCha8Rng);
    fn act(&mut self, x: &StateId, rng: &mut ChaCha8Rng) -> Vec<f64>;
    /// Called after every transition with both actions and the new state.
    fn observe(&mut self, x: &StateId, a: usize, b: usize, next: &StateId, rng: &mut ChaCha8Rng);
}

/// Runs an automaton strategy, sampling its memory.
pub struct AutomatonAgent<'a, S: Automaton> {
    strategy: &'a S,
    mem: Option<S::Mem>,
}

impl<'a, S: Automaton> AutomatonAgent<'a, S> {
    pub fn new(strategy: &'a S) -> Self {
        AutomatonAgent {
            strategy,
            mem: None,
        }
    }
}

impl<S: Automaton> Agent for AutomatonAgent<'_, S> {
    fn begin(&mut self, x1: &StateId, rng: &mut ChaCha8Rng) {
        self.mem = Some(sample_pair(&self.strategy.start(x1), rng));
    }

    fn act(&mut self, x: &StateId, _: &mut ChaCha8Rng) -> Vec<f64> {
        self.strategy
            .action(self.mem.as_ref().expect("begin not called"), x)
    }

    fn observe(&mut self, _: &StateId, _: usize, _: usize, next: &StateId, rng: &mut ChaCha8Rng) {
        let mem = self.mem.as_ref().expect("begin not called");
        self.mem = Some(sample_pair(&self.strategy.advance(mem, next), rng));
    }
}

/// Uniform over the own action set at every state.
pub struct UniformAgent<'a, G: ?Sized> {
    game: &'a G,
    player: Player,
}

impl<'a, G: GameModel + ?Sized> UniformAgent<'a, G> {
    pub fn new(game: &'a G, player: Player) -> Self {
        UniformAgent { game, player }
    }
}

impl<G: GameModel + ?Sized> Agent for UniformAgent<'_, G> {
    fn begin(&mut self, _: &StateId, _: &mut ChaCha8Rng) {}

    fn act(&mut self, x: &StateId, _: &mut ChaCha8Rng) -> Vec<f64> {
        let (na, nb) = self.game.action_counts(x);
        let k = if self.player == Player::One { na } else { nb };
        vec![1.0 / k as f64; k]
    }

    fn observe(&mut self, _: &StateId, _: usize, _: usize, _: &StateId, _: &mut ChaCha8Rng) {}
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    /// `x_1, x_2, …`; stops at the first absorbing state.
    pub states: Vec<StateId>,
    /// Action pairs of the stages played before absorption.
    pub actions: Vec<(usize, usize)>,
    /// Stage of the first visit to an absorbing state.
    pub absorbed_at: Option<usize>,
    pub horizon: usize,
}

impl Trajectory {
    /// `x_t` for any stage `t ≥ 1`; absorbing states repeat forever.
    pub fn state(&self, t: usize) -> &StateId {
        &self.states[t.clamp(1, self.states.len()) - 1]
    }

    /// `(1/n) Σ_{t=1}^n g(x_t)`.
    pub fn average_payoff<G: GameModel + ?Sized>(&self, game: &G, n: usize) -> f64 {
        if n == 0 {
            return 0.0;
        }
        let mut total = 0.0;
        for t in 1..=n.min(self.states.len()) {
            total += game.payoff_f64(&self.states[t - 1]);
        }
        if n > self.states.len() {
            total += (n - self.states.len()) as f64 * game.payoff_f64(self.states.last().unwrap());
        }
        total / n as f64
    }
}

fn check_mixed(p: &[f64], expected: usize, x: &StateId, player: Player) -> Result<(), SimError> {
    let sum: f64 = p.iter().sum();
    if p.len() != expected
        || p.iter().any(|w| w.is_nan() || *w < -1e-12)
        || (sum - 1.0).abs() > 1e-9
    {
        return Err(SimError::IllegalAction {
            state: x.clone(),
            player,
            got: p.to_vec(),
            expected,
        });
    }
    Ok(())
}

/// Samples one play of `horizon` stages (states `x_1..x_{horizon+1}`), stopping early at absorption.
pub fn play<G: GameModel + ?Sized>(
    game: &G,
    x1: &StateId,
    p1: &mut dyn Agent,
    p2: &mut dyn Agent,
    horizon: usize,
    seed: u64,
    run: u64,
) -> Result<Trajectory, SimError> {
    if !game.contains(x1) {
        return Err(GameError::UnknownState(x1.clone()).into());
    }
    let mut nature = run_rng(seed, run, 0);
    let mut r1 = run_rng(seed, run, 1);
    let mut r2 = run_rng(seed, run, 2);
    let mut states = vec![x1.clone()];
    let mut actions = Vec::new();
    p1.begin(x1, &mut r1);
    p2.begin(x1, &mut r2);
    for _ in 0..horizon {
        let x = states.last().unwrap().clone();
        if !game.is_active(&x) {
            break;
        }
        let (na, nb) = game.action_counts(&x);
        let m1 = p1.act(&x, &mut r1);
        check_mixed(&m1, na, &x, Player::One)?;
        let m2 = p2.act(&x, &mut r2);
        check_mixed(&m2, nb, &x, Player::Two)?;
        let a = sample(&m1, &mut r1);
        let b = sample(&m2, &mut r2);
        let law: Vec<(StateId, f64)> = game
            .transition(&x, a, b)
            .into_iter()
            .filter(|(_, p)| p.is_positive())
            .map(|(y, p)| (y, rational_to_f64(&p)))
            .collect();
        let y = sample_pair(&law, &mut nature);
        p1.observe(&x, a, b, &y, &mut r1);
        p2.observe(&x, a, b, &y, &mut r2);
        actions.push((a, b));
        states.push(y);
    }
    let absorbed_at = states
        .iter()
        .position(|x| game.is_absorbing(x))
        .map(|i| i + 1);
    Ok(Trajectory {
        states,
        actions,
        absorbed_at,
        horizon,
    })
}

/// Sample mean with a normal-approximation confidence interval.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub std_err: f64,
    pub runs: usize,
}

impl Estimate {
    pub fn from_samples(xs: &[f64]) -> Estimate {
        let n = xs.len();
        if n == 0 {
            return Estimate {
                mean: f64::NAN,
                std_err: f64::NAN,
                runs: 0,
            };
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = if n > 1 {
            xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64
        } else {
            0.0
        };
        Estimate {
            mean,
            std_err: (var / n as f64).sqrt(),
            runs: n,
        }
    }

    pub fn half_width(&self, z: f64) -> f64 {
        z * self.std_err
    }

    /// One-sided: the estimate is consistent with `≥ bound` at `z` standard errors.
    pub fn at_least(&self, bound: f64, z: f64) -> bool {
        self.mean + self.half_width(z) >= bound
    }

    pub fn at_most(&self, bound: f64, z: f64) -> bool {
        self.mean - self.half_width(z) <= bound
    }
}

impl fmt::Display for Estimate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:.6} ± {:.6} ({} runs)",
            self.mean,
            self.half_width(Z99),
            self.runs
        )
    }
}

pub type AgentFactory<'a> = dyn Fn() -> Box<dyn Agent + 'a> + Sync + 'a;

/// Plays `runs` independent games in parallel; results come back in run order.
pub fn simulate_runs<'a, G: GameModel + ?Sized>(
    game: &G,
    x1: &StateId,
    p1: &AgentFactory<'a>,
    p2: &AgentFactory<'a>,
    horizon: usize,
    runs: usize,
    seed: u64,
) -> Result<Vec<Trajectory>, SimError> {
    (0..runs as u64)
        .into_par_iter()
        .map(|run| play(game, x1, p1().as_mut(), p2().as_mut(), horizon, seed, run))
        .collect()
}

/// Monte Carlo estimate of the expected average payoff over `n` stages.
pub fn estimate_gamma<'a, G: GameModel + ?Sized>(
    game: &G,
    x1: &StateId,
    p1: &AgentFactory<'a>,
    p2: &AgentFactory<'a>,
    n: usize,
    runs: usize,
    seed: u64,
) -> Result<Estimate, SimError> {
    if runs == 0 {
        return Err(SimError::BadParameter("runs must be at least 1".into()));
    }
    let payoffs: Vec<f64> = (0..runs as u64)
        .into_par_iter()
        .map(|run| {
            play(game, x1, p1().as_mut(), p2().as_mut(), n, seed, run)
                .map(|t| t.average_payoff(game, n))
        })
        .collect::<Result<_, _>>()?;
    Ok(Estimate::from_samples(&payoffs))
}

/// A posterior over an automaton's memory, sorted and merged.
type Posterior<M> = Vec<(M, f64)>;

fn normalize_posterior<M: Ord + Clone>(mut atoms: Vec<(M, f64)>) -> (Posterior<M>, f64) {
    atoms.sort_by(|a, b| a.0.cmp(&b.0));
    let mut out: Vec<(M, f64)> = Vec::with_capacity(atoms.len());
    for (m, p) in atoms {
        if p <= 0.0 {
            continue;
        }
        match out.last_mut() {
            Some((last, q)) if *last == m => *q += p,
            _ => out.push((m, p)),
        }
    }
    let total: f64 = out.iter().map(|(_, p)| p).sum();
    if total > 0.0 {
        out.iter_mut().for_each(|(_, p)| *p /= total);
    }
    (out, total)
}

/// Posterior after the owner played `o` at `x` and the state moved to `y`,
/// with the probability of `o`.
fn update_posterior<S: Automaton>(
    strategy: &S,
    post: &Posterior<S::Mem>,
    mixed: &[Vec<f64>],
    o: usize,
    y: &StateId,
) -> Posterior<S::Mem> {
    let mut atoms = Vec::new();
    for ((m, p), mix) in post.iter().zip(mixed) {
        let w = p * mix.get(o).copied().unwrap_or(0.0);
        if w > 0.0 {
            for (m2, q) in strategy.advance(m, y) {
                atoms.push((m2, w * q));
            }
        }
    }
    normalize_posterior(atoms).0
}

fn posterior_key<M: Clone>(post: &Posterior<M>) -> Vec<(M, u64)> {
    post.iter()
        .map(|(m, p)| (m.clone(), (p * 1e12).round() as u64))
        .collect()
}

/// Cached float transition laws.
struct Laws<'a, G: ?Sized> {
    game: &'a G,
    cache: HashMap<(StateId, usize, usize), Vec<(StateId, f64)>>,
}

impl<'a, G: GameModel + ?Sized> Laws<'a, G> {
    fn new(game: &'a G) -> Self {
        Laws {
            game,
            cache: HashMap::new(),
        }
    }

    fn get(&mut self, x: &StateId, a: usize, b: usize) -> Vec<(StateId, f64)> {
        let game = self.game;
        self.cache
            .entry((x.clone(), a, b))
            .or_insert_with(|| {
                game.transition(x, a, b)
                    .into_iter()
                    .filter(|(_, p)| p.is_positive())
                    .map(|(y, p)| (y, rational_to_f64(&p)))
                    .collect()
            })
            .clone()
    }
}

type InfoKey<M> = (usize, StateId, Vec<(M, u64)>);

/// Exact best response to an automaton strategy over a finite horizon.
#[derive(Clone, Debug)]
pub struct BestResponse<M> {
    /// Expected average payoff over the horizon under the best response.
    pub value: f64,
    pub horizon: usize,
    pub responder: Player,
    /// Optimal responder action per information state (stage, state, posterior).
    pub policy: HashMap<InfoKey<M>, usize>,
}

impl<M> BestResponse<M> {
    pub fn info_states(&self) -> usize {
        self.policy.len()
    }
}

struct Responder<'a, G: ?Sized, S: Automaton> {
    game: &'a G,
    strategy: &'a S,
    horizon: usize,
    cap: usize,
    laws: Laws<'a, G>,
    memo: HashMap<InfoKey<S::Mem>, (f64, usize)>,
}

impl<G: GameModel + ?Sized, S: Automaton> Responder<'_, G, S> {
    /// Best total payoff from stage `t` on.
    fn value(&mut self, t: usize, x: &StateId, post: &Posterior<S::Mem>) -> Result<f64, SimError> {
        if t > self.horizon {
            return Ok(0.0);
        }
        let g = self.game.payoff_f64(x);
        if !self.game.is_active(x) {
            return Ok(g * (self.horizon - t + 1) as f64);
        }
        let key = (t, x.clone(), posterior_key(post));
        if let Some((v, _)) = self.memo.get(&key) {
            return Ok(*v);
        }
        let owner = self.strategy.owner();
        let (na, nb) = self.game.action_counts(x);
        let (ko, kr) = if owner == Player::One {
            (na, nb)
        } else {
            (nb, na)
        };
        let mixed: Vec<Vec<f64>> = post
            .iter()
            .map(|(m, _)| self.strategy.action(m, x))
            .collect();
        let p_owner: Vec<f64> = (0..ko)
            .map(|o| {
                post.iter()
                    .zip(&mixed)
                    .map(|((_, p), mix)| p * mix.get(o).copied().unwrap_or(0.0))
                    .sum()
            })
            .collect();
        let minimize = owner == Player::One;
        let mut best = (f64::NAN, 0usize);
        for c in 0..kr {
            let mut total = 0.0;
            for (o, &po) in p_owner.iter().enumerate() {
                if po <= 0.0 {
                    continue;
                }
                let (a, b) = if owner == Player::One { (o, c) } else { (c, o) };
                for (y, q) in self.laws.get(x, a, b) {
                    let next = update_posterior(self.strategy, post, &mixed, o, &y);
                    total += po * q * self.value(t + 1, &y, &next)?;
                }
            }
            let better = best.0.is_nan()
                || if minimize {
                    total < best.0
                } else {
                    total > best.0
                };
            if better {
                best = (total, c);
            }
        }
        let v = g + best.0;
        if self.memo.len() >= self.cap {
            return Err(SimError::InfoStateExplosion(self.cap));
        }
        self.memo.insert(key, (v, best.1));
        Ok(v)
    }
}

/// Exact best response by dynamic programming over (stage, state, posterior
/// over the strategy's memory). The responder sees both actions.
pub fn best_response<G: GameModel + ?Sized, S: Automaton>(
    game: &G,
    strategy: &S,
    x1: &StateId,
    horizon: usize,
    cap: usize,
) -> Result<BestResponse<S::Mem>, SimError> {
    if horizon == 0 {
        return Err(SimError::BadParameter("horizon must be at least 1".into()));
    }
    if !game.contains(x1) {
        return Err(GameError::UnknownState(x1.clone()).into());
    }
    let mut r = Responder {
        game,
        strategy,
        horizon,
        cap,
        laws: Laws::new(game),
        memo: HashMap::new(),
    };
    let start = normalize_posterior(strategy.start(x1)).0;
    let total = r.value(1, x1, &start)?;
    Ok(BestResponse {
        value: total / horizon as f64,
        horizon,
        responder: strategy.owner().other(),
        policy: r.memo.into_iter().map(|(k, (_, c))| (k, c)).collect(),
    })
}

/// Default number of stages for exact best responses.
pub const H_MAX: usize = 12;
pub const DEFAULT_INFO_CAP: usize = 2_000_000;

/// Opponent that tracks the posterior over the strategy's memory and picks the
/// pure action minimizing the expected target value `window` stages ahead,
/// assuming it keeps minimizing in between.
pub struct LookaheadAgent<'a, G: ?Sized, S: Automaton> {
    game: &'a G,
    strategy: &'a S,
    target: &'a ValueFunction,
    window: usize,
    post: Posterior<S::Mem>,
    laws: Laws<'a, G>,
}

impl<'a, G: GameModel + ?Sized, S: Automaton> LookaheadAgent<'a, G, S> {
    pub fn new(game: &'a G, strategy: &'a S, target: &'a ValueFunction, window: usize) -> Self {
        LookaheadAgent {
            game,
            strategy,
            target,
            window: window.max(1),
            post: Vec::new(),
            laws: Laws::new(game),
        }
    }

    fn terminal(&self, y: &StateId) -> f64 {
        self.target
            .get(y)
            .unwrap_or_else(|| self.game.payoff_f64(y))
    }

    /// Per responder action, the value of looking `depth` stages ahead.
    fn scores(&mut self, x: &StateId, post: &Posterior<S::Mem>, depth: usize) -> Vec<f64> {
        let owner = self.strategy.owner();
        let (na, nb) = self.game.action_counts(x);
        let (ko, kr) = if owner == Player::One {
            (na, nb)
        } else {
            (nb, na)
        };
        let mixed: Vec<Vec<f64>> = post
            .iter()
            .map(|(m, _)| self.strategy.action(m, x))
            .collect();
        let mut out = vec![0.0; kr];
        for o in 0..ko {
            let po: f64 = post
                .iter()
                .zip(&mixed)
                .map(|((_, p), mix)| p * mix.get(o).copied().unwrap_or(0.0))
                .sum();
            if po <= 0.0 {
                continue;
            }
            for (c, slot) in out.iter_mut().enumerate() {
                let (a, b) = if owner == Player::One { (o, c) } else { (c, o) };
                for (y, q) in self.laws.get(x, a, b) {
                    let v = if depth <= 1 || !self.game.is_active(&y) {
                        self.terminal(&y)
                    } else {
                        let next = update_posterior(self.strategy, post, &mixed, o, &y);
                        let s = self.scores(&y, &next, depth - 1);
                        if owner == Player::One {
                            s.into_iter().fold(f64::INFINITY, f64::min)
                        } else {
                            s.into_iter().fold(f64::NEG_INFINITY, f64::max)
                        }
                    };
                    *slot += po * q * v;
                }
            }
        }
        out
    }
}

impl<G: GameModel + ?Sized, S: Automaton> Agent for LookaheadAgent<'_, G, S> {
    fn begin(&mut self, x1: &StateId, _: &mut ChaCha8Rng) {
        self.post = normalize_posterior(self.strategy.start(x1)).0;
    }

    fn act(&mut self, x: &StateId, _: &mut ChaCha8Rng) -> Vec<f64> {
        let post = self.post.clone();
        let s = self.scores(x, &post, self.window);
        let minimize = self.strategy.owner() == Player::One;
        let mut best = 0;
        for c in 1..s.len() {
            if (minimize && s[c] < s[best]) || (!minimize && s[c] > s[best]) {
                best = c;
            }
        }
        let mut p = vec![0.0; s.len()];
        p[best] = 1.0;
        p
    }

    fn observe(&mut self, x: &StateId, a: usize, b: usize, next: &StateId, _: &mut ChaCha8Rng) {
        let o = if self.strategy.owner() == Player::One {
            a
        } else {
            b
        };
        let mixed: Vec<Vec<f64>> = self
            .post
            .iter()
            .map(|(m, _)| self.strategy.action(m, x))
            .collect();
        let updated = update_posterior(self.strategy, &self.post, &mixed, o, next);
        if !updated.is_empty() {
            self.post = updated;
        }
    }
}

/// Heuristic opponents used where exact best responses are out of reach.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Adversary {
    /// Minimizes the expected target value of the next state.
    Myopic,
    Uniform,
    /// Plays its optimal stationary strategy of the discounted game.
    Discounted(f64),
    /// Exact minimization of the target value a few stages ahead.
    Window(usize),
}

impl fmt::Display for Adversary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Adversary::Myopic => write!(f, "myopic"),
            Adversary::Uniform => write!(f, "uniform"),
            Adversary::Discounted(l) => write!(f, "discounted({l})"),
            Adversary::Window(w) => write!(f, "window({w})"),
        }
    }
}

pub fn default_menu() -> Vec<Adversary> {
    vec![
        Adversary::Myopic,
        Adversary::Uniform,
        Adversary::Discounted(0.1),
        Adversary::Discounted(0.01),
        Adversary::Window(2),
    ]
}

/// Column player's optimal stationary profile of a discounted game.
pub fn discounted_profile(d: &DiscountedValues, player: Player) -> StationaryProfile {
    StationaryProfile {
        owner: Some(player),
        table: d
            .profiles
            .iter()
            .map(|(x, p)| {
                (
                    x.clone(),
                    if player == Player::One {
                        p.row.clone()
                    } else {
                        p.col.clone()
                    },
                )
            })
            .collect(),
        slack: BTreeMap::new(),
    }
}

/// Builds the menu opponents against a fixed strategy of player 1.
pub struct AdversaryKit<'a, G: ?Sized, S> {
    pub game: &'a G,
    pub strategy: &'a S,
    pub target: &'a ValueFunction,
    discounted: Vec<(f64, StationaryProfile)>,
}

impl<'a, G: GameModel + ?Sized, S: Automaton> AdversaryKit<'a, G, S> {
    pub fn new(
        game: &'a G,
        strategy: &'a S,
        target: &'a ValueFunction,
        roots: &[StateId],
        menu: &[Adversary],
    ) -> Result<Self, SimError> {
        let mut discounted = Vec::new();
        for adv in menu {
            if let Adversary::Discounted(l) = adv {
                let opts = LambdaOptions {
                    recording: Recording::All,
                    ..Default::default()
                };
                let d = compute_v_lambda(game, roots, *l, 1e-10, &opts)?;
                discounted.push((*l, discounted_profile(&d, Player::Two)));
            }
        }
        Ok(AdversaryKit {
            game,
            strategy,
            target,
            discounted,
        })
    }

    pub fn agent(&self, adv: Adversary) -> Box<dyn Agent + 'a> {
        match adv {
            Adversary::Myopic => Box::new(LookaheadAgent::new(
                self.game,
                self.strategy,
                self.target,
                1,
            )),
            Adversary::Window(w) => Box::new(LookaheadAgent::new(
                self.game,
                self.strategy,
                self.target,
                w,
            )),
            Adversary::Uniform => Box::new(UniformAgent::new(self.game, Player::Two)),
            Adversary::Discounted(l) => {
                let prof = &self
                    .discounted
                    .iter()
                    .find(|(m, _)| *m == l)
                    .expect("λ not prepared")
                    .1;
                // Discounted profiles are small; each agent owns a copy.
                Box::new(OwnedAutomatonAgent {
                    strategy: prof.clone(),
                })
            }
        }
    }
}

struct OwnedAutomatonAgent {
    strategy: StationaryProfile,
}

impl Agent for OwnedAutomatonAgent {
    fn begin(&mut self, _: &StateId, _: &mut ChaCha8Rng) {}

    fn act(&mut self, x: &StateId, _: &mut ChaCha8Rng) -> Vec<f64> {
        self.strategy.action(&(), x)
    }

    fn observe(&mut self, _: &StateId, _: usize, _: usize, _: &StateId, _: &mut ChaCha8Rng) {}
}

/// Phases of the alternating strategy replayed from a state sequence.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseRecord {
    /// Switching stages `u_1 < u_2 < …` up to stage `n`.
    pub switches: Vec<usize>,
    pub absorbed_at: Option<usize>,
    /// Number of odd phases started by stage `n`.
    pub upcrossings: usize,
    /// Number of stages `k ≤ n` in an odd phase before absorption.
    pub odd_stages: usize,
    /// `v(x_{min(ρ,u_{l+1})}) − v(x_{min(ρ,u_l)})` for each `u_l` seen.
    pub deficits: Vec<f64>,
    /// Deficits whose next switch fell after stage `n` without absorption.
    pub censored: usize,
}

/// Replays the threshold rule: odd phase from the first `v > 2ε`, even from
/// the next `v < ε`. Values between the thresholds keep the phase.
pub fn phase_record(traj: &Trajectory, v: &ValueFunction, eps: f64, n: usize) -> PhaseRecord {
    let rho = traj.absorbed_at;
    let value = |t: usize| v.get(traj.state(t)).unwrap_or(f64::NAN);
    let last = traj.states.len().min(n);
    let mut switches = Vec::new();
    let mut odd = false;
    for t in 1..=last {
        let x = value(t);
        if (!odd && x > 2.0 * eps) || (odd && x < eps) {
            switches.push(t);
            odd = !odd;
        }
    }
    // Past absorption the state, hence the phase, is frozen.
    let mut odd_stages = 0;
    for (p, &start) in switches.iter().enumerate().step_by(2) {
        let end = switches.get(p + 1).copied().unwrap_or(n + 1);
        let stop = end.min(rho.unwrap_or(usize::MAX)).min(n + 1);
        if start < rho.unwrap_or(usize::MAX) && stop > start {
            odd_stages += stop - start;
        }
    }
    let upcrossings = switches.iter().step_by(2).count();
    let at = |t: usize| value(rho.map_or(t, |r| t.min(r)));
    let mut deficits = Vec::new();
    let mut censored = 0;
    for (l, &u) in switches.iter().enumerate() {
        if rho.is_some_and(|r| u >= r) {
            break;
        }
        let next = match switches.get(l + 1) {
            Some(&w) => w,
            None => match rho {
                Some(r) => r,
                None => {
                    censored += 1;
                    last
                }
            },
        };
        deficits.push(at(next) - at(u));
    }
    PhaseRecord {
        switches,
        absorbed_at: rho,
        upcrossings,
        odd_stages,
        deficits,
        censored,
    }
}

/// Summary of many plays.
#[derive(Clone, Debug)]
pub struct PlayStats {
    pub runs: usize,
    pub horizon: usize,
    pub gamma: Estimate,
    /// Absorption stage → number of runs; runs never absorbed are not listed.
    pub absorption: BTreeMap<usize, usize>,
    pub trajectories: Option<Vec<Trajectory>>,
    pub phases: Option<PhaseStats>,
}

impl PlayStats {
    pub fn from_trajectories<G: GameModel + ?Sized>(
        game: &G,
        trajs: Vec<Trajectory>,
        n: usize,
        keep: bool,
        phases: Option<(&ValueFunction, f64)>,
    ) -> PlayStats {
        let payoffs: Vec<f64> = trajs.iter().map(|t| t.average_payoff(game, n)).collect();
        let mut absorption = BTreeMap::new();
        for t in &trajs {
            if let Some(r) = t.absorbed_at {
                *absorption.entry(r).or_insert(0) += 1;
            }
        }
        let phases = phases.map(|(v, eps)| {
            let recs: Vec<PhaseRecord> = trajs.iter().map(|t| phase_record(t, v, eps, n)).collect();
            PhaseStats::from_records(&recs, n)
        });
        PlayStats {
            runs: trajs.len(),
            horizon: n,
            gamma: Estimate::from_samples(&payoffs),
            absorption,
            trajectories: keep.then_some(trajs),
            phases,
        }
    }

    /// Fraction of runs absorbed by stage `t`.
    pub fn absorbed_by(&self, t: usize) -> f64 {
        let k: usize = self.absorption.range(..=t).map(|(_, c)| c).sum();
        k as f64 / self.runs.max(1) as f64
    }
}

/// Aggregated phase statistics.
#[derive(Clone, Debug)]
pub struct PhaseStats {
    pub upcrossings: Estimate,
    pub odd_frequency: Estimate,
    /// Per switching index `l` (from 1), the deficit estimate.
    pub deficits: Vec<Estimate>,
    pub pooled_deficit: Estimate,
    pub censored: usize,
}

impl PhaseStats {
    pub fn from_records(recs: &[PhaseRecord], n: usize) -> PhaseStats {
        let up: Vec<f64> = recs.iter().map(|r| r.upcrossings as f64).collect();
        let freq: Vec<f64> = recs
            .iter()
            .map(|r| r.odd_stages as f64 / n as f64)
            .collect();
        let depth = recs.iter().map(|r| r.deficits.len()).max().unwrap_or(0);
        let deficits = (0..depth)
            .map(|l| {
                Estimate::from_samples(
                    &recs
                        .iter()
                        .filter_map(|r| r.deficits.get(l).copied())
                        .collect::<Vec<_>>(),
                )
            })
            .collect();
        let pooled: Vec<f64> = recs
            .iter()
            .flat_map(|r| r.deficits.iter().copied())
            .collect();
        PhaseStats {
            upcrossings: Estimate::from_samples(&up),
            odd_frequency: Estimate::from_samples(&freq),
            deficits,
            pooled_deficit: Estimate::from_samples(&pooled),
            censored: recs.iter().map(|r| r.censored).sum(),
        }
    }
}

/// One line of a check table.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckRow {
    pub name: String,
    pub bound: f64,
    pub estimate: f64,
    pub half_width: f64,
    pub pass: bool,
}

impl fmt::Display for CheckRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}\t{:.6}\t{:.6}\t{:.6}\t{}",
            self.name,
            self.bound,
            self.estimate,
            self.half_width,
            if self.pass { "pass" } else { "FAIL" }
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtin::{quitting_simple, LehrerSorin};
    use crate::game::RecursiveGame;
    use crate::state::rat;
    use crate::strategy::{markov_optimal, MarkovProfile};
    use crate::values::{compute_vn, VnOptions};

    fn s(x: &str) -> StateId {
        StateId::name(x)
    }

    fn two_step() -> RecursiveGame {
        let mut g = RecursiveGame::new("two_step");
        g.add_absorbing(s("win"), rat(1, 1));
        g.add_active(s("a"), &["go"], &["-"]);
        g.set_transition(&s("a"), 0, 0, vec![(s("win"), rat(1, 1))]);
        g
    }

    fn stationary(pairs: &[(&str, Vec<f64>)], owner: Player) -> StationaryProfile {
        StationaryProfile {
            owner: Some(owner),
            table: pairs.iter().map(|(x, p)| (s(x), p.clone())).collect(),
            ..Default::default()
        }
    }

    #[test]
    fn deterministic_game_ignores_seed() {
        let g = two_step();
        let p = stationary(&[("a", vec![1.0])], Player::One);
        let q = stationary(&[("a", vec![1.0])], Player::Two);
        let t1 = play(
            &g,
            &s("a"),
            &mut AutomatonAgent::new(&p),
            &mut AutomatonAgent::new(&q),
            5,
            1,
            0,
        )
        .unwrap();
        let t2 = play(
            &g,
            &s("a"),
            &mut AutomatonAgent::new(&p),
            &mut AutomatonAgent::new(&q),
            5,
            99,
            7,
        )
        .unwrap();
        assert_eq!(t1, t2);
        assert_eq!(t1.absorbed_at, Some(2));
        assert_eq!(t1.average_payoff(&g, 4), 0.75);
        let t0 = play(
            &g,
            &s("a"),
            &mut AutomatonAgent::new(&p),
            &mut AutomatonAgent::new(&q),
            0,
            1,
            0,
        )
        .unwrap();
        assert_eq!(t0.states, vec![s("a")]);
    }

    #[test]
    fn illegal_actions_are_rejected() {
        let g = two_step();
        let p = stationary(&[("a", vec![0.5, 0.5])], Player::One);
        let q = stationary(&[("a", vec![1.0])], Player::Two);
        let err = play(
            &g,
            &s("a"),
            &mut AutomatonAgent::new(&p),
            &mut AutomatonAgent::new(&q),
            3,
            1,
            0,
        )
        .unwrap_err();
        assert!(matches!(
            err,
            SimError::IllegalAction {
                player: Player::One,
                ..
            }
        ));
    }

    #[test]
    fn estimate_on_deterministic_games() {
        let g = two_step();
        let p = stationary(&[("a", vec![1.0])], Player::One);
        let q = stationary(&[("a", vec![1.0])], Player::Two);
        let f1 = || -> Box<dyn Agent + '_> { Box::new(AutomatonAgent::new(&p)) };
        let f2 = || -> Box<dyn Agent + '_> { Box::new(AutomatonAgent::new(&q)) };
        let e = estimate_gamma(&g, &s("a"), &f1, &f2, 4, 20, 3).unwrap();
        assert_eq!(e.mean, 0.75);
        assert_eq!(e.std_err, 0.0);

        let mut lp = RecursiveGame::new("loop");
        lp.add_active(s("a"), &["x"], &["y"]);
        lp.set_transition(&s("a"), 0, 0, vec![(s("a"), rat(1, 1))]);
        let e = estimate_gamma(&lp, &s("a"), &f1, &f2, 10, 5, 3).unwrap();
        assert_eq!(e.mean, 0.0);
    }

    #[test]
    fn jump_at_stage_m() {
        let g = LehrerSorin::new(100);
        let m = 6;
        // Right on stages 1..m−1, jump at stage m.
        let mut table = HashMap::new();
        for x in 0..m {
            let mut row = vec![Vec::new(); m];
            // remaining = m − x at stage x + 1
            row[m - x - 1] = if x + 1 == m {
                vec![0.0, 1.0]
            } else {
                vec![1.0, 0.0]
            };
            table.insert(StateId::pair(x as i64, 0), row);
        }
        for x in 0..m as i64 {
            for y in 1..=m as i64 {
                table.insert(StateId::pair(x, y), vec![vec![1.0]; m]);
            }
        }
        let p = MarkovProfile {
            horizon: m,
            owner: Some(Player::One),
            table,
        };
        let mut seen = std::collections::BTreeSet::new();
        for run in 0..40 {
            let t = play(
                &g,
                &StateId::pair(0, 0),
                &mut AutomatonAgent::new(&p),
                &mut UniformAgent::new(&g, Player::Two),
                3 * m,
                5,
                run,
            )
            .unwrap();
            let end = t.states.last().unwrap().clone();
            seen.insert(end.clone());
            let lo = m as i64 - 1;
            assert!(
                end == StateId::pair(lo, -1) || end == StateId::pair(lo, m as i64),
                "{end}"
            );
        }
        assert_eq!(seen.len(), 2);
    }

    #[test]
    fn seeds_give_reproducible_streams() {
        let mut a = run_rng(7, 3, 1);
        let mut b = run_rng(7, 3, 1);
        let mut c = run_rng(7, 3, 2);
        let xa: u64 = a.gen();
        assert_eq!(xa, b.gen::<u64>());
        assert_ne!(xa, c.gen::<u64>());
    }

    #[test]
    fn best_response_to_markov_optimal_gives_vn() {
        let g = quitting_simple();
        for n in [1, 2, 5, 8] {
            let seq = compute_vn(&g, &[s("s")], n, &VnOptions::default()).unwrap();
            let p = markov_optimal(&seq, n, Player::One).unwrap();
            let br = best_response(&g, &p, &s("s"), n, DEFAULT_INFO_CAP).unwrap();
            assert!(
                (br.value - seq.value(n, &s("s")).unwrap()).abs() < 1e-9,
                "n = {n}"
            );
            let q = markov_optimal(&seq, n, Player::Two).unwrap();
            let br2 = best_response(&g, &q, &s("s"), n, DEFAULT_INFO_CAP).unwrap();
            assert!(
                (br2.value - seq.value(n, &s("s")).unwrap()).abs() < 1e-9,
                "n = {n}"
            );
            assert_eq!(br2.responder, Player::One);
        }
    }

    #[test]
    fn best_response_cap() {
        let g = quitting_simple();
        let seq = compute_vn(&g, &[s("s")], 8, &VnOptions::default()).unwrap();
        let p = markov_optimal(&seq, 8, Player::One).unwrap();
        assert!(matches!(
            best_response(&g, &p, &s("s"), 8, 3),
            Err(SimError::InfoStateExplosion(3))
        ));
    }

    fn record_for(states: &[&str], absorbed: Option<usize>) -> Trajectory {
        Trajectory {
            states: states.iter().map(|x| s(x)).collect(),
            actions: Vec::new(),
            absorbed_at: absorbed,
            horizon: 10,
        }
    }

    #[test]
    fn phase_replay() {
        let v: ValueFunction = [
            (s("lo"), 0.05),
            (s("mid"), 0.15),
            (s("hi"), 0.3),
            (s("win"), 1.0),
            (s("lose"), -1.0),
        ]
        .into_iter()
        .collect();
        // lo lo hi mid lo mid hi lose
        let t = record_for(
            &["lo", "lo", "hi", "mid", "lo", "mid", "hi", "lose"],
            Some(8),
        );
        let r = phase_record(&t, &v, 0.1, 10);
        assert_eq!(r.switches, vec![3, 5, 7, 8]);
        assert_eq!(r.upcrossings, 2);
        // odd on stages 3, 4 and 7
        assert_eq!(r.odd_stages, 3);
        assert_eq!(r.deficits.len(), 3);
        assert!((r.deficits[0] - (0.05 - 0.3)).abs() < 1e-12);
        assert!((r.deficits[2] - (-1.0 - 0.3)).abs() < 1e-12);

        let all_low = record_for(&["lo", "lo", "lo"], None);
        let r = phase_record(&all_low, &v, 0.1, 3);
        assert_eq!((r.upcrossings, r.odd_stages), (0, 0));
        assert!(r.deficits.is_empty());

        let win = record_for(&["hi", "win"], Some(2));
        let r = phase_record(&win, &v, 0.1, 10);
        assert_eq!(r.switches, vec![1]);
        assert_eq!(r.odd_stages, 1);
        assert_eq!(r.deficits, vec![0.7]);
    }

    #[test]
    fn estimate_bounds() {
        let e = Estimate::from_samples(&[1.0, 0.0, 1.0, 0.0]);
        assert_eq!(e.mean, 0.5);
        assert!(e.at_least(0.6, 3.0));
        assert!(!e.at_least(2.0, 3.0));
        assert!(e.at_most(0.4, 3.0));
    }
}
