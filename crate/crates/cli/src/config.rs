//! Command-line arguments. Parameter ranges are checked while parsing, so
//! a command never starts with an out-of-range value.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use recgame_core::builtin::{builtin, default_root};
use recgame_core::simulate::{Adversary, H_MAX};
use recgame_core::{Game, RecursiveGame, StateId};
use recgame_signals::SignalGame;

use crate::error::CliError;

#[derive(Parser, Debug, Clone)]
#[command(
    name = "recgame",
    version,
    about = "Values and uniform strategies of recursive stochastic games"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Seed for all sampling.
    #[arg(long, global = true, env = "RECGAME_SEED", default_value_t = 1)]
    pub seed: u64,
    /// Also write the report to this file.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Write the check table, tab-separated, to this file.
    #[arg(long, global = true, value_name = "PATH")]
    pub table: Option<PathBuf>,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// n-stage values by Shapley iteration, with truncation brackets.
    Values(ValuesArgs),
    /// Discounted values.
    Discounted(DiscountedArgs),
    /// Sizes of ε-nets of the sequence of n-stage values.
    Net(NetArgs),
    /// Build a strategy and print it with its certificate.
    Synthesize(SynthesizeArgs),
    /// Monte Carlo play of a strategy against adversaries.
    Simulate(SimulateArgs),
    /// Check the guarantees of the alternating strategy.
    Verify(VerifyArgs),
    /// Identities and value agreement for games with signals.
    Signals(SignalsArgs),
    /// Run the acceptance criteria.
    Report(ReportArgs),
}

#[derive(Args, Debug, Clone)]
pub struct GameArgs {
    /// Bundled game: lehrer_sorin or quitting_simple.
    #[arg(long, conflicts_with = "game", required_unless_present = "game")]
    pub builtin: Option<String>,
    /// Game file.
    #[arg(long, value_name = "PATH")]
    pub game: Option<PathBuf>,
    /// Builtin parameter as key=value, e.g. bound=500.
    #[arg(long = "param", value_name = "KEY=VALUE", value_parser = parse_param)]
    pub params: Vec<(String, String)>,
    /// Initial state; defaults to the game's root.
    #[arg(long, value_parser = parse_state)]
    pub start: Option<StateId>,
}

impl GameArgs {
    pub fn load(&self) -> Result<Game, CliError> {
        match (&self.builtin, &self.game) {
            (Some(name), _) => {
                let params: BTreeMap<String, String> = self.params.iter().cloned().collect();
                builtin(name, &params).map_err(CliError::Config)
            }
            (None, Some(path)) => {
                if !self.params.is_empty() {
                    return Err(CliError::config("--param applies to builtin games only"));
                }
                Ok(recgame_core::format::load(&read(path)?)?)
            }
            (None, None) => Err(CliError::config("give --builtin or --game")),
        }
    }

    pub fn load_finite(&self) -> Result<RecursiveGame, CliError> {
        match self.load()? {
            Game::Finite(g) => Ok(g),
            other => Err(CliError::config(format!(
                "{} has infinitely many states; this command needs a finite game",
                recgame_core::GameModel::name(&other)
            ))),
        }
    }

    pub fn start_of(&self, game: &Game) -> StateId {
        self.start.clone().unwrap_or_else(|| default_root(game))
    }
}

pub fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[derive(Args, Debug, Clone)]
pub struct ValuesArgs {
    #[command(flatten)]
    pub game: GameArgs,
    /// Horizon N.
    #[arg(long, default_value_t = 100, value_parser = parse_count)]
    pub n: usize,
    /// States to tabulate; defaults to the start state.
    #[arg(long, value_parser = parse_state)]
    pub watch: Vec<StateId>,
    /// Iterate on the states within this depth instead of the horizon-exact region.
    #[arg(long, value_name = "DEPTH")]
    pub truncate: Option<usize>,
    /// Print every k-th step; defaults to about 20 rows per state.
    #[arg(long, value_parser = parse_count)]
    pub every: Option<usize>,
    /// Expected v_N at the watched states.
    #[arg(long)]
    pub expect: Option<f64>,
    /// Tolerance for --expect.
    #[arg(long, default_value_t = 0.02, value_parser = parse_positive)]
    pub within: f64,
    /// Largest admissible gap between the truncation brackets at N.
    #[arg(long, default_value_t = 1e-6, value_parser = parse_nonnegative)]
    pub bracket_tol: f64,
    #[arg(long, default_value_t = 4_000_000)]
    pub state_cap: usize,
}

#[derive(Args, Debug, Clone)]
pub struct DiscountedArgs {
    #[command(flatten)]
    pub game: GameArgs,
    /// Discount factor λ in (0, 1]; repeatable.
    #[arg(long = "lambda", required = true, value_parser = parse_lambda)]
    pub lambdas: Vec<f64>,
    #[arg(long, value_parser = parse_state)]
    pub watch: Vec<StateId>,
    /// Fixed-point tolerance.
    #[arg(long, default_value_t = 1e-9, value_parser = parse_positive)]
    pub tol: f64,
    /// Expected v_λ at the watched states.
    #[arg(long)]
    pub expect: Option<f64>,
    #[arg(long, default_value_t = 0.01, value_parser = parse_positive)]
    pub within: f64,
    #[arg(long, default_value_t = 1e-6, value_parser = parse_nonnegative)]
    pub bracket_tol: f64,
}

#[derive(Args, Debug, Clone)]
pub struct NetArgs {
    #[command(flatten)]
    pub game: GameArgs,
    /// Net radius in the sup norm.
    #[arg(long, default_value_t = 0.5, value_parser = parse_positive)]
    pub eps: f64,
    /// Horizon N.
    #[arg(long, default_value_t = 1000, value_parser = parse_count)]
    pub n: usize,
    /// For lehrer_sorin: nets over the states (x,1) with 1 ≤ x ≤ X; repeatable.
    #[arg(long = "x-range", value_name = "X", value_parser = parse_count)]
    pub x_ranges: Vec<usize>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum StrategyKind {
    /// n-stage optimal Markov profile.
    Markov,
    /// One-shot profile against the limit values.
    SStar,
    /// Terminating block strategy of the auxiliary game.
    Block,
    /// Alternating strategy.
    SigmaBar,
}

#[derive(Args, Debug, Clone)]
pub struct StrategyArgs {
    #[command(flatten)]
    pub game: GameArgs,
    /// ε in (0, 1/2].
    #[arg(long, default_value_t = 0.1, value_parser = parse_eps)]
    pub eps: f64,
    /// Horizon of the value computation behind the limit estimate.
    #[arg(long, default_value_t = 2000, value_parser = parse_count)]
    pub n: usize,
}

#[derive(Args, Debug, Clone)]
pub struct SynthesizeArgs {
    #[command(flatten)]
    pub strategy: StrategyArgs,
    #[arg(long, value_enum, default_value = "sigma-bar")]
    pub kind: StrategyKind,
}

#[derive(Args, Debug, Clone)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub strategy: StrategyArgs,
    /// Markov, block or sigma-bar.
    #[arg(long, value_enum, default_value = "sigma-bar")]
    pub kind: StrategyKind,
    /// myopic, uniform, discounted:λ or window:w; repeatable. Defaults to the full menu.
    #[arg(long = "adversary", value_parser = parse_adversary)]
    pub adversaries: Vec<Adversary>,
    #[arg(long, default_value_t = 10_000, value_parser = parse_count)]
    pub runs: usize,
    /// Stages per run; defaults to the strategy's own horizon.
    #[arg(long, value_parser = parse_count)]
    pub horizon: Option<usize>,
}

#[derive(Args, Debug, Clone)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub strategy: StrategyArgs,
    #[arg(long = "adversary", value_parser = parse_adversary)]
    pub adversaries: Vec<Adversary>,
    #[arg(long, default_value_t = 10_000, value_parser = parse_count)]
    pub runs: usize,
    /// Longest horizon for exact best responses.
    #[arg(long, default_value_t = H_MAX, value_parser = parse_count)]
    pub br_horizon: usize,
    /// Monte Carlo horizon; defaults to N_1/ε³.
    #[arg(long, value_parser = parse_count)]
    pub mc_horizon: Option<usize>,
}

#[derive(Args, Debug, Clone)]
pub struct SignalsArgs {
    /// signal_2x2 or symmetric_2; both when neither this nor --game is given.
    #[arg(long, conflicts_with = "game")]
    pub builtin: Option<String>,
    /// Signal game file.
    #[arg(long, value_name = "PATH")]
    pub game: Option<PathBuf>,
    /// Largest horizon for value agreement.
    #[arg(long, default_value_t = 3, value_parser = parse_count)]
    pub n: usize,
    /// Random samples per identity.
    #[arg(long, default_value_t = 100, value_parser = parse_count)]
    pub samples: usize,
    /// Random initial distributions compared with their canonical versions.
    #[arg(long, default_value_t = 4)]
    pub pi_samples: usize,
    /// Bound on enumerated play paths.
    #[arg(long, default_value_t = 1_000_000)]
    pub cap: usize,
}

impl SignalsArgs {
    pub fn load(&self) -> Result<Vec<SignalGame>, CliError> {
        match (&self.builtin, &self.game) {
            (Some(name), _) => recgame_signals::builtin(name)
                .map(|g| vec![g])
                .ok_or_else(|| CliError::config(format!("unknown signal game `{name}`"))),
            (None, Some(path)) => Ok(vec![recgame_signals::format::load(&read(path)?)?]),
            (None, None) => Ok(vec![
                recgame_signals::signal_2x2(),
                recgame_signals::symmetric_2(),
            ]),
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct ReportArgs {
    /// Run only these criteria; repeatable.
    #[arg(long = "only", value_parser = clap::value_parser!(u8).range(1..=13))]
    pub only: Vec<u8>,
}

pub fn parse_count(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(n) => Ok(n),
        Err(e) => Err(e.to_string()),
    }
}

fn parse_f64(s: &str) -> Result<f64, String> {
    let x: f64 = s
        .parse()
        .map_err(|e: std::num::ParseFloatError| e.to_string())?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err("must be finite".into())
    }
}

pub fn parse_positive(s: &str) -> Result<f64, String> {
    let x = parse_f64(s)?;
    if x > 0.0 {
        Ok(x)
    } else {
        Err("must be positive".into())
    }
}

pub fn parse_nonnegative(s: &str) -> Result<f64, String> {
    let x = parse_f64(s)?;
    if x >= 0.0 {
        Ok(x)
    } else {
        Err("must not be negative".into())
    }
}

pub fn parse_lambda(s: &str) -> Result<f64, String> {
    let x = parse_f64(s)?;
    if x > 0.0 && x <= 1.0 {
        Ok(x)
    } else {
        Err(format!("λ must lie in (0, 1], got {x}"))
    }
}

pub fn parse_eps(s: &str) -> Result<f64, String> {
    let x = parse_f64(s)?;
    if x > 0.0 && x <= 0.5 {
        Ok(x)
    } else {
        Err(format!("ε must lie in (0, 1/2], got {x}"))
    }
}

pub fn parse_state(s: &str) -> Result<StateId, String> {
    s.parse()
        .map_err(|e: recgame_core::state::StateParseError| e.to_string())
}

pub fn parse_param(s: &str) -> Result<(String, String), String> {
    match s.split_once('=') {
        Some((k, v)) if !k.trim().is_empty() => Ok((k.trim().to_string(), v.trim().to_string())),
        _ => Err(format!("expected key=value, got `{s}`")),
    }
}

pub fn parse_adversary(s: &str) -> Result<Adversary, String> {
    let (name, arg) = match s.split_once(':') {
        Some((n, a)) => (n, Some(a)),
        None => (s, None),
    };
    match (name, arg) {
        ("myopic", None) => Ok(Adversary::Myopic),
        ("uniform", None) => Ok(Adversary::Uniform),
        ("discounted", Some(l)) => parse_lambda(l).map(Adversary::Discounted),
        ("window", Some(w)) => parse_count(w).map(Adversary::Window),
        _ => Err(format!(
            "unknown adversary `{s}`; expected myopic, uniform, discounted:λ or window:w"
        )),
    }
}
