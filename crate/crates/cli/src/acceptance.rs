//! The acceptance criteria, each run into its own report.

use std::collections::BTreeMap;

use rand::Rng;
use recgame_core::builtin::{quitting_simple, LehrerSorin};
use recgame_core::matrix::{oracle_solve, solve, DEFAULT_TOL};
use recgame_core::simulate::default_menu;
use recgame_core::values::{
    compute_v_lambda, compute_vn, LambdaOptions, Recording, ValueSequence, VnOptions,
};
use recgame_core::{MatrixGame, StateId};
use recgame_signals::{signal_2x2, symmetric_2};

use crate::checks::{self, MenuRun};
use crate::commands::{witness_net_sizes, STOPPING_STAGES};
use crate::error::CliError;
use crate::pipeline::Alternating;
use crate::report::Report;
use crate::signal_checks;

pub const TITLES: [&str; 13] = [
    "n-stage values of the climbing game",
    "discounted values of the climbing game",
    "non-uniform convergence witness",
    "Shapley drift bound",
    "block strategy termination",
    "one-shot profile slack",
    "alternating strategy guarantee",
    "upcrossing and odd-phase bounds",
    "pure stopping time",
    "matrix solver against grid search",
    "signal identities",
    "signal value agreement",
    "Lipschitz values on beliefs",
];

/// Horizon of the climbing game's n-stage values.
pub const LS_HORIZON: usize = 2000;
/// Horizon behind the limit estimate of the quitting game.
pub const LIMIT_HORIZON: usize = 2000;
pub const RUNS: usize = 10_000;
/// Random games compared with the grid oracle.
pub const MATRIX_GAMES: usize = 1000;
pub const GRID: usize = 600;
/// Largest horizon of the signal value checks.
pub const SIGNAL_HORIZON: usize = 3;
pub const SIGNAL_CAP: usize = 1_000_000;

pub struct Outcome {
    pub id: usize,
    pub title: &'static str,
    pub report: Report,
    /// Named quantities for callers that need the numbers.
    pub measured: BTreeMap<String, f64>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        !self.report.checks.is_empty() && self.report.passed()
    }

    pub fn summary_line(&self) -> String {
        let status = if self.passed() { "PASS" } else { "FAIL" };
        let failed: Vec<&str> = self
            .report
            .checks
            .iter()
            .filter(|c| !c.pass)
            .map(|c| c.name.as_str())
            .collect();
        let mut line = format!(
            "criterion {:>2} {status}: {} ({} of {} checks)",
            self.id,
            self.title,
            self.report.checks.len() - failed.len(),
            self.report.checks.len()
        );
        if !failed.is_empty() {
            line.push_str(&format!("; failed: {}", failed.join("; ")));
        }
        line
    }
}

/// Runs criteria on demand and shares the expensive intermediate results.
pub struct Suite {
    pub seed: u64,
    climbing: Option<ValueSequence>,
    alternating: Option<(Alternating, Vec<MenuRun>)>,
}

fn s(x: &str) -> StateId {
    StateId::name(x)
}

impl Suite {
    pub fn new(seed: u64) -> Self {
        Suite {
            seed,
            climbing: None,
            alternating: None,
        }
    }

    pub fn run(&mut self, id: usize) -> Result<Outcome, CliError> {
        let title = *TITLES
            .get(id.wrapping_sub(1))
            .ok_or_else(|| CliError::config(format!("no criterion {id}")))?;
        let mut report = Report::new(format!("criterion {id}: {title}"));
        let mut measured = BTreeMap::new();
        match id {
            1 => self.climbing_values(&mut report, &mut measured)?,
            2 => self.climbing_discounted(&mut report, &mut measured)?,
            3 => witness(&mut report)?,
            4 => self.drift(&mut report)?,
            5 => self.termination(&mut report)?,
            6 => self.slack(&mut report)?,
            7 => self.guarantee(&mut report)?,
            8 => self.upcrossings(&mut report)?,
            9 => stopping(&mut report)?,
            10 => matrix_oracle(&mut report, self.seed),
            11 => signal_identities(&mut report, self.seed)?,
            12 => signal_values(&mut report, &mut measured, self.seed)?,
            _ => lipschitz(&mut report)?,
        }
        Ok(Outcome {
            id,
            title,
            report,
            measured,
        })
    }

    fn climbing(&mut self) -> Result<&ValueSequence, CliError> {
        if self.climbing.is_none() {
            let root = StateId::pair(0, 0);
            let opts = VnOptions {
                recording: Recording::Watch(vec![root.clone()]),
                record_profiles: false,
                ..Default::default()
            };
            self.climbing = Some(compute_vn(
                &LehrerSorin::default(),
                &[root],
                LS_HORIZON,
                &opts,
            )?);
        }
        Ok(self.climbing.as_ref().unwrap())
    }

    fn alternating(&mut self) -> Result<&(Alternating, Vec<MenuRun>), CliError> {
        if self.alternating.is_none() {
            let g = quitting_simple();
            let alt = Alternating::build(&g, &s("s"), 0.05, LIMIT_HORIZON)?;
            let phases = Some((&alt.v, alt.eps));
            let horizon = alt.guarantee_horizon();
            let runs = checks::play_menu(
                &g,
                &alt.sigma,
                &alt.v,
                &alt.x1,
                &default_menu(),
                RUNS,
                horizon,
                self.seed,
                phases,
            )?;
            self.alternating = Some((alt, runs));
        }
        Ok(self.alternating.as_ref().unwrap())
    }

    fn climbing_values(
        &mut self,
        r: &mut Report,
        m: &mut BTreeMap<String, f64>,
    ) -> Result<(), CliError> {
        let root = StateId::pair(0, 0);
        let seq = self.climbing()?;
        let (lo, hi) = seq
            .bracket(LS_HORIZON, &root)
            .unwrap_or((f64::NAN, f64::NAN));
        r.fact("game", "lehrer_sorin, x <= 3000");
        r.fact("explored states", seq.explored);
        r.line(format!("v_{LS_HORIZON}(0,0) in [{lo:.9}, {hi:.9}]"));
        r.at_most(
            format!("|v_{LS_HORIZON}(0,0) - 1/4|"),
            (lo - 0.25).abs(),
            0.02,
        );
        r.at_most("truncation bracket gap", hi - lo, 1e-6);
        m.insert("v_n".into(), lo);
        Ok(())
    }

    fn climbing_discounted(
        &mut self,
        r: &mut Report,
        m: &mut BTreeMap<String, f64>,
    ) -> Result<(), CliError> {
        let root = StateId::pair(0, 0);
        let game = LehrerSorin::default();
        let opts = LambdaOptions {
            recording: Recording::Watch(vec![root.clone()]),
            ..Default::default()
        };
        let vn = self
            .climbing()?
            .value(LS_HORIZON, &root)
            .unwrap_or(f64::NAN);
        for lambda in [0.1, 0.01] {
            let d = compute_v_lambda(&game, std::slice::from_ref(&root), lambda, 1e-10, &opts)?;
            let v = d.lower.get(&root).unwrap_or(f64::NAN);
            let target = (2.0 - lambda) / 16.0;
            let exact = best_jump_value(lambda);
            r.line(format!(
                "lambda = {lambda}: v_lambda(0,0) = {v:.9}, target (2-lambda)/16 = {target:.9}, best jump stage gives {exact:.9}, (1-lambda)/16 = {:.9}",
                (1.0 - lambda) / 16.0
            ));
            r.line(format!("  gap to v_{LS_HORIZON}(0,0): {:.6}", vn - v));
            r.at_most(
                format!("|v_lambda(0,0) - (2-lambda)/16|, lambda = {lambda}"),
                (v - target).abs(),
                0.01,
            );
            m.insert(format!("v_lambda {lambda}"), v);
            m.insert(format!("best jump {lambda}"), exact);
        }
        Ok(())
    }

    fn drift(&mut self, r: &mut Report) -> Result<(), CliError> {
        let g = quitting_simple();
        let roots: Vec<StateId> = g.states().cloned().collect();
        let opts = VnOptions {
            record_profiles: false,
            ..Default::default()
        };
        let q = compute_vn(&g, &roots, LIMIT_HORIZON, &opts)?;
        drift_rows(r, "quitting_simple", &q);
        let ls = self.climbing()?;
        drift_rows(r, "lehrer_sorin", ls);
        Ok(())
    }

    fn termination(&mut self, r: &mut Report) -> Result<(), CliError> {
        let g = quitting_simple();
        let alt = Alternating::build(&g, &s("s"), 0.1, LIMIT_HORIZON)?;
        let horizon = alt.termination_horizon();
        r.fact("eps", alt.eps);
        r.fact("block lengths", &alt.cert);
        r.fact("n0 * l*", horizon);
        let menu = default_menu();
        let runs = checks::play_menu(
            &alt.aux, &alt.block, &alt.v, &alt.x1, &menu, RUNS, horizon, self.seed, None,
        )?;
        checks::describe_runs(r, &runs);
        checks::termination_checks(r, &runs, alt.eps, horizon);
        Ok(())
    }

    fn slack(&mut self, r: &mut Report) -> Result<(), CliError> {
        let (alt, _) = self.alternating()?;
        let alt = alt.clone();
        r.line(alt.s_star.describe().trim_end().to_string());
        checks::slack_checks(r, &alt);
        Ok(())
    }

    fn guarantee(&mut self, r: &mut Report) -> Result<(), CliError> {
        let g = quitting_simple();
        let (alt, runs) = self.alternating()?;
        r.fact("eps", alt.eps);
        r.fact("v(s)", format!("{:.9}", alt.value_at_start()));
        r.fact("block lengths", &alt.cert);
        r.fact("N_1/eps^3", alt.guarantee_horizon());
        checks::best_response_checks(r, &g, alt, recgame_core::simulate::H_MAX)?;
        checks::describe_runs(r, runs);
        checks::payoff_checks(r, alt, runs);
        Ok(())
    }

    fn upcrossings(&mut self, r: &mut Report) -> Result<(), CliError> {
        let (alt, runs) = self.alternating()?;
        r.fact("eps", alt.eps);
        r.fact("horizon", alt.guarantee_horizon());
        for run in runs {
            if let Some(p) = &run.stats.phases {
                r.line(format!(
                    "{}: upcrossings {}, odd-phase frequency {}",
                    run.adversary, p.upcrossings, p.odd_frequency
                ));
            }
        }
        checks::upcrossing_checks(r, alt, runs);
        Ok(())
    }
}

/// Discounted payoff of the best pure plan in the climbing game from (0,0):
/// move right `m` times, then jump. Its supremum over real `m` is
/// `(1-lambda)/16`, reached only when `(1-lambda)^m = 1/4`.
pub fn best_jump_value(lambda: f64) -> f64 {
    let r = 1.0 - lambda;
    (0..100_000)
        .map(|m| r * (0.5 * r.powi(m) - r.powi(2 * m)))
        .fold(f64::NEG_INFINITY, f64::max)
}

fn drift_rows(r: &mut Report, name: &str, seq: &ValueSequence) {
    let ratio = seq
        .drift
        .iter()
        .enumerate()
        .skip(1)
        .map(|(n, d)| d * (n as f64 + 1.0) / 2.0)
        .fold(0.0, f64::max);
    r.line(format!(
        "{name}: {} steps, largest drift relative to 2/(n+1) {ratio:.6}",
        seq.drift.len()
    ));
    r.at_most(
        format!("drift steps above 2/(n+1), {name}"),
        seq.drift_violations.len() as f64,
        0.0,
    );
}

fn witness(r: &mut Report) -> Result<(), CliError> {
    let game = LehrerSorin::default();
    let n = 1000;
    let roots: Vec<StateId> = [10, 100].iter().map(|&x| StateId::pair(x, 1)).collect();
    let opts = VnOptions {
        recording: Recording::Watch(roots.clone()),
        record_profiles: false,
        ..Default::default()
    };
    let seq = compute_vn(&game, &roots, n, &opts)?;
    for (x, root) in [10usize, 100].iter().zip(&roots) {
        let at_x = seq.value(*x, root).unwrap_or(f64::NAN);
        r.at_most(format!("|v_{x}{root}|"), at_x.abs(), 0.0);
        let worst = (1..=n)
            .map(|k| {
                let expected = -2.0 * k.saturating_sub(*x) as f64 / k as f64;
                (seq.value(k, root).unwrap_or(f64::NAN) - expected).abs()
            })
            .fold(0.0, f64::max);
        r.line(format!(
            "{root}: v_{n} = {:.9}",
            seq.value(n, root).unwrap_or(f64::NAN)
        ));
        r.at_most(
            format!("max over n <= {n} of |v_n{root} + 2(n-{x})+/n|"),
            worst,
            1e-9,
        );
    }
    let ranges = [10, 25, 50, 100];
    let sizes = witness_net_sizes(&game, 0.5, n, &ranges)?;
    for (x, size) in ranges.iter().zip(&sizes) {
        r.line(format!("0.5-net over (x,1), x <= {x}: {size} elements"));
    }
    let flat = sizes.windows(2).filter(|w| w[1] <= w[0]).count();
    r.at_most("net size not increasing with the x-range", flat as f64, 0.0);
    Ok(())
}

fn stopping(r: &mut Report) -> Result<(), CliError> {
    checks::stopping_checks(r, &quitting_simple(), &s("s"), STOPPING_STAGES)?;
    checks::stopping_checks(
        r,
        &LehrerSorin::default(),
        &StateId::pair(0, 0),
        STOPPING_STAGES,
    )?;
    Ok(())
}

fn matrix_oracle(r: &mut Report, seed: u64) {
    let mut rng = signal_checks::rng(seed);
    let mut worst = 0.0f64;
    let mut above = 0;
    let mut failures = 0;
    for k in 0..MATRIX_GAMES {
        let size = 2 + k % 2;
        let data: Vec<f64> = (0..size * size)
            .map(|_| rng.gen_range(-1.0..=1.0))
            .collect();
        let g = MatrixGame::new(size, size, data).expect("square game");
        match (solve(&g, DEFAULT_TOL), oracle_solve(&g, GRID)) {
            (Ok(lp), Ok(grid)) => {
                worst = worst.max((lp.value - grid).abs());
                if grid > lp.value + DEFAULT_TOL {
                    above += 1;
                }
            }
            _ => failures += 1,
        }
    }
    r.line(format!(
        "{MATRIX_GAMES} games, half 2x2 and half 3x3, grid resolution {GRID}"
    ));
    r.at_most(
        "largest |LP value - grid value|",
        worst,
        1e-9 + 2.0 / GRID as f64,
    );
    r.at_most("grid value above LP value", above as f64, 0.0);
    r.at_most("solver errors", failures as f64, 0.0);
}

fn signal_identities(r: &mut Report, seed: u64) -> Result<(), CliError> {
    let mut rng = signal_checks::rng(seed);
    for sg in [signal_2x2(), symmetric_2()] {
        signal_checks::image_round_trip(r, sg.n_states(), 100, &mut rng)?;
        for t in 1..=2 {
            signal_checks::tau_independence(r, &sg, t)?;
        }
        signal_checks::linearity(r, &sg, 100, &mut rng)?;
    }
    Ok(())
}

fn signal_values(r: &mut Report, m: &mut BTreeMap<String, f64>, seed: u64) -> Result<(), CliError> {
    let mut rng = signal_checks::rng(seed);
    for sg in [signal_2x2(), symmetric_2()] {
        for (n, w, d) in signal_checks::value_agreement(r, &sg, SIGNAL_HORIZON, SIGNAL_CAP)? {
            m.insert(format!("{} belief {n}", sg.name), w);
            m.insert(format!("{} direct {n}", sg.name), d);
        }
        signal_checks::image_invariance(r, &sg, SIGNAL_HORIZON, 4, &mut rng, SIGNAL_CAP)?;
    }
    Ok(())
}

fn lipschitz(r: &mut Report) -> Result<(), CliError> {
    let mut pairs = 0;
    for sg in [signal_2x2(), symmetric_2()] {
        pairs += signal_checks::lipschitz(r, &sg, signal_checks::LIPSCHITZ_STATES, SIGNAL_CAP)?;
    }
    r.at_least("sampled pairs", pairs as f64, 100.0);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn best_jump_value_is_below_its_continuous_supremum() {
        for lambda in [0.5, 0.1, 0.01, 0.001] {
            let v = best_jump_value(lambda);
            let sup = (1.0 - lambda) / 16.0;
            assert!(
                v <= sup + 1e-15 && sup - v < lambda / 16.0,
                "{lambda}: {v} vs {sup}"
            );
        }
    }

    #[test]
    fn best_jump_value_hits_the_supremum_when_a_quarter_is_a_power() {
        // (1/2)^2 = 1/4, so jumping after two moves is exactly optimal.
        assert!((best_jump_value(0.5) - 0.5 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn unknown_criteria_are_rejected() {
        let mut suite = Suite::new(1);
        assert!(suite.run(0).is_err());
        assert!(suite.run(14).is_err());
    }

    #[test]
    fn summary_line_names_the_failed_checks() {
        let mut report = Report::new("t");
        report.at_most("small", 2.0, 1.0);
        report.at_most("fine", 0.0, 1.0);
        let o = Outcome {
            id: 2,
            title: TITLES[1],
            report,
            measured: BTreeMap::new(),
        };
        assert!(!o.passed());
        let line = o.summary_line();
        assert!(line.starts_with("criterion  2 FAIL"), "{line}");
        assert!(
            line.contains("failed: small") && !line.contains("failed: fine"),
            "{line}"
        );
    }

    #[test]
    fn an_outcome_without_checks_does_not_pass() {
        let o = Outcome {
            id: 1,
            title: TITLES[0],
            report: Report::new("t"),
            measured: BTreeMap::new(),
        };
        assert!(!o.passed());
    }
}
