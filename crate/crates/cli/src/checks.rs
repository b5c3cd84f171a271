//! Checks of the alternating strategy and its parts, written into reports.
//! Statistical checks are one-sided at three standard errors.

use recgame_core::game::GameModel;
use recgame_core::simulate::{
    best_response, simulate_runs, Adversary, AdversaryKit, Agent, AutomatonAgent, CheckRow,
    Estimate, PlayStats, SimError, DEFAULT_INFO_CAP,
};
use recgame_core::strategy::{
    markov_optimal, pure_stopping_time, stopping_guarantee, Automaton, Player,
};
use recgame_core::values::{compute_v_lambda, compute_vn, LambdaOptions, Recording, VnOptions};
use recgame_core::{StateId, ValueFunction};

use crate::error::CliError;
use crate::pipeline::Alternating;
use crate::report::Report;

pub const Z: f64 = 3.0;

/// Slack below which the one-shot profile is rejected.
pub const SLACK_TOL: f64 = 1e-5;

pub fn estimate_at_least(name: String, e: &Estimate, bound: f64) -> CheckRow {
    CheckRow {
        name,
        bound,
        estimate: e.mean,
        half_width: e.half_width(Z),
        pass: e.at_least(bound, Z),
    }
}

pub fn estimate_at_most(name: String, e: &Estimate, bound: f64) -> CheckRow {
    CheckRow {
        name,
        bound,
        estimate: e.mean,
        half_width: e.half_width(Z),
        pass: e.at_most(bound, Z),
    }
}

/// Runs of one strategy against one adversary.
pub struct MenuRun {
    pub adversary: Adversary,
    pub stats: PlayStats,
}

/// Plays `strategy` against each adversary of `menu` with common seeds.
#[allow(clippy::too_many_arguments)]
pub fn play_menu<G, S>(
    game: &G,
    strategy: &S,
    target: &ValueFunction,
    x1: &StateId,
    menu: &[Adversary],
    runs: usize,
    horizon: usize,
    seed: u64,
    phases: Option<(&ValueFunction, f64)>,
) -> Result<Vec<MenuRun>, CliError>
where
    G: GameModel + Sync,
    S: Automaton,
{
    let kit = AdversaryKit::new(game, strategy, target, std::slice::from_ref(x1), menu)?;
    let mut out = Vec::with_capacity(menu.len());
    for &adversary in menu {
        let p1 = || Box::new(AutomatonAgent::new(strategy)) as Box<dyn Agent + '_>;
        let p2 = || kit.agent(adversary);
        let trajs = simulate_runs(game, x1, &p1, &p2, horizon, runs, seed)?;
        let stats = PlayStats::from_trajectories(game, trajs, horizon, false, phases);
        out.push(MenuRun { adversary, stats });
    }
    Ok(out)
}

/// Describes the runs: payoff, absorption profile and phases.
pub fn describe_runs(report: &mut Report, runs: &[MenuRun]) {
    for r in runs {
        let s = &r.stats;
        report.line(format!("{}: γ = {}", r.adversary, s.gamma));
        let stages: Vec<String> = [1, 2, 5, 10, 50]
            .iter()
            .map(|&t| format!("{t}: {:.4}", s.absorbed_by(t)))
            .collect();
        report.line(format!("  absorbed by stage  {}", stages.join("  ")));
        if let Some(p) = &s.phases {
            report.line(format!("  upcrossings {}", p.upcrossings));
            report.line(format!("  odd-phase frequency {}", p.odd_frequency));
            if p.pooled_deficit.runs > 0 {
                report.line(format!(
                    "  pooled deficit {} (censored {})",
                    p.pooled_deficit, p.censored
                ));
            } else {
                report.line("  no switch events");
            }
        }
    }
}

/// Mean payoff against each adversary compared to `v(x1) − 25ε`.
pub fn payoff_checks(report: &mut Report, alt: &Alternating, runs: &[MenuRun]) {
    let target = alt.value_at_start() - 25.0 * alt.eps;
    for r in runs {
        report.check(estimate_at_least(
            format!("guarantee v(x1) - 25eps, {}", r.adversary),
            &r.stats.gamma,
            target,
        ));
    }
}

/// Pooled change of `v` between switching stages, against `−ε²`.
pub fn submartingale_checks(report: &mut Report, alt: &Alternating, runs: &[MenuRun]) {
    let eps = alt.eps;
    for r in runs {
        let Some(p) = &r.stats.phases else { continue };
        if p.pooled_deficit.runs == 0 {
            report.line(format!(
                "{}: no switch events, submartingale check is vacuous",
                r.adversary
            ));
        } else {
            let name = format!("submartingale deficit, {}", r.adversary);
            report.check(estimate_at_least(name, &p.pooled_deficit, -eps * eps));
        }
    }
}

/// Upcrossings of `[ε, 2ε]` against `1/(ε − ε²)` and the frequency of odd
/// phases against `5ε`.
pub fn upcrossing_checks(report: &mut Report, alt: &Alternating, runs: &[MenuRun]) {
    let eps = alt.eps;
    for r in runs {
        let Some(p) = &r.stats.phases else { continue };
        let adv = r.adversary;
        report.check(estimate_at_most(
            format!("upcrossings, {adv}"),
            &p.upcrossings,
            1.0 / (eps - eps * eps),
        ));
        report.check(estimate_at_most(
            format!("odd-phase frequency, {adv}"),
            &p.odd_frequency,
            5.0 * eps,
        ));
    }
}

/// Exact best responses at horizons `1..=h_max`, each compared to `v(x1) − 25ε`.
pub fn best_response_checks<G: GameModel + ?Sized>(
    report: &mut Report,
    game: &G,
    alt: &Alternating,
    h_max: usize,
) -> Result<(), CliError> {
    let bound = alt.value_at_start() - 25.0 * alt.eps;
    for h in 1..=h_max {
        match best_response(game, &alt.sigma, &alt.x1, h, DEFAULT_INFO_CAP) {
            Ok(br) => {
                report.line(format!(
                    "horizon {h}: value {:.9}, {} information states",
                    br.value,
                    br.info_states()
                ));
                report.check(CheckRow {
                    name: format!("guarantee v(x1) - 25eps, best response at horizon {h}"),
                    bound,
                    estimate: br.value,
                    half_width: 0.0,
                    pass: br.value >= bound - 1e-9,
                });
            }
            Err(SimError::InfoStateExplosion(cap)) => {
                report.line(format!(
                    "horizon {h}: more than {cap} information states; longer horizons rely on the adversary menu"
                ));
                break;
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok(())
}

/// `P(ρ ≤ horizon) ≥ 1 − ε` for block-strategy runs.
pub fn termination_checks(report: &mut Report, runs: &[MenuRun], eps: f64, horizon: usize) {
    for r in runs {
        let p = r.stats.absorbed_by(horizon);
        let n = r.stats.runs.max(1) as f64;
        let sigma = (p * (1.0 - p) / n).sqrt();
        report.check(CheckRow {
            name: format!("absorbed by stage {horizon}, {}", r.adversary),
            bound: 1.0 - eps,
            estimate: p,
            half_width: Z * sigma,
            pass: p + Z * sigma >= 1.0 - eps,
        });
    }
}

/// Worst one-shot slack over the explored states and every pure reply.
pub fn slack_checks(report: &mut Report, alt: &Alternating) {
    report.at_most("value drift at the limit estimate", alt.drift, 1e-6);
    match alt.s_star.min_slack() {
        Some((x, s)) => {
            report.line(format!("worst one-shot slack {s:.3e} at {x}"));
            report.at_least("one-shot slack", s, -SLACK_TOL);
        }
        None => report.line("no active state, one-shot slack is vacuous"),
    }
}

/// The n-stage value at `1/λ` stages against the λ-discounted value.
pub fn tauberian_check<G: GameModel + ?Sized>(
    report: &mut Report,
    game: &G,
    x1: &StateId,
    n: usize,
    tol: f64,
) -> Result<(), CliError> {
    let roots = std::slice::from_ref(x1);
    let opts = VnOptions {
        recording: Recording::Watch(roots.to_vec()),
        record_profiles: false,
        ..Default::default()
    };
    let vn = compute_vn(game, roots, n, &opts)?
        .value(n, x1)
        .unwrap_or(f64::NAN);
    let lambda = 1.0 / n as f64;
    let lopts = LambdaOptions {
        recording: Recording::Watch(roots.to_vec()),
        ..Default::default()
    };
    let vl = compute_v_lambda(game, roots, lambda, 1e-10, &lopts)?
        .lower
        .get(x1)
        .unwrap_or(f64::NAN);
    report.line(format!("v_{n}({x1}) = {vn:.9}, v_(1/{n})({x1}) = {vl:.9}"));
    report.at_most(
        format!("|v_n - v_lambda| at n = 1/lambda = {n}"),
        (vn - vl).abs(),
        tol,
    );
    Ok(())
}

/// The pure stopping time of an n-stage optimal profile keeps its average
/// guarantee, for `n = 1..=n_max`.
pub fn stopping_checks<G: GameModel + ?Sized>(
    report: &mut Report,
    game: &G,
    x1: &StateId,
    n_max: usize,
) -> Result<(), CliError> {
    let roots = std::slice::from_ref(x1);
    let seq = compute_vn(game, roots, n_max, &VnOptions::default())?;
    for n in 1..=n_max {
        let sigma = markov_optimal(&seq, n, Player::One)?;
        let theta = pure_stopping_time(game, &sigma, x1, n)?;
        let (stopped, average) = stopping_guarantee(game, &sigma, &theta, x1);
        report.line(format!(
            "{} n = {n}: E[g(x_theta)] = {stopped:.9}, average = {average:.9}",
            game.name()
        ));
        report.check(CheckRow {
            name: format!("stopping time keeps the average, {} n = {n}", game.name()),
            bound: average,
            estimate: stopped,
            half_width: 0.0,
            pass: stopped >= average - 1e-9,
        });
    }
    Ok(())
}
