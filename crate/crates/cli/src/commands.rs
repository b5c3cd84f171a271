//! One function per subcommand, each producing a report.

use recgame_core::builtin::LehrerSorin;
use recgame_core::game::GameModel;
use recgame_core::simulate::{default_menu, Adversary};
use recgame_core::strategy::{markov_optimal, Player};
use recgame_core::values::{
    compute_v_lambda, compute_vn, epsilon_net, DepthPolicy, LambdaOptions, Recording,
    ValueSequence, VnOptions,
};
use recgame_core::{Game, StateId};

use crate::acceptance;
use crate::checks;
use crate::config::{
    DiscountedArgs, NetArgs, ReportArgs, SignalsArgs, SimulateArgs, StrategyArgs, StrategyKind,
    SynthesizeArgs, ValuesArgs, VerifyArgs,
};
use crate::error::CliError;
use crate::pipeline::Alternating;
use crate::report::Report;
use crate::signal_checks;

fn all_states(game: &Game, start: &StateId) -> Vec<StateId> {
    match game {
        Game::Finite(g) => g.states().cloned().collect(),
        Game::LehrerSorin(_) => vec![start.clone()],
    }
}

fn stride(n: usize, every: Option<usize>) -> usize {
    every.unwrap_or((n / 20).max(1))
}

fn drift_summary(report: &mut Report, seq: &ValueSequence) {
    let worst = seq
        .drift
        .iter()
        .enumerate()
        .skip(1)
        .map(|(n, d)| (n, d * (n as f64 + 1.0) / 2.0))
        .fold((0, 0.0f64), |acc, x| if x.1 > acc.1 { x } else { acc });
    report.line(format!(
        "largest drift relative to 2/(n+1): {:.6} at n = {}",
        worst.1, worst.0
    ));
    report.line(format!(
        "final drift: {:.3e}",
        seq.drift.last().copied().unwrap_or(0.0)
    ));
    for v in seq.drift_violations.iter().take(10) {
        report.line(format!(
            "violation at n = {}: {:.6e} at {}",
            v.n, v.drift, v.state
        ));
    }
    report.at_most(
        "drift steps above 2/(n+1)",
        seq.drift_violations.len() as f64,
        0.0,
    );
}

pub fn values(a: &ValuesArgs) -> Result<Report, CliError> {
    let game = a.game.load()?;
    let start = a.game.start_of(&game);
    let watch = if a.watch.is_empty() {
        vec![start]
    } else {
        a.watch.clone()
    };
    let depth = match a.truncate {
        Some(d) => DepthPolicy::Truncated(d),
        None => DepthPolicy::Horizon,
    };
    let opts = VnOptions {
        depth: depth.clone(),
        recording: Recording::Watch(watch.clone()),
        record_profiles: false,
        state_cap: a.state_cap,
        ..Default::default()
    };
    let seq = compute_vn(&game, &watch, a.n, &opts)?;
    let mut r = Report::new(format!("values: {}", game.name()));
    r.fact("horizon", a.n);
    r.fact(
        "depth",
        match depth {
            DepthPolicy::Horizon => "horizon".to_string(),
            DepthPolicy::Truncated(d) => format!("truncated at {d}"),
        },
    );
    r.fact("explored states", seq.explored);
    r.fact("frontier states", seq.frontier);

    r.section("values");
    r.line("n\tstate\tlower\tupper");
    let step = stride(a.n, a.every);
    for n in (1..=a.n).filter(|&n| n == 1 || n % step == 0 || n == a.n) {
        for x in &watch {
            let (lo, hi) = bracket_or_nan(&seq, n, x);
            r.line(format!("{n}\t{x}\t{lo:.9}\t{hi:.9}"));
        }
    }
    r.section("drift");
    drift_summary(&mut r, &seq);

    let gap = watch
        .iter()
        .map(|x| bracket_or_nan(&seq, a.n, x))
        .map(|(lo, hi)| hi - lo)
        .fold(0.0, f64::max);
    r.at_most(format!("bracket gap at n = {}", a.n), gap, a.bracket_tol);
    if let Some(e) = a.expect {
        for x in &watch {
            let v = bracket_or_nan(&seq, a.n, x).0;
            r.at_most(format!("|v_{}({x}) - {e}|", a.n), (v - e).abs(), a.within);
        }
    }
    Ok(r)
}

fn bracket_or_nan(seq: &ValueSequence, n: usize, x: &StateId) -> (f64, f64) {
    seq.bracket(n, x).unwrap_or((f64::NAN, f64::NAN))
}

pub fn discounted(a: &DiscountedArgs) -> Result<Report, CliError> {
    let game = a.game.load()?;
    let start = a.game.start_of(&game);
    let watch = if a.watch.is_empty() {
        vec![start]
    } else {
        a.watch.clone()
    };
    let mut r = Report::new(format!("discounted values: {}", game.name()));
    r.fact("tolerance", format!("{:e}", a.tol));
    r.section("values");
    r.line("lambda\tstate\tlower\tupper\tsweeps\texplored");
    let opts = LambdaOptions {
        recording: Recording::Watch(watch.clone()),
        ..Default::default()
    };
    let mut rows = Vec::new();
    for &lambda in &a.lambdas {
        let d = compute_v_lambda(&game, &watch, lambda, a.tol, &opts)?;
        for x in &watch {
            let lo = d.lower.get(x).unwrap_or(f64::NAN);
            let hi = d.upper.get(x).unwrap_or(f64::NAN);
            r.line(format!(
                "{lambda}\t{x}\t{lo:.9}\t{hi:.9}\t{}\t{}",
                d.sweeps, d.explored
            ));
            rows.push((lambda, x.clone(), lo, hi));
        }
    }
    for (lambda, x, lo, hi) in rows {
        r.at_most(
            format!("bracket gap at {x}, lambda = {lambda}"),
            hi - lo,
            a.bracket_tol,
        );
        if let Some(e) = a.expect {
            r.at_most(
                format!("|v_lambda({x}) - {e}|, lambda = {lambda}"),
                (lo - e).abs(),
                a.within,
            );
        }
    }
    Ok(r)
}

/// The states `(x,1)`, `1 ≤ x ≤ max`.
pub fn witness_states(max: usize) -> Vec<StateId> {
    (1..=max as i64).map(|x| StateId::pair(x, 1)).collect()
}

/// ε-net sizes over the witness states `(x,1)` with `x ≤ X`, for each `X`.
pub fn witness_net_sizes(
    game: &LehrerSorin,
    eps: f64,
    n: usize,
    ranges: &[usize],
) -> Result<Vec<usize>, CliError> {
    let max = ranges.iter().copied().max().unwrap_or(1);
    let roots = witness_states(max);
    let opts = VnOptions {
        recording: Recording::Watch(roots.clone()),
        record_profiles: false,
        ..Default::default()
    };
    let seq = compute_vn(game, &roots, n, &opts)?;
    Ok(ranges
        .iter()
        .map(|&x| epsilon_net(&seq, eps, Some(&roots[..x])).size())
        .collect())
}

pub fn net(a: &NetArgs) -> Result<Report, CliError> {
    let game = a.game.load()?;
    let mut r = Report::new(format!("epsilon-nets: {}", game.name()));
    r.fact("eps", a.eps);
    r.fact("horizon", a.n);
    if !a.x_ranges.is_empty() {
        let Game::LehrerSorin(ls) = &game else {
            return Err(CliError::config("--x-range applies to lehrer_sorin only"));
        };
        let mut ranges = a.x_ranges.clone();
        ranges.sort_unstable();
        ranges.dedup();
        let sizes = witness_net_sizes(ls, a.eps, a.n, &ranges)?;
        r.section("net sizes over the states (x,1), x <= X");
        r.line("X\tsize");
        for (x, s) in ranges.iter().zip(&sizes) {
            r.line(format!("{x}\t{s}"));
        }
        let flat = sizes.windows(2).filter(|w| w[1] <= w[0]).count();
        if sizes.len() > 1 {
            r.at_most("net size not increasing with X", flat as f64, 0.0);
        }
        return Ok(r);
    }
    let start = a.game.start_of(&game);
    let roots = all_states(&game, &start);
    let opts = VnOptions {
        recording: Recording::Watch(roots.clone()),
        record_profiles: false,
        ..Default::default()
    };
    let seq = compute_vn(&game, &roots, a.n, &opts)?;
    let net = epsilon_net(&seq, a.eps, None);
    let names: Vec<String> = roots.iter().take(8).map(|x| x.to_string()).collect();
    let more = if roots.len() > 8 { " ..." } else { "" };
    r.fact("sup norm over", format!("{}{more}", names.join(" ")));
    r.section("net");
    r.line(format!("size\t{}", net.size()));
    let reps: Vec<String> = net
        .representatives
        .iter()
        .take(20)
        .map(|n| n.to_string())
        .collect();
    r.line(format!("representatives\t{}", reps.join(" ")));
    Ok(r)
}

fn build(a: &StrategyArgs) -> Result<(Alternating, StateId), CliError> {
    let game = a.game.load()?;
    let start = a.game.start_of(&game);
    let Game::Finite(g) = game else {
        return Err(CliError::config("this strategy needs a finite game"));
    };
    Ok((Alternating::build(&g, &start, a.eps, a.n)?, start))
}

fn describe_pipeline(r: &mut Report, alt: &Alternating) {
    r.fact("start", &alt.x1);
    r.fact("eps", alt.eps);
    r.fact("value horizon", alt.horizon);
    r.fact("v(start)", format!("{:.9}", alt.value_at_start()));
    r.fact("final drift", format!("{:.3e}", alt.drift));
    r.fact("block lengths", &alt.cert);
    r.fact("termination horizon n0*l*", alt.termination_horizon());
    r.fact("N_1", alt.n1());
    r.fact("guarantee horizon N_1/eps^3", alt.guarantee_horizon());
}

fn write_block(r: &mut Report, heading: &str, text: &str) {
    r.section(heading);
    for l in text.lines() {
        r.line(l);
    }
}

pub fn synthesize(a: &SynthesizeArgs) -> Result<Report, CliError> {
    let s = &a.strategy;
    if a.kind == StrategyKind::Markov {
        let game = s.game.load()?;
        let start = s.game.start_of(&game);
        let roots = all_states(&game, &start);
        let seq = compute_vn(&game, &roots, s.n, &VnOptions::default())?;
        let prof = markov_optimal(&seq, s.n, Player::One)?;
        let mut r = Report::new(format!("markov profile: {}", game.name()));
        r.fact("horizon", s.n);
        r.fact(
            format!("v_{}({start})", s.n),
            format!("{:.9}", seq.value(s.n, &start).unwrap_or(f64::NAN)),
        );
        write_block(&mut r, "strategy", &prof.describe());
        return Ok(r);
    }
    let (alt, _) = build(s)?;
    let mut r = Report::new(format!(
        "{} strategy: {}",
        kind_name(a.kind),
        alt.aux.name.trim_end_matches("_aux")
    ));
    describe_pipeline(&mut r, &alt);
    write_block(&mut r, "certificate", &alt.cert.to_string());
    match a.kind {
        StrategyKind::SStar => {
            write_block(&mut r, "strategy", &alt.s_star.describe());
            r.section("slack");
            checks::slack_checks(&mut r, &alt);
        }
        StrategyKind::Block => write_block(&mut r, "strategy", &alt.block.describe()),
        _ => {
            write_block(&mut r, "strategy", &alt.sigma.describe());
            r.section("slack");
            checks::slack_checks(&mut r, &alt);
        }
    }
    Ok(r)
}

fn kind_name(k: StrategyKind) -> &'static str {
    match k {
        StrategyKind::Markov => "markov",
        StrategyKind::SStar => "one-shot",
        StrategyKind::Block => "block",
        StrategyKind::SigmaBar => "alternating",
    }
}

fn menu_or_default(menu: &[Adversary]) -> Vec<Adversary> {
    if menu.is_empty() {
        default_menu()
    } else {
        menu.to_vec()
    }
}

pub fn simulate(a: &SimulateArgs, seed: u64) -> Result<Report, CliError> {
    let s = &a.strategy;
    let menu = menu_or_default(&a.adversaries);
    let game = s.game.load()?;
    let start = s.game.start_of(&game);
    let mut r = Report::new(format!(
        "simulation of the {} strategy: {}",
        kind_name(a.kind),
        game.name()
    ));
    r.fact("runs", a.runs);
    r.fact("seed", seed);
    let runs = match a.kind {
        StrategyKind::Markov => {
            let roots = all_states(&game, &start);
            let seq = compute_vn(&game, &roots, s.n, &VnOptions::default())?;
            let prof = markov_optimal(&seq, s.n, Player::One)?;
            let v = seq.value_function(s.n);
            let horizon = a.horizon.unwrap_or(s.n);
            r.fact("horizon", horizon);
            r.fact(
                format!("v_{}({start})", s.n),
                format!("{:.9}", v.get(&start).unwrap_or(f64::NAN)),
            );
            checks::play_menu(&game, &prof, &v, &start, &menu, a.runs, horizon, seed, None)?
        }
        kind => {
            let Game::Finite(g) = &game else {
                return Err(CliError::config("this strategy needs a finite game"));
            };
            let alt = Alternating::build(g, &start, s.eps, s.n)?;
            describe_pipeline(&mut r, &alt);
            match kind {
                StrategyKind::Block => {
                    let horizon = a.horizon.unwrap_or(alt.termination_horizon());
                    r.fact("horizon", horizon);
                    checks::play_menu(
                        &alt.aux, &alt.block, &alt.v, &start, &menu, a.runs, horizon, seed, None,
                    )?
                }
                StrategyKind::SStar => {
                    let horizon = a.horizon.unwrap_or(s.n);
                    r.fact("horizon", horizon);
                    checks::play_menu(
                        g,
                        &alt.s_star,
                        &alt.v,
                        &start,
                        &menu,
                        a.runs,
                        horizon,
                        seed,
                        None,
                    )?
                }
                _ => {
                    let horizon = a.horizon.unwrap_or(alt.guarantee_horizon());
                    r.fact("horizon", horizon);
                    let phases = Some((&alt.v, alt.eps));
                    checks::play_menu(
                        g, &alt.sigma, &alt.v, &start, &menu, a.runs, horizon, seed, phases,
                    )?
                }
            }
        }
    };
    r.section("runs");
    checks::describe_runs(&mut r, &runs);
    Ok(r)
}

/// Number of stages for the stopping-time check.
pub const STOPPING_STAGES: usize = 6;

pub fn verify(a: &VerifyArgs, seed: u64) -> Result<Report, CliError> {
    let (alt, start) = build(&a.strategy)?;
    let game = a.strategy.game.load_finite()?;
    let menu = menu_or_default(&a.adversaries);
    let mut r = Report::new(format!(
        "verification of the alternating strategy: {}",
        game.name
    ));
    describe_pipeline(&mut r, &alt);
    r.fact("runs per adversary", a.runs);
    r.fact("seed", seed);

    r.section("one-shot profile");
    checks::slack_checks(&mut r, &alt);

    r.section("exact best responses");
    checks::best_response_checks(&mut r, &game, &alt, a.br_horizon)?;

    let horizon = a.mc_horizon.unwrap_or(alt.guarantee_horizon());
    r.section(format!("adversary menu, {horizon} stages"));
    let phases = Some((&alt.v, alt.eps));
    let runs = checks::play_menu(
        &game, &alt.sigma, &alt.v, &start, &menu, a.runs, horizon, seed, phases,
    )?;
    checks::describe_runs(&mut r, &runs);
    checks::payoff_checks(&mut r, &alt, &runs);
    checks::submartingale_checks(&mut r, &alt, &runs);
    checks::upcrossing_checks(&mut r, &alt, &runs);

    let term = alt.termination_horizon();
    r.section(format!(
        "block strategy of the auxiliary game, {term} stages"
    ));
    let block_runs = checks::play_menu(
        &alt.aux, &alt.block, &alt.v, &start, &menu, a.runs, term, seed, None,
    )?;
    checks::termination_checks(&mut r, &block_runs, alt.eps, term);

    r.section("n-stage against discounted values");
    checks::tauberian_check(&mut r, &game, &start, alt.horizon, alt.eps)?;

    r.section("pure stopping time");
    checks::stopping_checks(&mut r, &game, &start, STOPPING_STAGES)?;
    Ok(r)
}

pub fn signals(a: &SignalsArgs, seed: u64) -> Result<Report, CliError> {
    let games = a.load()?;
    let names: Vec<&str> = games.iter().map(|g| g.name.as_str()).collect();
    let mut r = Report::new(format!("signal games: {}", names.join(", ")));
    r.fact("horizon", a.n);
    r.fact("samples", a.samples);
    r.fact("seed", seed);
    let mut rng = signal_checks::rng(seed);
    for sg in &games {
        r.section(format!("identities, {}", sg.name));
        signal_checks::image_round_trip(&mut r, sg.n_states(), a.samples, &mut rng)?;
        for t in 1..=2 {
            signal_checks::tau_independence(&mut r, sg, t)?;
        }
        signal_checks::linearity(&mut r, sg, a.samples, &mut rng)?;
        for t in 1..=2 {
            signal_checks::mimic(&mut r, sg, t)?;
        }
        r.section(format!("values, {}", sg.name));
        signal_checks::value_agreement(&mut r, sg, a.n, a.cap)?;
        signal_checks::image_invariance(&mut r, sg, a.n, a.pi_samples, &mut rng, a.cap)?;
        signal_checks::lipschitz(&mut r, sg, signal_checks::LIPSCHITZ_STATES, a.cap)?;
    }
    Ok(r)
}

pub fn report(a: &ReportArgs, seed: u64) -> Result<Report, CliError> {
    let ids: Vec<usize> = if a.only.is_empty() {
        (1..=13).collect()
    } else {
        a.only.iter().map(|&k| k as usize).collect()
    };
    let mut suite = acceptance::Suite::new(seed);
    let mut r = Report::new("acceptance summary");
    r.fact("seed", seed);
    r.section("criteria");
    let mut outcomes = Vec::new();
    for id in ids {
        let o = suite.run(id)?;
        r.line(o.summary_line());
        outcomes.push(o);
    }
    for o in outcomes {
        r.section(format!("criterion {}: {}", o.id, o.title));
        for (k, v) in &o.report.facts {
            r.line(format!("{k}: {v}"));
        }
        for l in o.report.sections.iter().flat_map(|s| &s.lines) {
            r.line(l.clone());
        }
        for mut c in o.report.checks {
            c.name = format!("[{}] {}", o.id, c.name);
            r.check(c);
        }
    }
    Ok(r)
}
