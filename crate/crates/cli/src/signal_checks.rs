//! Checks on games with signals: exact identities of the belief dynamics
//! and agreement of the belief-game values with the direct solution.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use recgame_core::simulate::CheckRow;
use recgame_core::state::{rat, rational_to_f64};
use recgame_core::Rational;
use recgame_signals::belief::{beliefs_by_enumeration, play_law, P1History, P2Fn, P2History};
use recgame_signals::mimic::check_mimic;
use recgame_signals::{
    canonical_pi, direct_value, image, update_x, wasserstein, Belief, BeliefGame, BeliefState,
    ImageDist, InitialDist, SecondOrder, SignalGame,
};

use crate::error::CliError;
use crate::report::Report;

/// Tolerance of floating-point value comparisons.
pub const VALUE_TOL: f64 = 1e-6;

/// Reachable belief states per game in the Lipschitz check.
pub const LIPSCHITZ_STATES: usize = 24;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn weights(rng: &mut ChaCha8Rng, n: usize) -> Vec<i64> {
    let mut w: Vec<i64> = (0..n).map(|_| rng.gen_range(0..4)).collect();
    if w.iter().all(|&x| x == 0) {
        w[rng.gen_range(0..n)] = 1;
    }
    w
}

/// A belief over `n` states with small integer weights on `support`.
pub fn random_belief(rng: &mut ChaCha8Rng, n: usize, support: &[usize]) -> Belief {
    let w = weights(rng, support.len());
    let mut v = vec![rat(0, 1); n];
    for (&k, x) in support.iter().zip(w) {
        v[k] = rat(x, 1);
    }
    Belief::from_weights(v).expect("nonzero weights")
}

pub fn random_second_order(
    rng: &mut ChaCha8Rng,
    n: usize,
    support: &[usize],
    atoms: usize,
) -> SecondOrder {
    let k = rng.gen_range(1..=atoms);
    let atoms: Vec<(Belief, Rational)> = (0..k)
        .map(|_| (random_belief(rng, n, support), rat(rng.gen_range(1..4), 1)))
        .collect();
    SecondOrder::from_weights(atoms).expect("nonzero weights")
}

pub fn random_image(rng: &mut ChaCha8Rng, n: usize) -> ImageDist {
    let all: Vec<usize> = (0..n).collect();
    let k = rng.gen_range(1..=3);
    let atoms: Vec<(SecondOrder, Rational)> = (0..k)
        .map(|_| {
            (
                random_second_order(rng, n, &all, 3),
                rat(rng.gen_range(1..4), 1),
            )
        })
        .collect();
    ImageDist::from_weights(atoms).expect("nonzero weights")
}

pub fn random_mixed(rng: &mut ChaCha8Rng, n: usize) -> Vec<Rational> {
    let w = weights(rng, n);
    let total: i64 = w.iter().sum();
    w.iter().map(|&x| rat(x, total)).collect()
}

/// An initial distribution on the active states where each player 1 signal
/// determines player 2's.
pub fn random_initial(rng: &mut ChaCha8Rng, sg: &SignalGame) -> InitialDist {
    let states: Vec<usize> = sg.active_states().collect();
    let (nc, nd) = (rng.gen_range(1..=3), rng.gen_range(1..=2));
    let d_of_c: Vec<usize> = (0..nc).map(|_| rng.gen_range(0..nd)).collect();
    let w = weights(rng, states.len() * nc);
    let total: i64 = w.iter().sum();
    let mut pi = InitialDist {
        signals_1: (0..nc).map(|c| format!("c{c}")).collect(),
        signals_2: (0..nd).map(|d| format!("d{d}")).collect(),
        ..Default::default()
    };
    for (s, &k) in states.iter().enumerate() {
        for (c, &d) in d_of_c.iter().enumerate() {
            let x = w[s * nc + c];
            if x > 0 {
                pi.mass.insert((k, c, d), rat(x, total));
            }
        }
    }
    pi
}

fn count_row(name: String, failures: usize) -> CheckRow {
    CheckRow {
        name,
        bound: 0.0,
        estimate: failures as f64,
        half_width: 0.0,
        pass: failures == 0,
    }
}

/// The image of the canonical distribution of `η` is `η`, on random `η`.
pub fn image_round_trip(
    report: &mut Report,
    n_states: usize,
    samples: usize,
    rng: &mut ChaCha8Rng,
) -> Result<(), CliError> {
    let mut failures = 0;
    for _ in 0..samples {
        let eta = random_image(rng, n_states);
        if image(&canonical_pi(&eta).dist, n_states)? != eta {
            failures += 1;
        }
    }
    report.line(format!(
        "image of canonical distribution: {samples} random laws on {n_states} states"
    ));
    report.check(count_row(
        format!("image of canonical distribution, {samples} samples"),
        failures,
    ));
    Ok(())
}

/// A player 1 strategy that depends on his whole history and mixes everywhere.
fn sigma_probe(h: &P1History) -> Vec<Rational> {
    let s = rat(
        1 + (h.first as i64 + h.later.iter().sum::<usize>() as i64) % 3,
        5,
    );
    vec![rat(1, 1) - &s, s]
}

type P2Probe = Box<dyn Fn(&P2History) -> Vec<Rational>>;

fn tau_probes() -> Vec<P2Probe> {
    vec![
        Box::new(|_| vec![rat(1, 1), rat(0, 1)]),
        Box::new(|h| {
            if h.later.len() % 2 == 0 {
                vec![rat(1, 4), rat(3, 4)]
            } else {
                vec![rat(2, 3), rat(1, 3)]
            }
        }),
        Box::new(|h| {
            let b = rat(1 + (h.first + h.later.iter().sum::<usize>()) as i64 % 4, 5);
            vec![rat(1, 1) - &b, b]
        }),
    ]
}

/// Player 2's second-order belief, computed without his strategy, equals
/// the conditional law under several of his strategies on every history of
/// `t` stages.
pub fn tau_independence(report: &mut Report, sg: &SignalGame, t: usize) -> Result<(), CliError> {
    if sg.actions_1.len() != 2 || sg.actions_2.len() != 2 {
        report.line(format!(
            "{}: strategy probes need two actions per player; skipped",
            sg.name
        ));
        return Ok(());
    }
    let (mut seen, mut failures) = (0, 0);
    for tau in tau_probes() {
        let law = play_law(sg, &sg.prior, &sigma_probe, &P2Fn(&tau), t);
        let (_, x_of) = beliefs_by_enumeration(sg, &law)?;
        for (h2, x) in &x_of {
            seen += 1;
            if &update_x(sg, &sg.prior, &sigma_probe, h2)? != x {
                failures += 1;
            }
        }
    }
    report.line(format!(
        "{}: {seen} player 2 histories of {t} stages under 3 strategies",
        sg.name
    ));
    report.check(count_row(
        format!(
            "second-order belief ignores player 2's strategy, {} t = {t}",
            sg.name
        ),
        failures,
    ));
    Ok(())
}

/// The belief-game transition is affine in player 2's mixed action.
pub fn linearity(
    report: &mut Report,
    sg: &SignalGame,
    samples: usize,
    rng: &mut ChaCha8Rng,
) -> Result<(), CliError> {
    let bg = BeliefGame::new(sg);
    let active: Vec<usize> = sg.active_states().collect();
    let (ni, nj) = (sg.actions_1.len(), sg.actions_2.len());
    let mut failures = 0;
    for _ in 0..samples {
        let x = random_second_order(rng, sg.n_states(), &active, 3);
        let a: Vec<Vec<Rational>> = x.atoms().map(|_| random_mixed(rng, ni)).collect();
        let (b1, b2) = (random_mixed(rng, nj), random_mixed(rng, nj));
        let alpha = rat(rng.gen_range(0..=6), 6);
        let beta = rat(1, 1) - &alpha;
        let mid: Vec<Rational> = b1
            .iter()
            .zip(&b2)
            .map(|(u, v)| &alpha * u + &beta * v)
            .collect();
        let x = BeliefState::Active(x);
        let mut mix: BTreeMap<BeliefState, Rational> = BTreeMap::new();
        for (b, w) in [(&b1, &alpha), (&b2, &beta)] {
            for (y, q) in bg.transition(&x, &a, b)? {
                *mix.entry(y).or_insert_with(|| rat(0, 1)) += q * w;
            }
        }
        mix.retain(|_, q| *q != rat(0, 1));
        let mut direct = bg.transition(&x, &a, &mid)?;
        direct.retain(|_, q| *q != rat(0, 1));
        if direct != mix {
            failures += 1;
        }
    }
    report.check(count_row(
        format!(
            "transition affine in player 2's action, {} ({samples} samples)",
            sg.name
        ),
        failures,
    ));
    Ok(())
}

/// `Σ_x η(x) w_n(x)` for the image `η` of `pi`.
pub fn belief_value(
    sg: &SignalGame,
    pi: &InitialDist,
    n: usize,
    cap: usize,
) -> Result<f64, CliError> {
    let bg = BeliefGame::new(sg);
    let eta = image(pi, sg.n_states())?;
    let mut total = 0.0;
    for (x, w) in bg.states_of(&eta) {
        total += rational_to_f64(&w) * bg.value(&x, n, cap)?;
    }
    Ok(total)
}

/// Belief-game values against direct values of the signal game, at the
/// game's own initial distribution. Returns `(n, belief, direct)` triples.
pub fn value_agreement(
    report: &mut Report,
    sg: &SignalGame,
    n_max: usize,
    cap: usize,
) -> Result<Vec<(usize, f64, f64)>, CliError> {
    let mut out = Vec::new();
    for n in 1..=n_max {
        let w = belief_value(sg, &sg.prior, n, cap)?;
        let (d, size) = direct_value(sg, &sg.prior, n, cap)?;
        report.line(format!(
            "{} n = {n}: belief game {w:.9}, direct {d:.9} ({} paths, {}+{} sequences)",
            sg.name, size.paths, size.sequences_1, size.sequences_2
        ));
        report.at_most(
            format!("belief value matches direct value, {} n = {n}", sg.name),
            (w - d).abs(),
            VALUE_TOL,
        );
        out.push((n, w, d));
    }
    Ok(out)
}

/// Initial distributions with the same image have the same value: the
/// bundled one and `samples` random ones against their canonical versions.
pub fn image_invariance(
    report: &mut Report,
    sg: &SignalGame,
    n_max: usize,
    samples: usize,
    rng: &mut ChaCha8Rng,
    cap: usize,
) -> Result<(), CliError> {
    let mut worst = 0.0f64;
    let mut pis = vec![sg.prior.clone()];
    pis.extend((0..samples).map(|_| random_initial(rng, sg)));
    for pi in &pis {
        let canonical = canonical_pi(&image(pi, sg.n_states())?).dist;
        for n in 1..=n_max {
            let (a, _) = direct_value(sg, pi, n, cap)?;
            let (b, _) = direct_value(sg, &canonical, n, cap)?;
            worst = worst.max((a - b).abs());
        }
    }
    report.line(format!(
        "{}: {} initial distributions against their canonical versions",
        sg.name,
        pis.len()
    ));
    report.at_most(
        format!("value depends on the image only, {}", sg.name),
        worst,
        VALUE_TOL,
    );
    Ok(())
}

fn as_second_order(x: &BeliefState, n: usize) -> SecondOrder {
    match x {
        BeliefState::Active(x) => x.clone(),
        BeliefState::Absorbed(k) => SecondOrder::point(Belief::point(n, *k)),
    }
}

/// `|w_n(x) − w_n(y)| ≤ W(x, y)` on pairs of states reachable within one
/// stage, for `n = 2, 3`. Returns the number of pairs.
pub fn lipschitz(
    report: &mut Report,
    sg: &SignalGame,
    per_game: usize,
    cap: usize,
) -> Result<usize, CliError> {
    let bg = BeliefGame::new(sg);
    let roots = bg.states_of(&image(&sg.prior, sg.n_states())?).into_keys();
    let states: Vec<BeliefState> = bg
        .reachable(roots, 1, cap)?
        .into_iter()
        .map(|(x, _)| x)
        .take(per_game)
        .collect();
    let n_states = sg.n_states();
    let mut pairs = 0;
    let mut worst = f64::NEG_INFINITY;
    for n in 2..=3 {
        let w: Vec<f64> = states
            .iter()
            .map(|x| bg.value(x, n, cap))
            .collect::<Result<_, _>>()?;
        for a in 0..states.len() {
            for b in a + 1..states.len() {
                let d = wasserstein(
                    &as_second_order(&states[a], n_states),
                    &as_second_order(&states[b], n_states),
                )?;
                worst = worst.max((w[a] - w[b]).abs() - d);
                pairs += 1;
            }
        }
    }
    report.line(format!(
        "{}: {pairs} pairs over {} reachable states, largest excess {worst:.3e}",
        sg.name,
        states.len()
    ));
    report.at_most(
        format!("values 1-Lipschitz in transport distance, {}", sg.name),
        worst,
        1e-9,
    );
    Ok(pairs)
}

/// Player 1 following a belief-game strategy induces the belief game's law.
pub fn mimic(report: &mut Report, sg: &SignalGame, t: usize) -> Result<(), CliError> {
    if sg.actions_1.len() != 2 || sg.actions_2.len() != 2 {
        report.line(format!(
            "{}: strategy probes need two actions per player; skipped",
            sg.name
        ));
        return Ok(());
    }
    let hat = |xs: &[BeliefState], p: &Belief| {
        let stop = if xs.len() >= 2 {
            p.0.get(1).cloned().unwrap_or_else(|| rat(0, 1))
        } else {
            rat(1, 4)
        };
        vec![rat(1, 1) - &stop, stop]
    };
    let tau = |h: &P2History| match h.later.last() {
        Some(&d) if d % 2 == 1 => vec![rat(1, 3), rat(2, 3)],
        _ => vec![rat(3, 4), rat(1, 4)],
    };
    let check = check_mimic(sg, &sg.prior, &hat, &P2Fn(tau), t)?;
    let failures = usize::from(!check.laws_agree()) + usize::from(!check.payoffs_agree());
    report.check(count_row(
        format!(
            "mimicking reproduces belief laws and payoffs, {} t = {t}",
            sg.name
        ),
        failures,
    ));
    Ok(())
}
