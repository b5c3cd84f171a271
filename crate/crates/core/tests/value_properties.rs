mod common;

use std::collections::HashMap;

use common::{build, shape, Shape};
use proptest::prelude::*;
use recgame_core::builtin::{quitting_simple, LehrerSorin};
use recgame_core::explore::reachable;
use recgame_core::format::{load, save};
use recgame_core::game::GameModel;
use recgame_core::matrix::DEFAULT_TOL;
use recgame_core::state::rational_to_f64;
use recgame_core::values::{compute_vn, shapley_step, VnOptions};
use recgame_core::{Game, RecursiveGame, StateId, StateKind, ValueFunction};

fn active_states(g: &RecursiveGame) -> Vec<StateId> {
    g.states().filter(|x| g.is_active(x)).cloned().collect()
}

fn value_fn(states: &[StateId], vals: &[f64]) -> ValueFunction {
    states.iter().cloned().zip(vals.iter().copied()).collect()
}

/// Expected total payoff over `m` stages for a single decision maker, by
/// backward induction over stages.
fn total_payoff(
    g: &RecursiveGame,
    x: &StateId,
    m: usize,
    memo: &mut HashMap<(StateId, usize), f64>,
) -> f64 {
    if m == 0 {
        return 0.0;
    }
    if let StateKind::Absorbing(p) = g.kind(x) {
        return m as f64 * rational_to_f64(&p);
    }
    if let Some(v) = memo.get(&(x.clone(), m)) {
        return *v;
    }
    let (na, _) = g.action_counts(x);
    let mut best = f64::NEG_INFINITY;
    for a in 0..na {
        let mut e = 0.0;
        for (y, p) in g.transition(x, a, 0) {
            e += rational_to_f64(&p) * total_payoff(g, &y, m - 1, memo);
        }
        best = best.max(e);
    }
    memo.insert((x.clone(), m), best);
    best
}

fn with_one_column(mut sp: Shape) -> Shape {
    let keep: Vec<Vec<u8>> = sp.weights.chunks(sp.nb).map(|c| c[0].clone()).collect();
    sp.nb = 1;
    sp.weights = keep;
    sp
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn shapley_step_is_monotone_and_nonexpansive(
        sp in shape(4, 3),
        n in 1usize..30,
        raw in prop::collection::vec((-1.0f64..1.0, 0.0f64..0.5), 4),
    ) {
        let g = build(&sp);
        let xs = active_states(&g);
        let hi: Vec<f64> = raw.iter().take(xs.len()).map(|r| r.0).collect();
        let lo: Vec<f64> = raw.iter().take(xs.len()).map(|r| r.0 - r.1).collect();
        let (thi, _) = shapley_step(&g, &value_fn(&xs, &hi), n, &xs, DEFAULT_TOL).unwrap();
        let (tlo, _) = shapley_step(&g, &value_fn(&xs, &lo), n, &xs, DEFAULT_TOL).unwrap();
        let gap = raw.iter().take(xs.len()).map(|r| r.1).fold(0.0, f64::max);
        let factor = n as f64 / (n as f64 + 1.0);
        for x in &xs {
            let (a, b) = (thi.get(x).unwrap(), tlo.get(x).unwrap());
            prop_assert!(b <= a + 1e-9);
            prop_assert!(a - b <= factor * gap + 1e-9);
        }
    }

    #[test]
    fn one_player_values_match_backward_induction(sp in shape(4, 3).prop_map(with_one_column), n in 1usize..12) {
        let g = build(&sp);
        let roots: Vec<StateId> = g.states().cloned().collect();
        let seq = compute_vn(&g, &roots, n, &VnOptions::default()).unwrap();
        let mut memo = HashMap::new();
        for x in &roots {
            let expect = total_payoff(&g, x, n, &mut memo) / n as f64;
            let got = seq.value(n, x).unwrap();
            prop_assert!((got - expect).abs() < 1e-9, "{x}: {got} vs {expect}");
        }
    }

    #[test]
    fn drift_bound_holds_on_random_games(sp in shape(4, 3), n in 2usize..60) {
        let g = build(&sp);
        let roots: Vec<StateId> = g.states().cloned().collect();
        let seq = compute_vn(&g, &roots, n, &VnOptions::default()).unwrap();
        prop_assert!(seq.drift_violations.is_empty(), "{:?}", seq.drift_violations);
    }

    #[test]
    fn reachable_grows_with_depth(sp in shape(4, 3), d in 0usize..6) {
        let g = build(&sp);
        let root = StateId::name("a0");
        let small = reachable(&g, &root, d).unwrap();
        let big = reachable(&g, &root, d + 1).unwrap();
        prop_assert!(small.is_subset(&big));
    }

    #[test]
    fn save_load_save_is_stable(sp in shape(4, 3)) {
        let game = Game::Finite(build(&sp));
        let text = save(&game);
        let back = load(&text).unwrap();
        prop_assert_eq!(&back, &game);
        prop_assert_eq!(save(&back), text);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn lehrer_sorin_grid_reachability_grows(bound in 3i64..20, d in 0usize..15) {
        let g = LehrerSorin::new(bound);
        let root = StateId::pair(0, 0);
        let small = reachable(&g, &root, d).unwrap();
        let big = reachable(&g, &root, d + 1).unwrap();
        prop_assert!(small.is_subset(&big));
    }
}

#[test]
fn bundled_games_respect_the_drift_bound() {
    let q = quitting_simple();
    let seq = compute_vn(&q, &[StateId::name("s")], 400, &VnOptions::default()).unwrap();
    assert!(seq.drift_violations.is_empty());

    let ls = LehrerSorin::new(300);
    let seq = compute_vn(&ls, &[StateId::pair(0, 0)], 200, &VnOptions::default()).unwrap();
    assert!(seq.drift_violations.is_empty());
    assert_eq!(seq.bracket_gap(200), 0.0);
}

#[test]
fn a_reachable_game_boundary_opens_the_brackets() {
    let ls = LehrerSorin::new(120);
    let seq = compute_vn(&ls, &[StateId::pair(0, 0)], 200, &VnOptions::default()).unwrap();
    let (lo, hi) = seq.bracket(200, &StateId::pair(0, 0)).unwrap();
    assert!(lo < hi);
    for n in 0..=200 {
        for (a, b) in seq.lower[n].iter().zip(&seq.upper[n]) {
            assert!(a.is_nan() || b.is_nan() || a <= b, "n = {n}");
        }
    }
}

#[test]
fn bundled_games_round_trip_through_text() {
    for game in [
        Game::Finite(quitting_simple()),
        Game::LehrerSorin(LehrerSorin::new(7)),
    ] {
        let text = save(&game);
        let back = load(&text).unwrap();
        assert_eq!(back, game);
        assert_eq!(save(&back), text);
    }
}
