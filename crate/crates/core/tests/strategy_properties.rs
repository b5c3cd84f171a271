mod common;

use common::{build, shape};
use proptest::prelude::*;
use rand_chacha::ChaCha8Rng;
use recgame_core::builtin::{quitting_simple, quitting_simple_limit, LehrerSorin};
use recgame_core::game::GameModel;
use recgame_core::matrix::{solve, DEFAULT_TOL};
use recgame_core::simulate::{run_rng, Agent, AutomatonAgent};
use recgame_core::strategy::{
    block_strategy, markov_optimal, one_shot_game, positive_certificate, pure_stopping_time,
    s_star, sigma_bar, stopping_guarantee, target_certificate, Player,
};
use recgame_core::values::{compute_vn, VnOptions};
use recgame_core::StateId;

fn s(x: &str) -> StateId {
    StateId::name(x)
}

/// Replays a state path through an agent, reporting each stage's mixed action.
fn replay(
    agent: &mut dyn Agent,
    path: &[StateId],
    actions: &[(usize, usize)],
    rng: &mut ChaCha8Rng,
) -> Vec<Vec<f64>> {
    agent.begin(&path[0], rng);
    let mut out = vec![agent.act(&path[0], rng)];
    for (k, w) in path.windows(2).enumerate() {
        let (a, b) = actions[k];
        agent.observe(&w[0], a, b, &w[1], rng);
        out.push(agent.act(&w[1], rng));
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn alternating_strategy_ignores_opponent_actions(
        seed in any::<u64>(),
        len in 2usize..40,
        acts in prop::collection::vec((0usize..2, 0usize..2), 40),
        other in prop::collection::vec((0usize..2, 0usize..2), 40),
    ) {
        let g = quitting_simple();
        let seq = compute_vn(&g, &[s("s")], 300, &VnOptions::default()).unwrap();
        let v = seq.value_function(300);
        let cert = target_certificate(&seq, &v, 0.01, 0.05, 300).unwrap();
        let block = block_strategy(&g, &cert, &markov_optimal(&seq, cert.max_length(), Player::One).unwrap()).unwrap();
        let star = s_star(&g, &v, 1e-3).unwrap();
        let sigma = sigma_bar(&g, &v, 0.1, &block, &star).unwrap();
        let path = vec![s("s"); len];
        let first = replay(&mut AutomatonAgent::new(&sigma), &path, &acts, &mut run_rng(seed, 0, 1));
        let second = replay(&mut AutomatonAgent::new(&sigma), &path, &other, &mut run_rng(seed, 0, 1));
        prop_assert_eq!(first, second);
    }

    #[test]
    fn finite_horizon_values_are_near_fixed_points(sp in shape(4, 3), n in 5usize..80) {
        let g = build(&sp);
        let roots: Vec<StateId> = g.states().cloned().collect();
        let seq = compute_vn(&g, &roots, n, &VnOptions::default()).unwrap();
        let v = seq.value_function(n);
        for x in roots.iter().filter(|x| g.is_active(x)) {
            let val = solve(&one_shot_game(&g, &v, x).unwrap(), DEFAULT_TOL).unwrap().value;
            let gap = (val - v.get(x).unwrap()).abs();
            prop_assert!(gap <= 2.0 / n as f64 + 1e-9, "{x}: gap {gap}");
        }
    }

    #[test]
    fn stopping_time_keeps_the_average_guarantee(sp in shape(3, 2), n in 1usize..=5) {
        let g = build(&sp);
        let x1 = s("a0");
        let seq = compute_vn(&g, std::slice::from_ref(&x1), n, &VnOptions::default()).unwrap();
        let sigma = markov_optimal(&seq, n, Player::One).unwrap();
        let theta = pure_stopping_time(&g, &sigma, &x1, n).unwrap();
        let (lhs, rhs) = stopping_guarantee(&g, &sigma, &theta, &x1);
        prop_assert!(lhs >= rhs - 1e-9, "{lhs} < {rhs}");
        prop_assert!(rhs >= seq.value(n, &x1).unwrap() - 1e-9);
    }
}

#[test]
fn stopping_time_on_bundled_games() {
    let q = quitting_simple();
    let ls = LehrerSorin::new(10);
    for n in 1..=6 {
        let seq = compute_vn(&q, &[s("s")], n, &VnOptions::default()).unwrap();
        let sigma = markov_optimal(&seq, n, Player::One).unwrap();
        let theta = pure_stopping_time(&q, &sigma, &s("s"), n).unwrap();
        let (lhs, rhs) = stopping_guarantee(&q, &sigma, &theta, &s("s"));
        assert!(lhs >= rhs - 1e-9, "quitting n = {n}: {lhs} < {rhs}");

        let root = StateId::pair(0, 0);
        let seq = compute_vn(&ls, std::slice::from_ref(&root), n, &VnOptions::default()).unwrap();
        let sigma = markov_optimal(&seq, n, Player::One).unwrap();
        let theta = pure_stopping_time(&ls, &sigma, &root, n).unwrap();
        let (lhs, rhs) = stopping_guarantee(&ls, &sigma, &theta, &root);
        assert!(lhs >= rhs - 1e-9, "grid n = {n}: {lhs} < {rhs}");
        assert!((rhs - seq.value(n, &root).unwrap()).abs() < 1e-9);
    }
}

#[test]
fn one_shot_profile_is_optimal_at_the_limit_value() {
    let g = quitting_simple();
    let seq = compute_vn(
        &g,
        &[s("s")],
        2000,
        &VnOptions {
            record_profiles: false,
            ..Default::default()
        },
    )
    .unwrap();
    let v = seq.value_function(2000);
    assert!((v.get(&s("s")).unwrap() - quitting_simple_limit()).abs() < 1e-3);
    let star = s_star(&g, &v, 1e-5).unwrap();
    assert!(star.min_slack().unwrap().1 >= -1e-5);
}

#[test]
fn positive_certificate_is_minimal() {
    let g = quitting_simple();
    let seq = compute_vn(&g, &[s("s")], 50, &VnOptions::default()).unwrap();
    let cert = positive_certificate(&seq, 0.05, 50).unwrap();
    let n = cert.lengths[&s("s")];
    assert!(seq.value(n, &s("s")).unwrap() >= 0.05);
    assert!((1..n).all(|k| seq.value(k, &s("s")).unwrap() < 0.05));
}
