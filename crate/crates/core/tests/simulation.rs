use rand_chacha::ChaCha8Rng;
use recgame_core::builtin::{quitting_simple, LehrerSorin};
use recgame_core::game::GameModel;
use recgame_core::simulate::{
    best_response, estimate_gamma, Agent, AgentFactory, AutomatonAgent, UniformAgent,
    DEFAULT_INFO_CAP,
};
use recgame_core::strategy::{
    block_strategy, markov_optimal, positive_certificate, state_path_law, Player,
    StateHistoryTable, StatesOnly,
};
use recgame_core::values::{compute_vn, VnOptions};
use recgame_core::StateId;

fn s(x: &str) -> StateId {
    StateId::name(x)
}

/// Moves right along the axis and jumps at a fixed stage.
struct JumpAt {
    stage: usize,
    t: usize,
}

impl Agent for JumpAt {
    fn begin(&mut self, _: &StateId, _: &mut ChaCha8Rng) {
        self.t = 1;
    }

    fn act(&mut self, x: &StateId, _: &mut ChaCha8Rng) -> Vec<f64> {
        match x {
            StateId::Pair(_, 0) if self.t >= self.stage => vec![0.0, 1.0],
            StateId::Pair(_, 0) => vec![1.0, 0.0],
            _ => vec![1.0],
        }
    }

    fn observe(&mut self, _: &StateId, _: usize, _: usize, _: &StateId, _: &mut ChaCha8Rng) {
        self.t += 1;
    }
}

#[test]
fn monte_carlo_matches_the_exact_law() {
    let g = quitting_simple();
    let n = 6;
    let seq = compute_vn(&g, &[s("s")], n, &VnOptions::default()).unwrap();
    let sigma = markov_optimal(&seq, n, Player::One).unwrap();
    let tau = StateHistoryTable {
        counts: [(s("s"), 2)].into(),
        ..Default::default()
    };
    let exact: f64 = state_path_law(&g, &StatesOnly(&sigma), &StatesOnly(&tau), &s("s"), n)
        .into_iter()
        .map(|(path, p)| p * path.iter().map(|x| g.payoff_f64(x)).sum::<f64>() / n as f64)
        .sum();
    let p1: &AgentFactory = &|| Box::new(AutomatonAgent::new(&sigma));
    let p2: &AgentFactory = &|| Box::new(UniformAgent::new(&g, Player::Two));
    let est = estimate_gamma(&g, &s("s"), p1, p2, n, 20_000, 7).unwrap();
    assert!(
        (est.mean - exact).abs() <= 3.0 * est.std_err,
        "{est} vs {exact}"
    );
}

#[test]
fn jumping_halfway_earns_a_quarter() {
    let g = LehrerSorin::default();
    let p1: &AgentFactory = &|| Box::new(JumpAt { stage: 501, t: 1 });
    let p2: &AgentFactory = &|| Box::new(UniformAgent::new(&g, Player::Two));
    let est = estimate_gamma(&g, &StateId::pair(0, 0), p1, p2, 1000, 4000, 11).unwrap();
    assert!((est.mean - 0.2495).abs() <= 3.0 * est.std_err, "{est}");
}

#[test]
fn best_response_agrees_with_simulation_against_a_block_strategy() {
    let g = quitting_simple();
    let seq = compute_vn(&g, &[s("s")], 20, &VnOptions::default()).unwrap();
    let cert = positive_certificate(&seq, 0.05, 20).unwrap();
    let block = block_strategy(
        &g,
        &cert,
        &markov_optimal(&seq, cert.max_length(), Player::One).unwrap(),
    )
    .unwrap();
    for h in [1, 3, 6] {
        let br = best_response(&g, &block, &s("s"), h, DEFAULT_INFO_CAP).unwrap();
        // No fixed opponent does better than the best response.
        let p1: &AgentFactory = &|| Box::new(AutomatonAgent::new(&block));
        let p2: &AgentFactory = &|| Box::new(UniformAgent::new(&g, Player::Two));
        let est = estimate_gamma(&g, &s("s"), p1, p2, h, 20_000, 3).unwrap();
        assert!(
            est.mean >= br.value - 3.0 * est.std_err,
            "h = {h}: {est} vs {}",
            br.value
        );
    }
}
