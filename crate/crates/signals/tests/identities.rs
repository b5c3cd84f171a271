mod common;

use std::collections::BTreeMap;

use common::*;
use num_traits::Zero;
use proptest::prelude::*;
use recgame_core::state::rat;
use recgame_core::Rational;
use recgame_signals::belief::{beliefs_by_enumeration, play_law, P1History, P2Fn, P2History};
use recgame_signals::mimic::check_mimic;
use recgame_signals::{
    canonical_pi, image, signal_2x2, symmetric_2, update_p, update_x, BeliefGame, BeliefState,
    SignalGame,
};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn image_inverts_canonical_distribution(eta in image_dist(3)) {
        let pi = canonical_pi(&eta);
        prop_assert_eq!(image(&pi.dist, 3).unwrap(), eta);
    }

    #[test]
    fn transition_is_linear_in_player_2_action(
        x in second_order(4, 2, 3),
        a in prop::collection::vec(mixed(2), 3),
        b1 in mixed(2),
        b2 in mixed(2),
        public in any::<bool>(),
    ) {
        let sg = if public { symmetric_2() } else { signal_2x2() };
        let bg = BeliefGame::new(&sg);
        let x = BeliefState::Active(x);
        let mid: Vec<Rational> = b1.iter().zip(&b2).map(|(u, v)| (u + v) / rat(2, 1)).collect();
        let mut avg: BTreeMap<BeliefState, Rational> = BTreeMap::new();
        for b in [&b1, &b2] {
            for (y, w) in bg.transition(&x, &a, b).unwrap() {
                *avg.entry(y).or_insert_with(Rational::zero) += w / rat(2, 1);
            }
        }
        prop_assert_eq!(bg.transition(&x, &a, &mid).unwrap(), avg);
    }
}

/// A history-dependent player 1 strategy that mixes everywhere.
fn sigma(h: &P1History) -> Vec<Rational> {
    let s = rat(
        1 + (h.first as i64 + h.later.iter().sum::<usize>() as i64) % 3,
        5,
    );
    vec![rat(1, 1) - &s, s]
}

type Behaviour = Box<dyn Fn(&P2History) -> Vec<Rational>>;

fn second_order_beliefs_agree_under_any_player_2_strategy(sg: &SignalGame, t: usize) {
    let taus: [Behaviour; 3] = [
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
    ];
    let mut seen = 0;
    for tau in &taus {
        let law = play_law(sg, &sg.prior, &sigma, &P2Fn(tau), t);
        let (p_of, x_of) = beliefs_by_enumeration(sg, &law).unwrap();
        for (h1, p) in &p_of {
            assert_eq!(&update_p(sg, &sg.prior, h1).unwrap(), p);
        }
        for (h2, x) in &x_of {
            assert_eq!(&update_x(sg, &sg.prior, &sigma, h2).unwrap(), x, "{h2:?}");
            seen += 1;
        }
    }
    assert!(seen > 0);
}

#[test]
fn updates_ignore_player_2_strategy_on_all_two_stage_histories() {
    for sg in [signal_2x2(), symmetric_2()] {
        for t in 1..=2 {
            second_order_beliefs_agree_under_any_player_2_strategy(&sg, t);
        }
    }
}

#[test]
fn updates_ignore_player_2_strategy_on_three_stage_histories() {
    second_order_beliefs_agree_under_any_player_2_strategy(&signal_2x2(), 3);
}

#[test]
fn mimicking_a_belief_strategy_reproduces_belief_laws_and_payoffs() {
    let hat = |xs: &[BeliefState], p: &recgame_signals::Belief| {
        let stop = if xs.len() >= 2 {
            p.0[1].clone()
        } else {
            rat(1, 4)
        };
        vec![rat(1, 1) - &stop, stop]
    };
    let tau = |h: &P2History| match h.later.last() {
        Some(&d) if d % 2 == 1 => vec![rat(1, 3), rat(2, 3)],
        _ => vec![rat(3, 4), rat(1, 4)],
    };
    for sg in [signal_2x2(), symmetric_2()] {
        for t in 1..=3 {
            let check = check_mimic(&sg, &sg.prior, &hat, &P2Fn(tau), t).unwrap();
            assert!(check.laws_agree(), "{} t = {t}", sg.name);
            assert!(check.payoffs_agree(), "{} t = {t}", sg.name);
        }
    }
}
