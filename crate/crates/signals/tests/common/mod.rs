#![allow(dead_code)]

use proptest::prelude::*;
use recgame_core::state::rat;
use recgame_core::Rational;
use recgame_signals::{Belief, BeliefState, ImageDist, InitialDist, SecondOrder};

/// A belief with small integer weights on the first `support` of `n` states.
pub fn belief(n: usize, support: usize) -> impl Strategy<Value = Belief> {
    prop::collection::vec(0i64..4, support).prop_map(move |mut w| {
        if w.iter().all(|&x| x == 0) {
            w[0] = 1;
        }
        let mut v: Vec<Rational> = w.iter().map(|&x| rat(x, 1)).collect();
        v.resize(n, rat(0, 1));
        Belief::from_weights(v).unwrap()
    })
}

pub fn second_order(n: usize, support: usize, atoms: usize) -> impl Strategy<Value = SecondOrder> {
    prop::collection::vec((belief(n, support), 1i64..4), 1..=atoms).prop_map(|v| {
        SecondOrder::from_weights(v.into_iter().map(|(p, w)| (p, rat(w, 1)))).unwrap()
    })
}

pub fn image_dist(n: usize) -> impl Strategy<Value = ImageDist> {
    prop::collection::vec((second_order(n, n, 3), 1i64..4), 1..=3)
        .prop_map(|v| ImageDist::from_weights(v.into_iter().map(|(x, w)| (x, rat(w, 1)))).unwrap())
}

/// A mixed action with small integer weights.
pub fn mixed(n: usize) -> impl Strategy<Value = Vec<Rational>> {
    prop::collection::vec(0i64..4, n).prop_map(|mut w| {
        if w.iter().all(|&x| x == 0) {
            w[0] = 1;
        }
        let total: i64 = w.iter().sum();
        w.iter().map(|&x| rat(x, total)).collect()
    })
}

/// A more-informed initial distribution on the first `states` states:
/// each player 1 signal is attached to one player 2 signal.
pub fn initial_dist(states: usize) -> impl Strategy<Value = InitialDist> {
    (1usize..=3, 1usize..=2).prop_flat_map(move |(nc, nd)| {
        (
            prop::collection::vec(0..nd, nc),
            prop::collection::vec(0i64..4, states * nc),
        )
            .prop_map(move |(d_of_c, mut w)| {
                if w.iter().all(|&x| x == 0) {
                    w[0] = 1;
                }
                let total: i64 = w.iter().sum();
                let mut pi = InitialDist {
                    signals_1: (0..nc).map(|c| format!("c{c}")).collect(),
                    signals_2: (0..nd).map(|d| format!("d{d}")).collect(),
                    ..Default::default()
                };
                for k in 0..states {
                    for c in 0..nc {
                        let x = w[k * nc + c];
                        if x > 0 {
                            pi.mass.insert((k, c, d_of_c[c]), rat(x, total));
                        }
                    }
                }
                pi
            })
    })
}

/// The state as a second-order belief.
pub fn as_second_order(x: &BeliefState, n: usize) -> SecondOrder {
    match x {
        BeliefState::Active(x) => x.clone(),
        BeliefState::Absorbed(k) => SecondOrder::point(Belief::point(n, *k)),
    }
}
