#![allow(dead_code)]

use proptest::prelude::*;
use recgame_core::state::rat;
use recgame_core::{RecursiveGame, StateId};

pub fn s(x: &str) -> StateId {
    StateId::name(x)
}

/// Shape of a random finite recursive game: per active state and action
/// pair, integer weights over all states.
#[derive(Clone, Debug)]
pub struct Shape {
    pub active: usize,
    pub na: usize,
    pub nb: usize,
    pub payoffs: Vec<i64>,
    pub weights: Vec<Vec<u8>>,
}

pub fn shape(max_active: usize, max_actions: usize) -> impl Strategy<Value = Shape> {
    (
        1..=max_active,
        1..=max_actions,
        1..=max_actions,
        prop::collection::vec(-2i64..=2, 1..=3),
    )
        .prop_flat_map(|(active, na, nb, payoffs)| {
            let states = active + payoffs.len();
            let cells = active * na * nb;
            prop::collection::vec(prop::collection::vec(0u8..4, states), cells).prop_map(
                move |mut weights| {
                    for w in &mut weights {
                        if w.iter().all(|&x| x == 0) {
                            w[0] = 1;
                        }
                    }
                    Shape {
                        active,
                        na,
                        nb,
                        payoffs: payoffs.clone(),
                        weights,
                    }
                },
            )
        })
}

pub fn build(sp: &Shape) -> RecursiveGame {
    let mut g = RecursiveGame::new("random");
    let names: Vec<StateId> = (0..sp.active)
        .map(|i| s(&format!("a{i}")))
        .chain((0..sp.payoffs.len()).map(|i| s(&format!("t{i}"))))
        .collect();
    let acts_a: Vec<String> = (0..sp.na).map(|i| format!("r{i}")).collect();
    let acts_b: Vec<String> = (0..sp.nb).map(|i| format!("c{i}")).collect();
    let ra: Vec<&str> = acts_a.iter().map(String::as_str).collect();
    let rb: Vec<&str> = acts_b.iter().map(String::as_str).collect();
    for (i, p) in sp.payoffs.iter().enumerate() {
        g.add_absorbing(names[sp.active + i].clone(), rat(*p, 2));
    }
    for x in &names[..sp.active] {
        g.add_active(x.clone(), &ra, &rb);
    }
    let mut cell = 0;
    for x in &names[..sp.active] {
        for a in 0..sp.na {
            for b in 0..sp.nb {
                let w = &sp.weights[cell];
                let total: i64 = w.iter().map(|&k| k as i64).sum();
                let law = names
                    .iter()
                    .zip(w)
                    .filter(|(_, &k)| k > 0)
                    .map(|(y, &k)| (y.clone(), rat(k as i64, total)))
                    .collect();
                g.set_transition(x, a, b, law);
                cell += 1;
            }
        }
    }
    g
}
