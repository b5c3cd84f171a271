//! The n-stage value of a signal game computed directly on its game tree,
//! in sequence form, with no reference to beliefs.

use std::collections::BTreeMap;

use num_traits::Zero;
use recgame_core::lp::{LinearProgram, Relation};
use recgame_core::state::rational_to_f64;
use recgame_core::Rational;

use crate::belief::{P1History, P2History};
use crate::game::{InitialDist, SignalError, SignalGame};

/// Sequences of one player: the empty sequence is index 0, then
/// `(infoset, action)` pairs. Each infoset records its parent sequence.
#[derive(Default)]
struct Sequences<H: Ord + Clone> {
    index: BTreeMap<(H, usize), usize>,
    infosets: BTreeMap<H, usize>,
    len: usize,
}

impl<H: Ord + Clone> Sequences<H> {
    fn new() -> Self {
        Sequences {
            index: BTreeMap::new(),
            infosets: BTreeMap::new(),
            len: 1,
        }
    }

    fn register(&mut self, h: &H, parent: usize, actions: usize) {
        if self.infosets.contains_key(h) {
            return;
        }
        self.infosets.insert(h.clone(), parent);
        for a in 0..actions {
            self.index.insert((h.clone(), a), self.len);
            self.len += 1;
        }
    }

    fn seq(&self, h: &H, a: usize) -> usize {
        self.index[&(h.clone(), a)]
    }
}

struct Path {
    state: usize,
    h1: P1History,
    h2: P2History,
    seq1: usize,
    seq2: usize,
    weight: Rational,
}

/// Size of the sequence-form program for a horizon.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TreeSize {
    pub paths: usize,
    pub sequences_1: usize,
    pub sequences_2: usize,
}

/// `v_n(π)`, by solving the sequence-form program of the n-stage game.
/// `cap` bounds the number of chance paths enumerated.
pub fn direct_value(
    sg: &SignalGame,
    pi: &InitialDist,
    n: usize,
    cap: usize,
) -> Result<(f64, TreeSize), SignalError> {
    if n == 0 {
        return Err(SignalError::Invalid("horizon must be at least 1".into()));
    }
    let (ni, nj) = (sg.actions_1.len(), sg.actions_2.len());
    let mut s1: Sequences<P1History> = Sequences::new();
    let mut s2: Sequences<P2History> = Sequences::new();
    let mut payoff: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let mut paths = 0usize;

    let mut layer: Vec<Path> = pi
        .mass
        .iter()
        .map(|(&(k, c, d), w)| Path {
            state: k,
            h1: P1History {
                first: c,
                later: Vec::new(),
            },
            h2: P2History {
                first: d,
                later: Vec::new(),
            },
            seq1: 0,
            seq2: 0,
            weight: w.clone(),
        })
        .collect();
    for t in 1..=n {
        let mut next = Vec::new();
        for path in layer {
            paths += 1;
            if paths > cap {
                return Err(SignalError::TooLarge {
                    what: "chance path set",
                    size: paths,
                    cap,
                });
            }
            if sg.is_absorbing(path.state) {
                let g = rational_to_f64(&(&path.weight * sg.payoff(path.state)));
                *payoff.entry((path.seq1, path.seq2)).or_default() +=
                    g * (n - t + 1) as f64 / n as f64;
                continue;
            }
            if t == n {
                continue;
            }
            s1.register(&path.h1, path.seq1, ni);
            s2.register(&path.h2, path.seq2, nj);
            for i in 0..ni {
                for j in 0..nj {
                    for o in sg.transition(path.state, i, j) {
                        next.push(Path {
                            state: o.state,
                            h1: path.h1.extend(o.c),
                            h2: path.h2.extend(o.d),
                            seq1: s1.seq(&path.h1, i),
                            seq2: s2.seq(&path.h2, j),
                            weight: &path.weight * &o.prob,
                        });
                    }
                }
            }
        }
        layer = next;
    }

    // Variables: player 1 realization weights, then y_root and one free
    // variable per player 2 infoset.
    let n1 = s1.len;
    let h2_index: BTreeMap<&P2History, usize> = s2
        .infosets
        .keys()
        .enumerate()
        .map(|(u, h)| (h, n1 + 1 + u))
        .collect();
    let n_vars = n1 + 1 + h2_index.len();
    let mut lp = LinearProgram::new(n_vars);
    lp.objective[n1] = 1.0;
    (n1..n_vars).for_each(|v| lp.set_free(v));

    let mut root = vec![0.0; n_vars];
    root[0] = 1.0;
    lp.add(root, Relation::Eq, 1.0);
    for (h, &parent) in &s1.infosets {
        let mut row = vec![0.0; n_vars];
        (0..ni).for_each(|i| row[s1.seq(h, i)] = 1.0);
        row[parent] -= 1.0;
        lp.add(row, Relation::Eq, 0.0);
    }

    // One row per player 2 sequence: E'y ≤ A'r.
    let mut rows = vec![vec![0.0; n_vars]; s2.len];
    rows[0][n1] = 1.0;
    for (h, &parent) in &s2.infosets {
        let y = h2_index[h];
        rows[parent][y] -= 1.0;
        for j in 0..nj {
            rows[s2.seq(h, j)][y] += 1.0;
        }
    }
    for (&(q1, q2), a) in &payoff {
        if !a.is_zero() {
            rows[q2][q1] -= a;
        }
    }
    for row in rows {
        lp.add(row, Relation::Le, 0.0);
    }
    let value = lp.solve()?.objective;
    Ok((
        value,
        TreeSize {
            paths,
            sequences_1: s1.len,
            sequences_2: s2.len,
        },
    ))
}
