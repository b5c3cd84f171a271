//! Belief hierarchies: first-order beliefs of player 1, second-order beliefs
//! of player 2, and distributions over the latter.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};
use recgame_core::state::{format_rational, rational_to_f64};
use recgame_core::Rational;

use crate::game::{InitialDist, SignalError, SignalGame};

/// Player 1's belief over the states.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Belief(pub Vec<Rational>);

/// Player 2's belief over player 1's beliefs.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SecondOrder(pub BTreeMap<Belief, Rational>);

/// A distribution over second-order beliefs.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ImageDist(pub BTreeMap<SecondOrder, Rational>);

fn normalized(v: Vec<Rational>) -> Result<Vec<Rational>, SignalError> {
    let total = v.iter().fold(Rational::zero(), |a, b| a + b);
    if !total.is_positive() {
        return Err(SignalError::ZeroProbability);
    }
    Ok(v.into_iter().map(|x| x / &total).collect())
}

fn add_to<K: Ord>(map: &mut BTreeMap<K, Rational>, key: K, w: Rational) {
    if w.is_zero() {
        return;
    }
    *map.entry(key).or_insert_with(Rational::zero) += w;
}

impl Belief {
    pub fn point(n: usize, k: usize) -> Belief {
        let mut v = vec![Rational::zero(); n];
        v[k] = Rational::one();
        Belief(v)
    }

    pub fn from_weights(v: Vec<Rational>) -> Result<Belief, SignalError> {
        normalized(v).map(Belief)
    }

    /// The state this belief is concentrated on, if any.
    pub fn certain(&self) -> Option<usize> {
        let mut it = self.0.iter().enumerate().filter(|(_, p)| !p.is_zero());
        match (it.next(), it.next()) {
            (Some((k, _)), None) => Some(k),
            _ => None,
        }
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(rational_to_f64).collect()
    }

    pub fn l1(&self, other: &Belief) -> Rational {
        self.0
            .iter()
            .zip(&other.0)
            .fold(Rational::zero(), |a, (x, y)| a + (x - y).abs())
    }
}

impl SecondOrder {
    pub fn point(p: Belief) -> SecondOrder {
        SecondOrder(BTreeMap::from([(p, Rational::one())]))
    }

    /// Normalizes a weighted list of beliefs, merging identical atoms.
    pub fn from_weights(
        atoms: impl IntoIterator<Item = (Belief, Rational)>,
    ) -> Result<SecondOrder, SignalError> {
        let mut m = BTreeMap::new();
        for (p, w) in atoms {
            add_to(&mut m, p, w);
        }
        let total = m.values().fold(Rational::zero(), |a, b| a + b);
        if !total.is_positive() {
            return Err(SignalError::ZeroProbability);
        }
        Ok(SecondOrder(
            m.into_iter().map(|(p, w)| (p, w / &total)).collect(),
        ))
    }

    pub fn atoms(&self) -> impl Iterator<Item = (&Belief, &Rational)> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The absorbing state this belief is certain of, when it is a point
    /// mass on a point mass.
    pub fn certain(&self) -> Option<usize> {
        if self.0.len() != 1 {
            return None;
        }
        self.0.keys().next().and_then(Belief::certain)
    }
}

impl ImageDist {
    pub fn point(x: SecondOrder) -> ImageDist {
        ImageDist(BTreeMap::from([(x, Rational::one())]))
    }

    pub fn from_weights(
        atoms: impl IntoIterator<Item = (SecondOrder, Rational)>,
    ) -> Result<ImageDist, SignalError> {
        let mut m = BTreeMap::new();
        for (x, w) in atoms {
            add_to(&mut m, x, w);
        }
        let total = m.values().fold(Rational::zero(), |a, b| a + b);
        if !total.is_positive() {
            return Err(SignalError::ZeroProbability);
        }
        Ok(ImageDist(
            m.into_iter().map(|(x, w)| (x, w / &total)).collect(),
        ))
    }
}

impl fmt::Display for Belief {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(format_rational).collect();
        write!(f, "({})", parts.join(", "))
    }
}

impl fmt::Display for SecondOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|(p, w)| format!("{}·{p}", format_rational(w)))
            .collect();
        write!(f, "[{}]", parts.join(" + "))
    }
}

impl fmt::Display for ImageDist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|(x, w)| format!("{}·{x}", format_rational(w)))
            .collect();
        write!(f, "{{{}}}", parts.join(" + "))
    }
}

/// Player 2's second-order belief after each of his stage-1 signals, with
/// the signal's probability.
pub fn second_order_by_signal(
    pi: &InitialDist,
    n_states: usize,
) -> Result<BTreeMap<usize, (Rational, SecondOrder)>, SignalError> {
    pi.d_of_c()?;
    let mut joint: BTreeMap<usize, BTreeMap<usize, Vec<Rational>>> = BTreeMap::new();
    for ((k, c, d), p) in &pi.mass {
        let row = joint
            .entry(*d)
            .or_default()
            .entry(*c)
            .or_insert_with(|| vec![Rational::zero(); n_states]);
        row[*k] += p;
    }
    let mut out = BTreeMap::new();
    for (d, by_c) in joint {
        let mut atoms = Vec::new();
        let mut pd = Rational::zero();
        for (_, row) in by_c {
            let pc = row.iter().fold(Rational::zero(), |a, b| a + b);
            pd += &pc;
            atoms.push((Belief::from_weights(row)?, pc));
        }
        out.insert(d, (pd, SecondOrder::from_weights(atoms)?));
    }
    Ok(out)
}

/// The image of an initial distribution: the law of player 2's second-order
/// belief at stage 1.
pub fn image(pi: &InitialDist, n_states: usize) -> Result<ImageDist, SignalError> {
    let by_d = second_order_by_signal(pi, n_states)?;
    ImageDist::from_weights(by_d.into_values().map(|(p, x)| (x, p)))
}

/// An initial distribution whose image is a given `η`, with the labels of
/// its signals: player 2 learns his second-order belief `x`, player 1
/// learns `x` and his own belief `p`.
#[derive(Clone, Debug, PartialEq)]
pub struct CanonicalDist {
    pub dist: InitialDist,
    /// Player 2 signal `d` stands for `second_order[d]`.
    pub second_order: Vec<SecondOrder>,
    /// Player 1 signal `c` stands for `(second_order[d], belief)`.
    pub first_order: Vec<(usize, Belief)>,
}

pub fn canonical_pi(eta: &ImageDist) -> CanonicalDist {
    let mut out = CanonicalDist {
        dist: InitialDist::default(),
        second_order: Vec::new(),
        first_order: Vec::new(),
    };
    for (d, (x, wx)) in eta.0.iter().enumerate() {
        out.second_order.push(x.clone());
        out.dist.signals_2.push(format!("x{d}"));
        for (p, wp) in x.atoms() {
            let c = out.first_order.len();
            out.first_order.push((d, p.clone()));
            out.dist.signals_1.push(format!("x{d}.p{c}"));
            for (k, pk) in p.0.iter().enumerate() {
                let m = wx * wp * pk;
                if !m.is_zero() {
                    out.dist.mass.insert((k, c, d), m);
                }
            }
        }
    }
    out
}

/// Player 1's private history: his stage-1 signal, then one game signal per
/// later stage. His own past actions are read off the later signals.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct P1History {
    pub first: usize,
    pub later: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct P2History {
    pub first: usize,
    pub later: Vec<usize>,
}

impl P1History {
    pub fn stage(&self) -> usize {
        self.later.len() + 1
    }

    pub fn prefix(&self, stage: usize) -> P1History {
        P1History {
            first: self.first,
            later: self.later[..stage - 1].to_vec(),
        }
    }

    /// What player 2 saw along this history.
    pub fn public(&self, sg: &SignalGame, d_of_c: &BTreeMap<usize, usize>) -> Option<P2History> {
        Some(P2History {
            first: *d_of_c.get(&self.first)?,
            later: self.later.iter().map(|&c| sg.d_hat[c]).collect(),
        })
    }

    pub fn extend(&self, c: usize) -> P1History {
        let mut later = self.later.clone();
        later.push(c);
        P1History {
            first: self.first,
            later,
        }
    }
}

impl P2History {
    pub fn stage(&self) -> usize {
        self.later.len() + 1
    }

    pub fn prefix(&self, stage: usize) -> P2History {
        P2History {
            first: self.first,
            later: self.later[..stage - 1].to_vec(),
        }
    }

    pub fn extend(&self, d: usize) -> P2History {
        let mut later = self.later.clone();
        later.push(d);
        P2History {
            first: self.first,
            later,
        }
    }
}

/// A behavior strategy of player 1: mixed action after each private history.
pub trait P1Strategy {
    fn mixed(&self, h: &P1History) -> Vec<Rational>;
}

pub trait P2Strategy {
    fn mixed(&self, h: &P2History) -> Vec<Rational>;
}

impl<F: Fn(&P1History) -> Vec<Rational>> P1Strategy for F {
    fn mixed(&self, h: &P1History) -> Vec<Rational> {
        self(h)
    }
}

/// Wraps a closure on player 2 histories.
pub struct P2Fn<F>(pub F);

impl<F: Fn(&P2History) -> Vec<Rational>> P2Strategy for P2Fn<F> {
    fn mixed(&self, h: &P2History) -> Vec<Rational> {
        (self.0)(h)
    }
}

/// Unnormalized forward filter along player 1's signals: the joint mass of
/// the current state and the signals so far, ignoring action probabilities.
fn filter(sg: &SignalGame, pi: &InitialDist, h: &P1History) -> Vec<Rational> {
    let n = sg.n_states();
    let mut alpha = vec![Rational::zero(); n];
    for ((k, c, _), p) in &pi.mass {
        if *c == h.first {
            alpha[*k] += p;
        }
    }
    for &c in &h.later {
        alpha = step(sg, &alpha, c);
    }
    alpha
}

/// One filter step on receiving game signal `c`.
fn step(sg: &SignalGame, alpha: &[Rational], c: usize) -> Vec<Rational> {
    let (i, d) = (sg.i_hat[c], sg.d_hat[c]);
    let j = sg.j_hat[d];
    let mut next = vec![Rational::zero(); alpha.len()];
    for (k, a) in alpha.iter().enumerate() {
        if a.is_zero() {
            continue;
        }
        for o in sg.transition(k, i, j) {
            if o.c == c {
                next[o.state] += a * &o.prob;
            }
        }
    }
    next
}

/// Player 1's belief over the current state after his private history.
///
/// The probabilities of both players' actions cancel in Bayes' rule, so the
/// result depends on neither strategy.
pub fn update_p(sg: &SignalGame, pi: &InitialDist, h: &P1History) -> Result<Belief, SignalError> {
    Belief::from_weights(filter(sg, pi, h))
}

/// Player 2's belief over player 1's belief after his private history, when
/// player 1 plays `sigma`. Player 2's own strategy plays no role.
pub fn update_x(
    sg: &SignalGame,
    pi: &InitialDist,
    sigma: &dyn P1Strategy,
    h: &P2History,
) -> Result<SecondOrder, SignalError> {
    // Player 1 histories consistent with h, with their forward masses
    // including player 1's own action probabilities.
    let mut layer: Vec<(P1History, Vec<Rational>)> = Vec::new();
    let d_of_c = pi.d_of_c()?;
    for (&c, &d) in &d_of_c {
        if d == h.first {
            let h1 = P1History {
                first: c,
                later: Vec::new(),
            };
            let alpha = filter(sg, pi, &h1);
            layer.push((h1, alpha));
        }
    }
    for &d in &h.later {
        let mut next = Vec::new();
        for (h1, alpha) in &layer {
            let s = sigma.mixed(h1);
            for c in (0..sg.signals_1.len()).filter(|&c| sg.d_hat[c] == d) {
                let w = &s[sg.i_hat[c]];
                if w.is_zero() {
                    continue;
                }
                let a2: Vec<Rational> = step(sg, alpha, c).into_iter().map(|x| x * w).collect();
                if a2.iter().any(|x| !x.is_zero()) {
                    next.push((h1.extend(c), a2));
                }
            }
        }
        layer = next;
    }
    let mut atoms = Vec::with_capacity(layer.len());
    for (_, alpha) in layer {
        let m = alpha.iter().fold(Rational::zero(), |a, b| a + b);
        if m.is_positive() {
            atoms.push((Belief::from_weights(alpha)?, m));
        }
    }
    SecondOrder::from_weights(atoms)
}

/// One full play prefix: states `k_1..k_t` and both players' histories.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Play {
    pub states: Vec<usize>,
    pub h1: P1History,
    pub h2: P2History,
}

/// Exact law of the first `t` stages under `(π, σ, τ)`, by enumeration.
pub fn play_law(
    sg: &SignalGame,
    pi: &InitialDist,
    sigma: &dyn P1Strategy,
    tau: &dyn P2Strategy,
    t: usize,
) -> Vec<(Play, Rational)> {
    let mut layer: Vec<(Play, Rational)> = pi
        .mass
        .iter()
        .map(|((k, c, d), p)| {
            let play = Play {
                states: vec![*k],
                h1: P1History {
                    first: *c,
                    later: Vec::new(),
                },
                h2: P2History {
                    first: *d,
                    later: Vec::new(),
                },
            };
            (play, p.clone())
        })
        .collect();
    for _ in 1..t {
        let mut next = Vec::new();
        for (play, p) in layer {
            let k = *play.states.last().unwrap();
            let s = sigma.mixed(&play.h1);
            let r = tau.mixed(&play.h2);
            for (i, si) in s.iter().enumerate().filter(|(_, x)| !x.is_zero()) {
                for (j, rj) in r.iter().enumerate().filter(|(_, x)| !x.is_zero()) {
                    for o in sg.transition(k, i, j) {
                        let mut states = play.states.clone();
                        states.push(o.state);
                        let np = Play {
                            states,
                            h1: play.h1.extend(o.c),
                            h2: play.h2.extend(o.d),
                        };
                        next.push((np, &p * si * rj * &o.prob));
                    }
                }
            }
        }
        layer = next;
    }
    layer
}

/// Player 1's beliefs and player 2's second-order beliefs, by history.
pub type BeliefTables = (
    BTreeMap<P1History, Belief>,
    BTreeMap<P2History, SecondOrder>,
);

/// Conditional laws computed directly from the play law: player 1's belief
/// given each of his histories and player 2's second-order belief given
/// each of his.
pub fn beliefs_by_enumeration(
    sg: &SignalGame,
    law: &[(Play, Rational)],
) -> Result<BeliefTables, SignalError> {
    let n = sg.n_states();
    let mut by_h1: BTreeMap<P1History, Vec<Rational>> = BTreeMap::new();
    for (play, p) in law {
        let row = by_h1
            .entry(play.h1.clone())
            .or_insert_with(|| vec![Rational::zero(); n]);
        row[*play.states.last().unwrap()] += p;
    }
    let mut p_of: BTreeMap<P1History, Belief> = BTreeMap::new();
    let mut mass_h1: BTreeMap<P1History, Rational> = BTreeMap::new();
    for (h1, row) in by_h1 {
        let m = row.iter().fold(Rational::zero(), |a, b| a + b);
        if m.is_positive() {
            p_of.insert(h1.clone(), Belief::from_weights(row)?);
            mass_h1.insert(h1, m);
        }
    }
    let mut by_h2: BTreeMap<P2History, BTreeMap<P1History, Rational>> = BTreeMap::new();
    for (play, p) in law {
        if p.is_positive() {
            add_to(
                by_h2.entry(play.h2.clone()).or_default(),
                play.h1.clone(),
                p.clone(),
            );
        }
    }
    let mut x_of = BTreeMap::new();
    for (h2, hs) in by_h2 {
        let atoms = hs.into_iter().map(|(h1, w)| (p_of[&h1].clone(), w));
        x_of.insert(h2, SecondOrder::from_weights(atoms)?);
    }
    Ok((p_of, x_of))
}
