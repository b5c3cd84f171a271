//! The recursive game on second-order beliefs.
//!
//! A state is player 2's belief over player 1's belief, or an absorbing
//! state of the signal game. Player 1 chooses a mixed action for each belief
//! in the support, player 2 a mixed action; the next state is the image of
//! the joint law of the next state and signals.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use num_traits::{One, Zero};
use recgame_core::lp::{LinearProgram, Relation};
use recgame_core::matrix::{self, MatrixGame};
use recgame_core::state::rational_to_f64;
use recgame_core::Rational;

use crate::belief::{image, Belief, ImageDist, SecondOrder};
use crate::game::{InitialDist, SignalError, SignalGame};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BeliefState {
    Active(SecondOrder),
    Absorbed(usize),
}

pub struct BeliefGame<'a> {
    pub game: &'a SignalGame,
    announces: Vec<Option<usize>>,
}

/// A linear expression over LP variables.
#[derive(Clone, Debug, Default)]
struct Expr {
    terms: Vec<(usize, f64)>,
    constant: f64,
}

impl Expr {
    fn constant(c: f64) -> Expr {
        Expr {
            terms: Vec::new(),
            constant: c,
        }
    }

    fn var(v: usize, coef: f64) -> Expr {
        Expr {
            terms: vec![(v, coef)],
            constant: 0.0,
        }
    }

    fn add(&mut self, other: &Expr, scale: f64) {
        self.terms
            .extend(other.terms.iter().map(|(v, c)| (*v, c * scale)));
        self.constant += other.constant * scale;
    }
}

struct LpBuilder {
    objective: Vec<f64>,
    free: Vec<bool>,
    rows: Vec<(Expr, Relation)>,
    cap: usize,
}

impl LpBuilder {
    fn var(&mut self, free: bool) -> Result<usize, SignalError> {
        if self.objective.len() >= self.cap {
            return Err(SignalError::TooLarge {
                what: "belief program",
                size: self.objective.len() + 1,
                cap: self.cap,
            });
        }
        self.objective.push(0.0);
        self.free.push(free);
        Ok(self.objective.len() - 1)
    }

    /// Adds `e rel 0`.
    fn row(&mut self, e: Expr, rel: Relation) {
        self.rows.push((e, rel));
    }

    fn solve(self) -> Result<f64, SignalError> {
        let n = self.objective.len();
        let mut lp = LinearProgram::new(n);
        lp.objective = self.objective;
        for (j, f) in self.free.iter().enumerate() {
            if *f {
                lp.set_free(j);
            }
        }
        for (e, rel) in self.rows {
            let mut coeffs = vec![0.0; n];
            for (v, c) in e.terms {
                coeffs[v] += c;
            }
            lp.add(coeffs, rel, -e.constant);
        }
        Ok(lp.solve()?.objective)
    }
}

/// Values `w_n` at the belief states reachable from a root under pure
/// actions.
#[derive(Clone, Debug)]
pub struct BeliefValues {
    pub horizon: usize,
    pub states: Vec<BeliefState>,
    pub depth: Vec<usize>,
    /// `values[s][n − 1] = w_n(states[s])` for `n ≤ horizon − depth[s]`.
    pub values: Vec<Vec<f64>>,
    /// `w_n` at the root distribution, for `n = 1..=horizon`.
    pub root: Vec<f64>,
}

impl BeliefValues {
    pub fn value(&self, x: &BeliefState, n: usize) -> Option<f64> {
        let s = self.states.iter().position(|y| y == x)?;
        self.values[s].get(n.checked_sub(1)?).copied()
    }
}

impl<'a> BeliefGame<'a> {
    pub fn new(game: &'a SignalGame) -> Self {
        BeliefGame {
            game,
            announces: game.absorbing_signal_states(),
        }
    }

    /// Identifies the belief that is certain of an absorbing state with that state.
    pub fn state_of(&self, x: SecondOrder) -> BeliefState {
        match x.certain() {
            Some(k) if self.game.is_absorbing(k) => BeliefState::Absorbed(k),
            _ => BeliefState::Active(x),
        }
    }

    /// Expected stage payoff under a second-order belief.
    pub fn payoff_of(&self, x: &SecondOrder) -> Rational {
        let mut total = Rational::zero();
        for (p, w) in x.atoms() {
            for (k, pk) in p.0.iter().enumerate() {
                if !pk.is_zero() {
                    total += w * pk * self.game.payoff(k);
                }
            }
        }
        total
    }

    pub fn payoff(&self, x: &BeliefState) -> Rational {
        match x {
            BeliefState::Absorbed(k) => self.game.payoff(*k),
            BeliefState::Active(x) => self.payoff_of(x),
        }
    }

    /// Joint law of the next state and signals in the canonical game started
    /// at `x`, when player 1 plays `a[atom]` at each atom of `x` (in order)
    /// and player 2 plays `b`. Player 1's new signal is `(atom, c)`.
    pub fn joint(&self, x: &SecondOrder, a: &[Vec<Rational>], b: &[Rational]) -> InitialDist {
        let sg = self.game;
        let nc = sg.signals_1.len();
        let mut out = InitialDist::default();
        for (atom, (p, wp)) in x.atoms().enumerate() {
            for (i, ai) in a[atom].iter().enumerate() {
                for (j, bj) in b.iter().enumerate() {
                    let w = wp * ai * bj;
                    if w.is_zero() {
                        continue;
                    }
                    for (k, pk) in p.0.iter().enumerate() {
                        if pk.is_zero() {
                            continue;
                        }
                        for o in sg.transition(k, i, j) {
                            let key = (o.state, atom * nc + o.c, o.d);
                            *out.mass.entry(key).or_insert_with(Rational::zero) +=
                                &w * pk * &o.prob;
                        }
                    }
                }
            }
        }
        out
    }

    /// The transition: law of the next belief state.
    pub fn transition(
        &self,
        x: &BeliefState,
        a: &[Vec<Rational>],
        b: &[Rational],
    ) -> Result<BTreeMap<BeliefState, Rational>, SignalError> {
        let x = match x {
            BeliefState::Absorbed(k) => {
                return Ok(BTreeMap::from([(
                    BeliefState::Absorbed(*k),
                    Rational::one(),
                )]))
            }
            BeliefState::Active(x) => x,
        };
        let eta = image(&self.joint(x, a, b), self.game.n_states())?;
        let mut out = BTreeMap::new();
        for (y, w) in eta.0 {
            *out.entry(self.state_of(y)).or_insert_with(Rational::zero) += w;
        }
        Ok(out)
    }

    /// The distribution `η` read as a law over belief states.
    pub fn states_of(&self, eta: &ImageDist) -> BTreeMap<BeliefState, Rational> {
        let mut out = BTreeMap::new();
        for (y, w) in &eta.0 {
            *out.entry(self.state_of(y.clone()))
                .or_insert_with(Rational::zero) += w;
        }
        out
    }

    fn point_action(&self, i: usize) -> Vec<Rational> {
        let mut v = vec![Rational::zero(); self.game.actions_1.len()];
        v[i] = Rational::one();
        v
    }

    fn point_action_2(&self, j: usize) -> Vec<Rational> {
        let mut v = vec![Rational::zero(); self.game.actions_2.len()];
        v[j] = Rational::one();
        v
    }

    /// Every map from the atoms of `x` to pure actions.
    pub fn pure_maps(&self, x: &SecondOrder) -> Vec<Vec<usize>> {
        let ni = self.game.actions_1.len();
        let mut out = vec![Vec::new()];
        for _ in 0..x.len() {
            out = out
                .into_iter()
                .flat_map(|m| (0..ni).map(move |i| [m.clone(), vec![i]].concat()))
                .collect();
        }
        out
    }

    /// Successor law under a pure map and a pure action of player 2.
    pub fn pure_transition(
        &self,
        x: &BeliefState,
        map: &[usize],
        j: usize,
    ) -> Result<BTreeMap<BeliefState, Rational>, SignalError> {
        let a: Vec<Vec<Rational>> = map.iter().map(|&i| self.point_action(i)).collect();
        self.transition(x, &a, &self.point_action_2(j))
    }

    /// Belief states reachable from `roots` within `depth` transitions under
    /// pure actions, in breadth-first order with their depths.
    pub fn reachable(
        &self,
        roots: impl IntoIterator<Item = BeliefState>,
        depth: usize,
        cap: usize,
    ) -> Result<Vec<(BeliefState, usize)>, SignalError> {
        let mut seen: BTreeSet<BeliefState> = BTreeSet::new();
        let mut out = Vec::new();
        let mut queue = VecDeque::new();
        for r in roots {
            if seen.insert(r.clone()) {
                queue.push_back((r, 0));
            }
        }
        while let Some((x, d)) = queue.pop_front() {
            out.push((x.clone(), d));
            if out.len() > cap {
                return Err(SignalError::TooLarge {
                    what: "belief state set",
                    size: out.len(),
                    cap,
                });
            }
            let BeliefState::Active(ref sx) = x else {
                continue;
            };
            if d == depth {
                continue;
            }
            for map in self.pure_maps(sx) {
                for j in 0..self.game.actions_2.len() {
                    for y in self.pure_transition(&x, &map, j)?.into_keys() {
                        if seen.insert(y.clone()) {
                            queue.push_back((y, d + 1));
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// `w_n(x)`, the n-stage value of the belief game.
    ///
    /// The Shapley recursion is unrolled into one linear program: at every
    /// node of player 2's signal tree, player 1 chooses a mixed action per
    /// belief (in realization-weight form), player 2 a pure action, and the
    /// node value is bounded by the sum of its children's values under each
    /// action of player 2. Mixed actions per belief matter: player 2 does
    /// not see player 1's action, so the continuation value is concave in
    /// player 1's mixing, and mixtures over pure maps can fall short.
    pub fn value(&self, x: &BeliefState, n: usize, cap: usize) -> Result<f64, SignalError> {
        if n == 0 {
            return Err(SignalError::Invalid("horizon must be at least 1".into()));
        }
        let sx = match x {
            BeliefState::Absorbed(k) => return Ok(rational_to_f64(&self.game.payoff(*k))),
            BeliefState::Active(sx) => sx,
        };
        let mut b = LpBuilder {
            objective: Vec::new(),
            free: Vec::new(),
            rows: Vec::new(),
            cap,
        };
        let atoms: Vec<(Belief, Expr)> = sx
            .atoms()
            .map(|(p, w)| (p.clone(), Expr::constant(rational_to_f64(w))))
            .collect();
        let root = self.node(&mut b, atoms, 1, n)?;
        let stage_one = rational_to_f64(&self.payoff_of(sx));
        match root.terms.first() {
            Some(&(v, _)) => {
                b.objective[v] = 1.0;
                Ok((b.solve()? + stage_one) / n as f64)
            }
            None => Ok((root.constant + stage_one) / n as f64),
        }
    }

    /// Builds the program for a node at `stage` whose atoms carry the given
    /// mass expressions; returns the expression for the node's total payoff
    /// over stages `stage + 1..=n`.
    fn node(
        &self,
        b: &mut LpBuilder,
        atoms: Vec<(Belief, Expr)>,
        stage: usize,
        n: usize,
    ) -> Result<Expr, SignalError> {
        if stage == n {
            return Ok(Expr::constant(0.0));
        }
        let sg = self.game;
        let (ni, nj) = (sg.actions_1.len(), sg.actions_2.len());
        // Realization weights r[atom][i].
        let mut r = Vec::with_capacity(atoms.len());
        for (_, mass) in &atoms {
            let vars: Vec<usize> = (0..ni).map(|_| b.var(false)).collect::<Result<_, _>>()?;
            let mut flow = Expr::default();
            vars.iter().for_each(|&v| flow.add(&Expr::var(v, 1.0), 1.0));
            flow.add(mass, -1.0);
            b.row(flow, Relation::Eq);
            r.push(vars);
        }
        let t = b.var(true)?;
        for j in 0..nj {
            let mut bound = Expr::var(t, 1.0);
            for d in (0..sg.signals_2.len()).filter(|&d| sg.j_hat[d] == j) {
                // Children atoms keyed by belief, merging identical ones.
                let mut kids: BTreeMap<Belief, Expr> = BTreeMap::new();
                for (a, (p, _)) in atoms.iter().enumerate() {
                    for c in (0..sg.signals_1.len()).filter(|&c| sg.d_hat[c] == d) {
                        let i = sg.i_hat[c];
                        let mut row = vec![Rational::zero(); sg.n_states()];
                        for (k, pk) in p.0.iter().enumerate() {
                            if pk.is_zero() {
                                continue;
                            }
                            for o in sg.transition(k, i, j).iter().filter(|o| o.c == c) {
                                row[o.state] += pk * &o.prob;
                            }
                        }
                        let m = row.iter().fold(Rational::zero(), |s, x| s + x);
                        if m.is_zero() {
                            continue;
                        }
                        let m = rational_to_f64(&m);
                        kids.entry(Belief::from_weights(row)?)
                            .or_default()
                            .add(&Expr::var(r[a][i], m), 1.0);
                    }
                }
                if kids.is_empty() {
                    continue;
                }
                let value = match self.announces[d] {
                    Some(k) => {
                        let g = rational_to_f64(&sg.payoff(k)) * (n - stage) as f64;
                        let mut e = Expr::default();
                        kids.values().for_each(|m| e.add(m, g));
                        e
                    }
                    None => self.node(b, kids.into_iter().collect(), stage + 1, n)?,
                };
                bound.add(&value, -1.0);
            }
            b.row(bound, Relation::Le);
        }
        Ok(Expr::var(t, 1.0))
    }

    /// `w_1..w_horizon` at every belief state reachable from `root` within
    /// `horizon − 1` pure transitions, each `w_n` at states of depth at most
    /// `horizon − n`.
    pub fn values(
        &self,
        root: &ImageDist,
        horizon: usize,
        cap: usize,
    ) -> Result<BeliefValues, SignalError> {
        let roots = self.states_of(root);
        let reach = self.reachable(roots.keys().cloned(), horizon.saturating_sub(1), cap)?;
        let mut out = BeliefValues {
            horizon,
            states: Vec::with_capacity(reach.len()),
            depth: Vec::with_capacity(reach.len()),
            values: Vec::with_capacity(reach.len()),
            root: Vec::new(),
        };
        for (x, d) in reach {
            let row = (1..=horizon - d)
                .map(|n| self.value(&x, n, cap))
                .collect::<Result<Vec<_>, _>>()?;
            out.states.push(x);
            out.depth.push(d);
            out.values.push(row);
        }
        for n in 1..=horizon {
            let mut total = 0.0;
            for (x, w) in &roots {
                total += rational_to_f64(w) * out.value(x, n).expect("root values computed");
            }
            out.root.push(total);
        }
        Ok(out)
    }

    /// Value iteration restricted to pure maps from beliefs to actions, with
    /// mixing over maps. Player 2 learns the realized map through the
    /// transition, so this is a lower bound on `w_n`; it is exact when
    /// player 2 observes player 1's actions.
    pub fn pure_map_value(&self, x: &BeliefState, n: usize) -> Result<f64, SignalError> {
        let mut memo = BTreeMap::new();
        self.pure_map_rec(x, n, &mut memo)
    }

    fn pure_map_rec(
        &self,
        x: &BeliefState,
        n: usize,
        memo: &mut BTreeMap<(BeliefState, usize), f64>,
    ) -> Result<f64, SignalError> {
        let g = rational_to_f64(&self.payoff(x));
        let sx = match x {
            BeliefState::Active(sx) if n > 1 => sx,
            _ => return Ok(g),
        };
        if let Some(v) = memo.get(&(x.clone(), n)) {
            return Ok(*v);
        }
        let maps = self.pure_maps(sx);
        let nj = self.game.actions_2.len();
        let m = (n - 1) as f64;
        let mut data = Vec::with_capacity(maps.len() * nj);
        for map in &maps {
            for j in 0..nj {
                let mut e = g / n as f64;
                for (y, w) in self.pure_transition(x, map, j)? {
                    e += rational_to_f64(&w) * m / n as f64 * self.pure_map_rec(&y, n - 1, memo)?;
                }
                data.push(e);
            }
        }
        let game = MatrixGame::new(maps.len(), nj, data)
            .map_err(|e| SignalError::Invalid(e.to_string()))?;
        let v = matrix::solve(&game, matrix::DEFAULT_TOL)
            .map_err(|e| SignalError::Invalid(e.to_string()))?
            .value;
        memo.insert((x.clone(), n), v);
        Ok(v)
    }
}
