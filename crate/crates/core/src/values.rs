//! n-stage values by Shapley iteration, discounted values, and convergence diagnostics.
//!
//! For an active state the n-stage value satisfies
//! `v_{n+1}(x) = n/(n+1) · val E_{q(x,a,b)}[v_n]` and `v_n(k) = g(k)` at absorbing `k`.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::explore::{ExploredSet, Node};
use crate::game::{GameError, GameModel, StateKind};
use crate::matrix::{self, MatrixGame, SolveError};
use crate::state::{rational_to_f64, StateId};

/// Finite partial map from states to values.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValueFunction {
    values: BTreeMap<StateId, f64>,
}

impl ValueFunction {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, x: &StateId) -> Option<f64> {
        self.values.get(x).copied()
    }

    pub fn insert(&mut self, x: StateId, v: f64) {
        self.values.insert(x, v);
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&StateId, f64)> {
        self.values.iter().map(|(k, v)| (k, *v))
    }

    /// Sup-norm distance over the common domain.
    pub fn sup_distance(&self, other: &ValueFunction) -> f64 {
        self.values
            .iter()
            .filter_map(|(k, a)| other.values.get(k).map(|b| (a - b).abs()))
            .fold(0.0, f64::max)
    }
}

impl FromIterator<(StateId, f64)> for ValueFunction {
    fn from_iter<I: IntoIterator<Item = (StateId, f64)>>(iter: I) -> Self {
        ValueFunction {
            values: iter.into_iter().collect(),
        }
    }
}

/// Optimal mixed actions of both players in one stage game.
#[derive(Clone, Debug, PartialEq)]
pub struct StageProfile {
    pub row: Vec<f64>,
    pub col: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ValuesError {
    #[error(transparent)]
    Game(#[from] GameError),
    #[error("stage game at {state} (n = {n}) failed: {source}")]
    Solve {
        state: StateId,
        n: usize,
        source: SolveError,
    },
    #[error("no value for successor {successor} of {state}; explored set too small")]
    MissingSuccessor { state: StateId, successor: StateId },
    #[error("{0}")]
    BadParameter(String),
    #[error("no convergence after {sweeps} sweeps (residual {residual:e})")]
    NoConvergence { sweeps: usize, residual: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub enum DepthPolicy {
    /// Explore to depth N and update at step k only the states of depth ≤ N − k:
    /// exactly what the horizon-N value at the roots depends on.
    Horizon,
    /// Explore to a fixed depth and iterate on the whole explored set.
    Truncated(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Recording {
    All,
    Watch(Vec<StateId>),
}

#[derive(Clone, Debug)]
pub struct VnOptions {
    pub depth: DepthPolicy,
    pub recording: Recording,
    pub record_profiles: bool,
    pub state_cap: usize,
    pub tol: f64,
}

impl Default for VnOptions {
    fn default() -> Self {
        VnOptions {
            depth: DepthPolicy::Horizon,
            recording: Recording::All,
            record_profiles: true,
            state_cap: 4_000_000,
            tol: matrix::DEFAULT_TOL,
        }
    }
}

/// A step where the drift bound `‖v_n − v_{n+1}‖ ≤ 2/(n+1)` failed.
#[derive(Clone, Debug, PartialEq)]
pub struct DriftViolation {
    pub n: usize,
    pub drift: f64,
    pub state: StateId,
}

/// Values `v_0..v_N` at the recorded states, with truncation brackets.
///
/// `lower[n][i]` is computed with frontier states valued at the pessimistic
/// payoff bound, `upper[n][i]` with the optimistic one; they coincide when no
/// frontier can influence the state. Entries not determined by the explored
/// set are NaN.
#[derive(Clone, Debug)]
pub struct ValueSequence {
    pub horizon: usize,
    pub states: Vec<StateId>,
    pub nodes: Vec<Node>,
    pub lower: Vec<Vec<f64>>,
    pub upper: Vec<Vec<f64>>,
    /// `profiles[n][i]`: first-stage optimal actions of the n-stage game (n ≥ 1).
    pub profiles: Vec<Vec<Option<StageProfile>>>,
    /// `drift[n] = ‖v_n − v_{n+1}‖∞` over the explored set, for n = 0..N−1.
    pub drift: Vec<f64>,
    pub drift_violations: Vec<DriftViolation>,
    pub explored: usize,
    pub frontier: usize,
    index: BTreeMap<StateId, usize>,
}

impl ValueSequence {
    pub fn index_of(&self, x: &StateId) -> Option<usize> {
        self.index.get(x).copied()
    }

    /// `v_n(x)` (lower bracket), if determined.
    pub fn value(&self, n: usize, x: &StateId) -> Option<f64> {
        let i = self.index_of(x)?;
        let v = *self.lower.get(n)?.get(i)?;
        v.is_finite().then_some(v)
    }

    pub fn bracket(&self, n: usize, x: &StateId) -> Option<(f64, f64)> {
        let i = self.index_of(x)?;
        let lo = self.lower.get(n)?[i];
        let hi = self.upper.get(n)?[i];
        (lo.is_finite() && hi.is_finite()).then_some((lo, hi))
    }

    pub fn profile(&self, n: usize, x: &StateId) -> Option<&StageProfile> {
        let i = self.index_of(x)?;
        self.profiles.get(n)?.get(i)?.as_ref()
    }

    pub fn value_function(&self, n: usize) -> ValueFunction {
        self.states
            .iter()
            .zip(&self.lower[n])
            .filter(|(_, v)| v.is_finite())
            .map(|(s, v)| (s.clone(), *v))
            .collect()
    }

    pub fn is_active(&self, i: usize) -> bool {
        self.nodes[i] == Node::Active
    }

    /// Largest gap between brackets at step `n` over the recorded states
    /// that are not on the frontier.
    pub fn bracket_gap(&self, n: usize) -> f64 {
        self.lower[n]
            .iter()
            .zip(&self.upper[n])
            .zip(&self.nodes)
            .filter(|((a, b), node)| **node != Node::Frontier && a.is_finite() && b.is_finite())
            .map(|((a, b), _)| b - a)
            .fold(0.0, f64::max)
    }
}

fn solve_err(ex: &ExploredSet, i: usize, n: usize) -> impl Fn(SolveError) -> ValuesError + '_ {
    move |source| ValuesError::Solve {
        state: ex.states[i].clone(),
        n,
        source,
    }
}

/// `val E[prev]` at state `i`, optionally with the optimal profile.
fn stage_value(
    ex: &ExploredSet,
    i: usize,
    prev: &[f64],
    tol: f64,
    want_profile: bool,
    n: usize,
) -> Result<(f64, Option<StageProfile>), ValuesError> {
    let (na, nb) = ex.action_counts(i);
    if nb == 1 || na == 1 {
        // One player moves: optimize directly, first optimal action wins ties.
        let maximize = nb == 1;
        let k = if maximize { na } else { nb };
        let mut best = 0;
        let mut best_v = f64::NAN;
        for c in 0..k {
            let (a, b) = if maximize { (c, 0) } else { (0, c) };
            let v = ex.expect(i, a, b, prev);
            let better = best_v.is_nan() || if maximize { v > best_v } else { v < best_v };
            if better {
                best_v = v;
                best = c;
            }
        }
        let profile = want_profile.then(|| {
            let mut pure = vec![0.0; k];
            pure[best] = 1.0;
            if maximize {
                StageProfile {
                    row: pure,
                    col: vec![1.0],
                }
            } else {
                StageProfile {
                    row: vec![1.0],
                    col: pure,
                }
            }
        });
        return Ok((best_v, profile));
    }
    let mut data = Vec::with_capacity(na * nb);
    for a in 0..na {
        for b in 0..nb {
            data.push(ex.expect(i, a, b, prev));
        }
    }
    let g = MatrixGame::new(na, nb, data).map_err(solve_err(ex, i, n))?;
    let s = matrix::solve(&g, tol).map_err(solve_err(ex, i, n))?;
    let profile = want_profile.then_some(StageProfile {
        row: s.row_strategy,
        col: s.col_strategy,
    });
    Ok((s.value, profile))
}

fn initial_values(ex: &ExploredSet, frontier_value: f64) -> Vec<f64> {
    ex.nodes
        .iter()
        .map(|n| match n {
            Node::Active => 0.0,
            Node::Absorbing(g) => *g,
            Node::Frontier => frontier_value,
        })
        .collect()
}

fn recorded_indices(ex: &ExploredSet, rec: &Recording) -> Result<Vec<usize>, ValuesError> {
    match rec {
        Recording::All => Ok((0..ex.len()).collect()),
        Recording::Watch(list) => list
            .iter()
            .map(|x| {
                ex.index_of(x).ok_or_else(|| {
                    ValuesError::BadParameter(format!("watched state {x} not reachable"))
                })
            })
            .collect(),
    }
}

/// One Shapley step on an explicit value function: `v_{n+1}` on `states`.
pub fn shapley_step<G: GameModel + ?Sized>(
    game: &G,
    v_prev: &ValueFunction,
    n: usize,
    states: &[StateId],
    tol: f64,
) -> Result<(ValueFunction, BTreeMap<StateId, StageProfile>), ValuesError> {
    let mut out = ValueFunction::new();
    let mut profiles = BTreeMap::new();
    let factor = n as f64 / (n as f64 + 1.0);
    for x in states {
        match game.kind(x) {
            StateKind::Outside => return Err(GameError::UnknownState(x.clone()).into()),
            StateKind::Absorbing(g) => out.insert(x.clone(), rational_to_f64(&g)),
            StateKind::Active => {
                let (na, nb) = game.action_counts(x);
                let mut data = Vec::with_capacity(na * nb);
                for a in 0..na {
                    for b in 0..nb {
                        let mut e = 0.0;
                        for (t, p) in game.transition(x, a, b) {
                            let v =
                                match game.kind(&t) {
                                    StateKind::Absorbing(g) => rational_to_f64(&g),
                                    _ => v_prev.get(&t).ok_or_else(|| {
                                        ValuesError::MissingSuccessor {
                                            state: x.clone(),
                                            successor: t.clone(),
                                        }
                                    })?,
                                };
                            e += rational_to_f64(&p) * v;
                        }
                        data.push(e);
                    }
                }
                let err = |source| ValuesError::Solve {
                    state: x.clone(),
                    n: n + 1,
                    source,
                };
                let g = MatrixGame::new(na, nb, data).map_err(err)?;
                let s = matrix::solve(&g, tol).map_err(err)?;
                out.insert(x.clone(), factor * s.value);
                profiles.insert(
                    x.clone(),
                    StageProfile {
                        row: s.row_strategy,
                        col: s.col_strategy,
                    },
                );
            }
        }
    }
    Ok((out, profiles))
}

/// `v_1..v_N` from `roots` by Shapley iteration.
pub fn compute_vn<G: GameModel + ?Sized>(
    game: &G,
    roots: &[StateId],
    horizon: usize,
    opts: &VnOptions,
) -> Result<ValueSequence, ValuesError> {
    if horizon == 0 {
        return Err(ValuesError::BadParameter(
            "horizon must be at least 1".into(),
        ));
    }
    let max_depth = match opts.depth {
        DepthPolicy::Horizon => horizon,
        DepthPolicy::Truncated(d) => d,
    };
    let ex = ExploredSet::build(game, roots, max_depth, opts.state_cap)?;
    let bound = rational_to_f64(&game.payoff_bound());
    let has_frontier = ex.frontier_count() > 0;
    let restrict = has_frontier && opts.depth == DepthPolicy::Horizon;
    // layer_end[d] = number of states with depth ≤ d
    let max_d = ex.depth.last().copied().unwrap_or(0) as usize;
    let mut layer_end = vec![0usize; max_d + 1];
    for &d in &ex.depth {
        layer_end[d as usize] += 1;
    }
    for d in 1..=max_d {
        layer_end[d] += layer_end[d - 1];
    }
    let region = |k: usize| -> usize {
        if !restrict {
            ex.len()
        } else if k > horizon {
            0
        } else {
            layer_end[(horizon - k).min(max_d)]
        }
    };

    let rec = recorded_indices(&ex, &opts.recording)?;
    // Under the horizon policy no determined state ever reads the frontier,
    // so the two runs must coincide; both are made so that this is checked.
    let brackets: &[f64] = if has_frontier {
        &[-bound, bound]
    } else {
        &[-bound]
    };
    let mut runs: Vec<Vec<Vec<f64>>> = Vec::new();
    let mut drift = vec![0.0f64; horizon];
    let mut violations = Vec::new();
    let mut profiles: Vec<Vec<Option<StageProfile>>> = vec![vec![None; rec.len()]; horizon + 1];

    for (run, &fv) in brackets.iter().enumerate() {
        let mut cur = initial_values(&ex, fv);
        let mut next = cur.clone();
        let mut history = vec![rec.iter().map(|&i| cur[i]).collect::<Vec<f64>>()];
        #[allow(clippy::needless_range_loop)]
        for k in 1..=horizon {
            let n_prev = k - 1;
            let factor = n_prev as f64 / k as f64;
            let upto = region(k);
            // States beyond the previous region are already undetermined.
            let live = region(k - 1).max(upto);
            next.copy_from_slice(&cur);
            let tol = opts.tol;
            let chunk = |(i, slot): (usize, &mut f64)| -> Result<(), ValuesError> {
                if i < upto {
                    if ex.nodes[i] == Node::Active {
                        *slot = factor * stage_value(&ex, i, &cur, tol, false, k)?.0;
                    }
                } else if ex.nodes[i] == Node::Active {
                    *slot = f64::NAN;
                }
                Ok(())
            };
            if live > 4096 {
                next[..live]
                    .par_iter_mut()
                    .enumerate()
                    .try_for_each(chunk)?;
            } else {
                next[..live].iter_mut().enumerate().try_for_each(chunk)?;
            }
            // Drift over states determined at both steps.
            let mut worst = (0.0f64, usize::MAX);
            for i in 0..live {
                let d = (next[i] - cur[i]).abs();
                if d.is_finite() && d > worst.0 {
                    worst = (d, i);
                }
            }
            drift[n_prev] = drift[n_prev].max(worst.0);
            if n_prev >= 1 && worst.0 > 2.0 / (n_prev as f64 + 1.0) + 1e-12 {
                violations.push(DriftViolation {
                    n: n_prev,
                    drift: worst.0,
                    state: ex.states[worst.1].clone(),
                });
            }
            if run == 0 && opts.record_profiles {
                for (r, &i) in rec.iter().enumerate() {
                    if i < upto && ex.nodes[i] == Node::Active {
                        profiles[k][r] = stage_value(&ex, i, &cur, opts.tol, true, k)?.1;
                    }
                }
            }
            history.push(rec.iter().map(|&i| next[i]).collect());
            std::mem::swap(&mut cur, &mut next);
        }
        runs.push(history);
    }
    let upper = runs.pop().unwrap_or_default();
    let lower = runs.pop().unwrap_or_else(|| upper.clone());
    let states: Vec<StateId> = rec.iter().map(|&i| ex.states[i].clone()).collect();
    let index = states
        .iter()
        .enumerate()
        .map(|(r, s)| (s.clone(), r))
        .collect();
    Ok(ValueSequence {
        horizon,
        nodes: rec.iter().map(|&i| ex.nodes[i]).collect(),
        states,
        lower,
        upper,
        profiles,
        drift,
        drift_violations: violations,
        explored: ex.len(),
        frontier: ex.frontier_count(),
        index,
    })
}

/// Discounted values with truncation brackets and stationary optimal profiles.
#[derive(Clone, Debug)]
pub struct DiscountedValues {
    pub lambda: f64,
    pub lower: ValueFunction,
    pub upper: ValueFunction,
    pub residual: f64,
    pub sweeps: usize,
    pub profiles: BTreeMap<StateId, StageProfile>,
    pub explored: usize,
}

#[derive(Clone, Debug)]
pub struct LambdaOptions {
    pub recording: Recording,
    pub max_depth: usize,
    pub state_cap: usize,
}

impl Default for LambdaOptions {
    fn default() -> Self {
        LambdaOptions {
            recording: Recording::All,
            max_depth: usize::MAX,
            state_cap: 4_000_000,
        }
    }
}

/// Fixed point of `w = (1−λ) val E[w]` on active states, by Gauss–Seidel sweeps
/// in reverse breadth-first order, stopped when a full operator application
/// moves no value by more than `tol`.
pub fn compute_v_lambda<G: GameModel + ?Sized>(
    game: &G,
    roots: &[StateId],
    lambda: f64,
    tol: f64,
    opts: &LambdaOptions,
) -> Result<DiscountedValues, ValuesError> {
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err(ValuesError::BadParameter(format!(
            "λ = {lambda} outside (0,1]"
        )));
    }
    if tol <= 0.0 {
        return Err(ValuesError::BadParameter(
            "tolerance must be positive".into(),
        ));
    }
    let bound = rational_to_f64(&game.payoff_bound());
    // Frontier influence after d steps is at most 2·bound·(1−λ)^d.
    let depth = if lambda >= 1.0 {
        1
    } else {
        let d = ((tol / (4.0 * bound)).ln() / (1.0 - lambda).ln()).ceil() as usize + 1;
        d.min(opts.max_depth)
    };
    let ex = ExploredSet::build(game, roots, depth, opts.state_cap)?;
    let has_frontier = ex.frontier_count() > 0;
    let brackets: &[f64] = if has_frontier {
        &[-bound, bound]
    } else {
        &[-bound]
    };
    let rec = recorded_indices(&ex, &opts.recording)?;
    let cap = if lambda >= 1.0 {
        4
    } else {
        (2.0 * (tol / (4.0 * bound)).ln() / (1.0 - lambda).ln()).ceil() as usize + 100
    };
    let factor = 1.0 - lambda;
    let mut results = Vec::new();
    let mut residual_max: f64 = 0.0;
    let mut sweeps_max = 0;
    let mut profiles = BTreeMap::new();
    for (run, &fv) in brackets.iter().enumerate() {
        let mut w = initial_values(&ex, fv);
        let mut sweeps = 0;
        let residual = loop {
            for i in (0..ex.len()).rev() {
                if ex.nodes[i] == Node::Active {
                    w[i] = factor * stage_value(&ex, i, &w, matrix::DEFAULT_TOL, false, 0)?.0;
                }
            }
            sweeps += 1;
            let tw: Vec<f64> = (0..ex.len())
                .into_par_iter()
                .map(|i| {
                    if ex.nodes[i] == Node::Active {
                        stage_value(&ex, i, &w, matrix::DEFAULT_TOL, false, 0).map(|r| factor * r.0)
                    } else {
                        Ok(w[i])
                    }
                })
                .collect::<Result<_, _>>()?;
            let r = tw
                .iter()
                .zip(&w)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            if r <= tol {
                break r;
            }
            if sweeps >= cap {
                return Err(ValuesError::NoConvergence {
                    sweeps,
                    residual: r,
                });
            }
        };
        residual_max = residual_max.max(residual);
        sweeps_max = sweeps_max.max(sweeps);
        if run == 0 {
            for &i in &rec {
                if ex.nodes[i] == Node::Active {
                    if let (_, Some(p)) = stage_value(&ex, i, &w, matrix::DEFAULT_TOL, true, 0)? {
                        profiles.insert(ex.states[i].clone(), p);
                    }
                }
            }
        }
        results.push(
            rec.iter()
                .map(|&i| (ex.states[i].clone(), w[i]))
                .collect::<ValueFunction>(),
        );
    }
    let upper = results.pop().unwrap_or_default();
    let lower = results.pop().unwrap_or_else(|| upper.clone());
    Ok(DiscountedValues {
        lambda,
        lower,
        upper,
        residual: residual_max,
        sweeps: sweeps_max,
        profiles,
        explored: ex.len(),
    })
}

/// Greedy ε-cover of the computed value functions `v_1..v_N`.
#[derive(Clone, Debug, PartialEq)]
pub struct EpsilonNet {
    pub eps: f64,
    /// Stage indices n of the representatives.
    pub representatives: Vec<usize>,
    /// For n = 1..N, the position in `representatives` of its cover element.
    pub assignment: Vec<usize>,
}

impl EpsilonNet {
    pub fn size(&self) -> usize {
        self.representatives.len()
    }
}

fn sup_over(seq: &ValueSequence, cols: &[usize], n: usize, m: usize) -> f64 {
    cols.iter()
        .map(|&i| (seq.lower[n][i] - seq.lower[m][i]).abs())
        .filter(|d| d.is_finite())
        .fold(0.0, f64::max)
}

/// Greedy cover in the sup norm over `subset` (all recorded states when `None`).
pub fn epsilon_net(seq: &ValueSequence, eps: f64, subset: Option<&[StateId]>) -> EpsilonNet {
    let cols: Vec<usize> = match subset {
        None => (0..seq.states.len()).collect(),
        Some(s) => s.iter().filter_map(|x| seq.index_of(x)).collect(),
    };
    let mut reps: Vec<usize> = Vec::new();
    let mut assignment = Vec::with_capacity(seq.horizon);
    for n in 1..=seq.horizon {
        match reps.iter().position(|&r| sup_over(seq, &cols, n, r) <= eps) {
            Some(k) => assignment.push(k),
            None => {
                reps.push(n);
                assignment.push(reps.len() - 1);
            }
        }
    }
    EpsilonNet {
        eps,
        representatives: reps,
        assignment,
    }
}

/// Per state, the maximum of the last `window` computed values.
pub fn estimate_limsup(seq: &ValueSequence, window: usize) -> ValueFunction {
    let lo = seq.horizon + 1 - window.clamp(1, seq.horizon);
    seq.states
        .iter()
        .enumerate()
        .filter_map(|(i, x)| {
            let m = (lo..=seq.horizon)
                .map(|n| seq.lower[n][i])
                .filter(|v| v.is_finite())
                .fold(f64::NEG_INFINITY, f64::max);
            m.is_finite().then(|| (x.clone(), m))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtin::{quitting_simple, LehrerSorin};
    use crate::game::RecursiveGame;
    use crate::state::rat;

    fn s(x: &str) -> StateId {
        StateId::name(x)
    }

    fn one_step_win() -> RecursiveGame {
        let mut g = RecursiveGame::new("one_step");
        g.add_absorbing(s("win"), rat(1, 1));
        g.add_active(s("x"), &["a"], &["b"]);
        g.set_transition(&s("x"), 0, 0, vec![(s("win"), rat(1, 1))]);
        g
    }

    #[test]
    fn absorbing_state_keeps_payoff() {
        let mut g = RecursiveGame::new("k");
        g.add_absorbing(s("k"), rat(3, 10));
        let seq = compute_vn(&g, &[s("k")], 7, &VnOptions::default()).unwrap();
        for n in 0..=7 {
            assert_eq!(seq.value(n, &s("k")), Some(0.3));
        }
    }

    #[test]
    fn two_stage_average() {
        let seq = compute_vn(&one_step_win(), &[s("x")], 2, &VnOptions::default()).unwrap();
        assert_eq!(seq.value(1, &s("x")), Some(0.0));
        assert_eq!(seq.value(2, &s("x")), Some(0.5));
        let v1 = seq.value_function(1);
        let (v2, _) = shapley_step(&one_step_win(), &v1, 1, &[s("x")], 1e-9).unwrap();
        assert_eq!(v2.get(&s("x")), Some(0.5));
    }

    #[test]
    fn missing_successor_reported() {
        let g = quitting_simple();
        let err = shapley_step(&g, &ValueFunction::new(), 1, &[s("s")], 1e-9).unwrap_err();
        assert!(matches!(err, ValuesError::MissingSuccessor { .. }));
    }

    #[test]
    fn climbing_column_formula() {
        let g = LehrerSorin::new(200);
        for x in [3i64, 10] {
            let root = StateId::pair(x, 1);
            let seq =
                compute_vn(&g, std::slice::from_ref(&root), 60, &VnOptions::default()).unwrap();
            for n in 1..=60usize {
                let expect = if n as i64 >= x {
                    -2.0 * (n as f64 - x as f64) / n as f64
                } else {
                    0.0
                };
                assert!((seq.value(n, &root).unwrap() - expect).abs() < 1e-12);
            }
            assert_eq!(seq.value(x as usize, &root), Some(0.0));
        }
    }

    #[test]
    fn quitting_simple_recursion_matches_closed_form_iteration() {
        let g = quitting_simple();
        let seq = compute_vn(&g, &[s("s")], 300, &VnOptions::default()).unwrap();
        // Independent scalar recursion with the 2×2 mixed formula.
        let mut v = 0.0;
        for n in 1..=300usize {
            if n > 1 {
                let (a, b, c, d) = ((1.0 + v) / 2.0, 0.0, -1.0, 1.0);
                let val = (a * d - b * c) / (a + d - b - c);
                v = (n - 1) as f64 / n as f64 * val;
            }
            assert!((seq.value(n, &s("s")).unwrap() - v).abs() < 1e-9, "n = {n}");
        }
        assert!(seq.drift_violations.is_empty());
    }

    #[test]
    fn discounted_trivial_cases() {
        let g = quitting_simple();
        let d = compute_v_lambda(&g, &[s("s")], 1.0, 1e-9, &LambdaOptions::default()).unwrap();
        assert_eq!(d.lower.get(&s("s")), Some(0.0));
        assert_eq!(d.lower.get(&s("win")), Some(1.0));
        assert!(compute_v_lambda(&g, &[s("s")], 0.0, 1e-9, &LambdaOptions::default()).is_err());
    }

    #[test]
    fn discounted_fixed_point_quitting() {
        // w = (1−λ) val [[(1+w)/2, 0], [−1, 1]] = (1−λ)(1+w)/(5+w)
        let g = quitting_simple();
        let lambda = 0.1;
        let d = compute_v_lambda(&g, &[s("s")], lambda, 1e-12, &LambdaOptions::default()).unwrap();
        let w = d.lower.get(&s("s")).unwrap();
        assert!((w - (1.0 - lambda) * (1.0 + w) / (5.0 + w)).abs() < 1e-10);
    }

    #[test]
    fn net_and_limsup_on_oscillation() {
        let mut seq = compute_vn(&one_step_win(), &[s("x")], 6, &VnOptions::default()).unwrap();
        let i = seq.index_of(&s("x")).unwrap();
        for n in 1..=6 {
            seq.lower[n][i] = if n % 2 == 0 { 0.8 } else { -0.4 };
        }
        let lim = estimate_limsup(&seq, 4);
        assert_eq!(lim.get(&s("x")), Some(0.8));
        assert_eq!(epsilon_net(&seq, 0.5, None).size(), 2);
        assert_eq!(epsilon_net(&seq, 2.0, None).size(), 1);
    }
}
