//! Transport distance between second-order beliefs with ℓ1 ground cost.

use recgame_core::lp::{LinearProgram, Relation};
use recgame_core::state::rational_to_f64;

use crate::belief::{Belief, SecondOrder};
use crate::game::SignalError;

fn weights(x: &SecondOrder) -> Vec<(Vec<f64>, f64)> {
    x.atoms()
        .map(|(p, w)| (p.to_f64(), rational_to_f64(w)))
        .collect()
}

fn l1(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// Minimal cost of moving `x` onto `y`, as a transport linear program.
pub fn wasserstein(x: &SecondOrder, y: &SecondOrder) -> Result<f64, SignalError> {
    if x == y {
        return Ok(0.0);
    }
    let (xs, ys) = (weights(x), weights(y));
    let (m, n) = (xs.len(), ys.len());
    let mut lp = LinearProgram::new(m * n);
    for (a, (p, _)) in xs.iter().enumerate() {
        for (b, (q, _)) in ys.iter().enumerate() {
            lp.objective[a * n + b] = -l1(p, q);
        }
    }
    for (a, (_, w)) in xs.iter().enumerate() {
        let mut row = vec![0.0; m * n];
        row[a * n..(a + 1) * n].iter_mut().for_each(|v| *v = 1.0);
        lp.add(row, Relation::Eq, *w);
    }
    // The last column constraint is implied by the others.
    for (b, (_, w)) in ys.iter().enumerate().take(n - 1) {
        let mut row = vec![0.0; m * n];
        (0..m).for_each(|a| row[a * n + b] = 1.0);
        lp.add(row, Relation::Eq, *w);
    }
    Ok(-lp.solve()?.objective)
}

/// The same distance from the dual side: the largest gap in expectation of
/// a 1-Lipschitz function with values in [−1, 1] on the union of supports.
pub fn wasserstein_dual(x: &SecondOrder, y: &SecondOrder) -> Result<f64, SignalError> {
    let mut points: Vec<&Belief> = x.0.keys().chain(y.0.keys()).collect();
    points.sort();
    points.dedup();
    let pts: Vec<Vec<f64>> = points.iter().map(|p| p.to_f64()).collect();
    let n = points.len();
    let mut lp = LinearProgram::new(n);
    for (u, p) in points.iter().enumerate() {
        let wx = x.0.get(*p).map_or(0.0, rational_to_f64);
        let wy = y.0.get(*p).map_or(0.0, rational_to_f64);
        lp.objective[u] = wx - wy;
        lp.set_free(u);
        let mut row = vec![0.0; n];
        row[u] = 1.0;
        lp.add(row.clone(), Relation::Le, 1.0);
        lp.add(row, Relation::Ge, -1.0);
    }
    for u in 0..n {
        for v in 0..n {
            if u != v {
                let mut row = vec![0.0; n];
                row[u] = 1.0;
                row[v] = -1.0;
                lp.add(row, Relation::Le, l1(&pts[u], &pts[v]));
            }
        }
    }
    Ok(lp.solve()?.objective)
}
