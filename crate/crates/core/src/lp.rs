//! Dense two-phase simplex for small linear programs.
//!
//! Problems here have at most a few hundred rows and columns (stage games,
//! transport plans, sequence-form programs), so a dense tableau is adequate.
//! Pricing is Dantzig's rule with a fallback to Bland's rule after a run of
//! degenerate pivots, which rules out cycling.

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub rel: Relation,
    pub rhs: f64,
}

/// `maximize c·x` subject to linear constraints; variables are `≥ 0` unless marked free.
#[derive(Clone, Debug)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub free: Vec<bool>,
    pub rows: Vec<Constraint>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub objective: f64,
    pub x: Vec<f64>,
    /// One multiplier per constraint, in the sign convention of the dual of a
    /// maximization (nonnegative for binding `≤` rows).
    pub duals: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LpError {
    #[error("linear program is infeasible")]
    Infeasible,
    #[error("linear program is unbounded")]
    Unbounded,
    #[error("simplex iteration limit reached")]
    IterationLimit,
    #[error("constraint has {got} coefficients, expected {expected}")]
    Dimension { expected: usize, got: usize },
}

const EPS_PIVOT: f64 = 1e-11;
const EPS_PRICE: f64 = 1e-11;
const EPS_FEAS: f64 = 1e-9;

impl LinearProgram {
    pub fn new(n: usize) -> Self {
        LinearProgram {
            objective: vec![0.0; n],
            free: vec![false; n],
            rows: Vec::new(),
        }
    }

    pub fn n_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn set_free(&mut self, j: usize) {
        self.free[j] = true;
    }

    pub fn add(&mut self, coeffs: Vec<f64>, rel: Relation, rhs: f64) {
        self.rows.push(Constraint { coeffs, rel, rhs });
    }

    pub fn solve(&self) -> Result<LpSolution, LpError> {
        solve(self)
    }
}

struct Tableau {
    m: usize,
    ncol: usize,
    /// Row-major, `m × (ncol + 1)`; the last column is the right-hand side.
    t: Vec<f64>,
    /// Reduced costs `z_j − c_j`, plus the objective value in the last slot.
    obj: Vec<f64>,
    basis: Vec<usize>,
    barred: Vec<bool>,
}

impl Tableau {
    fn w(&self) -> usize {
        self.ncol + 1
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.t[i * self.w() + j]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.w();
        let p = self.t[r * w + c];
        for j in 0..w {
            self.t[r * w + j] /= p;
        }
        let (before, rest) = self.t.split_at_mut(r * w);
        let (prow, after) = rest.split_at_mut(w);
        for row in before.chunks_mut(w).chain(after.chunks_mut(w)) {
            let f = row[c];
            if f != 0.0 {
                for j in 0..w {
                    row[j] -= f * prow[j];
                }
                row[c] = 0.0;
            }
        }
        let f = self.obj[c];
        if f != 0.0 {
            for (o, q) in self.obj.iter_mut().zip(prow.iter()) {
                *o -= f * q;
            }
            self.obj[c] = 0.0;
        }
        self.basis[r] = c;
    }

    fn set_costs(&mut self, c: &[f64]) {
        let w = self.w();
        for j in 0..w {
            let mut z = 0.0;
            for i in 0..self.m {
                z += c[self.basis[i]] * self.t[i * w + j];
            }
            self.obj[j] = if j < self.ncol { z - c[j] } else { z };
        }
    }

    fn run(&mut self, limit: usize) -> Result<(), LpError> {
        let mut degenerate = 0usize;
        for _ in 0..limit {
            let bland = degenerate > 50;
            let mut enter = None;
            let mut best = -EPS_PRICE;
            for j in 0..self.ncol {
                if self.barred[j] {
                    continue;
                }
                let d = self.obj[j];
                if d < best {
                    enter = Some(j);
                    if bland {
                        break;
                    }
                    best = d;
                }
            }
            let Some(c) = enter else { return Ok(()) };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.m {
                let a = self.at(i, c);
                if a > EPS_PIVOT {
                    let ratio = self.at(i, self.ncol) / a;
                    let better = match leave {
                        None => true,
                        Some((k, r)) => {
                            ratio < r - 1e-12
                                || (ratio <= r + 1e-12 && self.basis[i] < self.basis[k])
                        }
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            let Some((r, ratio)) = leave else {
                return Err(LpError::Unbounded);
            };
            degenerate = if ratio.abs() < 1e-12 {
                degenerate + 1
            } else {
                0
            };
            self.pivot(r, c);
        }
        Err(LpError::IterationLimit)
    }
}

pub fn solve(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    let n = lp.n_vars();
    for row in &lp.rows {
        if row.coeffs.len() != n {
            return Err(LpError::Dimension {
                expected: n,
                got: row.coeffs.len(),
            });
        }
    }
    // Structural columns: one per variable, plus a negative part for free ones.
    let mut col_of: Vec<(usize, Option<usize>)> = Vec::with_capacity(n);
    let mut ncol = 0;
    for j in 0..n {
        let pos = ncol;
        ncol += 1;
        let neg = if lp.free[j] {
            ncol += 1;
            Some(ncol - 1)
        } else {
            None
        };
        col_of.push((pos, neg));
    }
    let m = lp.rows.len();
    let mut sign = vec![1.0; m];
    let mut rel = Vec::with_capacity(m);
    for (i, row) in lp.rows.iter().enumerate() {
        let mut r = row.rel;
        if row.rhs < 0.0 {
            sign[i] = -1.0;
            r = match r {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
        }
        rel.push(r);
    }
    // Surplus columns for ≥ rows, then one identity column per row (slack or artificial).
    let mut surplus = vec![None; m];
    for i in 0..m {
        if rel[i] == Relation::Ge {
            surplus[i] = Some(ncol);
            ncol += 1;
        }
    }
    let ident_start = ncol;
    ncol += m;
    let is_art =
        |j: usize, rel: &[Relation]| j >= ident_start && rel[j - ident_start] != Relation::Le;

    let w = ncol + 1;
    let mut t = vec![0.0; m * w];
    for (i, row) in lp.rows.iter().enumerate() {
        let s = sign[i];
        for (j, &a) in row.coeffs.iter().enumerate() {
            let (pos, neg) = col_of[j];
            t[i * w + pos] = s * a;
            if let Some(k) = neg {
                t[i * w + k] = -s * a;
            }
        }
        if let Some(k) = surplus[i] {
            t[i * w + k] = -1.0;
        }
        t[i * w + ident_start + i] = 1.0;
        t[i * w + ncol] = s * row.rhs;
    }
    let mut tab = Tableau {
        m,
        ncol,
        t,
        obj: vec![0.0; w],
        basis: (0..m).map(|i| ident_start + i).collect(),
        barred: vec![false; ncol],
    };
    let limit = 50_000 + 50 * (m + ncol);

    let has_art = (0..m).any(|i| rel[i] != Relation::Le);
    if has_art {
        let mut c1 = vec![0.0; ncol];
        for (j, c) in c1.iter_mut().enumerate() {
            if is_art(j, &rel) {
                *c = -1.0;
            }
        }
        tab.set_costs(&c1);
        tab.run(limit)?;
        let scale = 1.0 + lp.rows.iter().map(|r| r.rhs.abs()).fold(0.0, f64::max);
        if tab.obj[ncol] < -EPS_FEAS * scale {
            return Err(LpError::Infeasible);
        }
        // Drive zero-level artificials out of the basis where possible.
        for i in 0..m {
            if is_art(tab.basis[i], &rel) {
                let c = (0..ident_start)
                    .filter(|&j| tab.at(i, j).abs() > 1e-9)
                    .max_by(|&a, &b| tab.at(i, a).abs().total_cmp(&tab.at(i, b).abs()));
                if let Some(c) = c {
                    tab.pivot(i, c);
                }
            }
        }
        for j in 0..ncol {
            if is_art(j, &rel) {
                tab.barred[j] = true;
            }
        }
    }

    let mut c2 = vec![0.0; ncol];
    for (j, &(pos, neg)) in col_of.iter().enumerate().take(n) {
        c2[pos] = lp.objective[j];
        if let Some(k) = neg {
            c2[k] = -lp.objective[j];
        }
    }
    tab.set_costs(&c2);
    tab.run(limit)?;

    let mut colval = vec![0.0; ncol];
    for i in 0..m {
        colval[tab.basis[i]] = tab.at(i, ncol);
    }
    let x: Vec<f64> = col_of
        .iter()
        .map(|&(pos, neg)| colval[pos] - neg.map_or(0.0, |k| colval[k]))
        .collect();
    let objective = x.iter().zip(&lp.objective).map(|(a, b)| a * b).sum();
    let duals = (0..m).map(|i| sign[i] * tab.obj[ident_start + i]).collect();
    Ok(LpSolution {
        objective,
        x,
        duals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-9
    }

    #[test]
    fn textbook_maximization() {
        // max 3x + 5y, x ≤ 4, 2y ≤ 12, 3x + 2y ≤ 18 → (2, 6), 36
        let mut lp = LinearProgram::new(2);
        lp.objective = vec![3.0, 5.0];
        lp.add(vec![1.0, 0.0], Relation::Le, 4.0);
        lp.add(vec![0.0, 2.0], Relation::Le, 12.0);
        lp.add(vec![3.0, 2.0], Relation::Le, 18.0);
        let s = lp.solve().unwrap();
        assert!(close(s.objective, 36.0));
        assert!(close(s.x[0], 2.0) && close(s.x[1], 6.0));
        // Dual: (0, 3/2, 1)
        assert!(close(s.duals[0], 0.0) && close(s.duals[1], 1.5) && close(s.duals[2], 1.0));
    }

    #[test]
    fn equality_and_ge_rows() {
        // min x + y (max −x − y), x + y ≥ 2, x − y = 1 → x = 1.5, y = 0.5
        let mut lp = LinearProgram::new(2);
        lp.objective = vec![-1.0, -1.0];
        lp.add(vec![1.0, 1.0], Relation::Ge, 2.0);
        lp.add(vec![1.0, -1.0], Relation::Eq, 1.0);
        let s = lp.solve().unwrap();
        assert!(close(s.objective, -2.0));
        assert!(close(s.x[0] - s.x[1], 1.0));
    }

    #[test]
    fn free_variables_and_negative_rhs() {
        // max −|...|: max t with t ≤ x − 3, t ≤ −x + 1, x free, t free → x = 2, t = −1
        let mut lp = LinearProgram::new(2);
        lp.set_free(0);
        lp.set_free(1);
        lp.objective = vec![0.0, 1.0];
        lp.add(vec![-1.0, 1.0], Relation::Le, -3.0);
        lp.add(vec![1.0, 1.0], Relation::Le, 1.0);
        let s = lp.solve().unwrap();
        assert!(close(s.objective, -1.0));
        assert!(close(s.x[0], 2.0));
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = LinearProgram::new(1);
        lp.add(vec![1.0], Relation::Le, 1.0);
        lp.add(vec![1.0], Relation::Ge, 2.0);
        assert_eq!(lp.solve(), Err(LpError::Infeasible));
        let mut lp = LinearProgram::new(1);
        lp.objective = vec![1.0];
        lp.add(vec![-1.0], Relation::Le, 1.0);
        assert_eq!(lp.solve(), Err(LpError::Unbounded));
    }

    #[test]
    fn redundant_equalities() {
        let mut lp = LinearProgram::new(2);
        lp.objective = vec![1.0, 2.0];
        lp.add(vec![1.0, 1.0], Relation::Eq, 1.0);
        lp.add(vec![2.0, 2.0], Relation::Eq, 2.0);
        let s = lp.solve().unwrap();
        assert!(close(s.objective, 2.0));
    }
}
