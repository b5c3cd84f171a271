//! Finite zero-sum matrix games. The row player maximizes.

use crate::lp::{LinearProgram, LpError, Relation};

#[derive(Clone, Debug, PartialEq)]
pub struct MatrixGame {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MatrixSolution {
    pub value: f64,
    pub row_strategy: Vec<f64>,
    pub col_strategy: Vec<f64>,
    pub pure: Option<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolveError {
    #[error("matrix must have at least one row and one column and {expected} entries")]
    Shape { expected: usize },
    #[error("matrix has a non-finite entry")]
    NonFinite,
    #[error("linear program failed: {0}")]
    Lp(#[from] LpError),
    #[error("strategy guarantee off by {row_gap:e} (row) / {col_gap:e} (column)")]
    Guarantee { row_gap: f64, col_gap: f64 },
    #[error("grid oracle supports at most 3×3 games, got {0}×{1}")]
    TooLarge(usize, usize),
}

pub const DEFAULT_TOL: f64 = 1e-9;

impl MatrixGame {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, SolveError> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(SolveError::Shape {
                expected: rows * cols,
            });
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(SolveError::NonFinite);
        }
        Ok(MatrixGame { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, SolveError> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(SolveError::Shape {
                expected: rows.len() * cols,
            });
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    /// The game seen from the column player: transposed and negated.
    pub fn transpose_negate(&self) -> MatrixGame {
        let mut data = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                data.push(-self.get(i, j));
            }
        }
        MatrixGame {
            rows: self.cols,
            cols: self.rows,
            data,
        }
    }

    pub fn shifted(&self, c: f64) -> MatrixGame {
        MatrixGame {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x + c).collect(),
        }
    }

    /// `min_j Σ_i x_i a_ij`: what a row strategy guarantees.
    pub fn row_guarantee(&self, x: &[f64]) -> f64 {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| x[i] * self.get(i, j)).sum::<f64>())
            .fold(f64::INFINITY, f64::min)
    }

    /// `max_i Σ_j a_ij y_j`: what a column strategy concedes.
    pub fn col_guarantee(&self, y: &[f64]) -> f64 {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j) * y[j]).sum::<f64>())
            .fold(f64::NEG_INFINITY, f64::max)
    }

    fn min_entry(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Saddle point in pure strategies, if `max_i min_j = min_j max_i`.
/// Ties go to the smallest row, then the smallest column.
pub fn has_pure_saddle(g: &MatrixGame) -> Option<(usize, usize)> {
    let row_min: Vec<f64> = (0..g.rows)
        .map(|i| {
            (0..g.cols)
                .map(|j| g.get(i, j))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let col_max: Vec<f64> = (0..g.cols)
        .map(|j| {
            (0..g.rows)
                .map(|i| g.get(i, j))
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    let lower = row_min.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let upper = col_max.iter().copied().fold(f64::INFINITY, f64::min);
    if lower != upper {
        return None;
    }
    let i = row_min.iter().position(|&r| r == lower)?;
    let j = col_max.iter().position(|&c| c == upper)?;
    Some((i, j))
}

fn unit(n: usize, k: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[k] = 1.0;
    v
}

fn normalize(v: &mut [f64]) -> bool {
    for x in v.iter_mut() {
        if *x < 0.0 {
            if *x < -1e-9 {
                return false;
            }
            *x = 0.0;
        }
    }
    let s: f64 = v.iter().sum();
    if s <= 0.0 || !s.is_finite() {
        return false;
    }
    v.iter_mut().for_each(|x| *x /= s);
    true
}

/// Value and optimal strategies, with both guarantees checked by direct multiplication.
pub fn solve(g: &MatrixGame, tol: f64) -> Result<MatrixSolution, SolveError> {
    if let Some((i, j)) = has_pure_saddle(g) {
        return Ok(MatrixSolution {
            value: g.get(i, j),
            row_strategy: unit(g.rows, i),
            col_strategy: unit(g.cols, j),
            pure: Some((i, j)),
        });
    }
    // Shift so every entry is ≥ 1; then max Σy s.t. A'y ≤ 1 has optimum 1/value'.
    let shift = 1.0 - g.min_entry();
    let mut lp = LinearProgram::new(g.cols);
    lp.objective = vec![1.0; g.cols];
    for i in 0..g.rows {
        lp.add(
            (0..g.cols).map(|j| g.get(i, j) + shift).collect(),
            Relation::Le,
            1.0,
        );
    }
    let sol = lp.solve()?;
    let total = sol.objective;
    if total <= 0.0 {
        return Err(SolveError::Lp(LpError::Infeasible));
    }
    let mut col = sol.x;
    let mut row = sol.duals;
    if !normalize(&mut col) || !normalize(&mut row) {
        return Err(SolveError::Guarantee {
            row_gap: f64::NAN,
            col_gap: f64::NAN,
        });
    }
    let value = 1.0 / total - shift;
    let row_gap = value - g.row_guarantee(&row);
    let col_gap = g.col_guarantee(&col) - value;
    if row_gap > tol || col_gap > tol {
        return Err(SolveError::Guarantee { row_gap, col_gap });
    }
    Ok(MatrixSolution {
        value,
        row_strategy: row,
        col_strategy: col,
        pure: None,
    })
}

/// Value by exhaustive search over row strategies on the grid `{k / resolution}`.
///
/// With entries in [−1,1] the error is at most 2/resolution.
pub fn oracle_solve(g: &MatrixGame, resolution: usize) -> Result<f64, SolveError> {
    if g.rows > 3 || g.cols > 3 {
        return Err(SolveError::TooLarge(g.rows, g.cols));
    }
    let r = resolution.max(1);
    let step = 1.0 / r as f64;
    let mut best = f64::NEG_INFINITY;
    let mut eval = |p: &[f64]| {
        let v = g.row_guarantee(p);
        if v > best {
            best = v;
        }
    };
    match g.rows {
        1 => eval(&[1.0]),
        2 => {
            for k in 0..=r {
                let a = k as f64 * step;
                eval(&[a, 1.0 - a]);
            }
        }
        _ => {
            for k in 0..=r {
                for l in 0..=(r - k) {
                    let a = k as f64 * step;
                    let b = l as f64 * step;
                    eval(&[a, b, (1.0 - a - b).max(0.0)]);
                }
            }
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[f64]]) -> MatrixGame {
        MatrixGame::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn matching_pennies() {
        let s = solve(&m(&[&[1.0, -1.0], &[-1.0, 1.0]]), DEFAULT_TOL).unwrap();
        assert!(s.value.abs() < 1e-12);
        assert!((s.row_strategy[0] - 0.5).abs() < 1e-12);
        assert!((s.col_strategy[0] - 0.5).abs() < 1e-12);
        assert!(s.pure.is_none());
    }

    #[test]
    fn single_entry() {
        let s = solve(&m(&[&[0.7]]), DEFAULT_TOL).unwrap();
        assert_eq!(s.value, 0.7);
        assert_eq!(s.pure, Some((0, 0)));
    }

    /// Closed-form 2×2 mixed equilibrium: p = (d − c)/(a − b − c + d).
    fn two_by_two(a: f64, b: f64, c: f64, d: f64) -> (f64, f64, f64) {
        let den = a - b - c + d;
        ((a * d - b * c) / den, (d - c) / den, (d - b) / den)
    }

    #[test]
    fn mixed_two_by_two_against_closed_form() {
        let (v, p, q) = two_by_two(3.0, -1.0, 0.0, 1.0);
        assert!((v - 0.6).abs() < 1e-15 && (p - 0.2).abs() < 1e-15 && (q - 0.4).abs() < 1e-15);
        let s = solve(&m(&[&[3.0, -1.0], &[0.0, 1.0]]), DEFAULT_TOL).unwrap();
        assert!((s.value - v).abs() < 1e-12);
        assert!((s.row_strategy[0] - p).abs() < 1e-12);
        assert!((s.col_strategy[0] - q).abs() < 1e-12);
    }

    #[test]
    fn saddle_detection() {
        assert_eq!(
            has_pure_saddle(&m(&[&[1.0, 2.0], &[0.0, 3.0]])),
            Some((0, 0))
        );
        assert_eq!(has_pure_saddle(&m(&[&[1.0, -1.0], &[-1.0, 1.0]])), None);
        assert_eq!(has_pure_saddle(&m(&[&[5.0]])), Some((0, 0)));
        assert_eq!(
            has_pure_saddle(&m(&[&[1.0, 1.0], &[1.0, 1.0]])),
            Some((0, 0))
        );
    }

    #[test]
    fn oracle_examples() {
        let pennies = m(&[&[1.0, -1.0], &[-1.0, 1.0]]);
        assert!(oracle_solve(&pennies, 1000).unwrap().abs() <= 2e-3);
        let g = m(&[&[3.0, -1.0], &[0.0, 1.0]]);
        assert!((oracle_solve(&g, 1000).unwrap() - 0.6).abs() <= 2e-3);
        assert_eq!(
            oracle_solve(&m(&[&[1.0, 1.0], &[1.0, 1.0]]), 1000).unwrap(),
            1.0
        );
        let big = MatrixGame::new(4, 1, vec![0.0; 4]).unwrap();
        assert!(oracle_solve(&big, 10).is_err());
    }

    #[test]
    fn rock_paper_scissors() {
        let g = m(&[&[0.0, -1.0, 1.0], &[1.0, 0.0, -1.0], &[-1.0, 1.0, 0.0]]);
        let s = solve(&g, DEFAULT_TOL).unwrap();
        assert!(s.value.abs() < 1e-12);
        for p in s.row_strategy.iter().chain(&s.col_strategy) {
            assert!((p - 1.0 / 3.0).abs() < 1e-9);
        }
    }

    #[test]
    fn shape_errors() {
        assert!(MatrixGame::new(0, 1, vec![]).is_err());
        assert!(MatrixGame::new(1, 1, vec![f64::NAN]).is_err());
    }
}
