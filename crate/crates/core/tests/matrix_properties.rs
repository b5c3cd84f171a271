use proptest::prelude::*;
use recgame_core::matrix::{has_pure_saddle, oracle_solve, solve, DEFAULT_TOL};
use recgame_core::MatrixGame;

const GRID: usize = 600;

fn matrix() -> impl Strategy<Value = MatrixGame> {
    (2usize..=3, 2usize..=3).prop_flat_map(|(m, n)| {
        prop::collection::vec(-1.0f64..=1.0, m * n)
            .prop_map(move |d| MatrixGame::new(m, n, d).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn lp_value_matches_grid_search(g in matrix()) {
        let lp = solve(&g, DEFAULT_TOL).unwrap();
        let grid = oracle_solve(&g, GRID).unwrap();
        prop_assert!((lp.value - grid).abs() <= DEFAULT_TOL + 2.0 / GRID as f64, "lp {} grid {}", lp.value, grid);
        prop_assert!(grid <= lp.value + DEFAULT_TOL);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn constant_shift_moves_the_value(g in matrix(), c in -3.0f64..3.0) {
        let a = solve(&g, DEFAULT_TOL).unwrap();
        let h = g.shifted(c);
        let b = solve(&h, DEFAULT_TOL).unwrap();
        prop_assert!((b.value - a.value - c).abs() < 1e-9);
        // Optimal strategies of one game stay optimal in the other.
        prop_assert!(h.row_guarantee(&a.row_strategy) >= b.value - 1e-9);
        prop_assert!(h.col_guarantee(&a.col_strategy) <= b.value + 1e-9);
    }

    #[test]
    fn transpose_negate_swaps_roles(g in matrix()) {
        let a = solve(&g, DEFAULT_TOL).unwrap();
        let t = g.transpose_negate();
        let b = solve(&t, DEFAULT_TOL).unwrap();
        prop_assert!((a.value + b.value).abs() < 1e-9);
        prop_assert!(t.row_guarantee(&a.col_strategy) >= b.value - 1e-9);
        prop_assert!(t.col_guarantee(&a.row_strategy) <= b.value + 1e-9);
    }

    #[test]
    fn guarantees_hold(g in matrix()) {
        let a = solve(&g, DEFAULT_TOL).unwrap();
        prop_assert!(g.row_guarantee(&a.row_strategy) >= a.value - DEFAULT_TOL);
        prop_assert!(g.col_guarantee(&a.col_strategy) <= a.value + DEFAULT_TOL);
        if let Some((i, j)) = has_pure_saddle(&g) {
            prop_assert_eq!(a.value, g.get(i, j));
        }
    }
}
