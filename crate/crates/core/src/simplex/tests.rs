use super::*;
use crate::model::{LinearConstraint, Sense};
use crate::rng::SplitMix64;
use proptest::prelude::*;

fn row(coefs: &[(usize, f64)], sense: Sense, rhs: f64) -> LinearConstraint {
    LinearConstraint::new(coefs.to_vec(), sense, rhs)
}

fn solve_cold(obj: &[f64], lo: &[f64], hi: &[f64], rows: &[LinearConstraint]) -> LpOutcome {
    let lp = LpView {
        objective: obj,
        lower: lo,
        upper: hi,
        rows,
    };
    solve_lp(&lp, None, Algorithm::Auto).unwrap()
}

#[test]
fn single_active_bound() {
    let rows = [row(&[(0, 1.0)], Sense::Ge, 3.0)];
    let out = solve_cold(&[1.0], &[0.0], &[10.0], &rows);
    assert_eq!(out.status, LpStatus::Optimal);
    assert!((out.point[0] - 3.0).abs() < 1e-9);
    assert!((out.objective_value - 3.0).abs() < 1e-9);
    assert!(out.iterations() >= 1);
}

#[test]
fn empty_feasible_set() {
    let rows = [row(&[(0, 1.0)], Sense::Ge, 1.0), row(&[(0, 1.0)], Sense::Le, 0.0)];
    let out = solve_cold(&[1.0], &[f64::NEG_INFINITY], &[f64::INFINITY], &rows);
    assert_eq!(out.status, LpStatus::Infeasible);
}

#[test]
fn unbounded_ray() {
    let rows = [row(&[(0, 1.0), (1, -1.0)], Sense::Le, 1.0)];
    let out = solve_cold(&[-1.0, -1.0], &[0.0, 0.0], &[f64::INFINITY, f64::INFINITY], &rows);
    assert_eq!(out.status, LpStatus::Unbounded);
}

#[test]
fn free_variable_and_equality() {
    // min x + y, x free, x + y = 4, x - y >= -10, y in [0, 20]
    let rows = [
        row(&[(0, 1.0), (1, 1.0)], Sense::Eq, 4.0),
        row(&[(0, 1.0), (1, -1.0)], Sense::Ge, -10.0),
    ];
    let out = solve_cold(&[1.0, 2.0], &[f64::NEG_INFINITY, 0.0], &[f64::INFINITY, 20.0], &rows);
    assert_eq!(out.status, LpStatus::Optimal);
    assert!((out.point[0] - 4.0).abs() < 1e-9);
    assert!(out.point[1].abs() < 1e-9);
}

#[test]
fn no_rows_moves_to_best_bounds() {
    let out = solve_cold(&[1.0, -2.0], &[-1.0, 0.0], &[3.0, 5.0], &[]);
    assert_eq!(out.status, LpStatus::Optimal);
    assert_eq!(out.point, vec![-1.0, 5.0]);
    assert!((out.objective_value + 11.0).abs() < 1e-12);
}

#[test]
fn classification_follows_change_kind() {
    let b = Basis::slack(2, 1);
    assert_eq!(
        classify_warm_basis(&b, ChangeKind::ObjectiveOnly),
        WarmClass::StartPrimal
    );
    assert_eq!(classify_warm_basis(&b, ChangeKind::RhsOnly), WarmClass::StartDual);
    assert_eq!(classify_warm_basis(&b, ChangeKind::Other), WarmClass::ColdStart);
}

#[test]
fn change_kind_diff() {
    let rows_a = [row(&[(0, 1.0)], Sense::Le, 1.0)];
    let rows_b = [row(&[(0, 1.0)], Sense::Le, 2.0)];
    let rows_c = [row(&[(0, 2.0)], Sense::Le, 1.0)];
    let (lo, hi) = ([0.0], [5.0]);
    let view = |objective, rows| LpView {
        objective,
        lower: &lo,
        upper: &hi,
        rows,
    };
    let a = view(&[1.0], &rows_a);
    assert_eq!(
        ChangeKind::between(&a, &view(&[2.0], &rows_a)),
        ChangeKind::ObjectiveOnly
    );
    assert_eq!(ChangeKind::between(&a, &view(&[1.0], &rows_b)), ChangeKind::RhsOnly);
    assert_eq!(ChangeKind::between(&a, &view(&[2.0], &rows_b)), ChangeKind::Other);
    assert_eq!(ChangeKind::between(&a, &view(&[1.0], &rows_c)), ChangeKind::Other);
    let tighter = [4.0];
    let bounds_only = LpView { upper: &tighter, ..a };
    assert_eq!(ChangeKind::between(&a, &bounds_only), ChangeKind::RhsOnly);
}

/// Beale's example: cycles under the textbook largest-coefficient rule.
fn beale() -> (Vec<f64>, Vec<LinearConstraint>) {
    let obj = vec![-0.75, 20.0, -0.5, 6.0];
    let rows = vec![
        row(&[(0, 0.25), (1, -8.0), (2, -1.0), (3, 9.0)], Sense::Le, 0.0),
        row(&[(0, 0.5), (1, -12.0), (2, -0.5), (3, 3.0)], Sense::Le, 0.0),
        row(&[(2, 1.0)], Sense::Le, 1.0),
    ];
    (obj, rows)
}

#[test]
fn degenerate_lp_terminates() {
    let (obj, rows) = beale();
    let lo = [0.0; 4];
    let hi = [f64::INFINITY; 4];
    let lp = LpView {
        objective: &obj,
        lower: &lo,
        upper: &hi,
        rows: &rows,
    };
    for limit in [1000, 1, 0] {
        let options = LpOptions {
            degenerate_pivot_limit: limit,
            ..LpOptions::default()
        };
        let out = solve_lp_with(&lp, None, Algorithm::Primal, &options).unwrap();
        assert_eq!(out.status, LpStatus::Optimal, "limit {limit}");
        assert!((out.objective_value + 1.25).abs() < 1e-9, "limit {limit}");
        if limit == 0 {
            assert!(out.bland_engaged);
        }
    }
}

#[test]
fn bland_engages_after_degenerate_run() {
    let (obj, rows) = beale();
    let lo = [0.0; 4];
    let hi = [f64::INFINITY; 4];
    let lp = LpView {
        objective: &obj,
        lower: &lo,
        upper: &hi,
        rows: &rows,
    };
    let options = LpOptions {
        degenerate_pivot_limit: 1,
        ..LpOptions::default()
    };
    let out = solve_lp_with(&lp, None, Algorithm::Primal, &options).unwrap();
    assert!(out.bland_engaged);
}

#[test]
fn solve_is_deterministic() {
    let (obj, rows) = beale();
    let lo = [0.0; 4];
    let hi = [10.0; 4];
    let a = solve_cold(&obj, &lo, &hi, &rows);
    let b = solve_cold(&obj, &lo, &hi, &rows);
    assert_eq!(a, b);
}

#[test]
fn mismatched_start_basis_rejected() {
    let rows = [row(&[(0, 1.0)], Sense::Ge, 3.0)];
    let lp = LpView {
        objective: &[1.0],
        lower: &[0.0],
        upper: &[10.0],
        rows: &rows,
    };
    let warm = WarmBasis {
        basis: Basis::slack(3, 1),
        change: ChangeKind::RhsOnly,
    };
    assert!(solve_lp(&lp, Some(&warm), Algorithm::Auto).is_err());
}

struct RandomLp {
    obj: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    rows: Vec<LinearConstraint>,
}

fn random_lp(seed: u64, n: usize, m: usize) -> RandomLp {
    let mut rng = SplitMix64::new(seed);
    let coef = |rng: &mut SplitMix64| rng.int_in(-9, 9) as f64;
    let obj = (0..n).map(|_| coef(&mut rng)).collect();
    let lo = (0..n).map(|_| rng.int_in(-5, 0) as f64).collect();
    let hi = (0..n).map(|_| rng.int_in(1, 8) as f64).collect();
    let rows = (0..m)
        .map(|_| {
            let c: Vec<(usize, f64)> = (0..n).map(|j| (j, coef(&mut rng))).collect();
            let sense = match rng.int_in(0, 2) {
                0 => Sense::Le,
                1 => Sense::Ge,
                _ => Sense::Le,
            };
            row(&c, sense, rng.int_in(-10, 10) as f64)
        })
        .collect();
    RandomLp { obj, lo, hi, rows }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn warm_and_cold_agree(seed in any::<u64>(), n in 2usize..5, m in 1usize..5) {
        let lp = random_lp(seed, n, m);
        let view = LpView { objective: &lp.obj, lower: &lp.lo, upper: &lp.hi, rows: &lp.rows };
        let first = solve_lp(&view, None, Algorithm::Auto).unwrap();
        prop_assume!(first.status == LpStatus::Optimal);

        // objective change: the old basis stays primal feasible
        let obj2: Vec<f64> = lp.obj.iter().enumerate().map(|(j, c)| c + (j as f64) - 1.5).collect();
        let view2 = LpView { objective: &obj2, ..view };
        let change = ChangeKind::between(&view, &view2);
        prop_assert_eq!(change, ChangeKind::ObjectiveOnly);
        prop_assert!(basis_is_primal_feasible(&view2, &first.basis).unwrap());
        let warm = WarmBasis { basis: first.basis.clone(), change };
        let w = solve_lp(&view2, Some(&warm), Algorithm::Auto).unwrap();
        let c = solve_lp(&view2, None, Algorithm::Auto).unwrap();
        prop_assert_eq!(w.status, c.status);
        prop_assert_eq!(w.started_with, Algorithm::Primal);
        if c.status == LpStatus::Optimal {
            prop_assert!((w.objective_value - c.objective_value).abs() < 1e-7);
        }

        // rhs change: the old basis stays dual feasible
        let mut rows3 = lp.rows.clone();
        for (i, r) in rows3.iter_mut().enumerate() {
            r.rhs += if i % 2 == 0 { 1.5 } else { -2.0 };
        }
        let view3 = LpView { rows: &rows3, ..view };
        let change = ChangeKind::between(&view, &view3);
        prop_assert_eq!(change, ChangeKind::RhsOnly);
        prop_assert!(basis_is_dual_feasible(&view3, &first.basis).unwrap());
        let warm = WarmBasis { basis: first.basis.clone(), change };
        let w = solve_lp(&view3, Some(&warm), Algorithm::Auto).unwrap();
        let c = solve_lp(&view3, None, Algorithm::Auto).unwrap();
        prop_assert_eq!(w.status, c.status);
        prop_assert_eq!(w.started_with, Algorithm::Dual);
        if c.status == LpStatus::Optimal {
            prop_assert!((w.objective_value - c.objective_value).abs() < 1e-7);
        }
    }

    #[test]
    fn optimal_points_are_feasible(seed in any::<u64>(), n in 2usize..5, m in 1usize..6) {
        let lp = random_lp(seed, n, m);
        let out = solve_cold(&lp.obj, &lp.lo, &lp.hi, &lp.rows);
        if out.status == LpStatus::Optimal {
            for r in &lp.rows {
                prop_assert!(r.violation(&out.point) <= 1e-7);
            }
            for j in 0..n {
                prop_assert!(out.point[j] >= lp.lo[j] - 1e-7 && out.point[j] <= lp.hi[j] + 1e-7);
            }
        }
    }
}
