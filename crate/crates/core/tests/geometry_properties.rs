use std::f64::consts::{PI, SQRT_2, TAU};

use boole_bell::geometry::{
    malus_lhs_all_assignments, optimal_witness, optimize_assignment, paper_witness, paper_witness_closed_form,
    paper_witness_oriented, Assignment, CaseLabel, Orientation,
};
use boole_bell::{Error, UnitVector3};
use proptest::prelude::*;

fn xy(deg: f64) -> UnitVector3 {
    UnitVector3::from_xy_degrees(deg)
}

/// The three placements written out directly from the correlations.
fn placements(a: &UnitVector3, b: &UnitVector3, alpha: &UnitVector3) -> [f64; 3] {
    let (ux, vx, uv) = (a.dot(alpha), b.dot(alpha), a.dot(b));
    [(ux - vx).abs() + uv, (ux - uv).abs() + vx, (uv - vx).abs() + ux]
}

/// Best value of each placement over a 0.01° grid on the unit circle of the
/// plane of a and b.
fn grid_oracle(a: &UnitVector3, b: &UnitVector3) -> [f64; 3] {
    let e2 = b.orthogonalized_against(a).unwrap();
    let steps = 36_000;
    let mut best = [f64::NEG_INFINITY; 3];
    for k in 0..steps {
        let alpha = UnitVector3::in_plane(a, &e2, TAU * k as f64 / steps as f64).unwrap();
        for (slot, v) in best.iter_mut().zip(placements(a, b, &alpha)) {
            *slot = slot.max(v);
        }
    }
    best
}

fn vector() -> impl Strategy<Value = UnitVector3> {
    (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0)
        .prop_filter("non-degenerate", |(x, y, z)| x * x + y * y + z * z > 1e-2)
        .prop_map(|(x, y, z)| UnitVector3::new(x, y, z).unwrap())
}

fn axes() -> impl Strategy<Value = (UnitVector3, UnitVector3)> {
    (vector(), vector()).prop_filter("non-colinear", |(a, b)| a.dot(b).abs() < 0.999)
}

#[test]
fn constructive_witness_exceeds_one_over_the_sweep() {
    for d in 1..180 {
        let w = paper_witness(&UnitVector3::X, &xy(d as f64)).unwrap();
        assert!(w.lhs_value > 1.0, "theta = {d}: {}", w.lhs_value);
        let expect = paper_witness_closed_form((d as f64).to_radians());
        assert!((w.lhs_value - expect).abs() <= 1e-12, "theta = {d}");
        assert_eq!(w.case_label, CaseLabel::classify(&UnitVector3::X, &xy(d as f64)));
    }
}

#[test]
fn witness_spot_values() {
    let at = |d: f64| paper_witness(&UnitVector3::X, &xy(d)).unwrap();
    let right = at(90.0);
    assert!((right.lhs_value - SQRT_2).abs() <= 1e-9);
    assert_eq!(right.case_label, CaseLabel::Right);
    let acute = at(60.0);
    let r = 60f64.to_radians();
    assert!((acute.lhs_value - (r.cos() + r.sin())).abs() <= 1e-9);
    assert_eq!(acute.assignment, Assignment::PivotX);
    let obtuse = at(120.0);
    let r = 120f64.to_radians();
    assert!((obtuse.lhs_value - (r.sin() + r.cos().abs())).abs() <= 1e-9);
    assert_eq!(obtuse.case_label, CaseLabel::Obtuse);
}

#[test]
fn orientation_does_not_change_the_value() {
    for d in (5..180).step_by(5).filter(|&d| d != 90) {
        let b = xy(d as f64);
        let wa = paper_witness_oriented(&UnitVector3::X, &b, Orientation::OrthogonalToA).unwrap();
        let wb = paper_witness_oriented(&UnitVector3::X, &b, Orientation::OrthogonalToB).unwrap();
        assert!((wa.lhs_value - wb.lhs_value).abs() <= 1e-12, "theta = {d}");
        assert!(wb.alpha.dot(&b).abs() <= 1e-12);
    }
}

#[test]
fn colinear_axes_are_rejected() {
    for b in [UnitVector3::X, UnitVector3::X.neg()] {
        assert!(matches!(paper_witness(&UnitVector3::X, &b), Err(Error::ColinearAxes { .. })));
        assert!(matches!(optimal_witness(&UnitVector3::X, &b), Err(Error::ColinearAxes { .. })));
    }
}

#[test]
fn optimum_dominates_constructive_witness() {
    for d in 1..180 {
        let b = xy(d as f64);
        let constructive = paper_witness(&UnitVector3::X, &b).unwrap();
        let best = optimal_witness(&UnitVector3::X, &b).unwrap();
        assert!(best.lhs_value >= constructive.lhs_value - 1e-9, "theta = {d}");
    }
}

#[test]
fn pivot_x_optimum_has_closed_form() {
    for d in 1..180 {
        let b = xy(d as f64);
        let opt = optimize_assignment(&UnitVector3::X, &b, Assignment::PivotX).unwrap();
        let diff = [UnitVector3::X.x() - b.x(), UnitVector3::X.y() - b.y(), 0.0];
        let closed = UnitVector3::X.dot(&b) + (diff[0] * diff[0] + diff[1] * diff[1]).sqrt();
        assert!((opt.value - closed).abs() <= 1e-6, "theta = {d}: {} vs {closed}", opt.value);
    }
}

#[test]
fn optimizer_matches_grid_oracle() {
    for d in [1.0, 30.0, 60.0, 89.5, 90.0, 120.0, 150.0, 179.0] {
        let b = xy(d);
        let oracle = grid_oracle(&UnitVector3::X, &b);
        for (k, assignment) in Assignment::ALL.into_iter().enumerate() {
            let opt = optimize_assignment(&UnitVector3::X, &b, assignment).unwrap();
            assert!(opt.value >= oracle[k] - 1e-9, "theta = {d}, {assignment:?}");
            assert!(opt.value <= oracle[k] + 1e-6, "theta = {d}, {assignment:?}");
            let at = placements(&UnitVector3::X, &b, &opt.alpha)[k];
            assert!((at - opt.value).abs() <= 1e-12);
        }
        let best = oracle.into_iter().fold(f64::NEG_INFINITY, f64::max);
        assert!((optimal_witness(&UnitVector3::X, &b).unwrap().lhs_value - best).abs() <= 1e-6);
    }
}

#[test]
fn evaluation_matches_direct_placements() {
    let a = UnitVector3::new(0.2, -0.4, 0.9).unwrap();
    let b = UnitVector3::new(-0.7, 0.1, 0.3).unwrap();
    for k in 0..50 {
        let alpha = a.rotated(&UnitVector3::new(1.0, 1.0, 0.0).unwrap(), k as f64 * PI / 25.0);
        let eval = malus_lhs_all_assignments(&a, &b, &alpha);
        assert_eq!(eval.values, placements(&a, &b, &alpha));
        assert_eq!(eval.max_value, eval.values.into_iter().fold(f64::NEG_INFINITY, f64::max));
    }
}

proptest! {
    #[test]
    fn witness_lies_in_the_span_and_is_unit((a, b) in axes()) {
        for w in [paper_witness(&a, &b).unwrap(), optimal_witness(&a, &b).unwrap()] {
            prop_assert!(w.alpha.triple_product(&a, &b).abs() <= 1e-9);
            prop_assert!((w.alpha.norm() - 1.0).abs() <= 1e-12);
            prop_assert!(w.lhs_value > 1.0);
        }
    }

    #[test]
    fn witness_value_is_rotation_invariant((a, b) in axes(), axis in vector(), angle in 0.0f64..TAU) {
        let w = paper_witness(&a, &b).unwrap();
        let wr = paper_witness(&a.rotated(&axis, angle), &b.rotated(&axis, angle)).unwrap();
        prop_assert!((w.lhs_value - wr.lhs_value).abs() <= 1e-12);
        prop_assert_eq!(w.case_label, wr.case_label);
    }

    #[test]
    fn constructive_value_follows_the_angle((a, b) in axes()) {
        let w = paper_witness(&a, &b).unwrap();
        prop_assert!((w.lhs_value - paper_witness_closed_form(w.theta)).abs() <= 1e-12);
        let eval = malus_lhs_all_assignments(&a, &b, &w.alpha);
        prop_assert_eq!(eval.max_value, w.lhs_value);
    }
}
