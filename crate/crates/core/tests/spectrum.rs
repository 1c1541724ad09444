mod common;

use std::f64::consts::PI;

use approx::assert_abs_diff_eq;
use num_complex::Complex64;
use period2_core::elliptic::HOPF_POINT;
use period2_core::spectrum::{
    analyze, char_function, continue_root, crossing_derivative_numeric, find_roots,
    hopf_crossing_derivative, winding_count, Rect, Verdict,
};
use proptest::prelude::*;

fn f_direct(z: Complex64, r: f64) -> Complex64 {
    // λ² + r(1 − e^{−λ}) shares the nonzero roots of F
    z * z + r * (1.0 - (-z).exp())
}

/// Root count by unwrapping the phase of `F` along a densely sampled boundary.
fn phase_count(rect: &Rect, r: f64, per_side: usize) -> i64 {
    let c = [
        Complex64::new(rect.re_min, rect.im_min),
        Complex64::new(rect.re_max, rect.im_min),
        Complex64::new(rect.re_max, rect.im_max),
        Complex64::new(rect.re_min, rect.im_max),
    ];
    let mut total = 0.0;
    let mut prev = char_function(c[0], r).arg();
    for side in 0..4 {
        let (z0, z1) = (c[side], c[(side + 1) % 4]);
        for j in 1..=per_side {
            let z = z0 + (z1 - z0) * (j as f64 / per_side as f64);
            let a = char_function(z, r).arg();
            let mut d = a - prev;
            while d > PI {
                d -= 2.0 * PI;
            }
            while d < -PI {
                d += 2.0 * PI;
            }
            total += d;
            prev = a;
        }
    }
    (total / (2.0 * PI)).round() as i64
}

#[test]
fn imaginary_roots_at_critical_values() {
    let z = char_function(Complex64::new(0.0, PI), PI * PI / 2.0);
    assert!(z.norm() <= 1e-12);
    let z3 = char_function(Complex64::new(0.0, 3.0 * PI), 9.0 * PI * PI / 2.0);
    assert!(z3.norm() <= 1e-12);
}

#[test]
fn limit_at_zero() {
    for &eps in &[1e-6, 1e-9, 0.0] {
        let z = char_function(Complex64::new(eps, 0.0), 1.0);
        assert_abs_diff_eq!(z.re, 1.0, epsilon = 1e-6);
    }
}

#[test]
fn verdicts_across_threshold() {
    for &r in &[1.0, 2.0, 4.0, 4.9] {
        assert_eq!(analyze(r).unwrap().verdict, Verdict::Stable, "r = {r}");
    }
    assert_eq!(analyze(HOPF_POINT).unwrap().verdict, Verdict::Critical);
    for &r in &[5.0, 6.0, 10.0] {
        assert_eq!(analyze(r).unwrap().verdict, Verdict::Unstable, "r = {r}");
    }
}

#[test]
fn critical_pair_is_plus_minus_i_pi() {
    let report = analyze(HOPF_POINT).unwrap();
    let (top, second) = (report.roots[0].lambda, report.roots[1].lambda);
    let (up, down) = if top.im > 0.0 {
        (top, second)
    } else {
        (second, top)
    };
    assert!((up - Complex64::new(0.0, PI)).norm() <= 1e-8);
    assert!((down - Complex64::new(0.0, -PI)).norm() <= 1e-8);
}

#[test]
fn small_r_is_in_left_half_plane() {
    let report = analyze(1.0).unwrap();
    assert!(!report.roots.is_empty());
    assert!(report.roots.iter().all(|c| c.lambda.re < 0.0));
}

#[test]
fn unstable_pair_near_pi_at_six() {
    let report = analyze(6.0).unwrap();
    let top = report.rightmost().unwrap().lambda;
    assert!(top.re > 0.0);
    assert!((top.im.abs() - PI).abs() < 0.5);
    let tracked = continue_root(Complex64::new(0.0, PI), HOPF_POINT, 6.0, 50).unwrap();
    let partner = report.roots[..2]
        .iter()
        .find(|c| c.lambda.im > 0.0)
        .unwrap();
    assert!((tracked.lambda - partner.lambda).norm() <= 1e-10);
}

#[test]
fn roots_are_conjugate_closed_and_polished() {
    for &r in &[1.0, 4.9, 10.0] {
        let report = analyze(r).unwrap();
        for c in &report.roots {
            assert!(c.residual <= 1e-10);
            assert!(f_direct(c.lambda, r).norm() <= 1e-8 * c.lambda.norm().max(1.0) * r.max(1.0));
            let partner = report
                .roots
                .iter()
                .map(|d| (d.lambda - c.lambda.conj()).norm())
                .fold(f64::INFINITY, f64::min);
            assert!(partner <= 1e-10, "r = {r}, λ = {}", c.lambda);
        }
    }
}

#[test]
fn unstable_roots_obey_modulus_bound() {
    for &r in &[5.0, 6.0, 10.0, 30.0, 60.0] {
        let report = analyze(r).unwrap();
        for c in report.roots.iter().filter(|c| c.lambda.re > 0.0) {
            assert!(c.lambda.norm() <= r + 1e-8);
        }
    }
}

#[test]
fn winding_matches_isolated_roots_and_phase_oracle() {
    for &r in &[1.0, 2.0, HOPF_POINT + 0.3, 10.0] {
        for rect in [
            Rect::default_for(r),
            Rect::new(-5.0, r + 1.0, -r - 1.0, r + 7.0).unwrap(),
        ] {
            let report = find_roots(r, &rect).unwrap();
            assert_eq!(report.winding, report.roots.len());
            assert_eq!(phase_count(&rect, r, 20_000), report.roots.len() as i64);
            assert!(report.roots.iter().all(|c| report.rect.contains(c.lambda)));
        }
    }
}

#[test]
fn grid_newton_finds_nothing_new() {
    let r = 10.0;
    let report = analyze(r).unwrap();
    let rect = report.rect;
    for i in 0..25 {
        for j in 0..40 {
            let mut z = Complex64::new(
                rect.re_min + (rect.re_max - rect.re_min) * (i as f64 + 0.5) / 25.0,
                rect.im_min + (rect.im_max - rect.im_min) * (j as f64 + 0.5) / 40.0,
            );
            for _ in 0..60 {
                let f = f_direct(z, r);
                let d = 2.0 * z + r * (-z).exp();
                z -= f / d;
            }
            if f_direct(z, r).norm() < 1e-9 && z.norm() > 1e-6 && rect.contains(z) {
                let nearest = report
                    .roots
                    .iter()
                    .map(|c| (c.lambda - z).norm())
                    .fold(f64::INFINITY, f64::min);
                assert!(nearest < 1e-8, "unreported root {z}");
            }
        }
    }
}

#[test]
fn split_form_by_quadrature() {
    for &r in &[1.0, HOPF_POINT, 10.0] {
        let report = analyze(r).unwrap();
        for c in report.roots.iter().take(6) {
            let (mu, om) = (c.lambda.re, c.lambda.im);
            let cos_int =
                common::integrate(&|s: f64| (-mu * s).exp() * (om * s).cos(), 0.0, 1.0, 1e-15);
            let sin_int =
                common::integrate(&|s: f64| (-mu * s).exp() * (om * s).sin(), 0.0, 1.0, 1e-15);
            assert_abs_diff_eq!(mu, -r * cos_int, epsilon = 1e-9);
            assert_abs_diff_eq!(om, r * sin_int, epsilon = 1e-9);
        }
    }
}

#[test]
fn crossing_derivative_formula() {
    let d = hopf_crossing_derivative(HOPF_POINT, PI).unwrap();
    assert_abs_diff_eq!(d, 1.0 / (4.0 + PI * PI / 4.0), epsilon = 1e-15);
    assert_abs_diff_eq!(d, 0.154625, epsilon = 1e-5);
    let r3 = 9.0 * PI * PI / 2.0;
    let d3 = hopf_crossing_derivative(r3, 3.0 * PI).unwrap();
    assert_abs_diff_eq!(d3, 1.0 / (4.0 + (1.5 * PI).powi(2)), epsilon = 1e-15);
}

#[test]
fn crossing_derivative_by_continuation() {
    for dr in [0.1, 1e-3] {
        let numeric = crossing_derivative_numeric(HOPF_POINT, PI, dr).unwrap();
        assert_abs_diff_eq!(
            numeric,
            hopf_crossing_derivative(HOPF_POINT, PI).unwrap(),
            epsilon = 1e-4
        );
    }
    let r3 = 9.0 * PI * PI / 2.0;
    let numeric = crossing_derivative_numeric(r3, 3.0 * PI, 1e-3).unwrap();
    assert_abs_diff_eq!(
        numeric,
        hopf_crossing_derivative(r3, 3.0 * PI).unwrap(),
        epsilon = 1e-4
    );
}

#[test]
fn flip_across_hopf_point() {
    assert_eq!(analyze(HOPF_POINT - 1e-3).unwrap().verdict, Verdict::Stable);
    assert_eq!(
        analyze(HOPF_POINT + 1e-3).unwrap().verdict,
        Verdict::Unstable
    );
}

#[test]
fn contour_through_root_is_perturbed() {
    // the left edge Re = 0 runs through ±iπ at the critical value
    let r = HOPF_POINT;
    let through = Rect::new(0.0, r + 1.0, -r - 1.0, r + 1.0).unwrap();
    assert!(winding_count(&through, r).is_none());
    let report = find_roots(r, &through).unwrap();
    assert_ne!(report.rect, through);
    assert_eq!(report.winding, 2);
    assert_eq!(report.roots.len(), 2);
    assert!(report
        .roots
        .iter()
        .all(|c| (c.lambda.im.abs() - PI).abs() < 1e-8));
}

#[test]
fn json_report() {
    let report = analyze(6.0).unwrap();
    let v: serde_json::Value = serde_json::from_str(&report.to_json()).unwrap();
    assert_eq!(v["verdict"], "unstable");
    assert_eq!(v["r"].as_f64().unwrap(), 6.0);
    let roots = v["roots"].as_array().unwrap();
    assert_eq!(roots.len(), report.roots.len());
    assert_eq!(roots[0]["re"].as_f64().unwrap(), report.roots[0].lambda.re);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]
    #[test]
    fn verdict_follows_hopf_point(r in 0.7f64..15.0) {
        prop_assume!((r - HOPF_POINT).abs() > 1e-2);
        let report = analyze(r).unwrap();
        let expected = if r < HOPF_POINT { Verdict::Stable } else { Verdict::Unstable };
        prop_assert_eq!(report.verdict, expected);
        prop_assert_eq!(report.winding, report.roots.len());
    }
}
