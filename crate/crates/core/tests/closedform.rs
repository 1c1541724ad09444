mod common;

use approx::assert_abs_diff_eq;
use period2_core::closedform::{build_orbit, orbit_amplitude, OrbitParams};
use period2_core::elliptic::{Modulus, HOPF_POINT};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn orbit(r: f64) -> OrbitParams {
    build_orbit(r).unwrap()
}

#[test]
fn hopf_limit_is_the_equilibrium() {
    let p = orbit(HOPF_POINT + 1e-12);
    assert!((p.a() - 1.0).abs() < 1e-3);
    assert!((p.b() - 1.0).abs() < 1e-3);
}

#[test]
fn amplitudes_at_ten_match_quadrature_oracle() {
    let k = common::bisect(|k| common::quad_l(k) - 10.0, 0.0, 0.999, 1e-14);
    let kk = common::quad_k(k);
    let ee = common::quad_e(k);
    let scale = kk / (2.0 * ee - kk * (1.0 - k * k));
    let (a, b) = (scale * (1.0 + k).powi(2), scale * (1.0 - k).powi(2));
    let p = orbit(10.0);
    assert!((p.a() * p.b() / (a * b) - 1.0).abs() < 1e-9);
    assert!(((p.a() + p.b()) / (a + b) - 1.0).abs() < 1e-11);
    // 40-digit reference values
    assert_abs_diff_eq!(p.a(), 4.983_428_839_513_639, epsilon = 1e-13);
    assert_abs_diff_eq!(p.b(), 0.003_685_932_754_255_127, epsilon = 1e-15);
    let q = orbit(5.0);
    assert_abs_diff_eq!(q.a(), 1.349_470_808_398_946_6, epsilon = 1e-13);
    assert_abs_diff_eq!(q.b(), 0.702_946_699_483_297_9, epsilon = 1e-13);
}

#[test]
fn amplitude_grows_with_r() {
    let (p10, p100) = (orbit(10.0), orbit(100.0));
    assert!(p100.a() > p10.a());
    assert!(p100.b() < p10.b());
    assert!(p100.a() * p100.b() < p10.a() * p10.b());
    // 40-digit reference: a(100) = 50 + 1.6e−21, b(100) = 2.976e−41
    assert_abs_diff_eq!(p100.a(), 50.0, epsilon = 1e-12);
    assert!((p100.b() / 2.976_060_780_816_668_8e-41 - 1.0).abs() < 1e-10);
}

#[test]
fn params_satisfy_defining_relations() {
    for &r in &[5.0, 10.0, 100.0] {
        let p = orbit(r);
        p.verify().unwrap();
        let (sa, sb) = (p.a().sqrt(), p.b().sqrt());
        assert_abs_diff_eq!(p.alpha(), (2.0 / r).sqrt() * (sa - sb), epsilon = 1e-12);
        assert_abs_diff_eq!(p.beta(), (r / 2.0).sqrt() * (sa + sb), epsilon = 1e-12);
    }
}

#[test]
fn x_at_extremes() {
    for &r in &[5.0, 10.0, 100.0] {
        let p = orbit(r);
        assert!((p.eval_x(0.0) / p.a() - 1.0).abs() < 1e-14);
        assert!((p.eval_x(1.0) / p.b() - 1.0).abs() < 1e-12);
        assert!((p.eval_x(-1.0) / p.b() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn x_is_exponential_of_integrated_y() {
    let p = orbit(10.0);
    let t = 0.37;
    let integral = common::integrate(&|s| p.eval_y(s), 0.0, t, 1e-15);
    let expected = p.a() * (-10.0 * integral).exp();
    assert!((p.eval_x(t) / expected - 1.0).abs() < 1e-12);
}

#[test]
fn y_special_points() {
    let p = orbit(10.0);
    assert_eq!(p.eval_y(0.0), 0.0);
    assert_abs_diff_eq!(p.eval_y(1.0), 0.0, epsilon = 1e-12);
    assert_abs_diff_eq!(p.eval_y(0.5), p.alpha(), epsilon = 1e-12);
}

#[test]
fn both_forms_agree_where_well_conditioned() {
    let p = orbit(10.0);
    for i in 0..200 {
        let t = -1.0 + 2.0 * i as f64 / 199.0;
        let (lhs, rhs) = p.x_forms(t);
        assert!((lhs - rhs).abs() <= 1e-10 * lhs.max(rhs), "t = {t}");
        assert!((p.eval_x(t) - lhs).abs() <= 1e-10 * lhs);
    }
}

#[test]
fn mean_over_unit_is_one() {
    for &r in &[5.0, 10.0] {
        let p = orbit(r);
        assert_abs_diff_eq!(p.mean_over_unit(), 1.0, epsilon = 1e-10);
        let quad = common::integrate(&|t| p.eval_x(t), 0.0, 1.0, 1e-14);
        assert_abs_diff_eq!(quad, 1.0, epsilon = 1e-10);
    }
}

#[test]
fn mean_over_unit_is_linear_in_a() {
    let p = orbit(10.0);
    let doubled =
        OrbitParams::from_parts(p.r(), p.modulus(), 2.0 * p.a(), p.b(), p.alpha(), p.beta())
            .unwrap();
    assert_abs_diff_eq!(
        doubled.mean_over_unit(),
        2.0 * p.mean_over_unit(),
        epsilon = 1e-14
    );
}

#[test]
fn second_period_condition_uses_sqrt_two_over_r() {
    // (√a + √b)·√(2/r)·E(k) − √(ab) = ∫₀¹ x* = 1; the √(r/2) variant does not hold.
    let p = orbit(10.0);
    let k = p.k();
    let ee = common::quad_e(k);
    let (sa, sb) = (p.a().sqrt(), p.b().sqrt());
    let consistent = (sa + sb) * (2.0 / 10.0f64).sqrt() * ee - sa * sb;
    let misprinted = (sa + sb) * (10.0f64 / 2.0).sqrt() * ee - sa * sb;
    assert_abs_diff_eq!(consistent, 1.0, epsilon = 1e-10);
    assert!((misprinted - 1.0).abs() > 1.0);
}

#[test]
fn conservation_on_thousand_samples() {
    let mut rng = StdRng::seed_from_u64(7);
    for &r in &[5.0, 10.0] {
        let p = orbit(r);
        let target = p.a() + p.b();
        assert_abs_diff_eq!(p.conserved_quantity(0.123), target, epsilon = 1e-9);
        for _ in 0..1000 {
            let t: f64 = rng.gen_range(-5.0..5.0);
            assert_abs_diff_eq!(p.conserved_quantity(t), target, epsilon = 1e-9);
        }
    }
}

#[test]
fn period_two() {
    let mut rng = StdRng::seed_from_u64(11);
    for &r in &[5.0, 10.0, 100.0] {
        let p = orbit(r);
        for _ in 0..1000 {
            let t: f64 = rng.gen_range(0.0..10.0);
            assert!((p.eval_x(t + 2.0) - p.eval_x(t)).abs() <= 1e-10 * p.a());
            assert!((p.eval_y(t + 2.0) - p.eval_y(t)).abs() <= 1e-10 * p.alpha());
        }
    }
}

#[test]
fn product_invariant() {
    let mut rng = StdRng::seed_from_u64(13);
    for &r in &[5.0, 10.0, 100.0] {
        let p = orbit(r);
        let ab = p.a() * p.b();
        for _ in 0..1000 {
            let t: f64 = rng.gen_range(-3.0..3.0);
            let prod = p.eval_x(t) * p.eval_x(t - 1.0);
            assert!((prod / ab - 1.0).abs() <= 1e-9, "r = {r}, t = {t}");
        }
    }
}

#[test]
fn window_sum_is_two() {
    for &r in &[5.0, 10.0] {
        let p = orbit(r);
        for &t in &[0.0, 0.3, 1.7, -2.4] {
            let integral = common::integrate(&|s| p.eval_x(t - s), 0.0, 2.0, 1e-13);
            assert_abs_diff_eq!(integral, 2.0, epsilon = 1e-8);
        }
    }
}

#[test]
fn window_of_one_gives_y_plus_one() {
    let p = orbit(10.0);
    for &t in &[0.2, 0.5, 1.3] {
        let integral = common::integrate(&|s| p.eval_x(s), t - 1.0, t, 1e-13);
        assert_abs_diff_eq!(integral, 1.0 + p.eval_y(t), epsilon = 1e-9);
    }
}

#[test]
fn reflection_symmetry() {
    let mut rng = StdRng::seed_from_u64(17);
    let p = orbit(10.0);
    for n in [-1.0, 0.0, 1.0] {
        for _ in 0..200 {
            let s: f64 = rng.gen_range(0.0..2.0);
            let (l, rr) = (p.eval_x(2.0 * n + s), p.eval_x(2.0 * n - s));
            assert!((l - rr).abs() <= 1e-10 * p.a());
        }
    }
}

#[test]
fn extremes_on_fine_grid() {
    let p = orbit(10.0);
    let samples = p.tabulate(-1.0, 1.0, 4001);
    let (imax, max) =
        samples.iter().enumerate().fold(
            (0, f64::MIN),
            |acc, (i, s)| if s.x > acc.1 { (i, s.x) } else { acc },
        );
    let min = samples.iter().map(|s| s.x).fold(f64::MAX, f64::min);
    assert_eq!(samples[imax].t, 0.0);
    assert!((max / p.a() - 1.0).abs() < 1e-14);
    assert!((min / p.b() - 1.0).abs() < 1e-12);
    assert!(samples
        .iter()
        .all(|s| s.x > 0.0 && s.y.abs() <= p.alpha() * (1.0 + 1e-14)));
}

#[test]
fn duffing_residual() {
    let p = orbit(10.0);
    let r = 10.0;
    let h = 1e-4;
    for i in 0..50 {
        let t = -1.0 + 2.0 * i as f64 / 49.0;
        let ypp = (p.eval_y(t + h) - 2.0 * p.eval_y(t) + p.eval_y(t - h)) / (h * h);
        let y = p.eval_y(t);
        let residual = ypp + r * y * (p.a() + p.b() - 0.5 * r * y * y);
        assert!(residual.abs() <= 1e-5, "t = {t}: {residual:e}");
    }
}

#[test]
fn initial_slope_is_a_minus_b() {
    let p = orbit(10.0);
    let slope = common::central_diff(|t| p.eval_y(t), 0.0, 1e-6);
    assert_abs_diff_eq!(slope, p.a() - p.b(), epsilon = 1e-6);
}

#[test]
fn x_derivative_matches_reduced_system() {
    let p = orbit(5.0);
    for &t in &[0.1, 0.6, 1.4] {
        let fd = common::central_diff(|s| p.eval_x(s), t, 1e-6);
        assert_abs_diff_eq!(fd, p.eval_dx(t), epsilon = 1e-7);
        let dy = common::central_diff(|s| p.eval_y(s), t, 1e-6);
        let x = p.eval_x(t);
        assert_abs_diff_eq!(dy, x - p.a() * p.b() / x, epsilon = 1e-7);
    }
}

#[test]
fn json_round_trip() {
    let p = orbit(10.0);
    let v: serde_json::Value = serde_json::from_str(&p.to_json()).unwrap();
    for (key, want) in [
        ("r", p.r()),
        ("k", p.k()),
        ("a", p.a()),
        ("b", p.b()),
        ("alpha", p.alpha()),
        ("beta", p.beta()),
    ] {
        assert_eq!(v[key].as_f64().unwrap(), want, "{key}");
    }
}

#[test]
fn amplitude_in_log_space_far_beyond_f64_range() {
    let mut prev = orbit_amplitude(10.0).unwrap();
    for &r in &[1e2, 1e3, 1e4, 1e5] {
        let next = orbit_amplitude(r).unwrap();
        assert!(next.a > prev.a && next.ln_b < prev.ln_b && next.ln_ab < prev.ln_ab);
        prev = next;
    }
    // a ≈ r/2 once k' is negligible
    assert!((prev.a / 5e4 - 1.0).abs() < 1e-3);
    let _ = Modulus::new(0.5).unwrap();
}
