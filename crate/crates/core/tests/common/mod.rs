//! Independent oracles shared by the integration tests. Nothing here calls
//! into the crate's special-function or integrator code paths.
#![allow(dead_code)]

use std::f64::consts::FRAC_PI_2;

/// Adaptive Gauss–Kronrod (7/15) quadrature. Subdivision stops at the
/// requested tolerance or at the rounding floor of the panel estimate.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    const XK: [f64; 8] = [
        0.991_455_371_120_812_6,
        0.949_107_912_342_758_5,
        0.864_864_423_359_769_1,
        0.741_531_185_599_394_4,
        0.586_087_235_467_691_1,
        0.405_845_151_377_397_2,
        0.207_784_955_007_898_5,
        0.0,
    ];
    const WK: [f64; 8] = [
        0.022_935_322_010_529_22,
        0.063_092_092_629_978_55,
        0.104_790_010_322_250_2,
        0.140_653_259_715_525_9,
        0.169_004_726_639_267_9,
        0.190_350_578_064_785_4,
        0.204_432_940_075_298_9,
        0.209_482_141_084_728,
    ];
    const WG: [f64; 4] = [
        0.129_484_966_168_869_7,
        0.279_705_391_489_276_7,
        0.381_830_050_505_118_9,
        0.417_959_183_673_469_4,
    ];
    fn panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let fc = f(c);
        let mut kron = WK[7] * fc;
        let mut gauss = WG[3] * fc;
        for j in 0..7 {
            let s = f(c - h * XK[j]) + f(c + h * XK[j]);
            kron += WK[j] * s;
            if j % 2 == 1 {
                gauss += WG[j / 2] * s;
            }
        }
        (h * kron, h * (kron - gauss).abs())
    }
    fn recurse<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
        let (val, err) = panel(f, a, b);
        if depth == 0 || err <= tol || err <= 100.0 * f64::EPSILON * val.abs() {
            return val;
        }
        let m = 0.5 * (a + b);
        recurse(f, a, m, 0.5 * tol, depth - 1) + recurse(f, m, b, 0.5 * tol, depth - 1)
    }
    let panels = 8;
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|i| {
            let lo = a + i as f64 * h;
            let hi = if i + 1 == panels { b } else { lo + h };
            recurse(f, lo, hi, tol / panels as f64, 30)
        })
        .sum()
}

pub fn quad_k(k: f64) -> f64 {
    integrate(
        &|t: f64| 1.0 / (1.0 - k * k * t.sin().powi(2)).sqrt(),
        0.0,
        FRAC_PI_2,
        1e-15,
    )
}

pub fn quad_e(k: f64) -> f64 {
    integrate(
        &|t: f64| (1.0 - k * k * t.sin().powi(2)).sqrt(),
        0.0,
        FRAC_PI_2,
        1e-15,
    )
}

pub fn quad_l(k: f64) -> f64 {
    let kk = quad_k(k);
    2.0 * kk * (2.0 * quad_e(k) - kk * (1.0 - k * k))
}

/// Incomplete integral of the first kind by quadrature.
pub fn quad_f(phi: f64, k: f64) -> f64 {
    integrate(
        &|t: f64| 1.0 / (1.0 - k * k * t.sin().powi(2)).sqrt(),
        0.0,
        phi,
        1e-15,
    )
}

/// Jacobi amplitude by bisection on the quadrature of F(φ, k).
pub fn quad_amplitude(u: f64, k: f64) -> f64 {
    let kk = quad_k(k);
    let n = (u / (2.0 * kk)).round();
    let target = u - n * 2.0 * kk;
    let (mut lo, mut hi) = (-FRAC_PI_2, FRAC_PI_2);
    for _ in 0..70 {
        let mid = 0.5 * (lo + hi);
        if quad_f(mid, k) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    n * std::f64::consts::PI + 0.5 * (lo + hi)
}

/// Plain bisection, used where the oracle must not share Newton logic.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let flo = f(lo);
    assert!(flo * f(hi) <= 0.0, "bracket does not straddle a root");
    let rising = flo < 0.0;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if (f(mid) < 0.0) == rising {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Central difference.
pub fn central_diff<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}
