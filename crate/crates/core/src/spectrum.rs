//! Roots of the characteristic function of the linearization at `x = 1`,
//!
//! ```text
//! F(λ) = λ + r (1 − e^{−λ}) / λ,      F(0) = r,
//! ```
//!
//! located by the argument principle on rectangles and polished by Newton.

use std::f64::consts::PI;

use num_complex::Complex64;
use thiserror::Error;

use crate::export::sig17;

/// Threshold on `Re λ` separating stable, critical and unstable verdicts.
pub const VERDICT_THRESHOLD: f64 = 1e-8;
/// Newton target for `|F(λ)|`.
pub const POLISH_RESIDUAL: f64 = 1e-12;
/// Largest residual accepted for a reported root.
pub const MAX_RESIDUAL: f64 = 1e-10;

const SERIES_RADIUS: f64 = 1e-4;
const PERTURBATION: f64 = 1e-6;
const MAX_RETRIES: usize = 5;
const MAX_DEPTH: usize = 48;
const BASE_PANELS: usize = 8;
const MAX_PANELS: usize = 1024;

const GL_X: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL_W: [f64; 4] = [
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectrumError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("contour passes through or next to a root after {0} perturbations")]
    ContourThroughRoot(usize),
    #[error("winding count {expected} but {found} roots isolated")]
    CountMismatch { expected: usize, found: usize },
    #[error("(r = {r}, ω = {omega}) is not a critical pair: |F(iω)| = {residual:e}")]
    NonCriticalPair { r: f64, omega: f64, residual: f64 },
    #[error("Newton failed near λ = {re} + {im}i (residual {residual:e})")]
    NoConvergence { re: f64, im: f64, residual: f64 },
}

/// `F(λ)` for `r > 0`.
pub fn char_function(lambda: Complex64, r: f64) -> Complex64 {
    lambda + r * phi(lambda)
}

/// `F′(λ) = 1 + r (e^{−λ}(1 + λ) − 1) / λ²`.
pub fn char_derivative(lambda: Complex64, r: f64) -> Complex64 {
    1.0 + r * phi_derivative(lambda)
}

/// `(1 − e^{−λ})/λ`, with its Taylor series near 0.
fn phi(z: Complex64) -> Complex64 {
    if z.norm() < SERIES_RADIUS {
        const C: [f64; 7] = [
            1.0,
            -1.0 / 2.0,
            1.0 / 6.0,
            -1.0 / 24.0,
            1.0 / 120.0,
            -1.0 / 720.0,
            1.0 / 5040.0,
        ];
        horner(&C, z)
    } else {
        (1.0 - (-z).exp()) / z
    }
}

fn phi_derivative(z: Complex64) -> Complex64 {
    if z.norm() < SERIES_RADIUS {
        const C: [f64; 6] = [
            -1.0 / 2.0,
            1.0 / 3.0,
            -1.0 / 8.0,
            1.0 / 30.0,
            -1.0 / 144.0,
            1.0 / 840.0,
        ];
        horner(&C, z)
    } else {
        ((-z).exp() * (1.0 + z) - 1.0) / (z * z)
    }
}

fn horner(c: &[f64], z: Complex64) -> Complex64 {
    c.iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &ci| acc * z + ci)
}

/// Axis-aligned search rectangle `[re_min, re_max] × [im_min, im_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Rect {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Result<Self, SpectrumError> {
        let ok = [re_min, re_max, im_min, im_max]
            .iter()
            .all(|v| v.is_finite())
            && re_min < re_max
            && im_min < im_max;
        if !ok {
            return Err(SpectrumError::InvalidParameter(format!(
                "degenerate rectangle [{re_min}, {re_max}] × [{im_min}, {im_max}]"
            )));
        }
        Ok(Self {
            re_min,
            re_max,
            im_min,
            im_max,
        })
    }

    /// `Re ∈ [−20, max(r, 1) + 1]`, `Im ∈ [−Ω, Ω]` with `Ω = 12π`, widened
    /// to the next even multiple of π above `r + 1` when `r` is large.
    pub fn default_for(r: f64) -> Self {
        let omega = (12.0 * PI).max(2.0 * PI * ((r + 1.0) / (2.0 * PI)).ceil());
        Self {
            re_min: -20.0,
            re_max: r.max(1.0) + 1.0,
            im_min: -omega,
            im_max: omega,
        }
    }

    pub fn contains(&self, z: Complex64) -> bool {
        z.re >= self.re_min && z.re <= self.re_max && z.im >= self.im_min && z.im <= self.im_max
    }

    fn center(&self) -> Complex64 {
        Complex64::new(
            0.5 * (self.re_min + self.re_max),
            0.5 * (self.im_min + self.im_max),
        )
    }

    fn diameter(&self) -> f64 {
        (self.re_max - self.re_min).hypot(self.im_max - self.im_min)
    }

    fn expanded(&self, d: f64) -> Self {
        Self {
            re_min: self.re_min - d,
            re_max: self.re_max + d,
            im_min: self.im_min - d,
            im_max: self.im_max + d,
        }
    }

    fn quadrants(&self, fx: f64, fy: f64) -> [Rect; 4] {
        let xm = self.re_min + fx * (self.re_max - self.re_min);
        let ym = self.im_min + fy * (self.im_max - self.im_min);
        [
            Rect {
                re_max: xm,
                im_max: ym,
                ..*self
            },
            Rect {
                re_min: xm,
                im_max: ym,
                ..*self
            },
            Rect {
                re_max: xm,
                im_min: ym,
                ..*self
            },
            Rect {
                re_min: xm,
                im_min: ym,
                ..*self
            },
        ]
    }

    fn corners(&self) -> [Complex64; 4] {
        [
            Complex64::new(self.re_min, self.im_min),
            Complex64::new(self.re_max, self.im_min),
            Complex64::new(self.re_max, self.im_max),
            Complex64::new(self.re_min, self.im_max),
        ]
    }
}

/// `(1/2πi)∮(F′/F − Σ 1/(z − pⱼ))` with `panels` Gauss–Legendre panels
/// per side.
fn winding_at(rect: &Rect, r: f64, panels: usize, poles: &[Complex64]) -> f64 {
    let c = rect.corners();
    let mut total = Complex64::new(0.0, 0.0);
    for side in 0..4 {
        let (z0, z1) = (c[side], c[(side + 1) % 4]);
        let dz = (z1 - z0) / panels as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for p in 0..panels {
            let mid = z0 + dz * (p as f64 + 0.5);
            for (x, w) in GL_X.iter().zip(GL_W) {
                for s in [-1.0, 1.0] {
                    let z = mid + dz * (0.5 * s * x);
                    let mut g = char_derivative(z, r) / char_function(z, r);
                    for &q in poles {
                        g -= 1.0 / (z - q);
                    }
                    acc += w * g;
                }
            }
        }
        total += acc * dz * 0.5;
    }
    (total / Complex64::new(0.0, 2.0 * PI)).re
}

fn segment_distance(z: Complex64, a: Complex64, b: Complex64) -> f64 {
    let d = b - a;
    let s = ((z - a).re * d.re + (z - a).im * d.im) / d.norm_sqr();
    (z - (a + d * s.clamp(0.0, 1.0))).norm()
}

/// Roots of `F` within one sample spacing of the boundary, found by Newton
/// from boundary samples whose Newton step is shorter than the spacing.
fn roots_near_boundary(rect: &Rect, r: f64) -> Vec<(Complex64, f64)> {
    const SAMPLES: usize = 256;
    let c = rect.corners();
    let mut found: Vec<(Complex64, f64)> = Vec::new();
    for side in 0..4 {
        let (z0, z1) = (c[side], c[(side + 1) % 4]);
        let spacing = (z1 - z0).norm() / SAMPLES as f64;
        for j in 0..SAMPLES {
            let mut z = z0 + (z1 - z0) * (j as f64 / SAMPLES as f64);
            let step = char_function(z, r) / char_derivative(z, r);
            if !(step.norm() < spacing) {
                continue;
            }
            for _ in 0..30 {
                z -= char_function(z, r) / char_derivative(z, r);
            }
            if !(char_function(z, r).norm() <= MAX_RESIDUAL) {
                continue;
            }
            let dist = (0..4)
                .map(|k| segment_distance(z, c[k], c[(k + 1) % 4]))
                .fold(f64::INFINITY, f64::min);
            let fresh = found
                .iter()
                .all(|(q, _)| (q - z).norm() > 1e-9 * z.norm().max(1.0));
            if dist < 2.0 * spacing && fresh {
                found.push((z, dist));
            }
        }
    }
    found
}

/// Number of roots inside `rect`, or `None` when a root sits on the
/// boundary or the count does not settle. Roots just off the boundary are
/// deflated from the integrand and counted directly.
pub fn winding_count(rect: &Rect, r: f64) -> Option<usize> {
    let near = roots_near_boundary(rect, r);
    let tol = 1e-9 * rect.diameter().max(1.0);
    if near.iter().any(|&(_, d)| d <= tol) {
        return None;
    }
    let poles: Vec<Complex64> = near.iter().map(|&(z, _)| z).collect();
    let inside = poles.iter().filter(|&&z| rect.contains(z)).count();
    let mut prev = winding_at(rect, r, BASE_PANELS, &poles);
    let mut panels = BASE_PANELS;
    while panels < MAX_PANELS {
        panels *= 2;
        let next = winding_at(rect, r, panels, &poles);
        let n = next.round();
        if n >= 0.0 && n == prev.round() && (next - n).abs() < 1e-3 && (prev - n).abs() < 0.05 {
            return Some(n as usize + inside);
        }
        prev = next;
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharRoot {
    pub lambda: Complex64,
    pub residual: f64,
}

/// Newton on `F` from `guess`; returns the root once `|F| ≤ 1e−12`, or the
/// best iterate if it stalls below [`MAX_RESIDUAL`].
pub fn polish(guess: Complex64, r: f64) -> Result<CharRoot, SpectrumError> {
    let mut z = guess;
    let mut best = CharRoot {
        lambda: z,
        residual: f64::INFINITY,
    };
    for _ in 0..100 {
        let f = char_function(z, r);
        let res = f.norm();
        if res < best.residual {
            best = CharRoot {
                lambda: z,
                residual: res,
            };
        }
        if res <= POLISH_RESIDUAL {
            return Ok(best);
        }
        let step = f / char_derivative(z, r);
        if !step.re.is_finite() || !step.im.is_finite() {
            break;
        }
        z -= step;
        if step.norm() <= 1e-15 * z.norm().max(1.0) {
            let res = char_function(z, r).norm();
            if res < best.residual {
                best = CharRoot {
                    lambda: z,
                    residual: res,
                };
            }
            break;
        }
    }
    if best.residual <= MAX_RESIDUAL {
        Ok(best)
    } else {
        Err(SpectrumError::NoConvergence {
            re: best.lambda.re,
            im: best.lambda.im,
            residual: best.residual,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Stable,
    Critical,
    Unstable,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Stable => "stable",
            Verdict::Critical => "critical",
            Verdict::Unstable => "unstable",
        }
    }

    fn from_rightmost(re: Option<f64>) -> Self {
        match re {
            Some(re) if re > VERDICT_THRESHOLD => Verdict::Unstable,
            Some(re) if re >= -VERDICT_THRESHOLD => Verdict::Critical,
            _ => Verdict::Stable,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumReport {
    pub r: f64,
    pub rect: Rect,
    /// Argument-principle count for `rect`.
    pub winding: usize,
    /// Sorted by real part, descending.
    pub roots: Vec<CharRoot>,
    pub verdict: Verdict,
}

impl SpectrumReport {
    pub fn rightmost(&self) -> Option<&CharRoot> {
        self.roots.first()
    }

    /// `{"r":…,"verdict":…,"roots":[{"re":…,"im":…,"residual":…}]}`.
    pub fn to_json(&self) -> String {
        let roots: Vec<String> = self
            .roots
            .iter()
            .map(|c| {
                format!(
                    "{{\"re\":{},\"im\":{},\"residual\":{}}}",
                    sig17(c.lambda.re),
                    sig17(c.lambda.im),
                    sig17(c.residual)
                )
            })
            .collect();
        format!(
            "{{\"r\":{},\"verdict\":\"{}\",\"roots\":[{}]}}",
            sig17(self.r),
            self.verdict.as_str(),
            roots.join(",")
        )
    }
}

/// Split fractions tried in turn when a dividing line meets a root.
const SPLITS: [(f64, f64); 4] = [
    (0.5137, 0.4871),
    (0.4621, 0.5393),
    (0.5711, 0.4317),
    (0.4419, 0.5547),
];

fn isolate(
    rect: &Rect,
    r: f64,
    count: usize,
    depth: usize,
    out: &mut Vec<CharRoot>,
) -> Result<(), SpectrumError> {
    if count == 0 {
        return Ok(());
    }
    if count == 1 {
        if let Ok(root) = polish(rect.center(), r) {
            if rect
                .expanded(1e-9 * rect.diameter().max(1.0))
                .contains(root.lambda)
            {
                out.push(root);
                return Ok(());
            }
        }
    }
    if depth == MAX_DEPTH {
        return Err(SpectrumError::CountMismatch {
            expected: count,
            found: 0,
        });
    }
    for (fx, fy) in SPLITS {
        let quads = rect.quadrants(fx, fy);
        let counts: Option<Vec<usize>> = quads.iter().map(|q| winding_count(q, r)).collect();
        match counts {
            Some(c) if c.iter().sum::<usize>() == count => {
                for (q, n) in quads.iter().zip(c) {
                    isolate(q, r, n, depth + 1, out)?;
                }
                return Ok(());
            }
            _ => continue,
        }
    }
    Err(SpectrumError::ContourThroughRoot(SPLITS.len()))
}

/// All roots of `F` inside `rect`.
pub fn find_roots(r: f64, rect: &Rect) -> Result<SpectrumReport, SpectrumError> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(SpectrumError::InvalidParameter(format!(
            "r = {r} must be positive"
        )));
    }
    if rect.re_max < r || rect.im_max < r || -rect.im_min < r {
        return Err(SpectrumError::InvalidParameter(format!(
            "rectangle must reach |λ| = r = {r} in the right half plane"
        )));
    }
    let mut attempt = *rect;
    for retry in 0..=MAX_RETRIES {
        if retry > 0 {
            attempt = rect.expanded(PERTURBATION * retry as f64);
        }
        let Some(count) = winding_count(&attempt, r) else {
            continue;
        };
        let mut roots = Vec::with_capacity(count);
        match isolate(&attempt, r, count, 0, &mut roots) {
            Ok(()) => {}
            Err(SpectrumError::ContourThroughRoot(_)) => continue,
            Err(e) => return Err(e),
        }
        if roots.len() != count {
            return Err(SpectrumError::CountMismatch {
                expected: count,
                found: roots.len(),
            });
        }
        roots.sort_by(|a, b| {
            b.lambda
                .re
                .total_cmp(&a.lambda.re)
                .then(b.lambda.im.total_cmp(&a.lambda.im))
        });
        let verdict = Verdict::from_rightmost(roots.first().map(|c| c.lambda.re));
        return Ok(SpectrumReport {
            r,
            rect: attempt,
            winding: count,
            roots,
            verdict,
        });
    }
    Err(SpectrumError::ContourThroughRoot(MAX_RETRIES))
}

/// [`find_roots`] on [`Rect::default_for`].
pub fn analyze(r: f64) -> Result<SpectrumReport, SpectrumError> {
    find_roots(r, &Rect::default_for(r))
}

/// Closed-form crossing speed `Re λ′(r) = 1/(4 + (r/ω)²)` at a purely
/// imaginary pair `±iω`.
pub fn hopf_crossing_derivative(r: f64, omega: f64) -> Result<f64, SpectrumError> {
    let residual = char_function(Complex64::new(0.0, omega), r).norm();
    if !(residual <= 1e-8) {
        return Err(SpectrumError::NonCriticalPair { r, omega, residual });
    }
    Ok(1.0 / (4.0 + (r / omega).powi(2)))
}

/// Follows a root from `(lambda0, r0)` to `r1` by Newton continuation in
/// `steps` equal increments.
pub fn continue_root(
    lambda0: Complex64,
    r0: f64,
    r1: f64,
    steps: usize,
) -> Result<CharRoot, SpectrumError> {
    let steps = steps.max(1);
    let mut root = polish(lambda0, r0)?;
    let mut prev = root.lambda;
    for i in 1..=steps {
        let r = r0 + (r1 - r0) * i as f64 / steps as f64;
        let guess = if i > 1 {
            2.0 * root.lambda - prev
        } else {
            root.lambda
        };
        prev = root.lambda;
        root = polish(guess, r)?;
    }
    Ok(root)
}

/// Central difference of `Re λ(r)` at a critical pair, tracking the root
/// from `iω` out to `r ± dr`.
pub fn crossing_derivative_numeric(r: f64, omega: f64, dr: f64) -> Result<f64, SpectrumError> {
    let start = Complex64::new(0.0, omega);
    let up = continue_root(start, r, r + dr, 20)?;
    let down = continue_root(start, r, r - dr, 20)?;
    Ok((up.lambda.re - down.lambda.re) / (2.0 * dr))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn series_branch_is_continuous() {
        let r = 2.5;
        for &z in &[
            Complex64::new(9.99e-5, 0.0),
            Complex64::new(0.0, 9.99e-5),
            Complex64::new(-7e-5, 7e-5),
        ] {
            let closed = z + r * (1.0 - (-z).exp()) / z;
            assert!((char_function(z, r) - closed).norm() < 1e-11);
            let closed_d = 1.0 + r * ((-z).exp() * (1.0 + z) - 1.0) / (z * z);
            assert!((char_derivative(z, r) - closed_d).norm() < 1e-6);
        }
        assert_eq!(
            char_function(Complex64::new(0.0, 0.0), 1.0),
            Complex64::new(1.0, 0.0)
        );
    }

    #[test]
    fn verdict_thresholds() {
        assert_eq!(Verdict::from_rightmost(Some(2e-8)), Verdict::Unstable);
        assert_eq!(Verdict::from_rightmost(Some(-5e-9)), Verdict::Critical);
        assert_eq!(Verdict::from_rightmost(Some(-2e-8)), Verdict::Stable);
        assert_eq!(Verdict::from_rightmost(None), Verdict::Stable);
    }

    #[test]
    fn default_rect_grows_with_r() {
        let small = Rect::default_for(1.0);
        assert_eq!(small.re_max, 2.0);
        assert!((small.im_max - 12.0 * PI).abs() < 1e-12);
        let big = Rect::default_for(100.0);
        assert!(big.im_max > 101.0 && big.re_max == 101.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(find_roots(-1.0, &Rect::default_for(1.0)).is_err());
        let narrow = Rect::new(-1.0, 1.0, -1.0, 1.0).unwrap();
        assert!(find_roots(5.0, &narrow).is_err());
        assert!(Rect::new(1.0, 0.0, -1.0, 1.0).is_err());
    }

    #[test]
    fn non_critical_pair_is_rejected() {
        assert!(matches!(
            hopf_crossing_derivative(5.0, PI),
            Err(SpectrumError::NonCriticalPair { .. })
        ));
    }
}
