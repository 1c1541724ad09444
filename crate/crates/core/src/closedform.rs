//! The explicit period-2 orbit of `x′(t) = r·x(t)(1 − ∫₀¹ x(t − s) ds)`.
//!
//! For `r > π²/2` the orbit is
//!
//! ```text
//! x*(t) = a ((1 − k)/(dn(βt) − k cn(βt)))² = a ((dn(βt) + k cn(βt))/(1 + k))²
//! y*(t) = α sn(βt),          y*(t) = ∫_{t−1}^{t} x*(s) ds − 1
//! ```
//!
//! with `k = L⁻¹(r)`, `a, b = K(k)(1 ± k)²/(2E(k) − K(k)(1 − k²))`,
//! `α = √(2/r)(√a − √b)` and `β = √(r/2)(√a + √b) = 2K(k)`.

use crate::elliptic::{
    bifurcation_l, complete_ke, invert_l, EllipticError, JacobiEvaluator, JacobiTriple, Modulus,
    HOPF_POINT, JACOBI_THETA_MAX,
};
use crate::export::sig17;
use thiserror::Error;

/// Minimal period of the orbit.
pub const PERIOD: f64 = 2.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OrbitError {
    #[error("no periodic orbit for r ≤ π²/2 (r = {0})")]
    BelowHopf(f64),
    #[error("r = {0} is numerically indistinguishable from π²/2; the orbit degenerates to x = 1")]
    Degenerate(f64),
    #[error("orbit for r = {0} is not representable in f64 (its minimum underflows)")]
    Unrepresentable(f64),
    #[error("orbit invariant violated: {what} (deviation {deviation:e})")]
    Invariant { what: &'static str, deviation: f64 },
    #[error(transparent)]
    Elliptic(#[from] EllipticError),
}

/// One period-2 orbit, fully described by `(r, k, a, b, α, β)`.
#[derive(Clone)]
pub struct OrbitParams {
    r: f64,
    modulus: Modulus,
    a: f64,
    b: f64,
    alpha: f64,
    beta: f64,
    jacobi: JacobiEvaluator,
}

impl std::fmt::Debug for OrbitParams {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OrbitParams")
            .field("r", &self.r)
            .field("k", &self.modulus.k())
            .field("a", &self.a)
            .field("b", &self.b)
            .field("alpha", &self.alpha)
            .field("beta", &self.beta)
            .finish()
    }
}

/// A point of the orbit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitSample {
    pub t: f64,
    pub x: f64,
    pub y: f64,
}

/// Builds the period-2 orbit for growth rate `r > π²/2`.
pub fn build_orbit(r: f64) -> Result<OrbitParams, OrbitError> {
    if !(r.is_finite() && r > HOPF_POINT) {
        return Err(OrbitError::BelowHopf(r));
    }
    let m = invert_l(r)?;
    if m.k() == 0.0 {
        return Err(OrbitError::Degenerate(r));
    }
    if m.log_complement() > JACOBI_THETA_MAX {
        return Err(OrbitError::Unrepresentable(r));
    }
    let (kk, ee) = complete_ke(m);
    let scale = kk / (2.0 * ee - kk * m.kc_squared());
    let root_scale = scale.sqrt();
    let k = m.k();
    let a = scale * (1.0 + k) * (1.0 + k);
    let b = scale * m.one_minus_k() * m.one_minus_k();
    if !(b >= f64::MIN_POSITIVE) {
        return Err(OrbitError::Unrepresentable(r));
    }
    // √a − √b = 2k√scale exactly; forming it from a and b would cancel for small k.
    let alpha = (2.0 / r).sqrt() * 2.0 * k * root_scale;
    let beta = (r / 2.0).sqrt() * 2.0 * root_scale;
    let params = OrbitParams::from_parts(r, m, a, b, alpha, beta)?;
    params.verify()?;
    Ok(params)
}

impl OrbitParams {
    /// Assembles parameters without checking them; see [`OrbitParams::verify`].
    pub fn from_parts(
        r: f64,
        modulus: Modulus,
        a: f64,
        b: f64,
        alpha: f64,
        beta: f64,
    ) -> Result<Self, OrbitError> {
        Ok(Self {
            r,
            modulus,
            a,
            b,
            alpha,
            beta,
            jacobi: JacobiEvaluator::new(modulus)?,
        })
    }

    /// Copy with the modulus replaced and everything else kept, used to
    /// inject inconsistencies into the invariant checks.
    pub fn with_modulus(&self, modulus: Modulus) -> Result<Self, OrbitError> {
        Self::from_parts(self.r, modulus, self.a, self.b, self.alpha, self.beta)
    }

    /// Re-checks the defining relations of an orbit.
    pub fn verify(&self) -> Result<(), OrbitError> {
        let fail = |what, deviation| Err(OrbitError::Invariant { what, deviation });
        if !(self.a > self.b && self.b > 0.0) {
            return fail("a > b > 0", self.b - self.a);
        }
        let k = self.modulus.k();
        let (sa, sb) = (self.a.sqrt(), self.b.sqrt());
        let dev = (k - (sa - sb) / (sa + sb)).abs();
        if dev > 1e-12 {
            return fail("k = (√a − √b)/(√a + √b)", dev);
        }
        let half_period = 2.0 * self.jacobi.quarter_period();
        let dev = (self.beta - half_period).abs();
        if dev > 1e-10 * half_period.max(1.0) {
            return fail("β = 2K(k)", dev);
        }
        let dev = (self.r * self.alpha / (self.beta * k) - 2.0).abs();
        if dev > 1e-10 {
            return fail("rα/(βk) = 2", dev);
        }
        let dev = (bifurcation_l(self.modulus) - self.r).abs();
        if dev > 1e-10 * self.r {
            return fail("L(k) = r", dev);
        }
        Ok(())
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn modulus(&self) -> Modulus {
        self.modulus
    }

    pub fn k(&self) -> f64 {
        self.modulus.k()
    }

    /// Maximum of the orbit, `x*(0)`.
    pub fn a(&self) -> f64 {
        self.a
    }

    /// Minimum of the orbit, `x*(±1)`.
    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    fn triple(&self, t: f64) -> Option<JacobiTriple> {
        self.jacobi.eval(self.beta * t).ok()
    }

    fn x_from(&self, j: JacobiTriple) -> f64 {
        let k = self.modulus.k();
        let plus = j.dn + k * j.cn;
        let minus = j.dn - k * j.cn;
        // plus·minus = 1 − k²; use whichever factor carries no cancellation
        let x = if j.cn >= 0.0 {
            let q = plus / (1.0 + k);
            self.a * q * q
        } else {
            let q = self.modulus.one_minus_k() / minus;
            self.a * q * q
        };
        #[cfg(debug_assertions)]
        if plus.min(minus) >= 1e-4 {
            let (lhs, rhs) = self.forms_from(j);
            debug_assert!(
                (lhs - rhs).abs() <= 1e-10 * lhs.abs().max(rhs.abs()),
                "closed forms of x* disagree: {lhs} vs {rhs}"
            );
        }
        x
    }

    fn forms_from(&self, j: JacobiTriple) -> (f64, f64) {
        let k = self.modulus.k();
        let first = self.modulus.one_minus_k() / (j.dn - k * j.cn);
        let second = (j.dn + k * j.cn) / (1.0 + k);
        (self.a * first * first, self.a * second * second)
    }

    /// Both algebraic forms of `x*(t)`:
    /// `a((1 − k)/(dn − k cn))²` and `a((dn + k cn)/(1 + k))²`.
    pub fn x_forms(&self, t: f64) -> (f64, f64) {
        match self.triple(t) {
            Some(j) => self.forms_from(j),
            None => (f64::NAN, f64::NAN),
        }
    }

    /// `x*(t)`; NaN for non-finite `t`.
    pub fn eval_x(&self, t: f64) -> f64 {
        self.triple(t).map_or(f64::NAN, |j| self.x_from(j))
    }

    /// `y*(t) = α sn(βt)`.
    pub fn eval_y(&self, t: f64) -> f64 {
        self.triple(t).map_or(f64::NAN, |j| self.alpha * j.sn)
    }

    pub fn sample(&self, t: f64) -> OrbitSample {
        match self.triple(t) {
            Some(j) => OrbitSample {
                t,
                x: self.x_from(j),
                y: self.alpha * j.sn,
            },
            None => OrbitSample {
                t,
                x: f64::NAN,
                y: f64::NAN,
            },
        }
    }

    /// `x*′(t) = −r x*(t) y*(t)`.
    pub fn eval_dx(&self, t: f64) -> f64 {
        let s = self.sample(t);
        -self.r * s.x * s.y
    }

    /// `n` equally spaced samples on `[t0, t1]`, endpoints included.
    pub fn tabulate(&self, t0: f64, t1: f64, n: usize) -> Vec<OrbitSample> {
        match n {
            0 => Vec::new(),
            1 => vec![self.sample(t0)],
            _ => {
                let h = (t1 - t0) / (n - 1) as f64;
                (0..n)
                    .map(|i| {
                        let t = if i + 1 == n { t1 } else { t0 + i as f64 * h };
                        self.sample(t)
                    })
                    .collect()
            }
        }
    }

    /// `∫₀¹ x*(t) dt = a(k² − 1 + 4E(k)/β)/(1 + k)²`.
    pub fn mean_over_unit(&self) -> f64 {
        let (_, ee) = complete_ke(self.modulus);
        let k = self.modulus.k();
        self.a * (4.0 * ee / self.beta - self.modulus.kc_squared()) / ((1.0 + k) * (1.0 + k))
    }

    /// `x + ab/x + (r/2)y²`, equal to `a + b` along the orbit.
    pub fn conserved_quantity(&self, t: f64) -> f64 {
        let s = self.sample(t);
        s.x + self.a * self.b / s.x + 0.5 * self.r * s.y * s.y
    }

    /// `{r, k, a, b, alpha, beta}` with 17 significant digits.
    pub fn to_json(&self) -> String {
        format!(
            "{{\"r\":{},\"k\":{},\"a\":{},\"b\":{},\"alpha\":{},\"beta\":{}}}",
            sig17(self.r),
            sig17(self.k()),
            sig17(self.a),
            sig17(self.b),
            sig17(self.alpha),
            sig17(self.beta)
        )
    }
}

/// Orbit extremes in logarithmic form, available far beyond the range
/// where the orbit itself can be evaluated in `f64`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Amplitude {
    pub r: f64,
    pub modulus: Modulus,
    /// Maximum `a`.
    pub a: f64,
    /// `ln b`; `b` itself underflows for `r` above about 700.
    pub ln_b: f64,
    /// `ln(ab) = 2 ln(K/(2E − K k'²)) + 4 ln k'`.
    pub ln_ab: f64,
}

impl Amplitude {
    pub fn b(&self) -> f64 {
        self.ln_b.exp()
    }

    pub fn ab(&self) -> f64 {
        self.ln_ab.exp()
    }
}

pub fn orbit_amplitude(r: f64) -> Result<Amplitude, OrbitError> {
    if !(r.is_finite() && r > HOPF_POINT) {
        return Err(OrbitError::BelowHopf(r));
    }
    let m = invert_l(r)?;
    let (kk, ee) = complete_ke(m);
    let ln_scale = (kk / (2.0 * ee - kk * m.kc_squared())).ln();
    let k = m.k();
    let theta = m.log_complement();
    // ln(1 − k) = −2θ − ln(1 + k)
    let ln_one_minus_k = -2.0 * theta - k.ln_1p();
    Ok(Amplitude {
        r,
        modulus: m,
        a: ln_scale.exp() * (1.0 + k) * (1.0 + k),
        ln_b: ln_scale + 2.0 * ln_one_minus_k,
        ln_ab: 2.0 * ln_scale - 4.0 * theta,
    })
}
