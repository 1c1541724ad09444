//! Complete elliptic integrals, Jacobi elliptic functions and the
//! bifurcation function `L(k) = 2K(k)(2E(k) − K(k)(1 − k²))`.
//!
//! The modulus convention is `k` (not the parameter `m = k²`). A [`Modulus`]
//! is stored together with its complementary modulus `k' = √(1 − k²)` and
//! `θ = −ln k'`. The last coordinate keeps moduli that are indistinguishable
//! from 1 in `f64` representable: the orbit amplitude grows like `r/2`
//! while `k'` decays like `4·exp(−r/4)`, so for large growth rates only
//! `θ` carries the information.

use std::f64::consts::{FRAC_PI_2, LN_2, PI};

use thiserror::Error;

/// `L(0) = π²/2`, the Hopf point of the equilibrium `x = 1`.
pub const HOPF_POINT: f64 = PI * PI / 2.0;

/// Above this `θ` the complete integrals use their logarithmic expansion at
/// `k' → 0`; the first neglected term is `O(k'⁴ ln k')`, below `1e−60`.
const ASYMPTOTIC_THETA: f64 = 36.0;

/// Jacobi functions need `k'²` to stay a normal `f64`.
pub const JACOBI_THETA_MAX: f64 = 300.0;

const AGM_MAX: usize = 48;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EllipticError {
    #[error("modulus k = {0} outside [0, 1)")]
    Modulus(f64),
    #[error("complementary log-modulus {0} must be finite and non-negative")]
    LogComplement(f64),
    #[error("argument must be finite, got {0}")]
    NonFinite(f64),
    #[error("modulus too close to 1 for elliptic function evaluation (-ln k' = {0})")]
    NearSingular(f64),
    #[error("the logarithmic antiderivative of sn is undefined at k = 0")]
    ZeroModulus,
    #[error("L(k) = {0} has no solution in [0, 1): need r > π²/2")]
    BelowThreshold(f64),
    #[error("inversion of L(k) = {target} did not converge (residual {residual:e})")]
    NoConvergence { target: f64, residual: f64 },
}

/// Elliptic modulus `0 ≤ k < 1` with cached complementary quantities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Modulus {
    k: f64,
    kc: f64,
    theta: f64,
}

impl Modulus {
    pub fn new(k: f64) -> Result<Self, EllipticError> {
        if !(0.0..1.0).contains(&k) {
            return Err(EllipticError::Modulus(k));
        }
        let kc = ((1.0 - k) * (1.0 + k)).sqrt();
        let theta = if k < 0.5 {
            -0.5 * (-k * k).ln_1p()
        } else {
            -kc.ln()
        };
        Ok(Self { k, kc, theta })
    }

    /// Builds the modulus from `θ = −ln k'`, which stays accurate when `k`
    /// rounds to 1.
    pub fn from_log_complement(theta: f64) -> Result<Self, EllipticError> {
        if !(theta.is_finite() && theta >= 0.0) {
            return Err(EllipticError::LogComplement(theta));
        }
        let kc = (-theta).exp();
        let k = (-(-2.0 * theta).exp_m1()).sqrt();
        Ok(Self { k, kc, theta })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    /// Complementary modulus `k' = √(1 − k²)`.
    pub fn kc(&self) -> f64 {
        self.kc
    }

    /// `θ = −ln k'`.
    pub fn log_complement(&self) -> f64 {
        self.theta
    }

    /// `1 − k²`, free of cancellation.
    pub fn kc_squared(&self) -> f64 {
        self.kc * self.kc
    }

    /// `1 − k`, computed as `k'²/(1 + k)`.
    pub fn one_minus_k(&self) -> f64 {
        self.kc_squared() / (1.0 + self.k)
    }
}

/// `(sn, cn, dn)` at a common argument and modulus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobiTriple {
    pub sn: f64,
    pub cn: f64,
    pub dn: f64,
}

/// Arithmetic-geometric mean sequence started from `(1, k', k)`.
#[derive(Clone)]
struct Agm {
    a: [f64; AGM_MAX],
    b: [f64; AGM_MAX],
    c: [f64; AGM_MAX],
    last: usize,
}

impl Agm {
    fn new(m: Modulus) -> Self {
        let mut a = [0.0; AGM_MAX];
        let mut b = [0.0; AGM_MAX];
        let mut c = [0.0; AGM_MAX];
        a[0] = 1.0;
        b[0] = m.kc;
        c[0] = m.k;
        let mut n = 0;
        while n + 1 < AGM_MAX && (a[n] - b[n]).abs() > 1e-16 * a[n] {
            a[n + 1] = 0.5 * (a[n] + b[n]);
            b[n + 1] = (a[n] * b[n]).sqrt();
            c[n + 1] = 0.5 * (a[n] - b[n]);
            n += 1;
            // one-ulp limit cycle between a and b
            if n >= 2 && c[n] >= c[n - 1] {
                break;
            }
        }
        Self { a, b, c, last: n }
    }

    fn complete_k(&self) -> f64 {
        PI / (2.0 * self.a[self.last])
    }

    fn complete_e(&self) -> f64 {
        let mut weight = 0.5;
        let mut sum = 0.0;
        for c in &self.c[..=self.last] {
            sum += weight * c * c;
            weight *= 2.0;
        }
        self.complete_k() * (1.0 - sum)
    }
}

fn asymptotic_lambda(m: Modulus) -> f64 {
    2.0 * LN_2 + m.theta
}

/// Complete elliptic integral of the first kind, `K(k)`.
pub fn complete_k(m: Modulus) -> f64 {
    if m.theta > ASYMPTOTIC_THETA {
        let lambda = asymptotic_lambda(m);
        return lambda + 0.25 * m.kc_squared() * (lambda - 1.0);
    }
    Agm::new(m).complete_k()
}

/// Complete elliptic integral of the second kind, `E(k)`.
pub fn complete_e(m: Modulus) -> f64 {
    if m.theta > ASYMPTOTIC_THETA {
        let lambda = asymptotic_lambda(m);
        return 1.0 + 0.5 * m.kc_squared() * (lambda - 0.5);
    }
    Agm::new(m).complete_e()
}

/// `K(k)` and `E(k)` from one AGM pass.
pub fn complete_ke(m: Modulus) -> (f64, f64) {
    if m.theta > ASYMPTOTIC_THETA {
        return (complete_k(m), complete_e(m));
    }
    let agm = Agm::new(m);
    (agm.complete_k(), agm.complete_e())
}

/// `arcsin(ρ·sin φ)` with `1 − ρ` supplied separately, so that arguments
/// close to ±1 keep full precision.
fn asin_scaled(rho: f64, one_minus_rho: f64, phi: f64) -> f64 {
    let s = phi.sin();
    let w = rho * s;
    if w.abs() <= 0.5 {
        return w.asin();
    }
    let shifted = if s > 0.0 {
        (0.25 * PI - 0.5 * phi).sin()
    } else {
        (0.25 * PI + 0.5 * phi).sin()
    };
    let one_minus_abs_w = one_minus_rho + rho * 2.0 * shifted * shifted;
    (FRAC_PI_2 - 2.0 * (0.5 * one_minus_abs_w).sqrt().asin()).copysign(w)
}

/// Jacobi elliptic functions for a fixed modulus.
///
/// Holds the AGM sequence and the quarter period so that repeated
/// evaluation (orbit sampling, tabulation) does not redo them.
#[derive(Clone)]
pub struct JacobiEvaluator {
    modulus: Modulus,
    quarter: f64,
    agm: Agm,
}

impl JacobiEvaluator {
    pub fn new(m: Modulus) -> Result<Self, EllipticError> {
        if m.theta > JACOBI_THETA_MAX {
            return Err(EllipticError::NearSingular(m.theta));
        }
        Ok(Self {
            modulus: m,
            quarter: complete_k(m),
            agm: Agm::new(m),
        })
    }

    pub fn modulus(&self) -> Modulus {
        self.modulus
    }

    /// Quarter period `K(k)`.
    pub fn quarter_period(&self) -> f64 {
        self.quarter
    }

    /// Evaluates `(sn, cn, dn)(u)`.
    ///
    /// The argument is reduced to `u = qK + v` with `|v| ≤ K/2`; the core
    /// evaluation at `v` runs the descending Gauss recursion and the result
    /// is mapped back through the quarter-period shift formulas, which keeps
    /// `cn` and `dn` relatively accurate near their small values.
    pub fn eval(&self, u: f64) -> Result<JacobiTriple, EllipticError> {
        if !u.is_finite() {
            return Err(EllipticError::NonFinite(u));
        }
        let m = self.modulus;
        if m.k == 0.0 {
            let (sn, cn) = u.sin_cos();
            return Ok(JacobiTriple { sn, cn, dn: 1.0 });
        }
        let q = (u / self.quarter).round();
        let v = (-q).mul_add(self.quarter, u);
        let base = self.reduced(v);
        let kc = m.kc;
        let t = match (q as i64).rem_euclid(4) {
            0 => base,
            1 => JacobiTriple {
                sn: base.cn / base.dn,
                cn: -kc * base.sn / base.dn,
                dn: kc / base.dn,
            },
            2 => JacobiTriple {
                sn: -base.sn,
                cn: -base.cn,
                dn: base.dn,
            },
            _ => JacobiTriple {
                sn: -base.cn / base.dn,
                cn: kc * base.sn / base.dn,
                dn: kc / base.dn,
            },
        };
        Ok(t)
    }

    fn reduced(&self, v: f64) -> JacobiTriple {
        let agm = &self.agm;
        let n = agm.last;
        let mut phi = v * agm.a[n] * f64::powi(2.0, n as i32);
        for j in (1..=n).rev() {
            let rho = agm.c[j] / agm.a[j];
            let one_minus_rho = agm.b[j - 1] / agm.a[j];
            phi = 0.5 * (phi + asin_scaled(rho, one_minus_rho, phi));
        }
        let (sn, cn) = phi.sin_cos();
        let m = self.modulus;
        let dn = (m.kc_squared() + m.k * m.k * cn * cn).sqrt();
        JacobiTriple { sn, cn, dn }
    }
}

/// `(sn, cn, dn)(u, k)`; builds a [`JacobiEvaluator`] per call.
pub fn jacobi(u: f64, m: Modulus) -> Result<JacobiTriple, EllipticError> {
    JacobiEvaluator::new(m)?.eval(u)
}

/// `L(k) = 2K(k)(2E(k) − K(k)(1 − k²))`.
pub fn bifurcation_l(m: Modulus) -> f64 {
    let (kk, ee) = complete_ke(m);
    2.0 * kk * (2.0 * ee - kk * m.kc_squared())
}

/// `2E(k) − K(k)(1 − k²)`, the positive factor shared by `L` and the
/// orbit amplitudes.
pub fn l_factor(m: Modulus) -> f64 {
    let (kk, ee) = complete_ke(m);
    2.0 * ee - kk * m.kc_squared()
}

/// `dK/dk = (E/(1 − k²) − K)/k`; defined for `0 < k < 1`.
pub fn complete_k_derivative(m: Modulus) -> f64 {
    let (kk, ee) = complete_ke(m);
    (ee / m.kc_squared() - kk) / m.k
}

/// `dL/dk = 2K′(2E − K(1 − k²)) + 2K(1 − k²)K′`.
pub fn bifurcation_l_derivative(m: Modulus) -> f64 {
    let (kk, ee) = complete_ke(m);
    let dk = (ee / m.kc_squared() - kk) / m.k;
    2.0 * dk * (2.0 * ee - kk * m.kc_squared()) + 2.0 * kk * m.kc_squared() * dk
}

/// `dL/dθ`, the same derivative in the `θ = −ln k'` coordinate
/// (`dk/dθ = k'²/k`), which collapses to `4E(E − K k'²)/k²`.
fn l_slope_theta(m: Modulus) -> f64 {
    let k2 = m.k * m.k;
    if k2 < 1e-6 {
        // L = (π²/2)(1 + θ + O(θ²))
        return HOPF_POINT * (1.0 + 2.0 * m.theta);
    }
    let (kk, ee) = complete_ke(m);
    4.0 * ee * (ee - kk * m.kc_squared()) / k2
}

/// Solves `L(k) = r` for `r > π²/2`.
///
/// `L` is strictly increasing, so a bracket in `θ` is grown until it
/// contains the root, then shrunk with Newton steps; an iterate that leaves
/// the bracket is replaced by the midpoint.
pub fn invert_l(r: f64) -> Result<Modulus, EllipticError> {
    if !(r.is_finite() && r > HOPF_POINT) {
        return Err(EllipticError::BelowThreshold(r));
    }
    let residual = |theta: f64| -> Result<(Modulus, f64), EllipticError> {
        let m = Modulus::from_log_complement(theta)?;
        Ok((m, bifurcation_l(m) - r))
    };

    let mut lo = 0.0;
    let mut hi = 0.25 * r + 1.0;
    while residual(hi)?.1 < 0.0 {
        lo = hi;
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(EllipticError::NoConvergence {
                target: r,
                residual: f64::INFINITY,
            });
        }
    }

    let guess = if r < 6.0 {
        (r - HOPF_POINT) / HOPF_POINT
    } else {
        0.25 * r - 2.0 * LN_2
    };
    let mut theta = if guess > lo && guess < hi {
        guess
    } else {
        0.5 * (lo + hi)
    };
    let mut best = residual(theta)?;
    for _ in 0..200 {
        let (m, f) = best;
        if f.abs() <= 1e-14 * r {
            break;
        }
        if f < 0.0 {
            lo = theta;
        } else {
            hi = theta;
        }
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
        let step = theta - f / l_slope_theta(m);
        theta = if step > lo && step < hi {
            step
        } else {
            0.5 * (lo + hi)
        };
        best = residual(theta)?;
    }
    let (m, f) = best;
    if f.abs() > 1e-12 * r {
        return Err(EllipticError::NoConvergence {
            target: r,
            residual: f,
        });
    }
    Ok(m)
}

/// `ln((dn(u) − k·cn(u))/(1 − k))`, which equals `k·∫₀ᵘ sn(v) dv`.
///
/// For `cn ≥ 0` the quotient is rewritten as `(1 + k)/(dn + k·cn)` using
/// `(dn − k·cn)(dn + k·cn) = 1 − k²`.
pub fn sn_integral_log(u: f64, m: Modulus) -> Result<f64, EllipticError> {
    if m.k == 0.0 {
        return Err(EllipticError::ZeroModulus);
    }
    let t = jacobi(u, m)?;
    Ok(sn_integral_log_from(t, m))
}

pub(crate) fn sn_integral_log_from(t: JacobiTriple, m: Modulus) -> f64 {
    if t.cn >= 0.0 {
        ((1.0 + m.k) / (t.dn + m.k * t.cn)).ln()
    } else {
        ((t.dn - m.k * t.cn) / m.one_minus_k()).ln()
    }
}
