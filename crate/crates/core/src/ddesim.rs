//! Fixed-step integrators used to validate the analytic orbit.
//!
//! The distributed delay is folded into the state: with
//! `y(t) = ∫₀¹ x(t − s) ds − 1` the equation becomes
//!
//! ```text
//! x′ = −r x y,      y′ = x(t) − x(t − 1)
//! ```
//!
//! which needs only the point value `x(t − 1)`. Steps are `h = 1/N`, so the
//! delayed stage times of classical RK4 fall on grid nodes or midpoints,
//! where the stored history is interpolated by cubic Hermite polynomials
//! built from `x` and `x′`.

use std::io::{self, Write};

use thiserror::Error;

use crate::export::write_csv;

/// Solutions beyond this bound are treated as blown up.
pub const BLOW_UP: f64 = 1e12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("step size h = {h} must be 1/N for an integer N ≥ {min_steps} per delay interval")]
    StepSize { h: f64, min_steps: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("history must be positive at 0, got {0}")]
    NonPositiveHistory(f64),
    #[error("history is not finite at t = {0}")]
    NonFiniteHistory(f64),
    #[error("solution left (0, 1e12] at t = {t} (x = {x:e}); step too coarse or blow-up")]
    PositivityLoss { t: f64, x: f64 },
    #[error("window [{start}, {end}] is not covered by the trajectory")]
    Coverage { start: f64, end: f64 },
    #[error("inconsistent initial state: {0}")]
    Inconsistent(String),
}

/// Uniformly spaced nodes `(tᵢ, xᵢ, x′ᵢ)` with cubic Hermite interpolation.
#[derive(Debug, Clone, PartialEq)]
pub struct HistorySegment {
    t0: f64,
    h: f64,
    x: Vec<f64>,
    dx: Vec<f64>,
}

impl HistorySegment {
    pub fn new(t0: f64, h: f64) -> Self {
        Self {
            t0,
            h,
            x: Vec::new(),
            dx: Vec::new(),
        }
    }

    pub fn with_capacity(t0: f64, h: f64, n: usize) -> Self {
        Self {
            t0,
            h,
            x: Vec::with_capacity(n),
            dx: Vec::with_capacity(n),
        }
    }

    pub fn push(&mut self, x: f64, dx: f64) {
        self.x.push(x);
        self.dx.push(dx);
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn step(&self) -> f64 {
        self.h
    }

    pub fn start(&self) -> f64 {
        self.t0
    }

    pub fn end(&self) -> f64 {
        self.t0 + self.h * self.len().saturating_sub(1) as f64
    }

    pub fn node_time(&self, i: usize) -> f64 {
        self.t0 + self.h * i as f64
    }

    pub fn node(&self, i: usize) -> (f64, f64) {
        (self.x[i], self.dx[i])
    }

    /// Hermite value at the midpoint of nodes `i` and `i + 1`.
    fn midpoint(&self, i: usize) -> f64 {
        0.5 * (self.x[i] + self.x[i + 1]) + 0.125 * self.h * (self.dx[i] - self.dx[i + 1])
    }

    fn covers(&self, t: f64) -> bool {
        let slack = 1e-9 * self.h;
        self.len() >= 2 && t >= self.t0 - slack && t <= self.end() + slack
    }

    /// Interpolated value, or `None` outside `[start, end]`.
    pub fn query(&self, t: f64) -> Option<f64> {
        if !self.covers(t) {
            return None;
        }
        let s = (t - self.t0) / self.h;
        let i = (s.floor().max(0.0) as usize).min(self.len() - 2);
        let th = s - i as f64;
        let (x0, x1) = (self.x[i], self.x[i + 1]);
        let (d0, d1) = (self.h * self.dx[i], self.h * self.dx[i + 1]);
        let om = 1.0 - th;
        Some(
            (1.0 + 2.0 * th) * om * om * x0 + th * om * om * d0 + th * th * (3.0 - 2.0 * th) * x1
                - th * th * om * d1,
        )
    }
}

/// History `φ` on `[−τ, 0]` for a delay equation.
pub struct InitialData<'a> {
    phi: Box<dyn Fn(f64) -> f64 + 'a>,
    dphi: Option<Box<dyn Fn(f64) -> f64 + 'a>>,
}

impl<'a> InitialData<'a> {
    pub fn new(phi: impl Fn(f64) -> f64 + 'a) -> Self {
        Self {
            phi: Box::new(phi),
            dphi: None,
        }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(move |_| c).with_derivative(|_| 0.0)
    }

    /// Supplies `φ′`; otherwise it is estimated by fourth-order differences
    /// of the sampled history.
    pub fn with_derivative(mut self, dphi: impl Fn(f64) -> f64 + 'a) -> Self {
        self.dphi = Some(Box::new(dphi));
        self
    }

    pub fn eval(&self, t: f64) -> f64 {
        (self.phi)(t)
    }

    /// Samples `φ` at `−τ + jh`, `j = 0..=n`, with derivatives.
    fn sample(&self, tau: f64, n: usize) -> Result<HistorySegment, SimError> {
        let h = tau / n as f64;
        let time = |j: usize| -tau + tau * j as f64 / n as f64;
        let mut values = Vec::with_capacity(n + 1);
        for j in 0..=n {
            let t = if j == n { 0.0 } else { time(j) };
            let v = (self.phi)(t);
            if !v.is_finite() {
                return Err(SimError::NonFiniteHistory(t));
            }
            values.push(v);
        }
        let derivs: Vec<f64> = match &self.dphi {
            Some(d) => (0..=n)
                .map(|j| d(if j == n { 0.0 } else { time(j) }))
                .collect(),
            None => finite_difference(&values, h),
        };
        let mut seg = HistorySegment::with_capacity(-tau, h, n + 1);
        for (x, d) in values.into_iter().zip(derivs) {
            seg.push(x, d);
        }
        Ok(seg)
    }

    /// `∫_{−τ}^{0} φ` by composite Simpson at spacing `τ/n` (halved when `n`
    /// is odd).
    fn integral(&self, tau: f64, n: usize) -> f64 {
        let m = if n.is_multiple_of(2) { n } else { 2 * n };
        let h = tau / m as f64;
        let mut sum = (self.phi)(-tau) + (self.phi)(0.0);
        for j in 1..m {
            let w = if j % 2 == 1 { 4.0 } else { 2.0 };
            sum += w * (self.phi)(-tau + tau * j as f64 / m as f64);
        }
        sum * h / 3.0
    }
}

fn finite_difference(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    (0..n)
        .map(|j| {
            let d = if j >= 2 && j + 2 < n {
                f[j - 2] - 8.0 * f[j - 1] + 8.0 * f[j + 1] - f[j + 2]
            } else if j == 0 {
                -25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]
            } else if j == 1 {
                -3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]
            } else if j == n - 2 {
                3.0 * f[n - 1] + 10.0 * f[n - 2] - 18.0 * f[n - 3] + 6.0 * f[n - 4] - f[n - 5]
            } else {
                25.0 * f[n - 1] - 48.0 * f[n - 2] + 36.0 * f[n - 3] - 16.0 * f[n - 4]
                    + 3.0 * f[n - 5]
            };
            d / (12.0 * h)
        })
        .collect()
}

/// How a trajectory was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Classical RK4 with Hermite dense output for the delayed term.
    DelayRk4Hermite,
    /// Classical RK4 on an ordinary differential system.
    Rk4,
    /// Tabulated from a closed-form expression.
    Tabulated,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub x: f64,
    pub y: f64,
}

/// Samples of `(x, y)` on a uniform grid plus a dense interpolant of `x`.
#[derive(Debug, Clone)]
pub struct Trajectory {
    step: f64,
    method: Method,
    samples: Vec<TrajectoryPoint>,
    dense: HistorySegment,
    past: Option<HistorySegment>,
}

impl Trajectory {
    /// Tabulates `t ↦ (x, x′, y)` on `n + 1` nodes `t0 + ih`.
    pub fn tabulate(t0: f64, h: f64, n: usize, f: impl Fn(f64) -> (f64, f64, f64)) -> Self {
        let mut dense = HistorySegment::with_capacity(t0, h, n + 1);
        let mut samples = Vec::with_capacity(n + 1);
        for i in 0..=n {
            let t = t0 + h * i as f64;
            let (x, dx, y) = f(t);
            dense.push(x, dx);
            samples.push(TrajectoryPoint { t, x, y });
        }
        Self {
            step: h,
            method: Method::Tabulated,
            samples,
            dense,
            past: None,
        }
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn samples(&self) -> &[TrajectoryPoint] {
        &self.samples
    }

    pub fn last(&self) -> TrajectoryPoint {
        *self
            .samples
            .last()
            .expect("trajectory has at least one sample")
    }

    /// Dense value of `x`, including the initial history when there is one.
    pub fn x_at(&self, t: f64) -> Option<f64> {
        match &self.past {
            Some(p) if t < self.dense.start() => p.query(t),
            _ => self.dense.query(t),
        }
    }

    fn earliest(&self) -> f64 {
        self.past.as_ref().map_or(self.dense.start(), |p| p.start())
    }

    /// Largest `|x(t) − g(t)|` over the sample nodes; NaN if any term is.
    pub fn max_deviation(&self, g: impl Fn(f64) -> f64) -> f64 {
        self.samples
            .iter()
            .map(|s| (s.x - g(s.t)).abs())
            .fold(0.0, |m, d| {
                if d.is_nan() || m.is_nan() {
                    f64::NAN
                } else {
                    m.max(d)
                }
            })
    }

    /// Writes `t,x,y` rows with 17 significant digits.
    pub fn write_csv<W: Write>(&self, out: W) -> io::Result<()> {
        write_csv(out, "t,x,y", self.samples.iter().map(|s| [s.t, s.x, s.y]))
    }
}

/// `∫_{t−width}^{t} x(s) ds` by composite Simpson over the dense interpolant.
pub fn window_integral(traj: &Trajectory, t: f64, width: f64) -> Result<f64, SimError> {
    let start = t - width;
    let slack = 1e-9 * traj.step;
    if !(width >= 0.0) || start < traj.earliest() - slack || t > traj.dense.end() + slack {
        return Err(SimError::Coverage { start, end: t });
    }
    if width == 0.0 {
        return Ok(0.0);
    }
    let n = 2 * ((width / traj.step).ceil() as usize).max(1);
    let h = width / n as f64;
    let at = |s: f64| {
        traj.x_at(s.clamp(traj.earliest(), traj.dense.end()))
            .ok_or(SimError::Coverage { start, end: t })
    };
    let mut sum = at(start)? + at(t)?;
    for j in 1..n {
        let w = if j % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * at(start + h * j as f64)?;
    }
    Ok(sum * h / 3.0)
}

fn check_positive(t: f64, x: f64) -> Result<(), SimError> {
    if x > 0.0 && x <= BLOW_UP {
        Ok(())
    } else {
        Err(SimError::PositivityLoss { t, x })
    }
}

/// Steps per unit delay for `h = τ/N`.
fn steps_per_delay(tau: f64, h: f64, min_steps: usize) -> Result<usize, SimError> {
    let err = SimError::StepSize { h, min_steps };
    if !(h > 0.0 && h.is_finite()) {
        return Err(err);
    }
    let n = (tau / h).round();
    if n < min_steps as f64 || (n * h - tau).abs() > 1e-9 * tau {
        return Err(err);
    }
    Ok(n as usize)
}

fn step_count(t_end: f64, h: f64) -> Result<usize, SimError> {
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(SimError::InvalidParameter(format!(
            "t_end = {t_end} must be positive"
        )));
    }
    Ok((t_end / h - 1e-9).ceil() as usize)
}

/// Delay state: `past` on `[−τ, 0]` and the computed solution from 0 on.
struct DelayBuffer {
    past: HistorySegment,
    present: HistorySegment,
    delay: usize,
}

impl DelayBuffer {
    /// Delayed value at step `n` plus `half` half-steps: node `n − D`,
    /// midpoint, or node `n − D + 1`.
    fn delayed(&self, n: usize, half: usize) -> f64 {
        let j = n as isize - self.delay as isize;
        let at = |j: isize| -> f64 {
            if j <= 0 {
                self.past.x[(j + self.delay as isize) as usize]
            } else {
                self.present.x[j as usize]
            }
        };
        match half {
            0 => at(j),
            2 => at(j + 1),
            _ => {
                if j < 0 {
                    self.past.midpoint((j + self.delay as isize) as usize)
                } else {
                    self.present.midpoint(j as usize)
                }
            }
        }
    }
}

/// Classical RK4 for `u′ = f(u, z)` where `z` is the delayed value of the
/// first component. Returns the node states.
fn rk4_delay<const N: usize>(
    f: impl Fn(&[f64; N], f64) -> [f64; N],
    u0: [f64; N],
    past: HistorySegment,
    delay: usize,
    steps: usize,
    h: f64,
) -> Result<(Vec<[f64; N]>, DelayBuffer), SimError> {
    let mut buf = DelayBuffer {
        present: HistorySegment::with_capacity(0.0, h, steps + 1),
        past,
        delay,
    };
    let mut states = Vec::with_capacity(steps + 1);
    let mut u = u0;
    let mut k1 = f(&u, buf.delayed(0, 0));
    buf.present.push(u[0], k1[0]);
    states.push(u);
    let axpy = |u: &[f64; N], k: &[f64; N], c: f64| -> [f64; N] {
        let mut out = *u;
        for (o, kk) in out.iter_mut().zip(k) {
            *o += c * kk;
        }
        out
    };
    for n in 0..steps {
        let mid = buf.delayed(n, 1);
        let k2 = f(&axpy(&u, &k1, 0.5 * h), mid);
        let k3 = f(&axpy(&u, &k2, 0.5 * h), mid);
        let k4 = f(&axpy(&u, &k3, h), buf.delayed(n, 2));
        for i in 0..N {
            u[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        k1 = f(&u, buf.delayed(n + 1, 0));
        buf.present.push(u[0], k1[0]);
        states.push(u);
    }
    Ok((states, buf))
}

fn rk4<const N: usize>(
    f: impl Fn(&[f64; N]) -> [f64; N],
    u0: [f64; N],
    steps: usize,
    h: f64,
    guard: impl Fn(f64, &[f64; N]) -> Result<(), SimError>,
) -> Result<Vec<[f64; N]>, SimError> {
    let mut states = Vec::with_capacity(steps + 1);
    let mut u = u0;
    states.push(u);
    let shifted = |u: &[f64; N], k: &[f64; N], c: f64| -> [f64; N] {
        let mut out = *u;
        for (o, kk) in out.iter_mut().zip(k) {
            *o += c * kk;
        }
        out
    };
    for n in 0..steps {
        let k1 = f(&u);
        let k2 = f(&shifted(&u, &k1, 0.5 * h));
        let k3 = f(&shifted(&u, &k2, 0.5 * h));
        let k4 = f(&shifted(&u, &k3, h));
        for i in 0..N {
            u[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        guard(h * (n + 1) as f64, &u)?;
        states.push(u);
    }
    Ok(states)
}

/// Options for [`integrate_dde_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DdeConfig {
    pub r: f64,
    pub t_end: f64,
    pub h: f64,
    /// Weight of an instantaneous term `−w·x(t)` inside the bracket;
    /// reserved, only 0 is supported.
    pub instantaneous_weight: f64,
}

/// Integrates `x′ = r x (1 − ∫₀¹ x(t − s) ds)` on `[0, t_end]`.
pub fn integrate_dde(
    init: &InitialData<'_>,
    r: f64,
    t_end: f64,
    h: f64,
) -> Result<Trajectory, SimError> {
    integrate_dde_with(
        init,
        &DdeConfig {
            r,
            t_end,
            h,
            instantaneous_weight: 0.0,
        },
    )
}

pub fn integrate_dde_with(init: &InitialData<'_>, cfg: &DdeConfig) -> Result<Trajectory, SimError> {
    if cfg.instantaneous_weight != 0.0 {
        return Err(SimError::InvalidParameter(
            "instantaneous weight is reserved and must be 0".into(),
        ));
    }
    if !(cfg.r > 0.0 && cfg.r.is_finite()) {
        return Err(SimError::InvalidParameter(format!(
            "r = {} must be positive",
            cfg.r
        )));
    }
    let n_delay = steps_per_delay(1.0, cfg.h, 100)?;
    let h = 1.0 / n_delay as f64;
    let steps = step_count(cfg.t_end, h)?;
    let x0 = init.eval(0.0);
    if !(x0 > 0.0) {
        return Err(SimError::NonPositiveHistory(x0));
    }
    let past = init.sample(1.0, n_delay)?;
    let y0 = init.integral(1.0, n_delay) - 1.0;
    let r = cfg.r;
    let (states, buf) = rk4_delay(
        |u: &[f64; 2], xd| [-r * u[0] * u[1], u[0] - xd],
        [x0, y0],
        past,
        n_delay,
        steps,
        h,
    )?;
    let samples: Vec<TrajectoryPoint> = states
        .iter()
        .enumerate()
        .map(|(i, u)| TrajectoryPoint {
            t: i as f64 / n_delay as f64,
            x: u[0],
            y: u[1],
        })
        .collect();
    if let Some(bad) = samples.iter().find(|s| check_positive(s.t, s.x).is_err()) {
        return Err(SimError::PositivityLoss { t: bad.t, x: bad.x });
    }
    Ok(Trajectory {
        step: h,
        method: Method::DelayRk4Hermite,
        samples,
        dense: buf.present,
        past: Some(buf.past),
    })
}

fn check_ode_inputs(values: &[(&str, f64)], t_end: f64, h: f64) -> Result<usize, SimError> {
    for (name, v) in values {
        if !(*v > 0.0 && v.is_finite()) {
            return Err(SimError::InvalidParameter(format!(
                "{name} = {v} must be positive"
            )));
        }
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(SimError::InvalidParameter(format!(
            "h = {h} must be positive"
        )));
    }
    step_count(t_end, h)
}

fn ode_trajectory(states: &[(f64, f64)], h: f64, r: f64) -> Trajectory {
    let mut dense = HistorySegment::with_capacity(0.0, h, states.len());
    let mut samples = Vec::with_capacity(states.len());
    for (i, &(x, y)) in states.iter().enumerate() {
        dense.push(x, -r * x * y);
        samples.push(TrajectoryPoint {
            t: h * i as f64,
            x,
            y,
        });
    }
    Trajectory {
        step: h,
        method: Method::Rk4,
        samples,
        dense,
        past: None,
    }
}

/// The four-dimensional system for `(x*(t), ∫₀¹x*(t−s)ds − 1)` and
/// `(x*(t − 1), ∫₁²x*(t−s)ds − 1)` started from `(a, 0, b, 0)`.
pub fn integrate_four_dim(
    a: f64,
    b: f64,
    r: f64,
    t_end: f64,
    h: f64,
) -> Result<(Trajectory, Trajectory), SimError> {
    let steps = check_ode_inputs(&[("a", a), ("b", b), ("r", r)], t_end, h)?;
    let states = rk4(
        |u: &[f64; 4]| [-r * u[0] * u[1], u[0] - u[2], -r * u[2] * u[3], u[2] - u[0]],
        [a, 0.0, b, 0.0],
        steps,
        h,
        |t, u| check_positive(t, u[0]).and(check_positive(t, u[2])),
    )?;
    let first: Vec<(f64, f64)> = states.iter().map(|u| (u[0], u[1])).collect();
    let second: Vec<(f64, f64)> = states.iter().map(|u| (u[2], u[3])).collect();
    Ok((ode_trajectory(&first, h, r), ode_trajectory(&second, h, r)))
}

/// The reduced system `x′ = −r x y`, `y′ = x − ab/x` from `(a, 0)`.
pub fn integrate_reduced(
    a: f64,
    b: f64,
    r: f64,
    t_end: f64,
    h: f64,
) -> Result<Trajectory, SimError> {
    let steps = check_ode_inputs(&[("a", a), ("b", b), ("r", r)], t_end, h)?;
    let ab = a * b;
    let states = rk4(
        |u: &[f64; 2]| [-r * u[0] * u[1], u[0] - ab / u[0]],
        [a, 0.0],
        steps,
        h,
        |t, u| check_positive(t, u[0]),
    )?;
    let pairs: Vec<(f64, f64)> = states.iter().map(|u| (u[0], u[1])).collect();
    Ok(ode_trajectory(&pairs, h, r))
}

/// SIRS model with temporary immunity of fixed length `tau`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SirsParams {
    /// Transmission coefficient.
    pub beta: f64,
    /// Recovery rate.
    pub gamma: f64,
    /// Immune period.
    pub tau: f64,
}

impl SirsParams {
    pub fn new(beta: f64, gamma: f64, tau: f64) -> Result<Self, SimError> {
        if !(gamma > 0.0 && tau > 0.0 && gamma.is_finite() && tau.is_finite()) {
            return Err(SimError::InvalidParameter(format!(
                "gamma = {gamma} and tau = {tau} must be positive"
            )));
        }
        if !(beta > gamma && beta.is_finite()) {
            return Err(SimError::InvalidParameter(format!(
                "beta = {beta} must exceed gamma = {gamma} for an endemic equilibrium"
            )));
        }
        Ok(Self { beta, gamma, tau })
    }

    /// Endemic equilibrium `I_e = (1 − γ/β)/(1 + γτ)`.
    pub fn endemic_infective(&self) -> f64 {
        (1.0 - self.gamma / self.beta) / (1.0 + self.gamma * self.tau)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SirsState {
    pub t: f64,
    pub s: f64,
    pub i: f64,
    pub r: f64,
}

impl SirsState {
    /// The state at 0 consistent with an infective history `ψ`:
    /// `I(0) = ψ(0)`, `R(0) = γ∫₀^τ ψ(−s) ds`, `S(0) = 1 − I(0) − R(0)`.
    pub fn from_history(
        params: &SirsParams,
        history: &InitialData<'_>,
        h: f64,
    ) -> Result<Self, SimError> {
        let n = steps_per_delay(params.tau, h, 2)?;
        let i0 = history.eval(0.0);
        let r0 = params.gamma * history.integral(params.tau, n);
        Ok(Self {
            t: 0.0,
            s: 1.0 - i0 - r0,
            i: i0,
            r: r0,
        })
    }
}

/// Output of [`integrate_sirs`].
#[derive(Debug, Clone)]
pub struct SirsTrajectory {
    params: SirsParams,
    step: f64,
    states: Vec<SirsState>,
    infective: Trajectory,
}

impl SirsTrajectory {
    pub fn params(&self) -> &SirsParams {
        &self.params
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn states(&self) -> &[SirsState] {
        &self.states
    }

    /// `γ∫₀^τ I(t − s) ds` by quadrature of the dense infective history.
    pub fn recovered_by_quadrature(&self, t: f64) -> Result<f64, SimError> {
        Ok(self.params.gamma * window_integral(&self.infective, t, self.params.tau)?)
    }

    /// Writes `t,S,I,R` rows with 17 significant digits.
    pub fn write_csv<W: Write>(&self, out: W) -> io::Result<()> {
        write_csv(
            out,
            "t,S,I,R",
            self.states.iter().map(|s| [s.t, s.s, s.i, s.r]),
        )
    }
}

/// Integrates the infective equation
/// `I′ = I(β(1 − I − γ∫₀^τ I(t − s) ds) − γ)`, carrying the running
/// integral `Z` as a state with `Z′ = I(t) − I(t − τ)`, and reconstructs
/// `S = 1 − I − γZ`, `R = γZ`.
pub fn integrate_sirs(
    params: &SirsParams,
    state0: &SirsState,
    history: &InitialData<'_>,
    t_end: f64,
    h: f64,
) -> Result<SirsTrajectory, SimError> {
    let n_delay = steps_per_delay(params.tau, h, 2)?;
    let h = params.tau / n_delay as f64;
    let steps = step_count(t_end, h)?;
    let i0 = history.eval(0.0);
    if !(i0 > 0.0) {
        return Err(SimError::NonPositiveHistory(i0));
    }
    let z0 = history.integral(params.tau, n_delay);
    let expected_r = params.gamma * z0;
    let check = |ok: bool, what: String| {
        if ok {
            Ok(())
        } else {
            Err(SimError::Inconsistent(what))
        }
    };
    check(
        (state0.i - i0).abs() <= 1e-12,
        format!("I(0) = {} but ψ(0) = {i0}", state0.i),
    )?;
    check(
        (state0.r - expected_r).abs() <= 1e-9,
        format!("R(0) = {} but γ∫ψ = {expected_r}", state0.r),
    )?;
    check(
        (state0.s + state0.i + state0.r - 1.0).abs() <= 1e-9,
        "S(0) + I(0) + R(0) must be 1".into(),
    )?;
    check(
        state0.s > 0.0,
        format!("S(0) = {} must be positive", state0.s),
    )?;

    let past = history.sample(params.tau, n_delay)?;
    let SirsParams { beta, gamma, .. } = *params;
    let (raw, buf) = rk4_delay(
        |u: &[f64; 2], lagged| {
            [
                u[0] * (beta * (1.0 - u[0] - gamma * u[1]) - gamma),
                u[0] - lagged,
            ]
        },
        [i0, z0],
        past,
        n_delay,
        steps,
        h,
    )?;
    let mut states = Vec::with_capacity(raw.len());
    for (n, u) in raw.iter().enumerate() {
        let t = params.tau * n as f64 / n_delay as f64;
        if !(u[0] > 0.0 && u[0] <= 1.0) {
            return Err(SimError::PositivityLoss { t, x: u[0] });
        }
        let r = gamma * u[1];
        states.push(SirsState {
            t,
            s: 1.0 - u[0] - r,
            i: u[0],
            r,
        });
    }
    let samples = states
        .iter()
        .map(|s| TrajectoryPoint {
            t: s.t,
            x: s.i,
            y: s.r,
        })
        .collect();
    Ok(SirsTrajectory {
        params: *params,
        step: h,
        states,
        infective: Trajectory {
            step: h,
            method: Method::DelayRk4Hermite,
            samples,
            dense: buf.present,
            past: Some(buf.past),
        },
    })
}

/// Runs the SIRS model in units where the immune period is 1, with
/// `β − γ = r` and `γτ = gamma_tau`, seeded with `I = I_e·φ`, and returns
/// `sup |I/I_e − x|` against the delay logistic solution from `φ` on
/// `[0, t_end]`.
pub fn sirs_limit_distance(
    phi: &InitialData<'_>,
    r: f64,
    gamma_tau: f64,
    t_end: f64,
    h: f64,
) -> Result<f64, SimError> {
    let params = SirsParams::new(r + gamma_tau, gamma_tau, 1.0)?;
    let ie = params.endemic_infective();
    let scaled = InitialData::new(|t| ie * phi.eval(t));
    let state0 = SirsState::from_history(&params, &scaled, h)?;
    let sirs = integrate_sirs(&params, &state0, &scaled, t_end, h)?;
    let dde = integrate_dde(phi, r, t_end, h)?;
    Ok(sirs
        .states()
        .iter()
        .zip(dde.samples())
        .map(|(s, d)| (s.i / ie - d.x).abs())
        .fold(0.0, f64::max))
}
