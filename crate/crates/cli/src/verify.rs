//! Invariant checks across all modules, printed as a pass/fail table.

use std::f64::consts::PI;

use num_complex::Complex64;
use period2_core::closedform::OrbitParams;
use period2_core::ddesim::{
    integrate_dde, integrate_four_dim, integrate_reduced, integrate_sirs, window_integral,
    InitialData, SirsParams, SirsState, Trajectory,
};
use period2_core::elliptic::{bifurcation_l, jacobi, Modulus, HOPF_POINT};
use period2_core::spectrum::{
    analyze, crossing_derivative_numeric, hopf_crossing_derivative, Verdict,
};

use crate::commands::{orbit, sirs_limit_sweep};
use crate::config::RunConfig;
use crate::error::CliError;

/// Above this `r` the analytic checks use [`RELAXED`] tolerances.
pub const LARGE_R: f64 = 50.0;
pub const RELAXED: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    /// `true` when `value` must be at least `bound` rather than at most.
    pub lower: bool,
}

impl Check {
    fn at_most(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            value,
            bound,
            lower: false,
        }
    }

    fn at_least(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            value,
            bound,
            lower: true,
        }
    }

    pub fn passed(&self) -> bool {
        if self.lower {
            self.value >= self.bound
        } else {
            self.value <= self.bound
        }
    }
}

fn failed(name: &str, e: impl std::fmt::Display) -> Check {
    eprintln!("{name}: {e}");
    Check::at_most(name, f64::INFINITY, 0.0)
}

/// `max` that lets NaN through, so a broken evaluation cannot pass.
fn nan_max(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.max(b)
    }
}

fn max_over(n: usize, t0: f64, t1: f64, f: impl Fn(f64) -> f64) -> f64 {
    (0..n)
        .map(|i| f(t0 + (t1 - t0) * i as f64 / (n - 1) as f64))
        .fold(0.0, nan_max)
}

fn analytic_checks(p: &OrbitParams, checks: &mut Vec<Check>) {
    let r = p.r();
    let tight = |t: f64| if r > LARGE_R { t.max(RELAXED) } else { t };
    let (a, b) = (p.a(), p.b());
    let ab = a * b;
    checks.push(Check::at_most(
        format!("L(k) = r at r = {r}"),
        (bifurcation_l(p.modulus()) / r - 1.0).abs(),
        tight(1e-11),
    ));
    checks.push(Check::at_most(
        "x*(0) = a",
        (p.eval_x(0.0) / a - 1.0).abs(),
        tight(1e-12),
    ));
    checks.push(Check::at_most(
        "x*(1) = b",
        (p.eval_x(1.0) / b - 1.0).abs(),
        tight(1e-12),
    ));
    checks.push(Check::at_most(
        "conservation x + ab/x + (r/2)y^2 = a + b",
        max_over(1000, -1.0, 3.0, |t| {
            (p.conserved_quantity(t) / (a + b) - 1.0).abs()
        }),
        tight(1e-9),
    ));
    checks.push(Check::at_most(
        "product x*(t)x*(t-1) = ab",
        max_over(1000, -2.0, 2.0, |t| {
            (p.eval_x(t) * p.eval_x(t - 1.0) / ab - 1.0).abs()
        }),
        tight(1e-9),
    ));
    checks.push(Check::at_most(
        "period 2",
        max_over(1000, 0.0, 4.0, |t| {
            (p.eval_x(t + 2.0) - p.eval_x(t)).abs() / a
        }),
        tight(1e-10),
    ));
    let h = if r > LARGE_R { 1e-4 } else { 1e-3 };
    let table = Trajectory::tabulate(-2.0, h, (4.0 / h).round() as usize, |t| {
        (p.eval_x(t), p.eval_dx(t), p.eval_y(t))
    });
    let window = [0.0, 0.37, 1.5, 2.0]
        .iter()
        .map(|&t| window_integral(&table, t, 2.0).map(|v| (v - 2.0).abs()))
        .try_fold(0.0, |m: f64, v| v.map(|v| nan_max(m, v)));
    checks.push(match window {
        Ok(v) => Check::at_most("window integral over [t-2, t] = 2", v, tight(1e-7)),
        Err(e) => failed("window integral over [t-2, t] = 2", e),
    });
    checks.push(Check::at_most(
        "mean over unit interval = 1",
        (p.mean_over_unit() - 1.0).abs(),
        tight(1e-10),
    ));
    let mut identity: f64 = 0.0;
    for i in 0..200 {
        let u = -8.0 + 16.0 * i as f64 / 199.0;
        match jacobi(u, p.modulus()) {
            Ok(j) => {
                let k2 = p.k() * p.k();
                identity = nan_max(identity, (j.sn * j.sn + j.cn * j.cn - 1.0).abs());
                identity = nan_max(identity, (j.dn * j.dn + k2 * j.sn * j.sn - 1.0).abs());
            }
            Err(_) => identity = f64::INFINITY,
        }
    }
    checks.push(Check::at_most(
        "Jacobi identities sn^2+cn^2 = dn^2+k^2 sn^2 = 1",
        identity,
        1e-13,
    ));
}

fn simulation_checks(checks: &mut Vec<Check>) -> Result<(), CliError> {
    for r in [5.0, 10.0] {
        let p = orbit(r)?;
        let phi = InitialData::new(|t| p.eval_x(t)).with_derivative(|t| p.eval_dx(t));
        let name = format!("delay system vs closed form, r = {r}");
        match integrate_dde(&phi, r, 20.0, 1e-3) {
            Ok(tr) => checks.push(Check::at_most(
                name,
                tr.max_deviation(|t| p.eval_x(t)),
                1e-6,
            )),
            Err(e) => checks.push(failed(&name, e)),
        }
        let name = format!("halving h gains, r = {r}");
        let err = |h| {
            integrate_dde(&phi, r, 10.0, h).map(|tr| {
                let last = tr.last();
                (last.x - p.eval_x(last.t)).abs()
            })
        };
        match (err(0.01), err(0.005)) {
            (Ok(c), Ok(f)) => checks.push(Check::at_least(name, c / f, 8.0)),
            (Err(e), _) | (_, Err(e)) => checks.push(failed(&name, e)),
        }
        let name = format!("2-D delay / 4-D / reduced agree, r = {r}");
        let runs = (
            integrate_dde(&phi, r, 10.0, 1e-3),
            integrate_four_dim(p.a(), p.b(), r, 10.0, 1e-3),
            integrate_reduced(p.a(), p.b(), r, 10.0, 1e-3),
        );
        match runs {
            (Ok(d), Ok((f1, f2)), Ok(q)) => {
                let mut worst: f64 = 0.0;
                let mut four: f64 = 0.0;
                let mut conserved: f64 = 0.0;
                let (ab, sum) = (p.a() * p.b(), p.a() + p.b());
                for (((s, u), v), w) in d
                    .samples()
                    .iter()
                    .zip(f1.samples())
                    .zip(q.samples())
                    .zip(f2.samples())
                {
                    for e in [(s.x - u.x).abs(), (s.x - v.x).abs(), (u.x - v.x).abs()] {
                        worst = nan_max(worst, e);
                    }
                    four = nan_max(four, (u.y + w.y).abs());
                    four = nan_max(four, (u.x * w.x / ab - 1.0).abs());
                    conserved = nan_max(
                        conserved,
                        (v.x + ab / v.x + 0.5 * r * v.y * v.y - sum).abs(),
                    );
                }
                checks.push(Check::at_most(name, worst, 1e-6));
                checks.push(Check::at_most(
                    format!("4-D invariants, r = {r}"),
                    four,
                    1e-9,
                ));
                checks.push(Check::at_most(
                    format!("reduced system conservation, r = {r}"),
                    conserved,
                    1e-8,
                ));
            }
            (Err(e), _, _) | (_, Err(e), _) | (_, _, Err(e)) => checks.push(failed(&name, e)),
        }
    }
    Ok(())
}

fn spectrum_checks(checks: &mut Vec<Check>) {
    let expected = [
        (1.0, Verdict::Stable),
        (2.0, Verdict::Stable),
        (4.0, Verdict::Stable),
        (4.9, Verdict::Stable),
        (HOPF_POINT, Verdict::Critical),
        (5.0, Verdict::Unstable),
        (6.0, Verdict::Unstable),
        (10.0, Verdict::Unstable),
    ];
    let mut wrong = 0.0;
    let mut bound: f64 = 0.0;
    let mut critical = f64::INFINITY;
    for (r, want) in expected {
        match analyze(r) {
            Ok(rep) => {
                if rep.verdict != want {
                    wrong += 1.0;
                }
                if rep.winding != rep.roots.len() {
                    wrong += 1.0;
                }
                for c in rep.roots.iter().filter(|c| c.lambda.re > 0.0) {
                    bound = nan_max(bound, c.lambda.norm() - r);
                }
                if want == Verdict::Critical {
                    critical = rep.roots[..2.min(rep.roots.len())]
                        .iter()
                        .map(|c| (c.lambda - Complex64::new(0.0, PI.copysign(c.lambda.im))).norm())
                        .fold(0.0, nan_max);
                }
            }
            Err(e) => {
                eprintln!("spectrum at r = {r}: {e}");
                wrong += 1.0;
            }
        }
    }
    checks.push(Check::at_most(
        "stability verdicts and winding counts",
        wrong,
        0.0,
    ));
    checks.push(Check::at_most("critical roots = ±iπ", critical, 1e-8));
    checks.push(Check::at_most(
        "unstable roots satisfy |λ| ≤ r",
        bound,
        1e-8,
    ));
    let name = "crossing speed by continuation";
    match (
        crossing_derivative_numeric(HOPF_POINT, PI, 1e-3),
        hopf_crossing_derivative(HOPF_POINT, PI),
    ) {
        (Ok(n), Ok(f)) => checks.push(Check::at_most(name, (n - f).abs(), 1e-4)),
        (Err(e), _) | (_, Err(e)) => checks.push(failed(name, e)),
    }
}

fn sirs_checks(checks: &mut Vec<Check>) -> Result<(), CliError> {
    let params = SirsParams::new(3.0, 1.0, 2.0).map_err(|e| CliError::Numerical(e.to_string()))?;
    let ie = params.endemic_infective();
    let run = |i0: f64, t_end: f64| {
        let psi = InitialData::constant(i0);
        SirsState::from_history(&params, &psi, 0.01)
            .and_then(|s0| integrate_sirs(&params, &s0, &psi, t_end, 0.01))
    };
    match run(0.9 * ie, 1000.0) {
        Ok(tr) => {
            let drift = tr
                .states()
                .iter()
                .map(|s| (s.s + s.i + s.r - 1.0).abs())
                .fold(0.0, nan_max);
            checks.push(Check::at_most(
                "SIRS S + I + R = 1 over 1000 units",
                drift,
                1e-9,
            ));
        }
        Err(e) => checks.push(failed("SIRS S + I + R = 1 over 1000 units", e)),
    }
    match run(ie, 200.0) {
        Ok(tr) => {
            let dev = tr
                .states()
                .iter()
                .map(|s| (s.i - ie).abs())
                .fold(0.0, nan_max);
            checks.push(Check::at_most(
                "SIRS endemic equilibrium is fixed",
                dev,
                1e-8,
            ));
        }
        Err(e) => checks.push(failed("SIRS endemic equilibrium is fixed", e)),
    }
    let name = "SIRS distance decreases with gamma*tau";
    match sirs_limit_sweep(10.0, 1e-3) {
        Ok(rows) => {
            let rises = rows.windows(2).filter(|w| w[1].1 >= w[0].1).count();
            checks.push(Check::at_most(name, rises as f64, 0.0));
        }
        Err(e) => checks.push(failed(name, e)),
    }
    Ok(())
}

/// Runs every check; `cfg.r` selects the orbit for the analytic checks and
/// `cfg.perturb_k` shifts its modulus to inject a fault.
pub fn run_checks(cfg: &RunConfig) -> Result<Vec<Check>, CliError> {
    let mut p = orbit(cfg.r)?;
    if cfg.perturb_k != 0.0 {
        let k = p.k() + cfg.perturb_k;
        let m = Modulus::new(k)
            .map_err(|e| CliError::Invalid(format!("perturbed modulus {k}: {e}")))?;
        p = p
            .with_modulus(m)
            .map_err(|e| CliError::Invalid(e.to_string()))?;
    }
    let mut checks = Vec::new();
    analytic_checks(&p, &mut checks);
    simulation_checks(&mut checks)?;
    spectrum_checks(&mut checks);
    sirs_checks(&mut checks)?;
    Ok(checks)
}

pub fn verify(cfg: &RunConfig) -> Result<(), CliError> {
    let checks = run_checks(cfg)?;
    println!("{:<48} {:>13} {:>13}  result", "check", "value", "bound");
    for c in &checks {
        println!(
            "{:<48} {:>13.6e} {}{:>12.1e}  {}",
            c.name,
            c.value,
            if c.lower { '≥' } else { '≤' },
            c.bound,
            if c.passed() { "PASS" } else { "FAIL" }
        );
    }
    let failures: Vec<&str> = checks
        .iter()
        .filter(|c| !c.passed())
        .map(|c| c.name.as_str())
        .collect();
    if failures.is_empty() {
        println!("all {} checks passed", checks.len());
        Ok(())
    } else {
        Err(CliError::CheckFailed(format!(
            "failed: {}",
            failures.join("; ")
        )))
    }
}
