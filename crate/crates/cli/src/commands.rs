use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use period2_core::closedform::{build_orbit, orbit_amplitude, OrbitError, OrbitParams};
use period2_core::ddesim::{
    integrate_dde_with, integrate_sirs, sirs_limit_distance, DdeConfig, InitialData, SimError,
    SirsParams, SirsState,
};
use period2_core::elliptic::HOPF_POINT;
use period2_core::export::{sig17, write_csv};
use period2_core::spectrum::analyze;

use crate::config::{Format, RunConfig, SeedHistory};
use crate::error::CliError;

/// Samples written by `periodic`.
pub const ORBIT_SAMPLES: usize = 2001;
/// Immune-period products swept by `sirs --limit-check`.
pub const LIMIT_SWEEP: [f64; 3] = [10.0, 50.0, 100.0];
/// Horizon of the limit comparison: one period. Over longer horizons the
/// O(1/γτ) phase drift accumulates until the sup distance saturates at the
/// orbit amplitude.
pub const LIMIT_HORIZON: f64 = 2.0;

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

fn sibling(path: &Path, suffix: &str, ext: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}.{ext}"))
}

pub fn orbit(r: f64) -> Result<OrbitParams, CliError> {
    if !(r > HOPF_POINT) {
        return Err(CliError::NoOrbit(r));
    }
    build_orbit(r).map_err(|e| match e {
        OrbitError::BelowHopf(r) => CliError::NoOrbit(r),
        other => CliError::Numerical(other.to_string()),
    })
}

/// Orbit parameters as JSON and `(t, x*, y*)` on `[−1, 3]` as CSV; the two
/// paths share a stem.
pub fn periodic(cfg: &RunConfig) -> Result<(), CliError> {
    let p = orbit(cfg.r)?;
    let base = cfg.output_path();
    let (csv_path, json_path) = (base.with_extension("csv"), base.with_extension("json"));
    let mut out = create(&csv_path)?;
    write_csv(
        &mut out,
        "t,x,y",
        p.tabulate(-1.0, 3.0, ORBIT_SAMPLES)
            .iter()
            .map(|s| [s.t, s.x, s.y]),
    )?;
    out.flush()?;
    let json = p.to_json();
    let mut out = create(&json_path)?;
    writeln!(out, "{json}")?;
    out.flush()?;
    match cfg.format {
        Format::Json => println!("{json}"),
        Format::Csv => println!(
            "r = {:.6}  k = {:.6}  a = {:.6e}  b = {:.6e}  -> {}, {}",
            p.r(),
            p.k(),
            p.a(),
            p.b(),
            csv_path.display(),
            json_path.display()
        ),
    }
    Ok(())
}

/// History read from a `t,x` CSV, linearly interpolated.
#[derive(Debug, Clone)]
pub struct TabulatedHistory {
    t: Vec<f64>,
    x: Vec<f64>,
}

impl TabulatedHistory {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let bad = |reason: String| CliError::BadHistory {
            path: path.to_path_buf(),
            reason,
        };
        let mut reader = csv::Reader::from_path(path).map_err(|e| bad(e.to_string()))?;
        let headers = reader.headers().map_err(|e| bad(e.to_string()))?;
        if headers.iter().map(str::trim).collect::<Vec<_>>() != ["t", "x"] {
            return Err(bad("header must be `t,x`".into()));
        }
        let (mut t, mut x) = (Vec::new(), Vec::new());
        for (i, rec) in reader.records().enumerate() {
            let rec = rec.map_err(|e| bad(e.to_string()))?;
            let field = |j: usize| -> Result<f64, CliError> {
                rec.get(j)
                    .and_then(|s| s.trim().parse::<f64>().ok())
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| bad(format!("row {}: expected two finite numbers", i + 1)))
            };
            let (ti, xi) = (field(0)?, field(1)?);
            if t.last().is_some_and(|&prev| ti <= prev) {
                return Err(bad(format!("row {}: times must increase", i + 1)));
            }
            t.push(ti);
            x.push(xi);
        }
        if t.len() < 2 || t[0] > -1.0 + 1e-12 || *t.last().unwrap() < -1e-12 {
            return Err(bad("rows must cover [-1, 0]".into()));
        }
        let hist = Self { t, x };
        if !(hist.eval(0.0) > 0.0) {
            return Err(bad("history must be positive at t = 0".into()));
        }
        Ok(hist)
    }

    pub fn eval(&self, s: f64) -> f64 {
        let i = self
            .t
            .partition_point(|&ti| ti <= s)
            .clamp(1, self.t.len() - 1);
        let (t0, t1) = (self.t[i - 1], self.t[i]);
        let w = (s - t0) / (t1 - t0);
        self.x[i - 1] + w * (self.x[i] - self.x[i - 1])
    }
}

fn sim_error(e: SimError) -> CliError {
    match e {
        SimError::PositivityLoss { .. } => CliError::PositivityLoss(e.to_string()),
        SimError::Coverage { .. } => CliError::Numerical(e.to_string()),
        _ => CliError::Invalid(e.to_string()),
    }
}

/// Integrates the delay equation; with the closed-form seed also writes the
/// analytic curve and the maximal deviation.
pub fn simulate(cfg: &RunConfig) -> Result<(), CliError> {
    let dde = DdeConfig {
        r: cfg.r,
        t_end: cfg.t_end,
        h: cfg.h,
        instantaneous_weight: cfg.alpha,
    };
    let analytic = match cfg.seed {
        SeedHistory::ClosedForm => Some(orbit(cfg.r).map_err(|e| match e {
            CliError::NoOrbit(r) => {
                CliError::Invalid(format!("closed-form seed needs r > π²/2 (r = {r})"))
            }
            other => other,
        })?),
        _ => None,
    };
    let table = match &cfg.seed {
        SeedHistory::File(path) => Some(TabulatedHistory::load(path)?),
        _ => None,
    };
    let init = match (&cfg.seed, &analytic, &table) {
        (SeedHistory::ClosedForm, Some(p), _) => {
            InitialData::new(|t| p.eval_x(t)).with_derivative(|t| p.eval_dx(t))
        }
        (SeedHistory::Constant(c), _, _) => InitialData::constant(*c),
        (SeedHistory::File(_), _, Some(tab)) => InitialData::new(|t| tab.eval(t)),
        _ => unreachable!("seed sources resolved above"),
    };
    let traj = integrate_dde_with(&init, &dde).map_err(sim_error)?;

    let path = cfg.output_path().with_extension("csv");
    let mut out = create(&path)?;
    traj.write_csv(&mut out)?;
    out.flush()?;

    let last = traj.last();
    let mut deviation = None;
    if let Some(p) = &analytic {
        let mut out = create(&sibling(&path, "_analytic", "csv"))?;
        write_csv(
            &mut out,
            "t,x,y",
            traj.samples()
                .iter()
                .map(|s| [s.t, p.eval_x(s.t), p.eval_y(s.t)]),
        )?;
        out.flush()?;
        deviation = Some(traj.max_deviation(|t| p.eval_x(t)));
    }
    let summary = format!(
        "{{\"r\":{},\"h\":{},\"t_end\":{},\"seed\":\"{}\",\"terminal_t\":{},\"terminal_x\":{},\"terminal_y\":{},\"max_deviation\":{}}}",
        sig17(cfg.r),
        sig17(traj.step()),
        sig17(cfg.t_end),
        cfg.seed.to_string().replace('\\', "\\\\").replace('"', "\\\""),
        sig17(last.t),
        sig17(last.x),
        sig17(last.y),
        deviation.map_or("null".into(), sig17)
    );
    let mut out = create(&sibling(&path, "_summary", "json"))?;
    writeln!(out, "{summary}")?;
    out.flush()?;
    match deviation {
        Some(d) => println!("x({:.6}) = {:.6e}  max deviation {:.6e}", last.t, last.x, d),
        None => println!("x({:.6}) = {:.6e}", last.t, last.x),
    }
    Ok(())
}

pub fn spectrum(cfg: &RunConfig) -> Result<(), CliError> {
    if !(cfg.r > 0.0 && cfg.r.is_finite()) {
        return Err(CliError::Invalid(format!("r = {} must be positive", cfg.r)));
    }
    let report = analyze(cfg.r).map_err(|e| CliError::Numerical(e.to_string()))?;
    println!(
        "r = {:.6}  verdict: {}  ({} roots)",
        cfg.r,
        report.verdict.as_str(),
        report.roots.len()
    );
    println!("{:>14} {:>14} {:>12}", "Re", "Im", "residual");
    for c in &report.roots {
        println!(
            "{:>14.6e} {:>14.6e} {:>12.3e}",
            c.lambda.re, c.lambda.im, c.residual
        );
    }
    let mut out = create(&cfg.output_path().with_extension("json"))?;
    writeln!(out, "{}", report.to_json())?;
    out.flush()?;
    Ok(())
}

pub fn sirs(cfg: &RunConfig) -> Result<(), CliError> {
    if cfg.limit_check {
        return sirs_limit(cfg);
    }
    let params = SirsParams::new(cfg.beta_e, cfg.gamma, cfg.tau).map_err(sim_error)?;
    let ie = params.endemic_infective();
    let i0 = cfg.i0.unwrap_or(0.9 * ie);
    let psi = InitialData::constant(i0);
    let state0 = SirsState::from_history(&params, &psi, cfg.h).map_err(sim_error)?;
    let run = integrate_sirs(&params, &state0, &psi, cfg.t_end, cfg.h).map_err(sim_error)?;
    let mut out = create(&cfg.output_path().with_extension("csv"))?;
    run.write_csv(&mut out)?;
    out.flush()?;
    let last = run.states().last().expect("at least one state");
    println!(
        "I_e = {:.6e}  final (t = {:.6}): S = {:.6e}  I = {:.6e}  R = {:.6e}",
        ie, last.t, last.s, last.i, last.r
    );
    Ok(())
}

/// Distance between the rescaled SIRS infective curve and the delay
/// logistic solution for each immune-period product in [`LIMIT_SWEEP`].
pub fn sirs_limit_sweep(r: f64, h: f64) -> Result<Vec<(f64, f64)>, CliError> {
    let p = orbit(r)?;
    let phi = InitialData::new(|t| p.eval_x(t)).with_derivative(|t| p.eval_dx(t));
    LIMIT_SWEEP
        .iter()
        .map(|&g| {
            sirs_limit_distance(&phi, r, g, LIMIT_HORIZON, h)
                .map(|d| (g, d))
                .map_err(sim_error)
        })
        .collect()
}

fn sirs_limit(cfg: &RunConfig) -> Result<(), CliError> {
    let rows = sirs_limit_sweep(cfg.r, cfg.h)?;
    println!("{:>10} {:>14}", "gamma*tau", "sup distance");
    for (g, d) in &rows {
        println!("{g:>10.1} {d:>14.6e}");
    }
    if let Some(path) = &cfg.output {
        let mut out = create(path)?;
        write_csv(
            &mut out,
            "gamma_tau,distance",
            rows.iter().map(|&(g, d)| [g, d]),
        )?;
        out.flush()?;
    }
    if rows.windows(2).all(|w| w[1].1 < w[0].1) {
        Ok(())
    } else {
        Err(CliError::CheckFailed(
            "distance does not decrease with gamma*tau".into(),
        ))
    }
}

/// `(r, k, a, b)` with `k = 0`, `a = b = 1` on the equilibrium branch.
pub fn bifurcation_rows(r_min: f64, r_max: f64, steps: usize) -> Result<Vec<[f64; 4]>, CliError> {
    let valid = r_min.is_finite()
        && r_max.is_finite()
        && r_min > 0.0
        && r_min <= r_max
        && steps >= 1
        && (steps > 1 || r_min == r_max);
    if !valid {
        return Err(CliError::Invalid(format!(
            "invalid range: r-min = {r_min}, r-max = {r_max}, steps = {steps}"
        )));
    }
    (0..steps)
        .map(|i| {
            let r = if steps == 1 {
                r_min
            } else if i + 1 == steps {
                r_max
            } else {
                r_min + (r_max - r_min) * i as f64 / (steps - 1) as f64
            };
            if r <= HOPF_POINT {
                return Ok([r, 0.0, 1.0, 1.0]);
            }
            let amp = orbit_amplitude(r).map_err(|e| CliError::Numerical(e.to_string()))?;
            Ok([r, amp.modulus.k(), amp.a, amp.b()])
        })
        .collect()
}

pub fn bifurcation(cfg: &RunConfig) -> Result<(), CliError> {
    let rows = bifurcation_rows(cfg.r_min, cfg.r_max, cfg.steps)?;
    let path = cfg.output_path().with_extension("csv");
    let mut out = create(&path)?;
    write_csv(&mut out, "r,k,a,b", rows.iter().copied())?;
    out.flush()?;
    println!("{} rows -> {}", rows.len(), path.display());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sibling_paths() {
        let p = Path::new("out/run.csv");
        assert_eq!(
            sibling(p, "_summary", "json"),
            Path::new("out/run_summary.json")
        );
    }

    #[test]
    fn range_validation() {
        assert!(bifurcation_rows(5.0, 4.0, 10).is_err());
        assert!(bifurcation_rows(4.0, 5.0, 0).is_err());
        assert!(bifurcation_rows(4.0, 5.0, 1).is_err());
        assert!(bifurcation_rows(-1.0, 5.0, 3).is_err());
        assert_eq!(
            bifurcation_rows(4.0, 4.0, 1).unwrap(),
            vec![[4.0, 0.0, 1.0, 1.0]]
        );
    }
}
