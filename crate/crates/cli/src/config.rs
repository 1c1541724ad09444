use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Environment variable naming the directory for outputs written without
/// an explicit `--output`.
pub const OUTPUT_DIR_ENV: &str = "PERIOD2_OUTPUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CommandKind {
    Periodic,
    Simulate,
    Spectrum,
    Sirs,
    Verify,
    Bifurcation,
}

impl CommandKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            CommandKind::Periodic => "periodic",
            CommandKind::Simulate => "simulate",
            CommandKind::Spectrum => "spectrum",
            CommandKind::Sirs => "sirs",
            CommandKind::Verify => "verify",
            CommandKind::Bifurcation => "bifurcation",
        }
    }

    fn default_file(&self) -> &'static str {
        match self {
            CommandKind::Periodic => "orbit.csv",
            CommandKind::Simulate => "trajectory.csv",
            CommandKind::Spectrum => "spectrum.json",
            CommandKind::Sirs => "sirs.csv",
            CommandKind::Verify => "verify.txt",
            CommandKind::Bifurcation => "bifurcation.csv",
        }
    }
}

impl FromStr for CommandKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [
            CommandKind::Periodic,
            CommandKind::Simulate,
            CommandKind::Spectrum,
            CommandKind::Sirs,
            CommandKind::Verify,
            CommandKind::Bifurcation,
        ]
        .into_iter()
        .find(|c| c.as_str() == s)
        .ok_or_else(|| format!("unknown command `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(format!("unknown format `{s}` (expected csv or json)")),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Json => "json",
        })
    }
}

/// Source of the initial history on `[−1, 0]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum SeedHistory {
    /// Restriction of the analytic orbit.
    ClosedForm,
    /// `x ≡ c`.
    Constant(f64),
    /// Two-column CSV `t,x` covering `[−1, 0]`, linearly interpolated.
    File(PathBuf),
}

impl FromStr for SeedHistory {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "closedform" {
            return Ok(SeedHistory::ClosedForm);
        }
        if let Some(c) = s.strip_prefix("constant:") {
            return c
                .parse()
                .map(SeedHistory::Constant)
                .map_err(|_| format!("bad constant in seed `{s}`"));
        }
        if let Some(p) = s.strip_prefix("file:") {
            if !p.is_empty() {
                return Ok(SeedHistory::File(PathBuf::from(p)));
            }
        }
        Err(format!(
            "unknown seed `{s}` (expected closedform, constant:<c> or file:<path>)"
        ))
    }
}

impl fmt::Display for SeedHistory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SeedHistory::ClosedForm => f.write_str("closedform"),
            SeedHistory::Constant(c) => write!(f, "constant:{c}"),
            SeedHistory::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

impl TryFrom<String> for SeedHistory {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<SeedHistory> for String {
    fn from(s: SeedHistory) -> Self {
        s.to_string()
    }
}

/// Fully resolved settings for one invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: CommandKind,
    pub r: f64,
    pub h: f64,
    pub t_end: f64,
    pub output: Option<PathBuf>,
    pub format: Format,
    pub seed: SeedHistory,
    pub r_min: f64,
    pub r_max: f64,
    pub steps: usize,
    pub beta_e: f64,
    pub gamma: f64,
    pub tau: f64,
    pub i0: Option<f64>,
    pub limit_check: bool,
    pub perturb_k: f64,
    /// Reserved weight of an instantaneous term; must stay 0.
    pub alpha: f64,
}

impl RunConfig {
    pub fn new(command: CommandKind) -> Self {
        Self {
            command,
            r: 10.0,
            h: 1e-3,
            t_end: 20.0,
            output: None,
            format: Format::Csv,
            seed: SeedHistory::ClosedForm,
            r_min: 4.0,
            r_max: 12.0,
            steps: 81,
            beta_e: 3.0,
            gamma: 1.0,
            tau: 2.0,
            i0: None,
            limit_check: false,
            perturb_k: 0.0,
            alpha: 0.0,
        }
    }

    /// The output path, defaulting to a per-command file name inside
    /// `$PERIOD2_OUTPUT_DIR` (or the working directory).
    pub fn output_path(&self) -> PathBuf {
        match &self.output {
            Some(p) => p.clone(),
            None => {
                let dir = std::env::var_os(OUTPUT_DIR_ENV)
                    .map(PathBuf::from)
                    .unwrap_or_else(|| PathBuf::from("."));
                dir.join(self.command.default_file())
            }
        }
    }

    /// Flat `key=value` lines, one per field.
    pub fn to_kv(&self) -> String {
        let mut out = String::new();
        let mut line = |k: &str, v: String| {
            out.push_str(k);
            out.push('=');
            out.push_str(&v);
            out.push('\n');
        };
        line("command", self.command.as_str().into());
        line("r", self.r.to_string());
        line("h", self.h.to_string());
        line("t_end", self.t_end.to_string());
        if let Some(p) = &self.output {
            line("output", p.display().to_string());
        }
        line("format", self.format.to_string());
        line("seed", self.seed.to_string());
        line("r_min", self.r_min.to_string());
        line("r_max", self.r_max.to_string());
        line("steps", self.steps.to_string());
        line("beta_e", self.beta_e.to_string());
        line("gamma", self.gamma.to_string());
        line("tau", self.tau.to_string());
        if let Some(i0) = self.i0 {
            line("i0", i0.to_string());
        }
        line("limit_check", self.limit_check.to_string());
        line("perturb_k", self.perturb_k.to_string());
        line("alpha", self.alpha.to_string());
        out
    }

    /// Applies `key=value` lines on top of `self`. Keys may use `-` or `_`;
    /// blank lines and `#` comments are skipped.
    pub fn apply_kv(&mut self, text: &str) -> Result<(), String> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected key=value", n + 1))?;
            let key = key.trim().replace('-', "_");
            let value = value.trim();
            let bad = |e: &dyn fmt::Display| format!("line {}: {key}: {e}", n + 1);
            fn num<T: FromStr>(v: &str) -> Result<T, String>
            where
                T::Err: fmt::Display,
            {
                v.parse::<T>().map_err(|e| e.to_string())
            }
            match key.as_str() {
                "command" => self.command = value.parse().map_err(|e: String| bad(&e))?,
                "r" => self.r = num(value).map_err(|e| bad(&e))?,
                "h" => self.h = num(value).map_err(|e| bad(&e))?,
                "t_end" => self.t_end = num(value).map_err(|e| bad(&e))?,
                "output" => self.output = Some(PathBuf::from(value)),
                "format" => self.format = value.parse().map_err(|e: String| bad(&e))?,
                "seed" => self.seed = value.parse().map_err(|e: String| bad(&e))?,
                "r_min" => self.r_min = num(value).map_err(|e| bad(&e))?,
                "r_max" => self.r_max = num(value).map_err(|e| bad(&e))?,
                "steps" => self.steps = num(value).map_err(|e| bad(&e))?,
                "beta_e" => self.beta_e = num(value).map_err(|e| bad(&e))?,
                "gamma" => self.gamma = num(value).map_err(|e| bad(&e))?,
                "tau" => self.tau = num(value).map_err(|e| bad(&e))?,
                "i0" => self.i0 = Some(num(value).map_err(|e| bad(&e))?),
                "limit_check" => self.limit_check = num(value).map_err(|e| bad(&e))?,
                "perturb_k" => self.perturb_k = num(value).map_err(|e| bad(&e))?,
                "alpha" => self.alpha = num(value).map_err(|e| bad(&e))?,
                _ => return Err(format!("line {}: unknown key `{key}`", n + 1)),
            }
        }
        Ok(())
    }

    pub fn from_kv(command: CommandKind, text: &str) -> Result<Self, String> {
        let mut cfg = Self::new(command);
        cfg.apply_kv(text)?;
        Ok(cfg)
    }

    pub fn load_file(&mut self, path: &Path) -> Result<(), CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::Invalid(format!("cannot read config {}: {e}", path.display()))
        })?;
        let command = self.command;
        self.apply_kv(&text)
            .map_err(|e| CliError::Invalid(format!("config {}: {e}", path.display())))?;
        self.command = command;
        Ok(())
    }
}
