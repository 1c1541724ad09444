use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use period2_cli::config::{CommandKind, Format, RunConfig, SeedHistory};

/// Period-2 orbit of the distributed-delay logistic equation: closed form,
/// simulation, spectrum and verification.
#[derive(Parser, Debug)]
#[command(name = "period2", version)]
struct Cli {
    /// key=value file supplying defaults for any flag
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// print the resolved configuration as JSON and exit
    #[arg(long, global = true)]
    dump_config: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct Common {
    /// growth rate r
    #[arg(long)]
    r: Option<f64>,
    /// output path (default: file in $PERIOD2_OUTPUT_DIR or the working directory)
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Closed-form orbit parameters (JSON) and samples on [-1, 3] (CSV)
    Periodic {
        #[command(flatten)]
        common: Common,
        /// also print the parameters as JSON on stdout
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Integrate the delay equation from a history on [-1, 0]
    Simulate {
        #[command(flatten)]
        common: Common,
        /// step size, 1/N with N >= 100
        #[arg(long)]
        h: Option<f64>,
        /// integration horizon
        #[arg(long)]
        t_end: Option<f64>,
        /// closedform | constant:<c> | file:<path to t,x csv>
        #[arg(long)]
        seed: Option<SeedHistory>,
        /// reserved instantaneous-term weight, must be 0
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// Roots of the characteristic equation at the equilibrium
    Spectrum {
        #[command(flatten)]
        common: Common,
    },
    /// SIRS model with temporary immunity
    Sirs {
        #[command(flatten)]
        common: Common,
        /// effective contact rate, must exceed gamma
        #[arg(long)]
        beta_e: Option<f64>,
        /// recovery rate
        #[arg(long)]
        gamma: Option<f64>,
        /// immunity duration
        #[arg(long)]
        tau: Option<f64>,
        /// constant infective history (default 0.9 I_e)
        #[arg(long)]
        i0: Option<f64>,
        /// step size, must divide tau
        #[arg(long)]
        h: Option<f64>,
        /// integration horizon
        #[arg(long)]
        t_end: Option<f64>,
        /// compare with the delay logistic equation over one period for gamma*tau in {10, 50, 100}
        #[arg(long)]
        limit_check: bool,
    },
    /// Run the invariant suite and print a pass/fail table
    Verify {
        #[command(flatten)]
        common: Common,
        /// shift the orbit modulus by this amount to inject a fault
        #[arg(long)]
        perturb_k: Option<f64>,
    },
    /// Sweep r and write r,k,a,b
    Bifurcation {
        /// output path (default: bifurcation.csv)
        #[arg(long)]
        output: Option<PathBuf>,
        /// first r of the grid
        #[arg(long)]
        r_min: Option<f64>,
        /// last r of the grid
        #[arg(long)]
        r_max: Option<f64>,
        /// number of grid points, endpoints included
        #[arg(long)]
        steps: Option<usize>,
    },
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn resolve(cli: Cli) -> Result<RunConfig, period2_cli::error::CliError> {
    let kind = match &cli.command {
        Command::Periodic { .. } => CommandKind::Periodic,
        Command::Simulate { .. } => CommandKind::Simulate,
        Command::Spectrum { .. } => CommandKind::Spectrum,
        Command::Sirs { .. } => CommandKind::Sirs,
        Command::Verify { .. } => CommandKind::Verify,
        Command::Bifurcation { .. } => CommandKind::Bifurcation,
    };
    let mut cfg = RunConfig::new(kind);
    if let Some(path) = &cli.config {
        cfg.load_file(path)?;
    }
    let common = |c: Common, cfg: &mut RunConfig| {
        set(&mut cfg.r, c.r);
        if c.output.is_some() {
            cfg.output = c.output;
        }
    };
    match cli.command {
        Command::Periodic { common: c, format } => {
            common(c, &mut cfg);
            set(&mut cfg.format, format);
        }
        Command::Simulate {
            common: c,
            h,
            t_end,
            seed,
            alpha,
        } => {
            common(c, &mut cfg);
            set(&mut cfg.h, h);
            set(&mut cfg.t_end, t_end);
            set(&mut cfg.seed, seed);
            set(&mut cfg.alpha, alpha);
        }
        Command::Spectrum { common: c } => common(c, &mut cfg),
        Command::Sirs {
            common: c,
            beta_e,
            gamma,
            tau,
            i0,
            h,
            t_end,
            limit_check,
        } => {
            common(c, &mut cfg);
            set(&mut cfg.beta_e, beta_e);
            set(&mut cfg.gamma, gamma);
            set(&mut cfg.tau, tau);
            set(&mut cfg.h, h);
            set(&mut cfg.t_end, t_end);
            if i0.is_some() {
                cfg.i0 = i0;
            }
            cfg.limit_check |= limit_check;
        }
        Command::Verify {
            common: c,
            perturb_k,
        } => {
            common(c, &mut cfg);
            set(&mut cfg.perturb_k, perturb_k);
        }
        Command::Bifurcation {
            output,
            r_min,
            r_max,
            steps,
        } => {
            if output.is_some() {
                cfg.output = output;
            }
            set(&mut cfg.r_min, r_min);
            set(&mut cfg.r_max, r_max);
            set(&mut cfg.steps, steps);
        }
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let dump = cli.dump_config;
    let result = resolve(cli).and_then(|cfg| {
        if dump {
            println!(
                "{}",
                serde_json::to_string_pretty(&cfg).expect("config serializes")
            );
            Ok(())
        } else {
            period2_cli::run(&cfg)
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
