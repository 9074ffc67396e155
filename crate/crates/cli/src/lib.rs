//! `kgeom`: verification suites and evaluators over `kepler-geom`.

// `!(a < b)` is used on purpose so that NaN fails the test.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod report;
pub mod suites;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use kepler_geom::flows::{Direction, Scheme};

use crate::commands::FlowOptions;
use crate::config::Config;
use crate::error::{CliError, CliResult};
use crate::suites::Suite;

#[derive(Debug, Parser)]
#[command(name = "kgeom", version, about = "Numerical checks for Kepler manifolds and Calabi ansatz families")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FlowDirection {
    Forward,
    Printed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FlowScheme {
    Euler,
    Rk2,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a verification suite; exits 1 if any check fails.
    Verify {
        suite: Suite,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Samples per check, replacing each check's default.
        #[arg(long)]
        samples: Option<usize>,
        /// Multiplies every tolerance.
        #[arg(long, default_value_t = 1.0)]
        tol_scale: f64,
        /// Report file; only the summary is printed without it.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Hermitian metric matrix of a configured family at a chart point.
    EvalMetric {
        config: PathBuf,
        /// Comma-separated complex coordinates, e.g. `1+0.5i,0.2`.
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Regularized Kepler orbit as CSV.
    Orbit {
        /// Energy; must be negative.
        #[arg(long, allow_hyphen_values = true)]
        energy: f64,
        /// Initial regularized state `ξ,η,ω,χ`; a circular orbit by default.
        #[arg(long, allow_hyphen_values = true)]
        init: Option<String>,
        #[arg(long, default_value_t = 1.0)]
        periods: f64,
        /// RK4 steps per regularized period.
        #[arg(long, default_value_t = 512)]
        steps: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Moment polytope of a configured family as JSON.
    Polytope {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Flow from a Ricci-flat fixed point: CSV trace and final profile.
    Flow {
        config: PathBuf,
        #[arg(long, default_value_t = 128)]
        nodes: usize,
        /// Grid interval `lo:hi` in the flow variable.
        #[arg(long)]
        range: Option<String>,
        #[arg(long, default_value_t = 100)]
        steps: usize,
        /// Step as a fraction of the forward-time stability bound.
        #[arg(long, default_value_t = 0.5)]
        ds_factor: f64,
        #[arg(long, value_enum, default_value_t = FlowScheme::Euler)]
        scheme: FlowScheme,
        #[arg(long, value_enum, default_value_t = FlowDirection::Forward)]
        direction: FlowDirection,
        /// Relative height of a bump added to the fixed point.
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        perturb: f64,
        /// Trace CSV; stdout without it.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Final profile JSON.
        #[arg(long)]
        profile: Option<PathBuf>,
    },
    /// Scalar curvature three ways along the diagonal of the moment domain.
    Curvature {
        config: PathBuf,
        /// Totals `lo:hi:count` of the moment coordinates.
        #[arg(long)]
        grid: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn emit(text: &str, out: Option<&Path>) -> CliResult<()> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|source| CliError::Io { path: p.display().to_string(), source }),
        None => {
            print!("{text}");
            if !text.ends_with('\n') {
                println!();
            }
            Ok(())
        }
    }
}

fn parse_range(text: &str) -> CliResult<(f64, f64)> {
    let bad = || CliError::Usage(format!("range `{text}` is not lo:hi"));
    let (a, b) = text.split_once(':').ok_or_else(bad)?;
    let (a, b) = (a.trim().parse::<f64>().map_err(|_| bad())?, b.trim().parse::<f64>().map_err(|_| bad())?);
    if !(a < b) {
        return Err(bad());
    }
    Ok((a, b))
}

/// Runs a parsed command and returns the process exit code.
pub fn run(cli: Cli) -> u8 {
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("kgeom: {e}");
            e.exit_code()
        }
    }
}

fn execute(cmd: Command) -> CliResult<u8> {
    match cmd {
        Command::Verify { suite, seed, samples, tol_scale, out, format } => {
            if !(tol_scale > 0.0) {
                return Err(CliError::Usage("--tol-scale must be positive".into()));
            }
            let report = suites::run_suite(suite, seed, samples, tol_scale);
            print!("{}", report.summary());
            if let Some(p) = out {
                let text = match format {
                    Format::Json => report.to_json(),
                    Format::Csv => report.to_csv()?,
                };
                emit(&text, Some(&p))?;
            }
            Ok(if report.all_passed() { 0 } else { 1 })
        }
        Command::EvalMetric { config, point, out } => {
            emit(&commands::eval_metric(&Config::from_path(&config)?, &point)?, out.as_deref())?;
            Ok(0)
        }
        Command::Orbit { energy, init, periods, steps, out } => {
            emit(&commands::orbit(energy, init.as_deref(), periods, steps)?, out.as_deref())?;
            Ok(0)
        }
        Command::Polytope { config, out } => {
            emit(&commands::polytope(&Config::from_path(&config)?)?, out.as_deref())?;
            Ok(0)
        }
        Command::Flow { config, nodes, range, steps, ds_factor, scheme, direction, perturb, out, profile } => {
            let opts = FlowOptions {
                nodes,
                range: range.as_deref().map(parse_range).transpose()?,
                steps,
                ds_factor,
                scheme: match scheme {
                    FlowScheme::Euler => Scheme::Euler,
                    FlowScheme::Rk2 => Scheme::Rk2,
                },
                direction: match direction {
                    FlowDirection::Forward => Direction::Forward,
                    FlowDirection::Printed => Direction::Printed,
                },
                perturb,
            };
            let res = commands::flow(&Config::from_path(&config)?, &opts)?;
            emit(&res.trace_csv, out.as_deref())?;
            if let Some(p) = profile {
                emit(&res.profile_json, Some(&p))?;
            }
            Ok(0)
        }
        Command::Curvature { config, grid, out } => {
            emit(&commands::curvature(&Config::from_path(&config)?, &grid)?, out.as_deref())?;
            Ok(0)
        }
    }
}
