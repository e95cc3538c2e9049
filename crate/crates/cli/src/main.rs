//! Batch front end: ingest problem parameters, run the bounds / energy /
//! geometry / optimize / verify pipelines, emit JSON or CSV reports.
//!
//! Configuration comes from a single JSON document; command-line flags
//! override individual fields. Exit codes: 0 success, 2 invalid input,
//! 3 numeric failure.

mod commands;
mod config;
mod error;
mod report;

use clap::Parser;

use config::{Command, OutputFormat, RawConfig, RawParams, RawSweep};
use error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "tridrop",
    version,
    about = "Ternary droplet toolkit: cluster energies, bounds, and partition search",
    allow_negative_numbers = true
)]
struct Cli {
    /// Subcommand: bounds, energy, doublebubble, optimize, verify, sweep.
    #[arg(value_enum)]
    command: Command,

    /// JSON config document; flags override its fields.
    #[arg(long)]
    config: Option<String>,

    /// Total mass of the first constituent.
    #[arg(long)]
    m1: Option<f64>,
    /// Total mass of the second constituent.
    #[arg(long)]
    m2: Option<f64>,
    #[arg(long)]
    gamma11: Option<f64>,
    #[arg(long)]
    gamma12: Option<f64>,
    #[arg(long)]
    gamma22: Option<f64>,

    /// Quadrature method: analytic, monte_carlo, voxel.
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    samples: Option<u64>,
    #[arg(long)]
    grid_h: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,

    /// Annealing proposals per optimizer run.
    #[arg(long)]
    budget: Option<u64>,
    /// Optimizer seeds (comma separated); the best run wins.
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,

    /// Parameter swept by `sweep`: M1, M2, gamma11, gamma12, gamma22.
    #[arg(long)]
    sweep_param: Option<String>,
    /// Sweep values (comma separated).
    #[arg(long, value_delimiter = ',')]
    sweep_values: Option<Vec<f64>>,

    /// Report destination (stdout if omitted).
    #[arg(long)]
    output: Option<String>,
    /// Report format.
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,

    /// Configuration file consumed by `energy` and `verify`.
    #[arg(long)]
    input: Option<String>,
}

fn parse_method(name: &str) -> Result<tridrop::QuadratureMethod, CliError> {
    match name {
        "analytic" => Ok(tridrop::QuadratureMethod::Analytic),
        "monte_carlo" => Ok(tridrop::QuadratureMethod::MonteCarlo),
        "voxel" => Ok(tridrop::QuadratureMethod::Voxel),
        other => Err(CliError::InvalidConfig(format!(
            "unknown quadrature method `{other}` (expected analytic, monte_carlo, voxel)"
        ))),
    }
}

fn load_and_merge(cli: &Cli) -> Result<config::RunConfig, CliError> {
    let mut raw = match &cli.config {
        Some(path) => config::parse_config(&std::fs::read_to_string(path)?)?,
        None => RawConfig::default(),
    };
    if let Some(cmd) = raw.command {
        if cmd != cli.command {
            return Err(CliError::InvalidConfig(format!(
                "config document says command {cmd:?} but the subcommand is {:?}",
                cli.command
            )));
        }
    }

    let any_param_flag = cli.m1.is_some()
        || cli.m2.is_some()
        || cli.gamma11.is_some()
        || cli.gamma12.is_some()
        || cli.gamma22.is_some();
    if any_param_flag {
        let base = raw.params.clone().unwrap_or(RawParams {
            m1: 0.0,
            m2: 0.0,
            gamma11: 0.0,
            gamma12: 0.0,
            gamma22: 0.0,
        });
        raw.params = Some(RawParams {
            m1: cli.m1.unwrap_or(base.m1),
            m2: cli.m2.unwrap_or(base.m2),
            gamma11: cli.gamma11.unwrap_or(base.gamma11),
            gamma12: cli.gamma12.unwrap_or(base.gamma12),
            gamma22: cli.gamma22.unwrap_or(base.gamma22),
        });
    }

    if cli.method.is_some() || cli.samples.is_some() || cli.grid_h.is_some() || cli.seed.is_some()
    {
        let mut q = raw.quadrature.unwrap_or_default();
        if let Some(m) = &cli.method {
            q.method = Some(parse_method(m)?);
        }
        q.samples = cli.samples.or(q.samples);
        q.grid_h = cli.grid_h.or(q.grid_h);
        q.seed = cli.seed.or(q.seed);
        raw.quadrature = Some(q);
    }

    if cli.budget.is_some() || cli.seeds.is_some() {
        let mut o = raw.optimizer.unwrap_or_default();
        o.budget = cli.budget.or(o.budget);
        o.seeds = cli.seeds.clone().or(o.seeds);
        raw.optimizer = Some(o);
    }

    match (&cli.sweep_param, &cli.sweep_values) {
        (Some(param), Some(values)) => {
            raw.sweep = Some(RawSweep {
                param: param.clone(),
                values: values.clone(),
            });
        }
        (Some(param), None) => {
            if let Some(s) = &mut raw.sweep {
                s.param = param.clone();
            } else {
                return Err(CliError::InvalidConfig(
                    "--sweep-param without --sweep-values or a sweep section".into(),
                ));
            }
        }
        (None, Some(values)) => {
            if let Some(s) = &mut raw.sweep {
                s.values = values.clone();
            } else {
                return Err(CliError::InvalidConfig(
                    "--sweep-values without --sweep-param or a sweep section".into(),
                ));
            }
        }
        (None, None) => {}
    }

    if cli.output.is_some() || cli.format.is_some() {
        let (path, format) = match raw.output.take() {
            Some(out) => (out.path, out.format),
            None => (None, None),
        };
        raw.output = Some(config::RawOutput {
            path: cli.output.clone().or(path),
            format: cli.format.or(format),
        });
    }
    if cli.input.is_some() {
        raw.input = cli.input.clone();
    }

    raw.resolve(cli.command)
}

fn main() {
    let cli = Cli::parse();
    let run = load_and_merge(&cli).and_then(|cfg| commands::run(&cfg));
    match run {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
