//! Run configuration: a single self-describing JSON document, with command
//! line flags overriding individual fields.
//!
//! Parsing is strict: unknown keys are rejected and errors carry the JSON
//! pointer of the offending field.

use serde::{Deserialize, Serialize};
use tridrop::{ProblemParams, QuadratureMethod, QuadratureSpec};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Bounds,
    Energy,
    Doublebubble,
    Optimize,
    Verify,
    Sweep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Json,
    Csv,
}

/// Raw JSON schema. Every section is optional in the document so that flags
/// can fill it in; cross-field requirements are checked in `resolve`.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub command: Option<Command>,
    pub params: Option<RawParams>,
    pub quadrature: Option<RawQuadrature>,
    pub optimizer: Option<RawOptimizer>,
    pub sweep: Option<RawSweep>,
    pub output: Option<RawOutput>,
    /// Configuration file consumed by `energy` and `verify`.
    pub input: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawParams {
    #[serde(rename = "M1")]
    pub m1: f64,
    #[serde(rename = "M2")]
    pub m2: f64,
    pub gamma11: f64,
    pub gamma12: f64,
    pub gamma22: f64,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawQuadrature {
    pub method: Option<QuadratureMethod>,
    pub samples: Option<u64>,
    pub grid_h: Option<f64>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawOptimizer {
    pub budget: Option<u64>,
    pub seeds: Option<Vec<u64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSweep {
    pub param: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawOutput {
    pub path: Option<String>,
    pub format: Option<OutputFormat>,
}

/// Fully resolved run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub params: ProblemParams,
    pub quadrature: QuadratureSpec,
    pub budget: u64,
    pub seeds: Vec<u64>,
    pub sweep: Option<(SweepParam, Vec<f64>)>,
    /// None writes to stdout.
    pub output_path: Option<String>,
    pub format: OutputFormat,
    pub input: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    M1,
    M2,
    Gamma11,
    Gamma12,
    Gamma22,
}

impl SweepParam {
    pub fn parse(name: &str) -> Result<Self, CliError> {
        match name {
            "M1" => Ok(Self::M1),
            "M2" => Ok(Self::M2),
            "gamma11" => Ok(Self::Gamma11),
            "gamma12" => Ok(Self::Gamma12),
            "gamma22" => Ok(Self::Gamma22),
            other => Err(CliError::InvalidConfig(format!(
                "unknown sweep parameter `{other}` (expected M1, M2, gamma11, gamma12, gamma22)"
            ))),
        }
    }

    pub fn apply(self, p: &ProblemParams, value: f64) -> ProblemParams {
        let mut q = *p;
        match self {
            Self::M1 => q.m1_total = value,
            Self::M2 => q.m2_total = value,
            Self::Gamma11 => q.gamma11 = value,
            Self::Gamma12 => q.gamma12 = value,
            Self::Gamma22 => q.gamma22 = value,
        }
        q
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::M1 => "M1",
            Self::M2 => "M2",
            Self::Gamma11 => "gamma11",
            Self::Gamma12 => "gamma12",
            Self::Gamma22 => "gamma22",
        }
    }
}

/// Strictly parses a config document, reporting the JSON pointer of the
/// first offending field.
pub fn parse_config(text: &str) -> Result<RawConfig, CliError> {
    let mut de = serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let pointer = format!("/{}", e.path().to_string().replace('.', "/"));
        CliError::InvalidConfig(format!("at {pointer}: {}", e.inner()))
    })
}

impl RawConfig {
    /// Applies defaults and cross-field validation.
    pub fn resolve(self, command: Command) -> Result<RunConfig, CliError> {
        let params = match self.params {
            Some(p) => ProblemParams {
                m1_total: p.m1,
                m2_total: p.m2,
                gamma11: p.gamma11,
                gamma12: p.gamma12,
                gamma22: p.gamma22,
            },
            None => {
                return Err(CliError::InvalidConfig(
                    "missing params (supply a config file or --m1/--m2/--gamma* flags)".into(),
                ))
            }
        };
        // The geometry query tolerates a zero mass; every other command
        // works on a full minimization problem.
        if command == Command::Doublebubble {
            if !(params.m1_total >= 0.0 && params.m2_total >= 0.0)
                || params.m1_total + params.m2_total <= 0.0
            {
                return Err(CliError::InvalidConfig(
                    "doublebubble needs nonnegative masses with a positive sum".into(),
                ));
            }
        } else {
            tridrop::validate_params(&params).map_err(CliError::Validation)?;
        }

        let q = self.quadrature.unwrap_or_default();
        let quadrature = QuadratureSpec {
            method: q.method.unwrap_or(QuadratureMethod::MonteCarlo),
            samples: q.samples.unwrap_or(1_000_000),
            grid_h: q.grid_h.unwrap_or(0.05),
            seed: q.seed.unwrap_or(42),
        };
        quadrature.validate().map_err(CliError::Validation)?;

        let o = self.optimizer.unwrap_or_default();
        let budget = o.budget.unwrap_or(1500);
        let seeds = o.seeds.unwrap_or_else(|| vec![42]);
        if budget == 0 {
            return Err(CliError::InvalidConfig("optimizer budget must be >= 1".into()));
        }
        if seeds.is_empty() {
            return Err(CliError::InvalidConfig("optimizer seeds must be nonempty".into()));
        }

        let sweep = match self.sweep {
            Some(s) => {
                if s.values.is_empty() {
                    return Err(CliError::InvalidConfig("sweep values must be nonempty".into()));
                }
                Some((SweepParam::parse(&s.param)?, s.values))
            }
            None => None,
        };
        if command == Command::Sweep && sweep.is_none() {
            return Err(CliError::InvalidConfig(
                "sweep command needs a sweep section (param + values)".into(),
            ));
        }
        if matches!(command, Command::Energy | Command::Verify) && self.input.is_none() {
            return Err(CliError::InvalidConfig(
                "energy/verify need an input configuration file (--input or \"input\")".into(),
            ));
        }

        let (output_path, format) = match self.output {
            Some(out) => (out.path, out.format.unwrap_or(OutputFormat::Json)),
            None => (None, OutputFormat::Json),
        };

        Ok(RunConfig {
            command,
            params,
            quadrature,
            budget,
            seeds,
            sweep,
            output_path,
            format,
            input: self.input,
        })
    }
}
