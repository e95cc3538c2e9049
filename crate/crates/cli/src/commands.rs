//! Command implementations and the report structures they emit.

use serde::{Deserialize, Serialize};
use tridrop::{
    ball_radius, cluster_count_bound, configuration_energy, dispatch_move, double_bubble_area,
    hutchings_lower_bound, minimize_e0, solve_double_bubble, sphere_area, verify_chain, CaseTag,
    ClusterAnsatz, ClusterMasses, Configuration, Phase, ProblemParams, Shape,
};

use crate::config::{Command, OutputFormat, RunConfig};
use crate::error::CliError;
use crate::report::{emit, fmt_f64, to_csv_bytes, to_json_bytes};

pub fn run(config: &RunConfig) -> Result<(), CliError> {
    match config.command {
        Command::Bounds => run_bounds(config),
        Command::Energy => run_energy(config),
        Command::Doublebubble => run_doublebubble(config),
        Command::Optimize => run_optimize(config),
        Command::Verify => run_verify(config),
        Command::Sweep => run_sweep(config),
    }
}

#[derive(Debug, Serialize)]
struct BoundsRow {
    #[serde(rename = "M1")]
    m1: f64,
    #[serde(rename = "M2")]
    m2: f64,
    gamma11: f64,
    gamma12: f64,
    gamma22: f64,
    m_s1: f64,
    m_s2: f64,
    m_plus_lb1: f64,
    m_plus_lb2: f64,
    h1: f64,
    h2: f64,
    eps_min: f64,
    k_pure: f64,
    k_mixed: f64,
    k: f64,
}

impl BoundsRow {
    fn compute(p: &ProblemParams) -> Result<Self, CliError> {
        let r = cluster_count_bound(p)?;
        Ok(Self {
            m1: p.m1_total,
            m2: p.m2_total,
            gamma11: p.gamma11,
            gamma12: p.gamma12,
            gamma22: p.gamma22,
            m_s1: r.m_s.0,
            m_s2: r.m_s.1,
            m_plus_lb1: r.m_plus_lb.0,
            m_plus_lb2: r.m_plus_lb.1,
            h1: r.h.0,
            h2: r.h.1,
            eps_min: r.eps_min,
            k_pure: r.k_pure,
            k_mixed: r.k_mixed,
            k: r.k,
        })
    }

    const HEADER: [&'static str; 15] = [
        "M1", "M2", "gamma11", "gamma12", "gamma22", "m_s1", "m_s2", "m_plus_lb1", "m_plus_lb2",
        "h1", "h2", "eps_min", "k_pure", "k_mixed", "k",
    ];

    fn csv_row(&self) -> Vec<String> {
        [
            self.m1,
            self.m2,
            self.gamma11,
            self.gamma12,
            self.gamma22,
            self.m_s1,
            self.m_s2,
            self.m_plus_lb1,
            self.m_plus_lb2,
            self.h1,
            self.h2,
            self.eps_min,
            self.k_pure,
            self.k_mixed,
            self.k,
        ]
        .iter()
        .map(|v| fmt_f64(*v))
        .collect()
    }
}

fn run_bounds(config: &RunConfig) -> Result<(), CliError> {
    let row = BoundsRow::compute(&config.params)?;
    let bytes = match config.format {
        OutputFormat::Json => to_json_bytes(&row)?,
        OutputFormat::Csv => to_csv_bytes(&BoundsRow::HEADER, &[row.csv_row()])?,
    };
    emit(config.output_path.as_deref(), &bytes)
}

/// One cluster of an on-disk configuration file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusterRecord {
    pub shape: String,
    pub m1: f64,
    pub m2: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distance: Option<f64>,
}

impl ClusterRecord {
    pub fn from_ansatz(c: &ClusterAnsatz) -> Self {
        let (shape, distance) = match c.shape {
            Shape::SingleBall { .. } => ("ball".to_string(), None),
            Shape::StandardDoubleBubble => ("double_bubble".to_string(), None),
            Shape::SeparatedBalls { center_distance } => {
                ("separated_balls".to_string(), Some(center_distance))
            }
        };
        Self {
            shape,
            m1: c.masses.m1,
            m2: c.masses.m2,
            distance,
        }
    }

    pub fn to_ansatz(&self) -> Result<ClusterAnsatz, CliError> {
        let masses = ClusterMasses::new(self.m1, self.m2).map_err(CliError::from)?;
        let shape = match self.shape.as_str() {
            "ball" => {
                if self.m1 > 0.0 && self.m2 > 0.0 {
                    return Err(CliError::InvalidConfig(
                        "a ball cluster must have one zero mass".into(),
                    ));
                }
                let phase = if self.m1 > 0.0 { Phase::One } else { Phase::Two };
                Shape::SingleBall { phase }
            }
            "double_bubble" => Shape::StandardDoubleBubble,
            "separated_balls" => {
                let d = self.distance.ok_or_else(|| {
                    CliError::InvalidConfig("separated_balls needs a distance".into())
                })?;
                Shape::SeparatedBalls { center_distance: d }
            }
            other => {
                return Err(CliError::InvalidConfig(format!(
                    "unknown shape `{other}` (expected ball, double_bubble, separated_balls)"
                )))
            }
        };
        ClusterAnsatz::new(masses, shape).map_err(CliError::from)
    }
}

/// Reads a configuration file (JSON list of cluster records) against the
/// given problem parameters.
pub fn read_configuration(path: &str, p: &ProblemParams) -> Result<Configuration, CliError> {
    let text = std::fs::read_to_string(path)?;
    let mut de = serde_json::Deserializer::from_str(&text);
    let records: Vec<ClusterRecord> = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let pointer = format!("/{}", e.path().to_string().replace('.', "/"));
        CliError::InvalidConfig(format!("{path} at {pointer}: {}", e.inner()))
    })?;
    let clusters = records
        .iter()
        .map(|r| r.to_ansatz())
        .collect::<Result<Vec<_>, _>>()?;
    Configuration::new(clusters, *p).map_err(CliError::from)
}

#[derive(Debug, Serialize)]
struct EnergyReport {
    clusters: usize,
    perimeter: f64,
    self1: f64,
    self2: f64,
    cross: f64,
    total: f64,
    std_error: f64,
    relaxed: bool,
}

fn run_energy(config: &RunConfig) -> Result<(), CliError> {
    let input = config.input.as_deref().expect("checked in resolve");
    let c = read_configuration(input, &config.params)?;
    let e = configuration_energy(&c, &config.quadrature)?;
    let report = EnergyReport {
        clusters: c.clusters.len(),
        perimeter: e.perimeter,
        self1: e.self1,
        self2: e.self2,
        cross: e.cross,
        total: e.total,
        std_error: e.std_error,
        relaxed: e.relaxed,
    };
    let bytes = match config.format {
        OutputFormat::Json => to_json_bytes(&report)?,
        OutputFormat::Csv => to_csv_bytes(
            &["clusters", "perimeter", "self1", "self2", "cross", "total", "std_error", "relaxed"],
            &[vec![
                report.clusters.to_string(),
                fmt_f64(report.perimeter),
                fmt_f64(report.self1),
                fmt_f64(report.self2),
                fmt_f64(report.cross),
                fmt_f64(report.total),
                fmt_f64(report.std_error),
                report.relaxed.to_string(),
            ]],
        )?,
    };
    emit(config.output_path.as_deref(), &bytes)
}

#[derive(Debug, Serialize)]
struct BubbleReport {
    m1: f64,
    m2: f64,
    degenerate: bool,
    r1: f64,
    r2: f64,
    /// Signed curvature radius of the separating cap; `null` when flat.
    r0: Option<f64>,
    theta1: f64,
    theta2: f64,
    theta0: f64,
    area1: f64,
    area2: f64,
    area_sep: f64,
    total_area: f64,
    hutchings_lower_bound: f64,
    two_sphere_area: f64,
}

fn run_doublebubble(config: &RunConfig) -> Result<(), CliError> {
    let (m1, m2) = (config.params.m1_total, config.params.m2_total);
    let report = if m1 == 0.0 || m2 == 0.0 {
        // Degenerate request: a single sphere.
        let m = m1 + m2;
        let area = sphere_area(m).map_err(CliError::from)?;
        BubbleReport {
            m1,
            m2,
            degenerate: true,
            r1: if m1 > 0.0 { ball_radius(m1) } else { 0.0 },
            r2: if m2 > 0.0 { ball_radius(m2) } else { 0.0 },
            r0: None,
            theta1: if m1 > 0.0 { std::f64::consts::PI } else { 0.0 },
            theta2: if m2 > 0.0 { std::f64::consts::PI } else { 0.0 },
            theta0: 0.0,
            area1: if m1 > 0.0 { area } else { 0.0 },
            area2: if m2 > 0.0 { area } else { 0.0 },
            area_sep: 0.0,
            total_area: area,
            hutchings_lower_bound: hutchings_lower_bound(m1, m2).map_err(CliError::from)?,
            two_sphere_area: area,
        }
    } else {
        let g = solve_double_bubble(m1, m2).map_err(CliError::from)?;
        BubbleReport {
            m1,
            m2,
            degenerate: g.degenerate,
            r1: g.r1,
            r2: g.r2,
            r0: if g.r0.is_finite() { Some(g.r0) } else { None },
            theta1: g.theta1,
            theta2: g.theta2,
            theta0: g.theta0,
            area1: g.area1(),
            area2: g.area2(),
            area_sep: g.area_sep(),
            total_area: g.total_area(),
            hutchings_lower_bound: hutchings_lower_bound(m1, m2).map_err(CliError::from)?,
            two_sphere_area: sphere_area(m1).map_err(CliError::from)?
                + sphere_area(m2).map_err(CliError::from)?,
        }
    };
    debug_assert!({
        let s = double_bubble_area(m1.max(0.0), m2.max(0.0));
        s.map(|v| (v - report.total_area).abs() < 1e-9 * v.max(1.0)).unwrap_or(true)
    });
    let bytes = match config.format {
        OutputFormat::Json => to_json_bytes(&report)?,
        OutputFormat::Csv => to_csv_bytes(
            &[
                "m1", "m2", "degenerate", "r1", "r2", "r0", "theta1", "theta2", "theta0", "area1",
                "area2", "area_sep", "total_area", "hutchings_lower_bound", "two_sphere_area",
            ],
            &[vec![
                fmt_f64(report.m1),
                fmt_f64(report.m2),
                report.degenerate.to_string(),
                fmt_f64(report.r1),
                fmt_f64(report.r2),
                report.r0.map(fmt_f64).unwrap_or_default(),
                fmt_f64(report.theta1),
                fmt_f64(report.theta2),
                fmt_f64(report.theta0),
                fmt_f64(report.area1),
                fmt_f64(report.area2),
                fmt_f64(report.area_sep),
                fmt_f64(report.total_area),
                fmt_f64(report.hutchings_lower_bound),
                fmt_f64(report.two_sphere_area),
            ]],
        )?,
    };
    emit(config.output_path.as_deref(), &bytes)
}

#[derive(Debug, Serialize)]
struct OptimizeReport {
    seed: u64,
    iterations: u64,
    energy: f64,
    std_error: f64,
    cluster_count: usize,
    two_ball_upper_bound: f64,
    clusters: Vec<ClusterRecord>,
}

fn run_optimize(config: &RunConfig) -> Result<(), CliError> {
    let mut best: Option<tridrop::PartitionResult> = None;
    for &seed in &config.seeds {
        let r = minimize_e0(&config.params, config.budget, seed, &config.quadrature)?;
        let better = match &best {
            None => true,
            Some(b) => r.energy < b.energy || (r.energy == b.energy && r.seed < b.seed),
        };
        if better {
            best = Some(r);
        }
    }
    let best = best.expect("seeds are nonempty");
    let clusters: Vec<ClusterRecord> = best
        .configuration
        .clusters
        .iter()
        .map(ClusterRecord::from_ansatz)
        .collect();
    let report = OptimizeReport {
        seed: best.seed,
        iterations: best.iterations,
        energy: best.energy,
        std_error: best.energy_std_error,
        cluster_count: clusters.len(),
        two_ball_upper_bound: tridrop::two_ball_upper_bound(&config.params),
        clusters: clusters.clone(),
    };
    let bytes = to_json_bytes(&report)?;
    emit(config.output_path.as_deref(), &bytes)?;
    // Alongside the report, write the configuration in the exchange format
    // that `energy` and `verify` read back.
    if let Some(path) = config.output_path.as_deref() {
        let config_path = configuration_path(path);
        let bytes = to_json_bytes(&clusters)?;
        emit(Some(&config_path), &bytes)?;
    }
    Ok(())
}

/// `report.json` -> `report.config.json`.
pub fn configuration_path(report_path: &str) -> String {
    match report_path.rsplit_once('.') {
        Some((stem, ext)) => format!("{stem}.config.{ext}"),
        None => format!("{report_path}.config"),
    }
}

#[derive(Debug, Serialize)]
struct VerifyRow {
    cluster: usize,
    case: String,
    r: f64,
    eps: f64,
    eps_floor: f64,
    energy_delta_bound: f64,
    delta_energy: f64,
    delta_energy_err: f64,
    margin_scaling: f64,
    margin_ball_swap: f64,
    margin_total: f64,
    improving: bool,
}

fn run_verify(config: &RunConfig) -> Result<(), CliError> {
    let input = config.input.as_deref().expect("checked in resolve");
    let c = read_configuration(input, &config.params)?;
    let mixed: Vec<usize> = (0..c.clusters.len())
        .filter(|&k| c.clusters[k].masses.is_mixed())
        .collect();
    if mixed.is_empty() {
        return Err(CliError::Validation(tridrop::Error::NotMixed {
            cluster: 0,
            m1: 0.0,
            m2: 0.0,
        }));
    }
    let mut rows = Vec::new();
    for k in mixed {
        let mv = match dispatch_move(&c, k) {
            Ok(mv) => mv,
            // A largest cluster cannot be its own competitor target.
            Err(tridrop::Error::PreconditionViolated { .. }) => continue,
            Err(e) => return Err(e.into()),
        };
        let rep = verify_chain(&c, &mv, &config.quadrature)?;
        rows.push(VerifyRow {
            cluster: k,
            case: match rep.case_tag {
                CaseTag::Case1 => "case1".into(),
                CaseTag::Case2 => "case2".into(),
            },
            r: rep.r,
            eps: rep.eps,
            eps_floor: rep.eps_floor,
            energy_delta_bound: rep.energy_delta_bound,
            delta_energy: rep.delta_energy,
            delta_energy_err: rep.delta_energy_err,
            margin_scaling: rep.margin_scaling,
            margin_ball_swap: rep.margin_ball_swap,
            margin_total: rep.margin_total,
            improving: rep.improving,
        });
    }
    let bytes = match config.format {
        OutputFormat::Json => to_json_bytes(&rows)?,
        OutputFormat::Csv => to_csv_bytes(
            &[
                "cluster", "case", "r", "eps", "eps_floor", "energy_delta_bound", "delta_energy",
                "delta_energy_err", "margin_scaling", "margin_ball_swap", "margin_total",
                "improving",
            ],
            &rows
                .iter()
                .map(|r| {
                    vec![
                        r.cluster.to_string(),
                        r.case.clone(),
                        fmt_f64(r.r),
                        fmt_f64(r.eps),
                        fmt_f64(r.eps_floor),
                        fmt_f64(r.energy_delta_bound),
                        fmt_f64(r.delta_energy),
                        fmt_f64(r.delta_energy_err),
                        fmt_f64(r.margin_scaling),
                        fmt_f64(r.margin_ball_swap),
                        fmt_f64(r.margin_total),
                        r.improving.to_string(),
                    ]
                })
                .collect::<Vec<_>>(),
        )?,
    };
    emit(config.output_path.as_deref(), &bytes)
}

fn run_sweep(config: &RunConfig) -> Result<(), CliError> {
    let (param, values) = config.sweep.as_ref().expect("checked in resolve");
    let mut rows = Vec::new();
    let mut json_rows = Vec::new();
    for &v in values {
        let p = param.apply(&config.params, v);
        let row = BoundsRow::compute(&p)?;
        let mut csv = vec![param.name().to_string(), fmt_f64(v)];
        csv.extend(row.csv_row());
        rows.push(csv);
        json_rows.push(serde_json::json!({
            "param": param.name(),
            "value": v,
        }));
        // Replace the last JSON row with the full report for stability.
        let full = serde_json::to_value(&row)
            .map_err(|e| CliError::InvalidConfig(format!("serialization failed: {e}")))?;
        if let (Some(serde_json::Value::Object(last)), serde_json::Value::Object(full)) =
            (json_rows.last_mut(), full)
        {
            for (k, val) in full {
                last.insert(k, val);
            }
        }
    }
    let mut header = vec!["param", "value"];
    header.extend(BoundsRow::HEADER);
    let bytes = match config.format {
        OutputFormat::Json => to_json_bytes(&json_rows)?,
        OutputFormat::Csv => to_csv_bytes(&header, &rows)?,
    };
    emit(config.output_path.as_deref(), &bytes)
}
