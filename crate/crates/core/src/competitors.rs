//! Competitor constructions: strip a small mixed cluster, feed its mass to a
//! largest cluster (dilating it), and leave a pure ball behind. If the
//! resulting energy-change upper bound is negative, the input configuration
//! is certifiably not optimal.
//!
//! Case 1 targets the cluster with the largest phase-1 mass and strips the
//! small cluster's phase 1; Case 2 is the mirror image. The dispatch
//! dichotomy between them is exhaustive for any mixed cluster that is not
//! itself a largest cluster.

use serde::{Deserialize, Serialize};

use crate::bounds::{competitor_delta_bound, hutchings_coeff};
use crate::coulomb::{splitmix64, QuadratureSpec};
use crate::energy::{cluster_energy, two_ball_upper_bound, EnergyBreakdown};
use crate::error::{Error, Result};
use crate::model::{
    ball_radius, ClusterAnsatz, ClusterMasses, Configuration, Phase, Shape,
};

/// Which of the two constructions a move used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CaseTag {
    Case1,
    Case2,
}

/// A constructed competitor: the modified configuration plus the analytic
/// upper bound `eps H - c eps^{2/3}` on its energy change.
#[derive(Debug, Clone, PartialEq)]
pub struct CompetitorMove {
    pub case_tag: CaseTag,
    /// The small mixed cluster that was stripped.
    pub source_k: usize,
    /// The receiving (largest) cluster, as an index into the input.
    pub target: usize,
    /// Dilation ratio: `eps1 / m1^+` (Case 1) or `eps2 / n2^+` (Case 2).
    pub r: f64,
    pub result: Configuration,
    /// Upper bound on `E(result) - E(input)`; negative certifies a strictly
    /// improving competitor.
    pub energy_delta_bound: f64,
    /// The target cluster after dilation by `(1+r)^{1/3}`.
    pub scaled_target: ClusterAnsatz,
    /// The pure ball left at the source's place, if any mass remains.
    pub leftover_ball: Option<ClusterAnsatz>,
}

/// Index of the cluster with the largest phase-`phase` mass (lowest index on
/// ties).
fn argmax_phase(c: &Configuration, phase: Phase) -> usize {
    let mass = |m: &ClusterMasses| match phase {
        Phase::One => m.m1,
        Phase::Two => m.m2,
    };
    let mut best = 0;
    for (i, cl) in c.clusters.iter().enumerate() {
        if mass(&cl.masses) > mass(&c.clusters[best].masses) {
            best = i;
        }
    }
    best
}

/// Rescales a cluster to hold the given masses, preserving its shape kind.
/// Separated balls keep their relative geometry (distance scales with the
/// cube root of the total), widened to tangency if rounding demands it.
fn scale_cluster_to(cluster: &ClusterAnsatz, m1: f64, m2: f64) -> ClusterAnsatz {
    let masses = ClusterMasses { m1, m2 };
    let shape = match cluster.shape {
        Shape::SeparatedBalls { center_distance } => {
            let factor = ((m1 + m2) / cluster.masses.total()).cbrt();
            let tangency = ball_radius(m1) + ball_radius(m2);
            Shape::SeparatedBalls {
                center_distance: (center_distance * factor).max(tangency),
            }
        }
        s => s,
    };
    ClusterAnsatz { masses, shape }
}

fn mixed_or_err(c: &Configuration, k: usize) -> Result<(f64, f64)> {
    let len = c.clusters.len();
    if k >= len {
        return Err(Error::IndexOutOfRange { index: k, len });
    }
    let m = c.clusters[k].masses;
    if !m.is_mixed() {
        return Err(Error::NotMixed {
            cluster: k,
            m1: m.m1,
            m2: m.m2,
        });
    }
    Ok((m.m1, m.m2))
}

fn build_move(
    c: &Configuration,
    k: usize,
    target: usize,
    case_tag: CaseTag,
    r: f64,
    moved_other: f64,
    leftover_mass: f64,
    leftover_phase: Phase,
    eps: f64,
    h: f64,
) -> Result<CompetitorMove> {
    let t = c.clusters[target].masses;
    let (eps1, eps2) = (c.clusters[k].masses.m1, c.clusters[k].masses.m2);
    // Additive updates keep the phase totals exact.
    let (new_m1, new_m2) = match case_tag {
        CaseTag::Case1 => (t.m1 + eps1, t.m2 + moved_other),
        CaseTag::Case2 => (t.m1 + moved_other, t.m2 + eps2),
    };
    let scaled_target = scale_cluster_to(&c.clusters[target], new_m1, new_m2);
    let leftover_ball = if leftover_mass > 0.0 {
        Some(ClusterAnsatz::single_ball(leftover_phase, leftover_mass)?)
    } else {
        None
    };
    let mut clusters = c.clusters.clone();
    clusters[target] = scaled_target;
    match leftover_ball {
        Some(ball) => clusters[k] = ball,
        None => {
            clusters.remove(k);
        }
    }
    let result = Configuration::new(clusters, c.params)?;
    Ok(CompetitorMove {
        case_tag,
        source_k: k,
        target,
        r,
        result,
        energy_delta_bound: competitor_delta_bound(eps, h),
        scaled_target,
        leftover_ball,
    })
}

/// Case 1: move the small cluster's phase-1 mass `eps1` (and `r m2` of
/// phase 2) into the cluster achieving `m1^+`, leaving a pure phase-2 ball
/// of mass `eps2 - r m2`. Requires `m1^+ / m2 >= eps1 / eps2`.
pub fn case1_move(c: &Configuration, k: usize) -> Result<CompetitorMove> {
    c.validate()?;
    let (eps1, eps2) = mixed_or_err(c, k)?;
    let target = argmax_phase(c, Phase::One);
    if target == k {
        return Err(Error::PreconditionViolated {
            reason: format!("cluster {k} itself achieves the largest phase-1 mass"),
        });
    }
    let m1_plus = c.clusters[target].masses.m1;
    let m2 = c.clusters[target].masses.m2;
    // m1^+/m2 >= eps1/eps2, cross-multiplied to dodge zero denominators.
    if m1_plus * eps2 < eps1 * m2 {
        return Err(Error::PreconditionViolated {
            reason: format!(
                "case 1 ratio test fails: m1+ = {m1_plus}, m2 = {m2}, eps = ({eps1}, {eps2})"
            ),
        });
    }
    let r = eps1 / m1_plus;
    let rm2 = r * m2;
    let u = two_ball_upper_bound(&c.params);
    let h1 = 3.0 * u / m1_plus;
    build_move(
        c,
        k,
        target,
        CaseTag::Case1,
        r,
        rm2,
        (eps2 - rm2).max(0.0),
        Phase::Two,
        eps1,
        h1,
    )
}

/// Case 2: the mirror image of Case 1 with the phase roles swapped.
pub fn case2_move(c: &Configuration, k: usize) -> Result<CompetitorMove> {
    c.validate()?;
    let (eps1, eps2) = mixed_or_err(c, k)?;
    let target = argmax_phase(c, Phase::Two);
    if target == k {
        return Err(Error::PreconditionViolated {
            reason: format!("cluster {k} itself achieves the largest phase-2 mass"),
        });
    }
    let n2_plus = c.clusters[target].masses.m2;
    let n1 = c.clusters[target].masses.m1;
    if n2_plus * eps1 < eps2 * n1 {
        return Err(Error::PreconditionViolated {
            reason: format!(
                "case 2 ratio test fails: n2+ = {n2_plus}, n1 = {n1}, eps = ({eps1}, {eps2})"
            ),
        });
    }
    let r = eps2 / n2_plus;
    let rn1 = r * n1;
    let u = two_ball_upper_bound(&c.params);
    let h2 = 3.0 * u / n2_plus;
    build_move(
        c,
        k,
        target,
        CaseTag::Case2,
        r,
        rn1,
        (eps1 - rn1).max(0.0),
        Phase::One,
        eps2,
        h2,
    )
}

/// Chooses between the two constructions: Case 1 iff
/// `m1^+ / m2^+ >= eps1 / eps2` (ties go to Case 1). For a mixed cluster
/// that is not itself a largest cluster, the chosen case's own precondition
/// is implied, so the dispatch never fails on such clusters.
pub fn dispatch_move(c: &Configuration, k: usize) -> Result<CompetitorMove> {
    c.validate()?;
    let (eps1, eps2) = mixed_or_err(c, k)?;
    let m1_plus = c.clusters[argmax_phase(c, Phase::One)].masses.m1;
    let m2_plus = c.clusters[argmax_phase(c, Phase::Two)].masses.m2;
    if m1_plus * eps2 >= eps1 * m2_plus {
        case1_move(c, k)
    } else {
        case2_move(c, k)
    }
}

/// Numerical audit of one competitor move, link by link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainReport {
    pub case_tag: CaseTag,
    pub r: f64,
    /// The stripped phase mass (`eps1` for Case 1, `eps2` for Case 2).
    pub eps: f64,
    /// `(c / H)^3` with H from the configuration's actual largest cluster;
    /// below this the move is certified improving.
    pub eps_floor: f64,
    /// `(1 + 3r) E(target) - E(scaled target)` and its standard error.
    pub margin_scaling: f64,
    pub margin_scaling_err: f64,
    /// `-c eps^{2/3} - [E(leftover ball) - E(source cluster)]`.
    pub margin_ball_swap: f64,
    pub margin_ball_swap_err: f64,
    /// `energy_delta_bound - (measured energy change of the move)`.
    pub margin_total: f64,
    pub margin_total_err: f64,
    /// Measured energy change of the move and its standard error.
    pub delta_energy: f64,
    pub delta_energy_err: f64,
    pub energy_delta_bound: f64,
    /// True iff the bound is negative: a strictly improving competitor
    /// exists, so the input configuration is not optimal.
    pub improving: bool,
}

/// Evaluates every inequality in the move's chain numerically.
///
/// Energies are evaluated with independent derived seeds; errors combine in
/// quadrature. `mv` must have been produced from `c`.
pub fn verify_chain(
    c: &Configuration,
    mv: &CompetitorMove,
    spec: &QuadratureSpec,
) -> Result<ChainReport> {
    let p = &c.params;
    let source = &c.clusters[mv.source_k];
    let target = &c.clusters[mv.target];
    let eps = match mv.case_tag {
        CaseTag::Case1 => source.masses.m1,
        CaseTag::Case2 => source.masses.m2,
    };
    let m_plus = match mv.case_tag {
        CaseTag::Case1 => target.masses.m1,
        CaseTag::Case2 => target.masses.m2,
    };
    let u = two_ball_upper_bound(p);
    let h = 3.0 * u / m_plus;
    let eps_floor = (hutchings_coeff() / h).powi(3);

    let eval = |cluster: &ClusterAnsatz, salt: u64| -> Result<EnergyBreakdown> {
        cluster_energy(cluster, p, &spec.with_seed(splitmix64(spec.seed ^ salt)))
    };
    let e_target = eval(target, 0xA1)?;
    let e_scaled = eval(&mv.scaled_target, 0xA2)?;
    let e_source = eval(source, 0xA3)?;
    let e_ball = match &mv.leftover_ball {
        Some(ball) => eval(ball, 0xA4)?,
        None => EnergyBreakdown::zero(),
    };

    let quad = |a: f64, b: f64| (a * a + b * b).sqrt();
    let margin_scaling = (1.0 + 3.0 * mv.r) * e_target.total - e_scaled.total;
    let margin_scaling_err = quad((1.0 + 3.0 * mv.r) * e_target.std_error, e_scaled.std_error);
    let c_coeff = hutchings_coeff();
    let margin_ball_swap = -c_coeff * eps.powf(2.0 / 3.0) - (e_ball.total - e_source.total);
    let margin_ball_swap_err = quad(e_ball.std_error, e_source.std_error);
    let delta_energy = (e_scaled.total - e_target.total) + (e_ball.total - e_source.total);
    let delta_energy_err = quad(
        quad(e_scaled.std_error, e_target.std_error),
        quad(e_ball.std_error, e_source.std_error),
    );
    let margin_total = mv.energy_delta_bound - delta_energy;

    Ok(ChainReport {
        case_tag: mv.case_tag,
        r: mv.r,
        eps,
        eps_floor,
        margin_scaling,
        margin_scaling_err,
        margin_ball_swap,
        margin_ball_swap_err,
        margin_total,
        margin_total_err: delta_energy_err,
        delta_energy,
        delta_energy_err,
        energy_delta_bound: mv.energy_delta_bound,
        improving: mv.energy_delta_bound < 0.0,
    })
}
