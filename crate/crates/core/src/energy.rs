//! Cluster and configuration energies: interfacial area plus gamma-weighted
//! Coulomb terms, with a per-term breakdown.
//!
//! The perimeter convention counts each interface once: for a double bubble
//! that is the three caps, for a single ball its sphere, for separated balls
//! both spheres. Cross terms carry the factor 2 from the symmetric double
//! sum over ordered phase pairs.

use serde::{Deserialize, Serialize};

use crate::bubble::{solve_double_bubble, sphere_area};
use crate::coulomb::{
    ball_pair_interaction, ball_self_coeff, ball_self_energy, bubble_coulomb, splitmix64,
    CoulombValue, PhasePair, QuadratureSpec,
};
use crate::error::Result;
use crate::model::{ClusterAnsatz, Configuration, Phase, ProblemParams, Shape};

/// Energy of one cluster (or a whole configuration), split by term.
///
/// `total` is always the exact sum of the four components. `std_error` is the
/// quadrature error of the Coulomb terms combined in quadrature (0 when every
/// term is analytic). `relaxed` marks that a `SeparatedBalls` cluster entered
/// the sum: within one cluster that shape drops the connectedness requirement
/// and is reported honestly as a relaxation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub perimeter: f64,
    pub self1: f64,
    pub self2: f64,
    pub cross: f64,
    pub total: f64,
    pub std_error: f64,
    pub relaxed: bool,
}

impl EnergyBreakdown {
    fn assemble(perimeter: f64, self1: f64, self2: f64, cross: f64, std_error: f64, relaxed: bool) -> Self {
        Self {
            perimeter,
            self1,
            self2,
            cross,
            total: perimeter + self1 + self2 + cross,
            std_error,
            relaxed,
        }
    }

    pub fn zero() -> Self {
        Self::assemble(0.0, 0.0, 0.0, 0.0, 0.0, false)
    }

    /// Componentwise sum. The total accumulates as the sum of cluster
    /// totals, which keeps configuration energies bitwise additive; the
    /// component identity still holds to a few ulps.
    fn add(&self, other: &Self) -> Self {
        Self {
            perimeter: self.perimeter + other.perimeter,
            self1: self.self1 + other.self1,
            self2: self.self2 + other.self2,
            cross: self.cross + other.cross,
            total: self.total + other.total,
            std_error: (self.std_error.powi(2) + other.std_error.powi(2)).sqrt(),
            relaxed: self.relaxed || other.relaxed,
        }
    }
}

/// Energy of a single cluster for the given interaction coefficients.
///
/// Ball shapes are fully analytic; the double bubble's three Coulomb
/// integrals go through `bubble_coulomb` with the given quadrature spec.
pub fn cluster_energy(
    a: &ClusterAnsatz,
    p: &ProblemParams,
    spec: &QuadratureSpec,
) -> Result<EnergyBreakdown> {
    a.validate()?;
    let (m1, m2) = (a.masses.m1, a.masses.m2);
    match a.shape {
        Shape::SingleBall { phase } => {
            let m = m1 + m2;
            let perimeter = sphere_area(m)?;
            let self_e = ball_self_energy(m)?.value;
            let (self1, self2) = match phase {
                Phase::One => (p.gamma11 * self_e, 0.0),
                Phase::Two => (0.0, p.gamma22 * self_e),
            };
            Ok(EnergyBreakdown::assemble(perimeter, self1, self2, 0.0, 0.0, false))
        }
        Shape::SeparatedBalls { center_distance } => {
            let perimeter = sphere_area(m1)? + sphere_area(m2)?;
            let self1 = p.gamma11 * ball_self_energy(m1)?.value;
            let self2 = p.gamma22 * ball_self_energy(m2)?.value;
            let cross = 2.0 * p.gamma12 * ball_pair_interaction(m1, m2, center_distance)?.value;
            Ok(EnergyBreakdown::assemble(perimeter, self1, self2, cross, 0.0, true))
        }
        Shape::StandardDoubleBubble => {
            let g = solve_double_bubble(m1, m2)?;
            let perimeter = g.total_area();
            let c11 = weighted(p.gamma11, || bubble_coulomb(&g, PhasePair::SelfPhase1, spec))?;
            let c22 = weighted(p.gamma22, || bubble_coulomb(&g, PhasePair::SelfPhase2, spec))?;
            let c12 = weighted(2.0 * p.gamma12, || bubble_coulomb(&g, PhasePair::Cross, spec))?;
            let std_error = (c11.std_error.powi(2) + c22.std_error.powi(2) + c12.std_error.powi(2))
                .sqrt();
            Ok(EnergyBreakdown::assemble(
                perimeter, c11.value, c22.value, c12.value, std_error, false,
            ))
        }
    }
}

/// Skips the quadrature entirely when the weight is zero.
fn weighted(
    gamma: f64,
    integral: impl FnOnce() -> Result<CoulombValue>,
) -> Result<CoulombValue> {
    if gamma == 0.0 {
        return Ok(CoulombValue::exact(0.0));
    }
    let v = integral()?;
    Ok(CoulombValue {
        value: gamma * v.value,
        std_error: gamma.abs() * v.std_error,
    })
}

/// Total energy of a configuration: the componentwise sum of its cluster
/// energies. There are no inter-cluster terms. Each cluster's quadrature is
/// seeded from `(spec.seed, cluster index)`, so the result is a deterministic
/// function of the configuration and the spec.
pub fn configuration_energy(c: &Configuration, spec: &QuadratureSpec) -> Result<EnergyBreakdown> {
    c.validate()?;
    let mut sum = EnergyBreakdown::zero();
    for (k, cluster) in c.clusters.iter().enumerate() {
        let cluster_spec = spec.with_seed(splitmix64(spec.seed ^ (k as u64)));
        let e = cluster_energy(cluster, &c.params, &cluster_spec)?;
        sum = sum.add(&e);
    }
    Ok(sum)
}

/// Energy of the two-ball configuration `{B_M1, B_M2}`:
/// `sum_i [(36 pi)^{1/3} M_i^{2/3} + gamma_ii kappa M_i^{5/3}]`.
///
/// An upper bound for the optimal energy, and manifestly independent of
/// `gamma12` (the two pure balls have no cross term).
pub fn two_ball_upper_bound(p: &ProblemParams) -> f64 {
    two_ball_upper_bound_parts(p.m1_total, p.m2_total, p.gamma11, p.gamma22)
}

/// The same bound as an explicit function of `(M1, M2, gamma11, gamma22)`.
pub fn two_ball_upper_bound_parts(m1: f64, m2: f64, gamma11: f64, gamma22: f64) -> f64 {
    let kappa = ball_self_coeff();
    let a = crate::bubble::sphere_area_coeff();
    let p = |m: f64, g: f64| a * m.powf(2.0 / 3.0) + g * kappa * m.powf(5.0 / 3.0);
    p(m1, gamma11) + p(m2, gamma22)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ClusterMasses;
    use approx::assert_relative_eq;

    fn params(g11: f64, g12: f64, g22: f64) -> ProblemParams {
        ProblemParams::new(1.0, 1.0, g11, g12, g22).unwrap()
    }

    #[test]
    fn single_ball_energy_terms() {
        let p = params(1.0, 1.0, 1.0);
        let ball = ClusterAnsatz::single_ball(Phase::One, 1.0).unwrap();
        let e = cluster_energy(&ball, &p, &QuadratureSpec::default()).unwrap();
        assert_relative_eq!(e.perimeter, 4.835975862049409, max_relative = 1e-10);
        assert_relative_eq!(e.self1, ball_self_coeff(), max_relative = 1e-12);
        assert_eq!(e.self2, 0.0);
        assert_eq!(e.cross, 0.0);
        assert_eq!(e.std_error, 0.0);
        assert_relative_eq!(e.total, e.perimeter + e.self1, max_relative = 1e-15);
    }

    #[test]
    fn single_ball_with_zero_gamma_is_perimeter_only() {
        let p = params(0.0, 0.0, 0.0);
        let ball = ClusterAnsatz::single_ball(Phase::One, 1.0).unwrap();
        let e = cluster_energy(&ball, &p, &QuadratureSpec::default()).unwrap();
        assert_relative_eq!(e.total, 4.835975862049409, max_relative = 1e-10);
    }

    #[test]
    fn separated_balls_compose_analytic_pieces() {
        let p = params(1.0, 1.0, 1.0);
        let sep = ClusterAnsatz::separated_balls(1.0, 1.0, 10.0).unwrap();
        let e = cluster_energy(&sep, &p, &QuadratureSpec::default()).unwrap();
        assert_relative_eq!(e.perimeter, 2.0 * 4.835975862049409, max_relative = 1e-10);
        assert_relative_eq!(e.self1 + e.self2, 2.0 * ball_self_coeff(), max_relative = 1e-12);
        assert_relative_eq!(e.cross, 2.0 * 0.1, max_relative = 1e-12);
        assert!(e.relaxed);
    }

    #[test]
    fn two_pure_balls_have_no_cross_term() {
        for g12 in [0.0, 10.0] {
            let p = params(1.0, g12, 1.0);
            let c = Configuration::new(
                vec![
                    ClusterAnsatz::single_ball(Phase::One, 1.0).unwrap(),
                    ClusterAnsatz::single_ball(Phase::Two, 1.0).unwrap(),
                ],
                p,
            )
            .unwrap();
            let e = configuration_energy(&c, &QuadratureSpec::default()).unwrap();
            assert_eq!(e.cross, 0.0);
            assert_relative_eq!(e.total, two_ball_upper_bound(&p), max_relative = 1e-12);
        }
    }

    #[test]
    fn configuration_energy_is_cluster_sum() {
        let p = params(1.0, 1.0, 1.0);
        let bubble = ClusterAnsatz::new(
            ClusterMasses::new(1.0, 1.0).unwrap(),
            Shape::StandardDoubleBubble,
        )
        .unwrap();
        let c = Configuration::new(vec![bubble], p).unwrap();
        let spec = QuadratureSpec {
            samples: 50_000,
            ..QuadratureSpec::default()
        };
        let whole = configuration_energy(&c, &spec).unwrap();
        let alone = cluster_energy(&bubble, &p, &spec.with_seed(splitmix64(spec.seed))).unwrap();
        assert_eq!(whole.total.to_bits(), alone.total.to_bits());
    }

    #[test]
    fn upper_bound_ignores_gamma12_by_construction() {
        let a = two_ball_upper_bound(&params(1.0, 0.0, 1.0));
        let b = two_ball_upper_bound(&params(1.0, 10.0, 1.0));
        assert_eq!(a.to_bits(), b.to_bits());
        assert_relative_eq!(a, 13.5407, max_relative = 1e-4);
    }
}
