//! Domain types and mass bookkeeping: problem parameters, cluster shapes,
//! and configurations.
//!
//! A configuration is a plain list of clusters; cluster positions are never
//! stored because the total energy has no inter-cluster term. The exterior
//! phase is never materialized either — every perimeter formula is expressed
//! through cap and sphere areas of the ansatz shapes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance for mass-conservation checks. All mass arithmetic is
/// exact summation; the tolerance only absorbs float drift.
pub const MASS_REL_TOL: f64 = 1e-12;

/// Radius of a ball of mass (volume) `m`.
pub fn ball_radius(m: f64) -> f64 {
    (3.0 * m / (4.0 * std::f64::consts::PI)).cbrt()
}

/// Total masses of the two constituents and the interaction matrix.
///
/// The matrix ((gamma11, gamma12), (gamma12, gamma22)) is symmetric by
/// construction: only `gamma12` is stored for the off-diagonal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemParams {
    pub m1_total: f64,
    pub m2_total: f64,
    pub gamma11: f64,
    pub gamma12: f64,
    pub gamma22: f64,
}

impl ProblemParams {
    pub fn new(m1_total: f64, m2_total: f64, gamma11: f64, gamma12: f64, gamma22: f64) -> Result<Self> {
        let p = Self {
            m1_total,
            m2_total,
            gamma11,
            gamma12,
            gamma22,
        };
        p.validate()?;
        Ok(p)
    }

    /// Checks every invariant: positive masses, nonnegative coefficients.
    pub fn validate(&self) -> Result<()> {
        if !(self.m1_total > 0.0) || !self.m1_total.is_finite() {
            return Err(Error::NonPositiveMass {
                field: "M1",
                value: self.m1_total,
            });
        }
        if !(self.m2_total > 0.0) || !self.m2_total.is_finite() {
            return Err(Error::NonPositiveMass {
                field: "M2",
                value: self.m2_total,
            });
        }
        for (field, value) in [
            ("gamma11", self.gamma11),
            ("gamma12", self.gamma12),
            ("gamma22", self.gamma22),
        ] {
            if !(value >= 0.0) || !value.is_finite() {
                return Err(Error::NegativeGamma { field, value });
            }
        }
        Ok(())
    }
}

/// Validates a `ProblemParams`, naming the offending field on failure.
pub fn validate_params(p: &ProblemParams) -> Result<()> {
    p.validate()
}

/// The two phase masses held by one cluster. At least one must be positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusterMasses {
    pub m1: f64,
    pub m2: f64,
}

impl ClusterMasses {
    pub fn new(m1: f64, m2: f64) -> Result<Self> {
        if !(m1 >= 0.0) || !m1.is_finite() {
            return Err(Error::NegativeMass {
                field: "m1",
                value: m1,
            });
        }
        if !(m2 >= 0.0) || !m2.is_finite() {
            return Err(Error::NegativeMass {
                field: "m2",
                value: m2,
            });
        }
        if m1 + m2 <= 0.0 {
            return Err(Error::NonPositiveMass {
                field: "m1+m2",
                value: m1 + m2,
            });
        }
        Ok(Self { m1, m2 })
    }

    pub fn total(&self) -> f64 {
        self.m1 + self.m2
    }

    /// Both phases strictly positive.
    pub fn is_mixed(&self) -> bool {
        self.m1 > 0.0 && self.m2 > 0.0
    }
}

/// Which constituent a pure cluster is made of.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Phase {
    One,
    Two,
}

impl Phase {
    pub fn other(self) -> Phase {
        match self {
            Phase::One => Phase::Two,
            Phase::Two => Phase::One,
        }
    }
}

/// Parametrized candidate shape for one cluster.
///
/// `SeparatedBalls` relaxes the connectedness of the cluster's two regions
/// into two disjoint balls; it is flagged `relaxed` in energy reports and
/// never enters the bound pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Shape {
    SingleBall { phase: Phase },
    StandardDoubleBubble,
    SeparatedBalls { center_distance: f64 },
}

/// One cluster: a mass pair plus the shape that carries it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusterAnsatz {
    pub masses: ClusterMasses,
    pub shape: Shape,
}

impl ClusterAnsatz {
    pub fn new(masses: ClusterMasses, shape: Shape) -> Result<Self> {
        let c = Self { masses, shape };
        c.validate()?;
        Ok(c)
    }

    /// Pure ball of the given phase.
    pub fn single_ball(phase: Phase, mass: f64) -> Result<Self> {
        let masses = match phase {
            Phase::One => ClusterMasses::new(mass, 0.0)?,
            Phase::Two => ClusterMasses::new(0.0, mass)?,
        };
        Self::new(masses, Shape::SingleBall { phase })
    }

    /// Standard double bubble holding `(m1, m2)`.
    pub fn double_bubble(m1: f64, m2: f64) -> Result<Self> {
        Self::new(ClusterMasses::new(m1, m2)?, Shape::StandardDoubleBubble)
    }

    /// Two disjoint balls at the given center distance.
    pub fn separated_balls(m1: f64, m2: f64, center_distance: f64) -> Result<Self> {
        Self::new(
            ClusterMasses::new(m1, m2)?,
            Shape::SeparatedBalls { center_distance },
        )
    }

    pub fn validate(&self) -> Result<()> {
        let ClusterMasses { m1, m2 } = self.masses;
        if !(m1 >= 0.0) || !(m2 >= 0.0) || m1 + m2 <= 0.0 {
            return Err(Error::NonPositiveMass {
                field: "m1+m2",
                value: m1 + m2,
            });
        }
        match self.shape {
            Shape::SingleBall { phase } => {
                let other = match phase {
                    Phase::One => m2,
                    Phase::Two => m1,
                };
                if other != 0.0 {
                    return Err(Error::InvalidShape {
                        reason: format!("single ball requires the other phase's mass to be exactly 0, got {other}"),
                    });
                }
            }
            Shape::StandardDoubleBubble => {
                if !(m1 > 0.0 && m2 > 0.0) {
                    return Err(Error::InvalidShape {
                        reason: format!("double bubble requires both masses positive, got ({m1}, {m2})"),
                    });
                }
            }
            Shape::SeparatedBalls { center_distance } => {
                if !(m1 > 0.0 && m2 > 0.0) {
                    return Err(Error::InvalidShape {
                        reason: format!("separated balls require both masses positive, got ({m1}, {m2})"),
                    });
                }
                let radius_sum = ball_radius(m1) + ball_radius(m2);
                if center_distance < radius_sum {
                    return Err(Error::OverlappingBalls {
                        distance: center_distance,
                        radius_sum,
                    });
                }
            }
        }
        Ok(())
    }

    /// Cluster dilated by `(1 + r)^{1/3}`: masses scale by `1 + r`, the shape
    /// is preserved (the ansatz family is closed under dilation).
    pub fn dilate(&self, r: f64) -> Self {
        let factor = 1.0 + r;
        let masses = ClusterMasses {
            m1: self.masses.m1 * factor,
            m2: self.masses.m2 * factor,
        };
        let shape = match self.shape {
            Shape::SeparatedBalls { center_distance } => Shape::SeparatedBalls {
                center_distance: center_distance * factor.cbrt(),
            },
            s => s,
        };
        Self { masses, shape }
    }
}

/// An ordered list of clusters partitioning the total masses of a problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Configuration {
    pub clusters: Vec<ClusterAnsatz>,
    pub params: ProblemParams,
}

/// Sums the phase masses over a slice of clusters. Empty slice sums to (0, 0).
pub fn total_masses(clusters: &[ClusterAnsatz]) -> (f64, f64) {
    clusters.iter().fold((0.0, 0.0), |(a, b), c| {
        (a + c.masses.m1, b + c.masses.m2)
    })
}

impl Configuration {
    pub fn new(clusters: Vec<ClusterAnsatz>, params: ProblemParams) -> Result<Self> {
        let c = Self { clusters, params };
        c.validate()?;
        Ok(c)
    }

    /// Validates the parameters, every cluster, and mass conservation.
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        for cluster in &self.clusters {
            cluster.validate()?;
        }
        let (s1, s2) = total_masses(&self.clusters);
        if (s1 - self.params.m1_total).abs() > MASS_REL_TOL * self.params.m1_total.max(s1) {
            return Err(Error::MassMismatch {
                phase: 1,
                sum: s1,
                expected: self.params.m1_total,
            });
        }
        if (s2 - self.params.m2_total).abs() > MASS_REL_TOL * self.params.m2_total.max(s2) {
            return Err(Error::MassMismatch {
                phase: 2,
                sum: s2,
                expected: self.params.m2_total,
            });
        }
        Ok(())
    }

    /// `(Σ m1_k, Σ m2_k)` over the clusters.
    pub fn total_masses(&self) -> (f64, f64) {
        total_masses(&self.clusters)
    }
}

/// Moves `(d1, d2)` of mass from cluster `from` to cluster `to`.
///
/// Totals are unchanged; a cluster whose masses become (0, 0) is removed.
/// Shapes are re-derived minimally after the shift: a cluster left with one
/// phase becomes a single ball, a single ball receiving the other phase
/// becomes a double bubble, and separated balls keep their kind with the
/// center distance widened to tangency if the grown radii demand it.
pub fn apply_mass_transfer(
    c: &Configuration,
    from: usize,
    to: usize,
    d1: f64,
    d2: f64,
) -> Result<Configuration> {
    let len = c.clusters.len();
    if from >= len {
        return Err(Error::IndexOutOfRange { index: from, len });
    }
    if to >= len {
        return Err(Error::IndexOutOfRange { index: to, len });
    }
    if from == to {
        return Err(Error::PreconditionViolated {
            reason: "mass transfer requires from != to".into(),
        });
    }
    let src = c.clusters[from].masses;
    if !(0.0..=src.m1).contains(&d1) {
        return Err(Error::InsufficientMass {
            cluster: from,
            phase: 1,
            available: src.m1,
            requested: d1,
        });
    }
    if !(0.0..=src.m2).contains(&d2) {
        return Err(Error::InsufficientMass {
            cluster: from,
            phase: 2,
            available: src.m2,
            requested: d2,
        });
    }

    let mut clusters = c.clusters.clone();
    let new_from = ClusterMasses {
        m1: src.m1 - d1,
        m2: src.m2 - d2,
    };
    let dst = clusters[to].masses;
    let new_to = ClusterMasses {
        m1: dst.m1 + d1,
        m2: dst.m2 + d2,
    };
    clusters[to] = rederive_shape(clusters[to], new_to);
    if new_from.m1 + new_from.m2 == 0.0 {
        clusters.remove(from);
    } else {
        clusters[from] = rederive_shape(clusters[from], new_from);
    }
    Configuration::new(clusters, c.params)
}

fn rederive_shape(old: ClusterAnsatz, masses: ClusterMasses) -> ClusterAnsatz {
    let shape = if masses.m1 > 0.0 && masses.m2 > 0.0 {
        match old.shape {
            Shape::SeparatedBalls { center_distance } => {
                let tangency = ball_radius(masses.m1) + ball_radius(masses.m2);
                Shape::SeparatedBalls {
                    center_distance: center_distance.max(tangency),
                }
            }
            Shape::SingleBall { .. } => Shape::StandardDoubleBubble,
            s => s,
        }
    } else if masses.m1 > 0.0 {
        Shape::SingleBall { phase: Phase::One }
    } else {
        Shape::SingleBall { phase: Phase::Two }
    };
    ClusterAnsatz { masses, shape }
}
