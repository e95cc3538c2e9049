//! Coulomb double integrals `∫∫ |x-y|^{-1} dx dy` over the ansatz shapes.
//!
//! Balls have closed forms (interior self-energy and, for disjoint balls,
//! Newton's shell theorem). Double-bubble lobes are integrated by rejection
//! Monte Carlo from the exact cap geometry, or by a deterministic voxel
//! midpoint sum with an exact self-cell correction.
//!
//! The kernel is integrable in 3D, so pair sampling needs no regularization;
//! the estimator has a heavy-tailed variance, which is why reported values
//! use a median of 16 batch means and the standard error is taken across
//! batches.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bubble::DoubleBubbleGeometry;
use crate::error::{Error, Result};
use crate::model::ball_radius;

/// Self-interaction of a unit cube under `|x-y|^{-1}`, frozen from a
/// 10^8-pair Monte-Carlo run (standard error 1.5e-4); used for the diagonal
/// term of the voxel sum.
pub const CUBE_SELF_CONSTANT: f64 = 1.8821906;

/// Number of batches in the median-of-means estimator.
const BATCHES: usize = 16;

/// Relative standard error above which a Monte-Carlo result is rejected.
const MAX_REL_STD_ERROR: f64 = 0.01;

/// How the Coulomb integrals are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadratureMethod {
    /// Closed forms only; shapes that need quadrature are an error.
    Analytic,
    MonteCarlo,
    Voxel,
}

/// Quadrature settings: method, sample budget, voxel pitch, RNG seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub method: QuadratureMethod,
    pub samples: u64,
    pub grid_h: f64,
    pub seed: u64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            method: QuadratureMethod::MonteCarlo,
            samples: 1_000_000,
            grid_h: 0.05,
            seed: 42,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        match self.method {
            QuadratureMethod::MonteCarlo if self.samples < 10_000 => {
                Err(Error::InvalidQuadrature {
                    reason: format!("monte_carlo needs samples >= 10000, got {}", self.samples),
                })
            }
            QuadratureMethod::Voxel if !(self.grid_h > 0.0) => Err(Error::InvalidQuadrature {
                reason: format!("voxel needs grid_h > 0, got {}", self.grid_h),
            }),
            _ => Ok(()),
        }
    }

    /// Same spec with a different seed; used to decorrelate per-cluster runs.
    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..*self }
    }
}

/// A Coulomb integral value with its standard error (0 for closed forms and
/// voxel sums).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoulombValue {
    pub value: f64,
    pub std_error: f64,
}

impl CoulombValue {
    pub fn exact(value: f64) -> Self {
        Self {
            value,
            std_error: 0.0,
        }
    }
}

/// SplitMix64 step; used to derive decorrelated seeds deterministically.
pub(crate) fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `∫∫_{B_m × B_m} |x-y|^{-1}`: `(32 pi^2 / 15) R^5` for the ball of mass m,
/// i.e. `kappa * m^{5/3}` with `kappa = (32 pi^2 / 15)(3/4pi)^{5/3} ≈ 1.9344`.
pub fn ball_self_energy(m: f64) -> Result<CoulombValue> {
    if !(m >= 0.0) || !m.is_finite() {
        return Err(Error::NegativeMass {
            field: "m",
            value: m,
        });
    }
    let r = ball_radius(m);
    Ok(CoulombValue::exact(
        32.0 * std::f64::consts::PI.powi(2) / 15.0 * r.powi(5),
    ))
}

/// The coefficient `kappa` with `ball_self_energy(m) = kappa m^{5/3}`.
pub fn ball_self_coeff() -> f64 {
    ball_self_energy(1.0).expect("unit mass is valid").value
}

/// Cross Coulomb energy of two disjoint balls at center distance `d`:
/// exactly `m1 m2 / d` by the shell theorem.
pub fn ball_pair_interaction(m1: f64, m2: f64, d: f64) -> Result<CoulombValue> {
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
    let radius_sum = ball_radius(m1) + ball_radius(m2);
    if d < radius_sum {
        return Err(Error::OverlappingBalls {
            distance: d,
            radius_sum,
        });
    }
    Ok(CoulombValue::exact(m1 * m2 / d))
}

/// Exact self-interaction of a cube of side `h`: `CUBE_SELF_CONSTANT * h^5`.
pub fn cube_self_correction(h: f64) -> f64 {
    assert!(h >= 0.0, "cube side must be nonnegative");
    CUBE_SELF_CONSTANT * h.powi(5)
}

/// Which pair of lobes an integral runs over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhasePair {
    SelfPhase1,
    SelfPhase2,
    Cross,
}

/// One lobe of a double bubble in the solved frame, with its membership test
/// and a bounding box for rejection sampling.
#[derive(Debug, Clone, Copy)]
struct Lobe {
    /// Center (on the z axis) and radius of the enclosing outer cap's sphere.
    z_c: f64,
    r: f64,
    /// Separating cap sphere, if the film is curved.
    sep: Option<(f64, f64)>,
    /// This lobe sits on z < 0 (the larger one) or z > 0.
    big_side: bool,
    /// Height of the dome the film carves out of the big lobe (0 if flat).
    dome_h: f64,
    /// Junction circle radius.
    rho_j: f64,
    /// Full ball, no junction plane (degenerate geometry).
    whole_ball: bool,
}

impl Lobe {
    fn contains(&self, p: [f64; 3]) -> bool {
        let d2 = |zc: f64, r: f64| {
            let dz = p[2] - zc;
            p[0] * p[0] + p[1] * p[1] + dz * dz < r * r
        };
        if self.whole_ball {
            return d2(self.z_c, self.r);
        }
        if self.big_side {
            if p[2] >= 0.0 || !d2(self.z_c, self.r) {
                return false;
            }
            match self.sep {
                Some((z0, r0)) => !d2(z0, r0),
                None => true,
            }
        } else {
            if p[2] > 0.0 {
                return d2(self.z_c, self.r);
            }
            match self.sep {
                Some((z0, r0)) => d2(z0, r0),
                None => false,
            }
        }
    }

    /// Axis-aligned bounding box `(z_lo, z_hi, half_width)`.
    fn bbox(&self) -> (f64, f64, f64) {
        if self.whole_ball {
            return (self.z_c - self.r, self.z_c + self.r, self.r);
        }
        if self.big_side {
            (self.z_c - self.r, 0.0, self.r)
        } else {
            let w = if self.z_c > 0.0 { self.r } else { self.rho_j };
            (-self.dome_h, self.z_c + self.r, w)
        }
    }
}

/// Splits a solved geometry into the two phase lobes (phase 1 first).
fn lobes_of(g: &DoubleBubbleGeometry) -> (Lobe, Lobe) {
    if g.degenerate {
        let (r_big, big_is_1) = if g.swapped { (g.r2, false) } else { (g.r1, true) };
        let big = Lobe {
            z_c: 0.0,
            r: r_big,
            sep: None,
            big_side: true,
            dome_h: 0.0,
            rho_j: 0.0,
            whole_ball: true,
        };
        // The vanished lobe: zero-size marker, never sampled.
        let small = Lobe {
            z_c: 0.0,
            r: 0.0,
            sep: None,
            big_side: false,
            dome_h: 0.0,
            rho_j: 0.0,
            whole_ball: true,
        };
        return if big_is_1 { (big, small) } else { (small, big) };
    }
    let sep = if g.r0.is_infinite() {
        None
    } else {
        Some((g.z_sep, g.r0))
    };
    let dome_h = match sep {
        Some((z0, r0)) => r0 - z0,
        None => 0.0,
    };
    let (r_big, r_small) = if g.swapped { (g.r2, g.r1) } else { (g.r1, g.r2) };
    let big = Lobe {
        z_c: g.z_big,
        r: r_big,
        sep,
        big_side: true,
        dome_h: 0.0,
        rho_j: g.rho_j,
        whole_ball: false,
    };
    let small = Lobe {
        z_c: g.z_small,
        r: r_small,
        sep,
        big_side: false,
        dome_h,
        rho_j: g.rho_j,
        whole_ball: false,
    };
    if g.swapped {
        (small, big)
    } else {
        (big, small)
    }
}

fn sample_in_lobe<R: Rng>(lobe: &Lobe, rng: &mut R) -> [f64; 3] {
    let (z_lo, z_hi, w) = lobe.bbox();
    loop {
        let p = [
            rng.random_range(-w..w),
            rng.random_range(-w..w),
            rng.random_range(z_lo..z_hi),
        ];
        if lobe.contains(p) {
            return p;
        }
    }
}

fn dist(a: [f64; 3], b: [f64; 3]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    (dx * dx + dy * dy + dz * dz).sqrt()
}

/// `∫∫_{lobe_i x lobe_j} |x-y|^{-1}` over a solved double bubble.
///
/// Monte Carlo: median of 16 batch means over `spec.samples` pairs total;
/// each batch is seeded as a pure function of `(spec.seed, batch index)`, so
/// the result does not depend on how batches are scheduled. Voxel: midpoint
/// double sum over cell pairs plus the exact self-cell correction
/// (`cube_self_correction`), with the cell density normalized to the exact
/// lobe mass. The voxel bias is O(grid_h): on ball and bubble test cases the
/// relative error stays below `0.5 * grid_h / r` with `r` the ball radius of
/// the total mass.
pub fn bubble_coulomb(
    g: &DoubleBubbleGeometry,
    phases: PhasePair,
    spec: &QuadratureSpec,
) -> Result<CoulombValue> {
    spec.validate()?;
    let (lobe1, lobe2) = lobes_of(g);
    let (la, lb, ma, mb) = match phases {
        PhasePair::SelfPhase1 => (lobe1, lobe1, g.m1, g.m1),
        PhasePair::SelfPhase2 => (lobe2, lobe2, g.m2, g.m2),
        PhasePair::Cross => (lobe1, lobe2, g.m1, g.m2),
    };
    if g.degenerate {
        // The vanished lobe contributes nothing; the full one is a ball.
        let vanished = |l: &Lobe| l.whole_ball && l.r == 0.0;
        if vanished(&la) || vanished(&lb) {
            return Ok(CoulombValue::exact(0.0));
        }
        // Self energy of the surviving lobe: fall through to the estimator
        // below (it samples a whole ball).
    }
    match spec.method {
        QuadratureMethod::Analytic => Err(Error::InvalidQuadrature {
            reason: "bubble integrals need monte_carlo or voxel".into(),
        }),
        QuadratureMethod::MonteCarlo => {
            let same = matches!(phases, PhasePair::SelfPhase1 | PhasePair::SelfPhase2);
            mc_pair_integral(&la, &lb, same, ma * mb, spec)
        }
        QuadratureMethod::Voxel => voxel_pair_integral(&la, &lb, phases, spec.grid_h, ma, mb),
    }
}

fn mc_pair_integral(
    la: &Lobe,
    lb: &Lobe,
    same_lobe: bool,
    measure: f64,
    spec: &QuadratureSpec,
) -> Result<CoulombValue> {
    let per_batch = (spec.samples as usize / BATCHES).max(1);
    let mut batch_means = [0.0_f64; BATCHES];
    for (b, mean) in batch_means.iter_mut().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(spec.seed ^ (b as u64) << 32));
        let mut acc = 0.0;
        for _ in 0..per_batch {
            let x = sample_in_lobe(la, &mut rng);
            let y = if same_lobe {
                sample_in_lobe(la, &mut rng)
            } else {
                sample_in_lobe(lb, &mut rng)
            };
            acc += 1.0 / dist(x, y);
        }
        *mean = measure * acc / per_batch as f64;
    }
    let mut sorted = batch_means;
    sorted.sort_by(|a, b| a.total_cmp(b));
    let value = 0.5 * (sorted[BATCHES / 2 - 1] + sorted[BATCHES / 2]);
    let avg = batch_means.iter().sum::<f64>() / BATCHES as f64;
    let var = batch_means.iter().map(|m| (m - avg).powi(2)).sum::<f64>() / (BATCHES - 1) as f64;
    let std_error = (var / BATCHES as f64).sqrt();
    if value > 0.0 && std_error / value > MAX_REL_STD_ERROR {
        return Err(Error::ConvergenceFailure {
            context: "bubble coulomb monte carlo",
            residual: std_error / value,
            tolerance: MAX_REL_STD_ERROR,
            iterations: spec.samples as usize,
        });
    }
    Ok(CoulombValue { value, std_error })
}

/// Cell centers of the voxel grid covering a lobe.
fn voxelize(lobe: &Lobe, h: f64) -> Vec<[f64; 3]> {
    let (z_lo, z_hi, w) = lobe.bbox();
    let nx = ((2.0 * w) / h).ceil() as i64;
    let nz = ((z_hi - z_lo) / h).ceil() as i64;
    let mut cells = Vec::new();
    for iz in 0..nz {
        let z = z_lo + (iz as f64 + 0.5) * h;
        for iy in 0..nx {
            let y = -w + (iy as f64 + 0.5) * h;
            for ix in 0..nx {
                let x = -w + (ix as f64 + 0.5) * h;
                let p = [x, y, z];
                if lobe.contains(p) {
                    cells.push(p);
                }
            }
        }
    }
    cells
}

fn voxel_pair_integral(
    la: &Lobe,
    lb: &Lobe,
    phases: PhasePair,
    h: f64,
    ma: f64,
    mb: f64,
) -> Result<CoulombValue> {
    let h3 = h * h * h;
    let h6 = h3 * h3;
    let cells_a = voxelize(la, h);
    if cells_a.is_empty() {
        return Err(Error::InvalidQuadrature {
            reason: format!("grid_h = {h} too coarse: no cells inside the lobe"),
        });
    }
    let same = matches!(phases, PhasePair::SelfPhase1 | PhasePair::SelfPhase2);
    // Normalizing the cell density to the exact lobe mass removes the
    // voxelized-volume jitter from the estimate; the leftover bias is O(h)
    // from boundary cells and the midpoint kernel.
    let rho_a = ma / (cells_a.len() as f64 * h3);
    let mut total = 0.0;
    if same {
        for i in 0..cells_a.len() {
            for j in (i + 1)..cells_a.len() {
                total += 2.0 * h6 / dist(cells_a[i], cells_a[j]);
            }
        }
        total += cells_a.len() as f64 * cube_self_correction(h);
        total *= rho_a * rho_a;
    } else {
        let cells_b = voxelize(lb, h);
        if cells_b.is_empty() {
            return Err(Error::InvalidQuadrature {
                reason: format!("grid_h = {h} too coarse: no cells inside the lobe"),
            });
        }
        let rho_b = mb / (cells_b.len() as f64 * h3);
        for a in &cells_a {
            for b in &cells_b {
                total += h6 / dist(*a, *b);
            }
        }
        total *= rho_a * rho_b;
    }
    Ok(CoulombValue::exact(total))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bubble::solve_double_bubble;
    use approx::assert_relative_eq;

    #[test]
    fn ball_self_energy_values() {
        let kappa = ball_self_energy(1.0).unwrap().value;
        assert!((kappa - 1.9344).abs() < 1e-4, "kappa = {kappa}");
        assert_eq!(ball_self_energy(0.0).unwrap().value, 0.0);
        assert_relative_eq!(
            ball_self_energy(8.0).unwrap().value,
            32.0 * kappa,
            max_relative = 1e-12
        );
        assert!(ball_self_energy(-1.0).is_err());
    }

    #[test]
    fn ball_pair_is_shell_theorem() {
        assert_relative_eq!(
            ball_pair_interaction(1.0, 1.0, 10.0).unwrap().value,
            0.1,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            ball_pair_interaction(2.0, 3.0, 100.0).unwrap().value,
            0.06,
            max_relative = 1e-15
        );
        let tangency = 2.0 * ball_radius(1.0);
        let v = ball_pair_interaction(1.0, 1.0, tangency).unwrap().value;
        assert_relative_eq!(v, 1.0 / tangency, max_relative = 1e-15);
        assert!(ball_pair_interaction(1.0, 1.0, tangency - 1e-9).is_err());
    }

    #[test]
    fn cube_correction_scales_as_h5() {
        assert_relative_eq!(
            cube_self_correction(2.0),
            32.0 * CUBE_SELF_CONSTANT,
            max_relative = 1e-12
        );
        assert_eq!(cube_self_correction(0.0), 0.0);
    }

    #[test]
    fn spec_validation() {
        let mut spec = QuadratureSpec::default();
        assert!(spec.validate().is_ok());
        spec.samples = 100;
        assert!(spec.validate().is_err());
        spec = QuadratureSpec {
            method: QuadratureMethod::Voxel,
            grid_h: 0.0,
            ..QuadratureSpec::default()
        };
        assert!(spec.validate().is_err());
    }

    #[test]
    fn symmetric_bubble_self_terms_agree() {
        let g = solve_double_bubble(1.0, 1.0).unwrap();
        let spec = QuadratureSpec {
            samples: 200_000,
            ..QuadratureSpec::default()
        };
        let a = bubble_coulomb(&g, PhasePair::SelfPhase1, &spec).unwrap();
        let b = bubble_coulomb(&g, PhasePair::SelfPhase2, &spec).unwrap();
        let sigma = (a.std_error.powi(2) + b.std_error.powi(2)).sqrt();
        assert!(
            (a.value - b.value).abs() <= 3.0 * sigma,
            "self terms differ: {} vs {} (3 sigma = {})",
            a.value,
            b.value,
            3.0 * sigma
        );
    }

    #[test]
    fn mc_is_deterministic_for_fixed_seed() {
        let g = solve_double_bubble(2.0, 1.0).unwrap();
        let spec = QuadratureSpec {
            samples: 50_000,
            ..QuadratureSpec::default()
        };
        let a = bubble_coulomb(&g, PhasePair::Cross, &spec).unwrap();
        let b = bubble_coulomb(&g, PhasePair::Cross, &spec).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a.std_error.to_bits(), b.std_error.to_bits());
    }

    #[test]
    fn analytic_method_rejects_bubbles() {
        let g = solve_double_bubble(1.0, 1.0).unwrap();
        let spec = QuadratureSpec {
            method: QuadratureMethod::Analytic,
            ..QuadratureSpec::default()
        };
        assert!(bubble_coulomb(&g, PhasePair::Cross, &spec).is_err());
    }
}
