//! Computable constants bounding optimal configurations: the pure-ball
//! merging threshold, the largest-cluster mass floor, the H rates, the
//! mixed-cluster mass floor, and their assembly into the cluster-count
//! bound K.
//!
//! K is a function of (M1, M2, gamma11, gamma22) only; gamma12 never enters
//! any formula here.

use serde::{Deserialize, Serialize};

use crate::bubble::sphere_area_coeff;
use crate::coulomb::ball_self_coeff;
use crate::energy::two_ball_upper_bound_parts;
use crate::error::{Error, Result};
use crate::model::ProblemParams;

/// Relative tolerance of the merge-threshold bisection.
const MERGE_TOL: f64 = 1e-6;
/// Inner worst-pair search grid (per dimension).
const GRID_N: usize = 64;

/// `c_i = (36 pi)^{1/3} / 2`, the per-phase coefficient of the perimeter
/// lower bound.
pub fn hutchings_coeff() -> f64 {
    0.5 * sphere_area_coeff()
}

/// All constants of the bound chain plus the assembled cluster-count bound.
///
/// Counts are floored integers carried as f64: exact below 2^53, and still
/// finite at extreme parameter corners where the mixed-cluster count bound
/// reaches ~1e45 and no integer type would hold it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    /// Merging thresholds (m_{1,S}, m_{2,S}), capped at M1 + M2.
    pub m_s: (f64, f64),
    /// Lower bounds on the largest cluster's phase masses (m_1^+, m_2^+).
    pub m_plus_lb: (f64, f64),
    /// Rates (H_1, H_2) in energy per mass.
    pub h: (f64, f64),
    /// A-priori floor on the total mass of any mixed cluster.
    pub eps_min: f64,
    pub k_pure: f64,
    pub k_mixed: f64,
    pub k: f64,
}

impl BoundsReport {
    pub fn validate(&self) -> Result<()> {
        let entries = [
            self.m_s.0,
            self.m_s.1,
            self.m_plus_lb.0,
            self.m_plus_lb.1,
            self.h.0,
            self.h.1,
            self.eps_min,
        ];
        for v in entries {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::ConvergenceFailure {
                    context: "bounds report",
                    residual: v,
                    tolerance: 0.0,
                    iterations: 0,
                });
            }
        }
        if !self.k.is_finite() || self.k != self.k_pure + self.k_mixed || self.k < 1.0 {
            return Err(Error::ConvergenceFailure {
                context: "bounds report count",
                residual: self.k,
                tolerance: 0.0,
                iterations: 0,
            });
        }
        Ok(())
    }
}

/// Margin of the merging inequality for two pure balls of masses `m1`, `m2`:
/// positive iff combining them into one ball strictly lowers the energy.
fn merge_margin(m1: f64, m2: f64, gamma: f64) -> f64 {
    let a = sphere_area_coeff();
    let kappa = ball_self_coeff();
    let p = 2.0 / 3.0;
    let q = 5.0 / 3.0;
    let perimeter_gain = a * (m1.powf(p) + m2.powf(p) - (m1 + m2).powf(p));
    let coulomb_cost = gamma * kappa * ((m1 + m2).powf(q) - m1.powf(q) - m2.powf(q));
    perimeter_gain - coulomb_cost
}

/// Worst (smallest) merging margin over pairs with both masses in (0, t].
/// Log grid scan refined by a deterministic pattern search.
fn worst_pair_margin(t: f64, gamma: f64) -> f64 {
    let lo = t * 1e-3;
    let ratio = (t / lo).powf(1.0 / (GRID_N as f64 - 1.0));
    let mut best = f64::INFINITY;
    let mut best_pair = (t, t);
    let mut m1 = lo;
    for _ in 0..GRID_N {
        let mut m2 = m1; // symmetry: scan the lower triangle only
        while m2 <= t * (1.0 + 1e-12) {
            let f = merge_margin(m1, m2.min(t), gamma);
            if f < best {
                best = f;
                best_pair = (m1, m2.min(t));
            }
            m2 *= ratio;
        }
        m1 = (m1 * ratio).min(t);
    }
    // Pattern-search refinement around the best node.
    let (mut x, mut y) = best_pair;
    let mut step = t * (ratio - 1.0);
    let floor = t * 1e-9;
    for _ in 0..200 {
        let mut improved = false;
        for (dx, dy) in [(step, 0.0), (-step, 0.0), (0.0, step), (0.0, -step)] {
            let nx = (x + dx).clamp(floor, t);
            let ny = (y + dy).clamp(floor, t);
            let f = merge_margin(nx, ny, gamma);
            if f < best {
                best = f;
                x = nx;
                y = ny;
                improved = true;
            }
        }
        if !improved {
            step *= 0.5;
            if step < t * 1e-9 {
                break;
            }
        }
    }
    best
}

/// Equal-mass closed form of the merging threshold, an upper anchor for the
/// general threshold: `(2 - 2^{2/3}) a / ((2^{5/3} - 2) gamma kappa)`.
pub fn merge_threshold_equal_mass(gamma: f64) -> f64 {
    let a = sphere_area_coeff();
    let kappa = ball_self_coeff();
    let p23 = 2.0_f64.powf(2.0 / 3.0);
    let p53 = 2.0_f64.powf(5.0 / 3.0);
    (2.0 - p23) * a / ((p53 - 2.0) * gamma * kappa)
}

/// Largest `t` such that merging is strictly favorable for every pair of
/// pure balls with masses at most `t`. Infinite when `gamma_ii = 0`
/// (the perimeter is strictly subadditive); scales as `1/gamma`.
pub fn merge_threshold(gamma_ii: f64) -> f64 {
    assert!(gamma_ii >= 0.0, "gamma must be nonnegative");
    if gamma_ii == 0.0 {
        return f64::INFINITY;
    }
    let anchor = merge_threshold_equal_mass(gamma_ii);
    let ok = |t: f64| worst_pair_margin(t, gamma_ii) > 0.0;
    let mut lo = 0.5 * anchor;
    let mut hi = 1.5 * anchor;
    // The anchor is an upper bound for the threshold, but bracket defensively.
    for _ in 0..60 {
        if ok(lo) {
            break;
        }
        hi = lo;
        lo *= 0.5;
    }
    for _ in 0..60 {
        if !ok(hi) {
            break;
        }
        lo = hi;
        hi *= 2.0;
    }
    while (hi - lo) > MERGE_TOL * hi {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Lower bounds on the largest phase-i cluster mass:
/// `min(M_i / 2, (c_i M_i / (2 U))^3)` with U the two-ball upper bound.
pub fn largest_cluster_lower_bound(p: &ProblemParams) -> Result<(f64, f64)> {
    p.validate()?;
    let u = two_ball_upper_bound_parts(p.m1_total, p.m2_total, p.gamma11, p.gamma22);
    let c = hutchings_coeff();
    let bound = |m: f64| (m / 2.0).min((c * m / (2.0 * u)).powi(3));
    Ok((bound(p.m1_total), bound(p.m2_total)))
}

/// The rates `H_i = 3 U / m_i^+` controlling the energy cost of dilating the
/// largest clusters.
pub fn h_constants(p: &ProblemParams, m_plus: (f64, f64)) -> Result<(f64, f64)> {
    p.validate()?;
    if !(m_plus.0 > 0.0) {
        return Err(Error::NonPositiveMass {
            field: "m_plus.0",
            value: m_plus.0,
        });
    }
    if !(m_plus.1 > 0.0) {
        return Err(Error::NonPositiveMass {
            field: "m_plus.1",
            value: m_plus.1,
        });
    }
    let u = two_ball_upper_bound_parts(p.m1_total, p.m2_total, p.gamma11, p.gamma22);
    Ok((3.0 * u / m_plus.0, 3.0 * u / m_plus.1))
}

/// Upper bound on the energy change of the competitor move that strips a
/// phase mass `eps` from a small mixed cluster: `eps H - c eps^{2/3}`.
/// Negative values certify a strictly improving competitor.
pub fn competitor_delta_bound(eps: f64, h: f64) -> f64 {
    eps * h - hutchings_coeff() * eps.powf(2.0 / 3.0)
}

/// A-priori floor on the total mass of any mixed cluster in an optimal
/// configuration: `min((c_1/H_1)^3, (c_2/H_2)^3)` with the H rates taken at
/// the worst-case (lower-bound) largest-cluster masses.
pub fn mixed_mass_floor(p: &ProblemParams) -> Result<f64> {
    let m_plus = largest_cluster_lower_bound(p)?;
    let (h1, h2) = h_constants(p, m_plus)?;
    let c = hutchings_coeff();
    Ok(((c / h1).powi(3)).min((c / h2).powi(3)))
}

fn floor_count(x: f64) -> f64 {
    if x < 0.0 {
        0.0
    } else {
        x.floor()
    }
}

/// Assembles the cluster-count bound K for the given problem.
///
/// Pure clusters: at most one per phase below the merging threshold, and at
/// most `floor(M_i / m_{i,S})` at or above it. Mixed clusters: every one is
/// at least `eps_min` heavy except the up-to-two largest ones exempted by the
/// competitor argument, giving `2 + floor((M1+M2)/eps_min)`.
pub fn cluster_count_bound(p: &ProblemParams) -> Result<BoundsReport> {
    cluster_count_bound_with_ball_threshold(p, None)
}

/// Same as [`cluster_count_bound`], with an optional externally supplied
/// ball-minimality threshold per phase that caps the merging threshold.
pub fn cluster_count_bound_with_ball_threshold(
    p: &ProblemParams,
    ball_threshold: Option<(f64, f64)>,
) -> Result<BoundsReport> {
    p.validate()?;
    let total = p.m1_total + p.m2_total;
    let cap = |raw: f64, ext: f64| raw.min(ext).min(total);
    let (b1, b2) = ball_threshold.unwrap_or((f64::INFINITY, f64::INFINITY));
    let m_s = (
        cap(merge_threshold(p.gamma11), b1),
        cap(merge_threshold(p.gamma22), b2),
    );
    let m_plus_lb = largest_cluster_lower_bound(p)?;
    let h = h_constants(p, m_plus_lb)?;
    let eps_min = {
        let c = hutchings_coeff();
        ((c / h.0).powi(3)).min((c / h.1).powi(3))
    };
    let k_pure = (1.0 + floor_count(p.m1_total / m_s.0)) + (1.0 + floor_count(p.m2_total / m_s.1));
    let k_mixed = 2.0 + floor_count(total / eps_min);
    let report = BoundsReport {
        m_s,
        m_plus_lb,
        h,
        eps_min,
        k_pure,
        k_mixed,
        k: k_pure + k_mixed,
    };
    report.validate()?;
    Ok(report)
}
