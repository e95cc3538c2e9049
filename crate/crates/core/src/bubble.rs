//! Standard double bubble: geometry solver, surface area, and the
//! Hutchings-type lower bound used by the bound pipeline.
//!
//! The standard double bubble is axisymmetric: three spherical caps meeting
//! pairwise at 120 degrees along a common circle. We parametrize the family
//! by the tilt angle `phi` of the separating film's tangent at the junction.
//! Fixing the junction circle at radius 1 in the plane z = 0, the three film
//! tangents at the junction are unit vectors at mutual 120 degrees:
//!
//! ```text
//!   separating film: angle 3*pi/2 - phi      (phi = 0: flat disk)
//!   cap of lobe 1:   angle 5*pi/6 - phi      (lobe 1 on z < 0, the larger)
//!   cap of lobe 2:   angle  pi/6 - phi       (lobe 2 on z > 0)
//! ```
//!
//! A tangent at angle `a` belongs to a circle centered on the axis at
//! `c = tan(a)` with radius `r = 1/|cos(a)|`, so both the 120-degree meeting
//! condition and the curvature balance `1/r0 = 1/r2 - 1/r1` hold exactly for
//! every `phi`; the only equation left to solve is the volume ratio, which is
//! strictly monotone in `phi`. Solving for the ratio and rescaling gives the
//! bubble for any mass pair.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// `(36 pi)^{1/3}`, the area of a unit-volume sphere.
pub fn sphere_area_coeff() -> f64 {
    (36.0 * PI).cbrt()
}

/// Surface area of a ball of mass `m`: `(36 pi)^{1/3} m^{2/3}`.
pub fn sphere_area(m: f64) -> Result<f64> {
    if !(m >= 0.0) || !m.is_finite() {
        return Err(Error::NegativeMass {
            field: "m",
            value: m,
        });
    }
    Ok(sphere_area_coeff() * m.powf(2.0 / 3.0))
}

/// Lower bound on the double-bubble perimeter:
/// `((36 pi)^{1/3} / 2) * (m1^{2/3} + m2^{2/3} + (m1+m2)^{2/3})`.
pub fn hutchings_lower_bound(m1: f64, m2: f64) -> Result<f64> {
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
    let p = 2.0 / 3.0;
    Ok(0.5 * sphere_area_coeff() * (m1.powf(p) + m2.powf(p) + (m1 + m2).powf(p)))
}

/// Residual tolerance for the geometry solve.
pub const SOLVE_TOL: f64 = 1e-10;
const MAX_ITERS: usize = 200;
/// Below this mass ratio the cap solve is ill-conditioned; we fall back to
/// a single sphere.
const DEGENERATE_RATIO: f64 = 1e-12;

/// Solved double-bubble geometry.
///
/// `r1`, `theta1` describe the outer cap enclosing phase 1 and `r2`, `theta2`
/// the one enclosing phase 2; `r0`, `theta0` describe the separating cap.
/// `r0` is the signed curvature radius of the separating cap, positive when
/// bulging into the larger lobe and infinite for equal volumes. Angles are
/// polar opening half-angles, so each cap has area `2 pi r^2 (1 - cos theta)`.
///
/// The `z*` centers and `rho_j` (junction circle radius) fix the solved frame:
/// the larger lobe occupies `z < 0`. `swapped` records that the input had
/// `m1 < m2`, in which case phase 1 is the lobe on `z > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoubleBubbleGeometry {
    pub m1: f64,
    pub m2: f64,
    pub r1: f64,
    pub r2: f64,
    pub r0: f64,
    pub theta1: f64,
    pub theta2: f64,
    pub theta0: f64,
    /// Axis position of the center of the cap enclosing the larger lobe.
    pub z_big: f64,
    /// Axis position of the center of the cap enclosing the smaller lobe.
    pub z_small: f64,
    /// Axis position of the separating cap's center (meaningless when flat).
    pub z_sep: f64,
    /// Junction circle radius.
    pub rho_j: f64,
    /// True when the input masses were given as (small, large).
    pub swapped: bool,
    /// True when the solve short-circuited to a single sphere.
    pub degenerate: bool,
}

impl DoubleBubbleGeometry {
    /// Area of the outer cap enclosing phase 1.
    pub fn area1(&self) -> f64 {
        2.0 * PI * self.r1 * self.r1 * (1.0 - self.theta1.cos())
    }

    /// Area of the outer cap enclosing phase 2.
    pub fn area2(&self) -> f64 {
        if self.degenerate && self.m2 == 0.0 {
            return 0.0;
        }
        2.0 * PI * self.r2 * self.r2 * (1.0 - self.theta2.cos())
    }

    /// Area of the separating cap (flat disk area when `r0` is infinite).
    pub fn area_sep(&self) -> f64 {
        if self.degenerate {
            0.0
        } else if self.r0.is_infinite() {
            PI * self.rho_j * self.rho_j
        } else {
            2.0 * PI * self.r0 * self.r0 * (1.0 - self.theta0.cos())
        }
    }

    /// Total film area: the three caps, each counted once.
    pub fn total_area(&self) -> f64 {
        self.area1() + self.area2() + self.area_sep()
    }
}

/// Volume of a spherical cap of height `h` on a sphere of radius `r`.
fn cap_volume(r: f64, h: f64) -> f64 {
    PI * h * h * (3.0 * r - h) / 3.0
}

/// Geometry of the normalized family at tilt `phi`, junction radius 1.
/// Returns (c1, r1, c2, r2, v1, v2, dome) where the dome is the volume the
/// separating cap carves from lobe 1.
fn frame_at(phi: f64) -> (f64, f64, f64, f64, f64, f64, f64) {
    let a1 = 5.0 * PI / 6.0 - phi;
    let a2 = PI / 6.0 - phi;
    let c1 = a1.tan();
    let r1 = 1.0 / a1.cos().abs();
    let c2 = a2.tan();
    let r2 = 1.0 / a2.cos().abs();
    let h1 = r1 - c1;
    let h2 = r2 + c2;
    let dome = if phi == 0.0 {
        0.0
    } else {
        let r0 = 1.0 / phi.sin();
        let h0 = (phi / 2.0).tan();
        cap_volume(r0, h0)
    };
    let v1 = cap_volume(r1, h1) - dome;
    let v2 = cap_volume(r2, h2) + dome;
    (c1, r1, c2, r2, v1, v2, dome)
}

/// Solves the standard double bubble enclosing volumes `m1` and `m2`.
///
/// Deterministic; fails with `ConvergenceFailure` if the residual of the
/// volume reproduction exceeds `SOLVE_TOL` after the bisection.
pub fn solve_double_bubble(m1: f64, m2: f64) -> Result<DoubleBubbleGeometry> {
    if !(m1 > 0.0) || !m1.is_finite() {
        return Err(Error::NonPositiveMass {
            field: "m1",
            value: m1,
        });
    }
    if !(m2 > 0.0) || !m2.is_finite() {
        return Err(Error::NonPositiveMass {
            field: "m2",
            value: m2,
        });
    }
    let swapped = m1 < m2;
    let (mb, ms) = if swapped { (m2, m1) } else { (m1, m2) };

    if ms < DEGENERATE_RATIO * mb {
        // Vanishing second lobe: report a single sphere carrying the total.
        let r = crate::model::ball_radius(mb + ms);
        let rs = crate::model::ball_radius(ms);
        let (r1, r2, t1, t2) = if swapped { (rs, r, 0.0, PI) } else { (r, rs, PI, 0.0) };
        return Ok(DoubleBubbleGeometry {
            m1,
            m2,
            r1,
            r2,
            r0: f64::INFINITY,
            theta1: t1,
            theta2: t2,
            theta0: 0.0,
            z_big: 0.0,
            z_small: 0.0,
            z_sep: 0.0,
            rho_j: 0.0,
            swapped,
            degenerate: true,
        });
    }

    let target = ms / mb;
    let phi = if target == 1.0 {
        0.0
    } else {
        // ratio(phi) = v2/v1 falls monotonically from 1 at phi = 0 toward 0
        // as phi -> pi/3 (lobe 1 flattens out to a half-space).
        let ratio = |phi: f64| {
            let (_, _, _, _, v1, v2, _) = frame_at(phi);
            v2 / v1
        };
        let mut lo = 0.0_f64;
        let mut hi = PI / 3.0 - 1e-7;
        debug_assert!(ratio(hi) < target);
        for _ in 0..MAX_ITERS {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if ratio(mid) >= target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };

    let (c1, r1, c2, r2, v1, v2, _) = frame_at(phi);
    let scale = ((mb + ms) / (v1 + v2)).cbrt();
    let s3 = scale * scale * scale;

    // Residual: both enclosed volumes relative to their targets.
    let res1 = (v1 * s3 - mb).abs() / mb;
    let res2 = (v2 * s3 - ms).abs() / ms;
    let residual = res1.max(res2);
    if residual > SOLVE_TOL {
        return Err(Error::ConvergenceFailure {
            context: "double bubble solve",
            residual,
            tolerance: SOLVE_TOL,
            iterations: MAX_ITERS,
        });
    }

    let theta_big = (c1 / r1).acos();
    let theta_small = (-c2 / r2).acos();
    let (r0, theta0, z_sep) = if phi == 0.0 {
        (f64::INFINITY, 0.0, 0.0)
    } else {
        (scale / phi.sin(), phi, scale * (1.0 / phi.tan()))
    };

    let (rr1, rr2, t1, t2) = if swapped {
        (r2 * scale, r1 * scale, theta_small, theta_big)
    } else {
        (r1 * scale, r2 * scale, theta_big, theta_small)
    };
    Ok(DoubleBubbleGeometry {
        m1,
        m2,
        r1: rr1,
        r2: rr2,
        r0,
        theta1: t1,
        theta2: t2,
        theta0,
        z_big: c1 * scale,
        z_small: c2 * scale,
        z_sep,
        rho_j: scale,
        swapped,
        degenerate: false,
    })
}

/// Perimeter of the standard double bubble with the given masses; reduces to
/// the sphere area when one mass is zero. Symmetric in its arguments.
pub fn double_bubble_area(m1: f64, m2: f64) -> Result<f64> {
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
    if m1 == 0.0 || m2 == 0.0 {
        return sphere_area(m1 + m2);
    }
    // Evaluate in the normalized orientation so that S(a, b) == S(b, a)
    // bit-for-bit.
    let (mb, ms) = if m1 < m2 { (m2, m1) } else { (m1, m2) };
    if ms < DEGENERATE_RATIO * mb {
        return Ok(sphere_area(mb)? + sphere_area(ms)?);
    }
    let g = solve_double_bubble(mb, ms)?;
    Ok(g.total_area())
}

/// True iff removing `x` of the second volume does not raise the perimeter:
/// `S(m1, m2 - x) <= S(m1, m2) + 1e-9`.
pub fn check_monotonicity(m1: f64, m2: f64, x: f64) -> bool {
    assert!((0.0..=m2).contains(&x), "need 0 <= x <= m2");
    let before = double_bubble_area(m1, m2).expect("valid masses");
    let after = if m2 - x <= 0.0 {
        sphere_area(m1).expect("valid mass")
    } else {
        double_bubble_area(m1, m2 - x).expect("valid masses")
    };
    after <= before + 1e-9
}
