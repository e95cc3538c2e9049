//! Mass-partition search: the per-cluster energy minimized over the ansatz
//! family, and a simulated-annealing search over partitions of the total
//! masses into clusters.

use std::collections::HashMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bounds::cluster_count_bound;
use crate::bubble::hutchings_lower_bound;
use crate::competitors::{dispatch_move, verify_chain};
use crate::coulomb::{ball_self_coeff, splitmix64, QuadratureSpec};
use crate::energy::{cluster_energy, configuration_energy, two_ball_upper_bound};
use crate::error::{Error, Result};
use crate::model::{
    ball_radius, ClusterAnsatz, ClusterMasses, Configuration, Phase, ProblemParams, Shape,
};

/// Factor applied to the ball-radius sum for the separated-balls distance
/// search interval.
const SEPARATION_CAP_FACTOR: f64 = 20.0;
/// Practical ceiling on the number of clusters explored by the annealer
/// (the theoretical bound K is usually astronomically larger).
const PRACTICAL_MAX_CLUSTERS: usize = 64;
/// Sample budget used while scoring proposals; the final result is rescored
/// at the caller's full budget.
const SEARCH_SAMPLES: u64 = 50_000;
/// Proposals per temperature step of the geometric cooling schedule.
const PROPOSALS_PER_TEMPERATURE: u64 = 100;
const COOLING_FACTOR: f64 = 0.95;

/// Per-cluster energy minimized over the admissible ansatz shapes.
///
/// Pure masses admit only the single ball. Mixed masses compare the standard
/// double bubble against two separated balls whose center distance is
/// optimized by golden-section search on `[tangency, 20 (R1 + R2)]`.
/// Returns the winning energy and shape.
pub fn e0_approx(
    m1: f64,
    m2: f64,
    p: &ProblemParams,
    spec: &QuadratureSpec,
) -> Result<(f64, Shape)> {
    if m1 + m2 <= 0.0 {
        return Err(Error::NonPositiveMass {
            field: "m1+m2",
            value: m1 + m2,
        });
    }
    if m2 == 0.0 {
        let ball = ClusterAnsatz::single_ball(Phase::One, m1)?;
        return Ok((cluster_energy(&ball, p, spec)?.total, ball.shape));
    }
    if m1 == 0.0 {
        let ball = ClusterAnsatz::single_ball(Phase::Two, m2)?;
        return Ok((cluster_energy(&ball, p, spec)?.total, ball.shape));
    }

    let bubble = ClusterAnsatz::double_bubble(m1, m2)?;
    let bubble_energy = cluster_energy(&bubble, p, spec)?.total;

    let tangency = ball_radius(m1) + ball_radius(m2);
    let sep_energy = |d: f64| -> Result<f64> {
        let sep = ClusterAnsatz::separated_balls(m1, m2, d)?;
        Ok(cluster_energy(&sep, p, spec)?.total)
    };
    let d_best = golden_section_min(
        |d| sep_energy(d).expect("distance within the bracket is valid"),
        tangency,
        SEPARATION_CAP_FACTOR * tangency,
    );
    let sep_best = sep_energy(d_best)?;

    if sep_best < bubble_energy {
        Ok((
            sep_best,
            Shape::SeparatedBalls {
                center_distance: d_best,
            },
        ))
    } else {
        Ok((bubble_energy, Shape::StandardDoubleBubble))
    }
}

/// Reruns `f` with a 4x larger sample budget whenever the Monte-Carlo error
/// gate trips; extreme-ratio bubbles explored by the annealer need more
/// samples than moderate ones to reach the 1% standard-error contract.
fn with_escalation<T>(
    spec: &QuadratureSpec,
    max_attempts: u32,
    f: impl Fn(&QuadratureSpec) -> Result<T>,
) -> Result<T> {
    let mut s = *spec;
    for attempt in 0..max_attempts {
        match f(&s) {
            Err(Error::ConvergenceFailure { .. }) if attempt + 1 < max_attempts => {
                s.samples = s.samples.saturating_mul(4);
            }
            other => return other,
        }
    }
    unreachable!("loop always returns on the last attempt")
}

/// Golden-section minimizer on `[lo, hi]`; deterministic, ~1e-10 relative
/// bracket at exit.
fn golden_section_min(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    let phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..80 {
        if (b - a).abs() <= 1e-10 * hi.abs() {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        c
    } else {
        d
    }
}

/// Two-separate-balls upper envelope for `e0`, including the residual cross
/// term left by capping the separation distance of the ansatz at
/// `20 (R1 + R2)` (the true envelope is the infimum at infinite distance).
pub fn envelope_upper(p: &ProblemParams, m1: f64, m2: f64) -> f64 {
    let kappa = ball_self_coeff();
    let a = crate::bubble::sphere_area_coeff();
    let q = 5.0 / 3.0;
    let pw = 2.0 / 3.0;
    let mut e = a * (m1.powf(pw) + m2.powf(pw))
        + p.gamma11 * kappa * m1.powf(q)
        + p.gamma22 * kappa * m2.powf(q);
    if m1 > 0.0 && m2 > 0.0 {
        let cap = SEPARATION_CAP_FACTOR * (ball_radius(m1) + ball_radius(m2));
        e += 2.0 * p.gamma12 * m1 * m2 / cap;
    }
    e
}

/// Tabulated `e0` over a mass grid with the winning shape per node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct E0Surface {
    pub m1_grid: Vec<f64>,
    pub m2_grid: Vec<f64>,
    /// Row-major: `values[i * m2_grid.len() + j]` for `(m1_grid[i], m2_grid[j])`.
    pub values: Vec<f64>,
    pub winners: Vec<Shape>,
}

impl E0Surface {
    pub fn value_at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.m2_grid.len() + j]
    }

    /// Bilinear interpolation inside the grid hull; clamps outside nodes to
    /// the boundary cell. The interpolation error is O(h^2) in the node
    /// spacing away from the shape-switch curves and O(h) across them;
    /// estimate it by grid refinement.
    pub fn interpolate(&self, m1: f64, m2: f64) -> f64 {
        let bracket = |grid: &[f64], x: f64| -> (usize, f64) {
            if grid.len() == 1 {
                return (0, 0.0);
            }
            let mut i = match grid.binary_search_by(|g| g.total_cmp(&x)) {
                Ok(i) => i,
                Err(i) => i.saturating_sub(1),
            };
            i = i.min(grid.len() - 2);
            let t = ((x - grid[i]) / (grid[i + 1] - grid[i])).clamp(0.0, 1.0);
            (i, t)
        };
        let (i, s) = bracket(&self.m1_grid, m1);
        let (j, t) = bracket(&self.m2_grid, m2);
        if self.m1_grid.len() == 1 && self.m2_grid.len() == 1 {
            return self.value_at(0, 0);
        }
        if self.m1_grid.len() == 1 {
            return self.value_at(0, j) * (1.0 - t) + self.value_at(0, j + 1) * t;
        }
        if self.m2_grid.len() == 1 {
            return self.value_at(i, 0) * (1.0 - s) + self.value_at(i + 1, 0) * s;
        }
        let v00 = self.value_at(i, j);
        let v01 = self.value_at(i, j + 1);
        let v10 = self.value_at(i + 1, j);
        let v11 = self.value_at(i + 1, j + 1);
        v00 * (1.0 - s) * (1.0 - t) + v10 * s * (1.0 - t) + v01 * (1.0 - s) * t + v11 * s * t
    }
}

/// Tabulates `e0_approx` on the cartesian grid `m1_grid x m2_grid` and checks
/// the envelope sandwich at every node.
pub fn build_e0_surface(
    p: &ProblemParams,
    m1_grid: &[f64],
    m2_grid: &[f64],
    spec: &QuadratureSpec,
) -> Result<E0Surface> {
    if m1_grid.is_empty() || m2_grid.is_empty() {
        return Err(Error::InvalidQuadrature {
            reason: "e0 surface grid must be nonempty".into(),
        });
    }
    let mut values = Vec::with_capacity(m1_grid.len() * m2_grid.len());
    let mut winners = Vec::with_capacity(values.capacity());
    for (i, &m1) in m1_grid.iter().enumerate() {
        for (j, &m2) in m2_grid.iter().enumerate() {
            let node_spec = spec.with_seed(splitmix64(spec.seed ^ ((i as u64) << 32 | j as u64)));
            let (e, shape) = e0_approx(m1, m2, p, &node_spec)?;
            let lower = hutchings_lower_bound(m1, m2)?;
            let upper = envelope_upper(p, m1, m2);
            // 3-sigma headroom for the Monte-Carlo terms of bubble winners.
            let slack = 0.03 * e.abs() + 1e-9;
            if e < lower - slack || e > upper + slack {
                return Err(Error::ConvergenceFailure {
                    context: "e0 surface envelope",
                    residual: e,
                    tolerance: upper,
                    iterations: 0,
                });
            }
            values.push(e);
            winners.push(shape);
        }
    }
    Ok(E0Surface {
        m1_grid: m1_grid.to_vec(),
        m2_grid: m2_grid.to_vec(),
        values,
        winners,
    })
}

/// Outcome of a partition search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionResult {
    pub configuration: Configuration,
    pub energy: f64,
    pub energy_std_error: f64,
    pub iterations: u64,
    pub seed: u64,
}

/// One annealing state: cluster mass pairs plus their cached scores.
struct SearchState {
    masses: Vec<(f64, f64)>,
    scores: Vec<f64>,
    shapes: Vec<Shape>,
}

impl SearchState {
    fn energy(&self) -> f64 {
        self.scores.iter().sum()
    }
}

/// Score cache keyed by exact mass bits: identical masses always score
/// identically within a run, which keeps the annealer's comparisons and the
/// final result deterministic.
struct Scorer<'a> {
    p: &'a ProblemParams,
    spec: QuadratureSpec,
    cache: HashMap<(u64, u64), (f64, Shape)>,
}

impl<'a> Scorer<'a> {
    fn new(p: &'a ProblemParams, spec: &QuadratureSpec, seed: u64) -> Self {
        let samples = spec.samples.min(SEARCH_SAMPLES).max(10_000);
        Self {
            p,
            spec: QuadratureSpec {
                samples,
                seed,
                ..*spec
            },
            cache: HashMap::new(),
        }
    }

    fn score(&mut self, m1: f64, m2: f64) -> Result<(f64, Shape)> {
        let key = (m1.to_bits(), m2.to_bits());
        if let Some(hit) = self.cache.get(&key) {
            return Ok(*hit);
        }
        // Seed from the masses so equal clusters get equal noise.
        let seed = splitmix64(self.spec.seed ^ key.0 ^ key.1.rotate_left(17));
        let out = with_escalation(&self.spec.with_seed(seed), 4, |s| {
            e0_approx(m1, m2, self.p, s)
        })?;
        self.cache.insert(key, out);
        Ok(out)
    }

    fn score_state(&mut self, masses: &[(f64, f64)]) -> Result<SearchState> {
        let mut scores = Vec::with_capacity(masses.len());
        let mut shapes = Vec::with_capacity(masses.len());
        for &(m1, m2) in masses {
            let (e, s) = self.score(m1, m2)?;
            scores.push(e);
            shapes.push(s);
        }
        Ok(SearchState {
            masses: masses.to_vec(),
            scores,
            shapes,
        })
    }
}

fn propose(masses: &[(f64, f64)], rng: &mut ChaCha8Rng, max_clusters: usize) -> Option<Vec<(f64, f64)>> {
    let n = masses.len();
    let kind = rng.random_range(0..4u8);
    let mut next = masses.to_vec();
    match kind {
        // Split one cluster, either proportionally or peeling one phase off
        // into a new pure cluster.
        0 => {
            if n >= max_clusters {
                return None;
            }
            let i = rng.random_range(0..n);
            let (m1, m2) = next[i];
            if rng.random::<bool>() {
                let u = rng.random_range(0.25..0.75);
                let part = (u * m1, u * m2);
                if part.0 + part.1 <= 0.0 || (m1 - part.0) + (m2 - part.1) <= 0.0 {
                    return None;
                }
                next[i] = (m1 - part.0, m2 - part.1);
                next.push(part);
            } else {
                let phase_one = rng.random::<bool>();
                let u = rng.random_range(0.25..0.75);
                if phase_one {
                    if m1 <= 0.0 || m2 <= 0.0 {
                        return None;
                    }
                    let d = u * m1;
                    next[i] = (m1 - d, m2);
                    next.push((d, 0.0));
                } else {
                    if m1 <= 0.0 || m2 <= 0.0 {
                        return None;
                    }
                    let d = u * m2;
                    next[i] = (m1, m2 - d);
                    next.push((0.0, d));
                }
            }
            Some(next)
        }
        // Merge two clusters.
        1 => {
            if n < 2 {
                return None;
            }
            let i = rng.random_range(0..n);
            let mut j = rng.random_range(0..n - 1);
            if j >= i {
                j += 1;
            }
            let (lo, hi) = (i.min(j), i.max(j));
            let merged = (next[lo].0 + next[hi].0, next[lo].1 + next[hi].1);
            next[lo] = merged;
            next.remove(hi);
            Some(next)
        }
        // Transfer a small amount of one phase between clusters.
        2 => {
            if n < 2 {
                return None;
            }
            let i = rng.random_range(0..n);
            let mut j = rng.random_range(0..n - 1);
            if j >= i {
                j += 1;
            }
            let phase_one = rng.random::<bool>();
            let (m1, m2) = next[i];
            let avail = if phase_one { m1 } else { m2 };
            if avail <= 0.0 {
                return None;
            }
            let delta = rng.random_range(0.0..1.0_f64).max(1e-3) * 0.2 * avail;
            if phase_one {
                next[i] = (m1 - delta, m2);
                next[j] = (next[j].0 + delta, next[j].1);
            } else {
                next[i] = (m1, m2 - delta);
                next[j] = (next[j].0, next[j].1 + delta);
            }
            if next[i].0 + next[i].1 <= 0.0 {
                return None;
            }
            Some(next)
        }
        // Rebalance the pooled masses of two clusters.
        _ => {
            if n < 2 {
                return None;
            }
            let i = rng.random_range(0..n);
            let mut j = rng.random_range(0..n - 1);
            if j >= i {
                j += 1;
            }
            let pool = (next[i].0 + next[j].0, next[i].1 + next[j].1);
            let u = rng.random_range(0.0..1.0);
            let v = rng.random_range(0.0..1.0);
            let a = (u * pool.0, v * pool.1);
            let b = (pool.0 - a.0, pool.1 - a.1);
            if a.0 + a.1 <= 0.0 || b.0 + b.1 <= 0.0 {
                return None;
            }
            next[i] = a;
            next[j] = b;
            Some(next)
        }
    }
}

fn state_to_configuration(
    state: &SearchState,
    p: &ProblemParams,
) -> Result<Configuration> {
    let clusters = state
        .masses
        .iter()
        .zip(&state.shapes)
        .map(|(&(m1, m2), &shape)| ClusterAnsatz::new(ClusterMasses { m1, m2 }, shape))
        .collect::<Result<Vec<_>>>()?;
    Configuration::new(clusters, *p)
}

/// Simulated-annealing minimization of the partition energy
/// `sum_k e0(m_{1,k}, m_{2,k})`.
///
/// The search starts from the two-ball configuration (so its best score never
/// exceeds the two-ball upper bound), cools geometrically, and scores states
/// through a reduced-sample cache. The returned configuration is rescored at
/// the caller's full quadrature budget, and any mixed cluster flagged by the
/// competitor audit is stripped before returning. Deterministic for fixed
/// `(p, budget, seed, spec)`.
pub fn minimize_e0(
    p: &ProblemParams,
    budget: u64,
    seed: u64,
    spec: &QuadratureSpec,
) -> Result<PartitionResult> {
    p.validate()?;
    assert!(budget >= 1, "budget must be at least 1");
    let k_bound = cluster_count_bound(p)?.k;
    let max_clusters = k_bound.min(PRACTICAL_MAX_CLUSTERS as f64) as usize;

    let mut scorer = Scorer::new(p, spec, splitmix64(seed));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let two_balls = vec![(p.m1_total, 0.0), (0.0, p.m2_total)];
    let mut current = scorer.score_state(&two_balls)?;
    let mut best = scorer.score_state(&two_balls)?;
    let mut best_energy = best.energy();

    let mut temperature = two_ball_upper_bound(p) / 10.0;
    for step in 0..budget {
        if step > 0 && step % PROPOSALS_PER_TEMPERATURE == 0 {
            temperature *= COOLING_FACTOR;
        }
        let Some(proposal) = propose(&current.masses, &mut rng, max_clusters) else {
            continue;
        };
        let candidate = scorer.score_state(&proposal)?;
        let delta = candidate.energy() - current.energy();
        let accept = delta <= 0.0 || rng.random::<f64>() < (-delta / temperature).exp();
        if accept {
            current = candidate;
            let e = current.energy();
            if e < best_energy {
                best_energy = e;
                best = SearchState {
                    masses: current.masses.clone(),
                    scores: current.scores.clone(),
                    shapes: current.shapes.clone(),
                };
            }
        }
    }

    // Competitor self-check: strip any mixed cluster whose audit certifies a
    // strictly improving move.
    let mut config = state_to_configuration(&best, p)?;
    for _ in 0..PRACTICAL_MAX_CLUSTERS {
        let mut improved = false;
        for k in 0..config.clusters.len() {
            if !config.clusters[k].masses.is_mixed() {
                continue;
            }
            let Ok(mv) = dispatch_move(&config, k) else {
                continue;
            };
            let report =
                with_escalation(&scorer.spec, 4, |s| verify_chain(&config, &mv, s))?;
            if report.improving {
                config = mv.result.clone();
                improved = true;
                break;
            }
        }
        if !improved {
            break;
        }
    }

    let final_energy = with_escalation(spec, 3, |s| configuration_energy(&config, s))?;
    let count = config.clusters.len() as f64;
    assert!(count <= k_bound, "cluster count {count} exceeds the bound {k_bound}");
    Ok(PartitionResult {
        configuration: config,
        energy: final_energy.total,
        energy_std_error: final_energy.std_error,
        iterations: budget,
        seed,
    })
}
