//! Coulomb estimator properties: analytic/Monte-Carlo agreement, mass
//! scaling, seed reproducibility, and voxel consistency.
//!
//! The Monte-Carlo oracles here sample on their own, independently of the
//! estimator under test.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tridrop::{
    ball_pair_interaction, ball_radius, ball_self_energy, bubble_coulomb, solve_double_bubble,
    PhasePair, QuadratureMethod, QuadratureSpec,
};

fn sample_ball(rng: &mut ChaCha8Rng, center: f64, r: f64) -> [f64; 3] {
    loop {
        let p = [
            rng.random_range(-r..r),
            rng.random_range(-r..r),
            rng.random_range(-r..r),
        ];
        if p[0] * p[0] + p[1] * p[1] + p[2] * p[2] < r * r {
            return [p[0], p[1], p[2] + center];
        }
    }
}

/// Oracle MC mean and standard error of `m_a m_b / |x-y|` for uniform points
/// in two balls on the z axis.
fn mc_ball_pair_oracle(
    m_a: f64,
    m_b: f64,
    z_a: f64,
    z_b: f64,
    pairs: u64,
    seed: u64,
) -> (f64, f64) {
    let (ra, rb) = (ball_radius(m_a), ball_radius(m_b));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sum = 0.0;
    let mut sumsq = 0.0;
    for _ in 0..pairs {
        let x = sample_ball(&mut rng, z_a, ra);
        let y = sample_ball(&mut rng, z_b, rb);
        let d = ((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2) + (x[2] - y[2]).powi(2)).sqrt();
        let k = m_a * m_b / d;
        sum += k;
        sumsq += k * k;
    }
    let mean = sum / pairs as f64;
    let var = (sumsq / pairs as f64 - mean * mean) / pairs as f64;
    (mean, var.sqrt())
}

#[test]
fn closed_forms_match_mc_on_random_inputs() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for i in 0..20 {
        let m = rng.random_range(0.05..5.0);
        let (mc, sigma) = mc_ball_pair_oracle(m, m, 0.0, 0.0, 200_000, 1000 + i);
        let exact = ball_self_energy(m).unwrap().value;
        assert!(
            (mc - exact).abs() <= 3.0 * sigma,
            "self energy m={m}: mc {mc} vs exact {exact} (3s = {})",
            3.0 * sigma
        );
    }
    for i in 0..20 {
        let m1 = rng.random_range(0.05..5.0);
        let m2 = rng.random_range(0.05..5.0);
        let d = (ball_radius(m1) + ball_radius(m2)) * rng.random_range(1.05..8.0);
        let (mc, sigma) = mc_ball_pair_oracle(m1, m2, 0.0, d, 200_000, 2000 + i);
        let exact = ball_pair_interaction(m1, m2, d).unwrap().value;
        assert!(
            (mc - exact).abs() <= 3.0 * sigma,
            "pair ({m1}, {m2}, {d}): mc {mc} vs exact {exact}"
        );
    }
}

#[test]
fn bubble_estimates_scale_as_mass_to_five_thirds() {
    let spec = QuadratureSpec {
        samples: 400_000,
        ..QuadratureSpec::default()
    };
    let base_g = solve_double_bubble(1.0, 0.6).unwrap();
    for phases in [PhasePair::SelfPhase1, PhasePair::SelfPhase2, PhasePair::Cross] {
        let base = bubble_coulomb(&base_g, phases, &spec).unwrap();
        for lambda in [0.5, 2.0] {
            let g = solve_double_bubble(lambda, 0.6 * lambda).unwrap();
            let scaled = bubble_coulomb(&g, phases, &spec.with_seed(spec.seed + 1)).unwrap();
            let expected = lambda.powf(5.0 / 3.0) * base.value;
            let sigma = (scaled.std_error.powi(2)
                + (lambda.powf(5.0 / 3.0) * base.std_error).powi(2))
            .sqrt();
            assert!(
                (scaled.value - expected).abs() <= 3.0 * sigma,
                "{phases:?} lambda {lambda}: {} vs {expected} (3s = {})",
                scaled.value,
                3.0 * sigma
            );
        }
    }
}

#[test]
fn degenerate_bubble_self_term_matches_ball() {
    let g = solve_double_bubble(1.0, 1e-4).unwrap();
    let spec = QuadratureSpec {
        samples: 400_000,
        ..QuadratureSpec::default()
    };
    let est = bubble_coulomb(&g, PhasePair::SelfPhase1, &spec).unwrap();
    let exact = ball_self_energy(1.0).unwrap().value;
    assert!(
        (est.value - exact).abs() <= 3.0 * est.std_error + 1e-3,
        "lobe self {} vs ball {exact}",
        est.value
    );
}

#[test]
fn cross_term_is_positive_and_seed_stable() {
    let g = solve_double_bubble(1.0, 1.0).unwrap();
    let mut values = Vec::new();
    for seed in [1u64, 2, 3] {
        let spec = QuadratureSpec {
            samples: 200_000,
            seed,
            ..QuadratureSpec::default()
        };
        let v = bubble_coulomb(&g, PhasePair::Cross, &spec).unwrap();
        assert!(v.value > 0.0);
        values.push(v);
    }
    for i in 0..values.len() {
        for j in (i + 1)..values.len() {
            let sigma = (values[i].std_error.powi(2) + values[j].std_error.powi(2)).sqrt();
            assert!(
                (values[i].value - values[j].value).abs() <= 3.0 * sigma,
                "seeds disagree: {} vs {}",
                values[i].value,
                values[j].value
            );
        }
    }
}

#[test]
fn voxel_agrees_with_itself_under_refinement() {
    // Ball case (degenerate geometry) and a genuine bubble; the documented
    // bias bound is 0.5 * h / r_char relative, r_char the ball radius of the
    // total mass.
    let cases = [
        (solve_double_bubble(1.0, 1e-14).unwrap(), PhasePair::SelfPhase1, 1.0),
        (solve_double_bubble(1.0, 1.0).unwrap(), PhasePair::Cross, 2.0),
    ];
    for (g, phases, total_mass) in cases {
        let r_char = ball_radius(total_mass);
        let h = 0.08;
        let value_at = |h: f64| {
            let spec = QuadratureSpec {
                method: QuadratureMethod::Voxel,
                grid_h: h,
                ..QuadratureSpec::default()
            };
            bubble_coulomb(&g, phases, &spec).unwrap().value
        };
        let coarse = value_at(h);
        let fine = value_at(h / 2.0);
        let bound = 0.5 * (h / r_char) * coarse.abs();
        assert!(
            (coarse - fine).abs() < bound,
            "{phases:?}: |{coarse} - {fine}| not below {bound}"
        );
    }
}

#[test]
fn voxel_matches_analytic_ball() {
    let g = solve_double_bubble(1.0, 1e-14).unwrap();
    let spec = QuadratureSpec {
        method: QuadratureMethod::Voxel,
        grid_h: 0.04,
        ..QuadratureSpec::default()
    };
    let v = bubble_coulomb(&g, PhasePair::SelfPhase1, &spec).unwrap().value;
    let exact = ball_self_energy(1.0 + 1e-14).unwrap().value;
    let bound = 0.5 * (0.04 / ball_radius(1.0)) * exact;
    assert!((v - exact).abs() < bound, "voxel {v} vs exact {exact}");
}

#[test]
fn mc_matches_voxel_on_bubble_self_terms() {
    let g = solve_double_bubble(2.0, 1.0).unwrap();
    let mc = bubble_coulomb(
        &g,
        PhasePair::SelfPhase1,
        &QuadratureSpec {
            samples: 400_000,
            ..QuadratureSpec::default()
        },
    )
    .unwrap();
    let vox = bubble_coulomb(
        &g,
        PhasePair::SelfPhase1,
        &QuadratureSpec {
            method: QuadratureMethod::Voxel,
            grid_h: 0.05,
            ..QuadratureSpec::default()
        },
    )
    .unwrap();
    let bias = 0.5 * (0.05 / ball_radius(3.0)) * vox.value;
    assert!(
        (mc.value - vox.value).abs() <= 3.0 * mc.std_error + bias,
        "mc {} vs voxel {}",
        mc.value,
        vox.value
    );
}
