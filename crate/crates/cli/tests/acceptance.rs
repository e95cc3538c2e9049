//! Acceptance suite: one test per criterion, each printing a PASS line with
//! the quantities it checked. Tolerances are pinned here, not configurable.

use std::process::Command;
use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tridrop::{
    ball_pair_interaction, ball_radius, ball_self_energy, cluster_count_bound,
    configuration_energy, dispatch_move, double_bubble_area, h_constants, hutchings_coeff,
    hutchings_lower_bound, largest_cluster_lower_bound, merge_threshold, minimize_e0,
    solve_double_bubble, sphere_area, sphere_area_coeff, two_ball_upper_bound, verify_chain,
    ClusterAnsatz, Configuration, DoubleBubbleGeometry, Phase, ProblemParams, QuadratureSpec,
};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tridrop"))
}

/// Uniform point in the ball of mass `m` centered at `(0, 0, z)`.
fn sample_ball(rng: &mut ChaCha8Rng, z: f64, m: f64) -> [f64; 3] {
    let r = ball_radius(m);
    loop {
        let p = [
            rng.random_range(-r..r),
            rng.random_range(-r..r),
            rng.random_range(-r..r),
        ];
        if p[0] * p[0] + p[1] * p[1] + p[2] * p[2] < r * r {
            return [p[0], p[1], p[2] + z];
        }
    }
}

fn mc_pair(m_a: f64, m_b: f64, z_b: f64, pairs: u64, seed: u64) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sum = 0.0;
    let mut sumsq = 0.0;
    for _ in 0..pairs {
        let x = sample_ball(&mut rng, 0.0, m_a);
        let y = sample_ball(&mut rng, z_b, m_b);
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
fn criterion_1_coulomb_oracle_equivalence() {
    let start = Instant::now();
    let (mc_self, sigma_self) = mc_pair(1.0, 1.0, 0.0, 10_000_000, 8_001);
    let exact_self = ball_self_energy(1.0).unwrap().value;
    assert!(
        (mc_self - exact_self).abs() <= 3.0 * sigma_self,
        "ball self energy: mc {mc_self} vs closed form {exact_self} (3 sigma = {})",
        3.0 * sigma_self
    );
    let (mc_cross, sigma_cross) = mc_pair(1.0, 1.0, 10.0, 1_000_000, 8_002);
    let exact_cross = ball_pair_interaction(1.0, 1.0, 10.0).unwrap().value;
    assert!((exact_cross - 0.1).abs() < 1e-15);
    assert!(
        (mc_cross - exact_cross).abs() <= 3.0 * sigma_cross,
        "pair interaction: mc {mc_cross} vs 0.1"
    );
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 30.0, "oracle took {elapsed:.1} s");
    println!(
        "PASS criterion 1: coulomb oracle equivalence (kappa = {exact_self:.6} vs MC {mc_self:.6} +- {sigma_self:.1e}, pair 0.1 vs {mc_cross:.6}, {elapsed:.1} s)"
    );
}

/// Largest invariant residual of a solved geometry, recomputed from its
/// published numbers.
fn solver_residual(g: &DoubleBubbleGeometry) -> f64 {
    let (r_big, r_small) = if g.swapped { (g.r2, g.r1) } else { (g.r1, g.r2) };
    let cap_vol = |r: f64, theta: f64| {
        let h = r * (1.0 - theta.cos());
        std::f64::consts::PI * h * h * (3.0 * r - h) / 3.0
    };
    let (theta_big, theta_small) = if g.swapped {
        (g.theta2, g.theta1)
    } else {
        (g.theta1, g.theta2)
    };
    let dome = if g.r0.is_infinite() { 0.0 } else { cap_vol(g.r0, g.theta0) };
    let (m_big, m_small) = if g.swapped { (g.m2, g.m1) } else { (g.m1, g.m2) };
    let res_v = ((cap_vol(r_big, theta_big) - dome - m_big) / m_big)
        .abs()
        .max(((cap_vol(r_small, theta_small) + dome - m_small) / m_small).abs());
    let lhs = if g.r0.is_infinite() { 0.0 } else { 1.0 / g.r0 };
    let res_c = (lhs - (1.0 / r_small - 1.0 / r_big)).abs();
    let u_big = [-g.z_big / r_big, g.rho_j / r_big];
    let u_small = [-g.z_small / r_small, g.rho_j / r_small];
    let u_sep = if g.r0.is_infinite() {
        [1.0, 0.0]
    } else {
        [-g.z_sep / g.r0, g.rho_j / g.r0]
    };
    let dot = |a: [f64; 2], b: [f64; 2]| (a[0] * b[0] + a[1] * b[1]).abs();
    let res_t = (dot(u_big, u_small) - 0.5)
        .abs()
        .max((dot(u_big, u_sep) - 0.5).abs())
        .max((dot(u_small, u_sep) - 0.5).abs());
    res_v.max(res_c).max(res_t)
}

#[test]
fn criterion_2_double_bubble_validity() {
    let mut rng = ChaCha8Rng::seed_from_u64(8_100);
    let mut worst_residual = 0.0f64;
    let mut worst_margin = f64::INFINITY;
    for _ in 0..200 {
        let m1 = rng.random_range(1e-3..10.0);
        let m2 = rng.random_range(1e-3..10.0);
        let g = solve_double_bubble(m1, m2).unwrap();
        worst_residual = worst_residual.max(solver_residual(&g));
        let margin = g.total_area() - hutchings_lower_bound(m1, m2).unwrap();
        worst_margin = worst_margin.min(margin);
    }
    assert!(worst_residual < 1e-10, "worst residual {worst_residual}");
    assert!(worst_margin >= -1e-9, "Hutchings violated by {worst_margin}");
    for m in [0.01, 0.5, 1.0, 7.3] {
        let s = double_bubble_area(m, 0.0).unwrap();
        let exact = sphere_area_coeff() * m.powf(2.0 / 3.0);
        assert!(
            ((s - exact) / exact).abs() < 1e-9,
            "S({m}, 0) = {s} vs {exact}"
        );
    }
    let s11 = double_bubble_area(1.0, 1.0).unwrap();
    assert!((8.674..=9.672).contains(&s11), "S(1,1) = {s11}");
    println!(
        "PASS criterion 2: double-bubble validity (worst residual {worst_residual:.2e}, \
         worst Hutchings margin {worst_margin:.3e}, S(1,1) = {s11:.6})"
    );
}

#[test]
fn criterion_3_scaling_inequalities() {
    let mut rng = ChaCha8Rng::seed_from_u64(8_200);
    let mut failures = 0usize;
    for _ in 0..10_000 {
        let r: f64 = rng.random_range(0.0..=1.0);
        let b = 1.0 + r;
        if !(b.powf(2.0 / 3.0) <= b && b <= 1.0 + 3.0 * r) {
            failures += 1;
        }
        if !(b.powf(5.0 / 3.0) <= b * b && b * b <= 1.0 + 3.0 * r + 1e-15) {
            failures += 1;
        }
    }
    assert_eq!(failures, 0);
    println!("PASS criterion 3: scaling inequalities (10000 samples, 0 failures)");
}

#[test]
fn criterion_4_bound_pipeline() {
    let start = Instant::now();
    let masses: Vec<f64> = (0..10).map(|i| 0.1 + i as f64 * (10.0 - 0.1) / 9.0).collect();
    let gammas: Vec<f64> = (0..5).map(|i| i as f64 * 2.5).collect();
    let mut cells = 0usize;
    for &m1 in &masses {
        for &m2 in &masses {
            for &g11 in &gammas {
                for &g22 in &gammas {
                    let mut ks = Vec::new();
                    for g12 in [0.0, 1.0, 10.0] {
                        let p = ProblemParams::new(m1, m2, g11, g12, g22).unwrap();
                        let r = cluster_count_bound(&p).unwrap();
                        assert!(r.k.is_finite() && r.k >= 1.0);
                        ks.push(r.k);
                    }
                    assert!(
                        ks[0] == ks[1] && ks[1] == ks[2],
                        "K depends on gamma12 at ({m1}, {m2}, {g11}, {g22}): {ks:?}"
                    );
                    cells += 1;
                }
            }
        }
    }
    for gamma in [0.3, 1.0, 3.0] {
        let t = merge_threshold(gamma);
        let t10 = merge_threshold(10.0 * gamma);
        assert!(
            ((t / 10.0 - t10) / t10).abs() < 1e-4,
            "1/gamma scaling violated at gamma {gamma}: {t} vs {t10}"
        );
    }
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 300.0, "grid took {elapsed:.0} s");
    println!(
        "PASS criterion 4: bound pipeline ({cells} grid cells x 3 gamma12 values, \
         finite gamma12-invariant K, 1/gamma threshold scaling, {elapsed:.1} s)"
    );
}

#[test]
fn criterion_5_competitor_soundness() {
    let mut rng = ChaCha8Rng::seed_from_u64(8_300);
    let spec = QuadratureSpec {
        samples: 100_000,
        ..QuadratureSpec::default()
    };
    let mut flagged = 0usize;
    for trial in 0..50 {
        // Analytic backbone: pure balls carry the largest clusters so the
        // re-scoring is sharp; the tiny mixed bubble is the Monte-Carlo part.
        let b1 = ClusterAnsatz::single_ball(Phase::One, rng.random_range(0.3..2.0)).unwrap();
        let b2 = ClusterAnsatz::single_ball(Phase::Two, rng.random_range(0.3..2.0)).unwrap();
        let extra = ClusterAnsatz::single_ball(Phase::One, rng.random_range(0.1..0.5)).unwrap();
        let backbone = vec![b1, b2, extra];

        // The actual-m+ floor for this configuration.
        let (bm1, bm2) = tridrop::total_masses(&backbone);
        let g11 = rng.random_range(0.0..2.0);
        let g22 = rng.random_range(0.0..2.0);
        let g12 = rng.random_range(0.0..2.0);
        let m1_plus = backbone.iter().map(|c| c.masses.m1).fold(0.0, f64::max);
        let m2_plus = backbone.iter().map(|c| c.masses.m2).fold(0.0, f64::max);
        let probe = ProblemParams::new(bm1, bm2, g11, g12, g22).unwrap();
        let (h1, h2) = h_constants(&probe, (m1_plus, m2_plus)).unwrap();
        let c = hutchings_coeff();
        let floor = ((c / h1).powi(3)).min((c / h2).powi(3));

        let eps = floor / 20.0; // total mass floor/10 < floor/8
        let tiny = ClusterAnsatz::double_bubble(eps, eps).unwrap();
        let k = backbone.len();
        let mut clusters = backbone;
        clusters.push(tiny);
        let (t1, t2) = tridrop::total_masses(&clusters);
        let p = ProblemParams::new(t1, t2, g11, g12, g22).unwrap();
        let config = Configuration::new(clusters, p).unwrap();

        let mv = dispatch_move(&config, k)
            .unwrap_or_else(|e| panic!("trial {trial}: dispatch failed: {e}"));
        let report = verify_chain(&config, &mv, &spec).unwrap();
        assert!(
            report.improving,
            "trial {trial}: tiny cluster (eps = {eps:.3e}, floor = {floor:.3e}) not flagged"
        );
        flagged += 1;

        let before = configuration_energy(&config, &spec).unwrap();
        let after = configuration_energy(&mv.result, &spec).unwrap();
        let sigma = (before.std_error.powi(2) + after.std_error.powi(2)).sqrt();
        assert!(
            after.total < before.total + 3.0 * sigma,
            "trial {trial}: flagged move does not lower the energy: {} vs {}",
            after.total,
            before.total
        );
    }
    assert_eq!(flagged, 50);
    println!(
        "PASS criterion 5: competitor soundness (50/50 tiny mixed clusters flagged, \
         every flag confirmed by direct re-scoring)"
    );
}

#[test]
fn criterion_6_optimizer_compliance() {
    let spec = QuadratureSpec {
        samples: 50_000,
        ..QuadratureSpec::default()
    };
    let default_budget = 1500;
    let param_sets = [
        (1.0, 1.0, 1.0, 1.0, 1.0),
        (0.5, 2.0, 0.5, 0.0, 2.0),
        (2.0, 0.4, 2.0, 1.0, 0.5),
        (0.8, 0.8, 0.0, 0.5, 0.0),
        (1.5, 1.5, 1.0, 2.0, 1.0),
    ];
    let mut runs = 0usize;
    let mut max_elapsed = 0.0f64;
    for (m1, m2, g11, g12, g22) in param_sets {
        let p = ProblemParams::new(m1, m2, g11, g12, g22).unwrap();
        let k = cluster_count_bound(&p).unwrap().k;
        let u = two_ball_upper_bound(&p);
        for seed in [1u64, 2, 3, 4] {
            let start = Instant::now();
            let r = minimize_e0(&p, default_budget, seed, &spec).unwrap();
            let elapsed = start.elapsed().as_secs_f64();
            max_elapsed = max_elapsed.max(elapsed);
            assert!(elapsed < 60.0, "run took {elapsed:.1} s");
            assert!(
                (r.configuration.clusters.len() as f64) <= k,
                "{} clusters exceed K = {k}",
                r.configuration.clusters.len()
            );
            assert!(
                r.energy <= u + 3.0 * r.energy_std_error + 1e-9,
                "energy {} above two-ball bound {u}",
                r.energy
            );
            runs += 1;
        }
    }
    let small = ProblemParams::new(0.01, 0.01, 1.0, 1.0, 1.0).unwrap();
    let r = minimize_e0(&small, default_budget, 7, &spec).unwrap();
    assert_eq!(
        r.configuration.clusters.len(),
        1,
        "perimeter-dominated masses must merge into one cluster"
    );
    println!(
        "PASS criterion 6: optimizer compliance ({runs} runs within bound and envelope, \
         slowest {max_elapsed:.1} s, M=0.01 run has 1 cluster)"
    );
}

#[test]
fn criterion_7_determinism_and_roundtrip() {
    let dir = tempfile::tempdir().unwrap();

    // Byte-identical JSON and CSV reports across repeated runs.
    let mut bounds_json = Vec::new();
    let mut sweep_csv = Vec::new();
    let mut optimize_json = Vec::new();
    for _ in 0..2 {
        let out = bin()
            .args([
                "bounds", "--m1", "1", "--m2", "1", "--gamma11", "1", "--gamma12", "1",
                "--gamma22", "1",
            ])
            .output()
            .unwrap();
        assert!(out.status.success());
        bounds_json.push(out.stdout);

        let out = bin()
            .args([
                "sweep", "--m1", "1", "--m2", "1", "--gamma11", "1", "--gamma12", "0",
                "--gamma22", "1", "--sweep-param", "gamma12", "--sweep-values", "0,1,10",
                "--format", "csv",
            ])
            .output()
            .unwrap();
        assert!(out.status.success());
        sweep_csv.push(out.stdout);

        let out = bin()
            .args([
                "optimize", "--m1", "0.3", "--m2", "0.3", "--gamma11", "1", "--gamma12", "0.5",
                "--gamma22", "1", "--budget", "300", "--seeds", "11,12", "--samples", "50000",
            ])
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        optimize_json.push(out.stdout);
    }
    assert_eq!(bounds_json[0], bounds_json[1], "bounds reports differ");
    assert_eq!(sweep_csv[0], sweep_csv[1], "sweep CSV differs");
    assert_eq!(optimize_json[0], optimize_json[1], "optimize reports differ");

    // Configuration files round-trip exactly.
    let report = dir.path().join("run.json");
    let out = bin()
        .args([
            "optimize", "--m1", "0.5", "--m2", "0.5", "--gamma11", "1", "--gamma12", "1",
            "--gamma22", "1", "--budget", "300", "--seeds", "3", "--samples", "50000",
            "--output", report.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let config_path = dir.path().join("run.config.json");
    let original = std::fs::read_to_string(&config_path).unwrap();
    let parsed: Vec<serde_json::Value> = serde_json::from_str(&original).unwrap();
    for record in &parsed {
        for key in ["m1", "m2"] {
            let text = record[key].as_f64().unwrap();
            // 17 significant digits reconstruct the exact bit pattern, so a
            // re-serialized value cannot drift.
            let reformatted: f64 = format!("{:.16e}", text).parse().unwrap();
            assert_eq!(text.to_bits(), reformatted.to_bits());
        }
    }
    // Re-scoring the emitted file must succeed against the same params.
    let out = bin()
        .args([
            "energy", "--m1", "0.5", "--m2", "0.5", "--gamma11", "1", "--gamma12", "1",
            "--gamma22", "1", "--samples", "50000", "--input", config_path.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    println!(
        "PASS criterion 7: determinism and round-trip (byte-identical re-runs, \
         exact configuration round-trip)"
    );
}
