//! Numerical toolkit for a sharp-interface ternary droplet model: perimeter
//! plus Coulomb cluster energies, standard double-bubble geometry, computable
//! bounds on the number of clusters in a minimizer, the competitor
//! constructions behind those bounds, and a mass-partition search over a
//! small ansatz family.
//!
//! A configuration is a list of clusters, each holding masses of the two
//! constituents in one of three shapes: a single ball, a standard double
//! bubble, or a pair of separated balls. Clusters do not interact, so the
//! configuration energy is the sum of per-cluster energies
//!
//! ```text
//! E = (interfacial area) + sum_ij gamma_ij ∬ |x-y|^{-1}
//! ```
//!
//! The crate is organized by subject:
//!
//! * [`model`] — domain types, validation, mass bookkeeping;
//! * [`bubble`] — double-bubble solver, areas, Hutchings-type lower bound;
//! * [`coulomb`] — Coulomb integrals: closed forms, Monte Carlo, voxel sums;
//! * [`energy`] — per-cluster and per-configuration energy breakdowns;
//! * [`bounds`] — the bound-chain constants and the cluster-count bound K;
//! * [`competitors`] — competitor moves and their numerical audit;
//! * [`optimizer`] — e0 over the ansatz family and the partition annealer.
//!
//! All types are immutable values; operations return new values and are safe
//! to share across threads.

pub mod bounds;
pub mod bubble;
pub mod competitors;
pub mod coulomb;
pub mod energy;
pub mod error;
pub mod model;
pub mod optimizer;

pub use bounds::{
    cluster_count_bound, cluster_count_bound_with_ball_threshold, competitor_delta_bound,
    h_constants, hutchings_coeff, largest_cluster_lower_bound, merge_threshold,
    merge_threshold_equal_mass, mixed_mass_floor, BoundsReport,
};
pub use bubble::{
    check_monotonicity, double_bubble_area, hutchings_lower_bound, solve_double_bubble,
    sphere_area, sphere_area_coeff, DoubleBubbleGeometry,
};
pub use competitors::{
    case1_move, case2_move, dispatch_move, verify_chain, CaseTag, ChainReport, CompetitorMove,
};
pub use coulomb::{
    ball_pair_interaction, ball_self_coeff, ball_self_energy, bubble_coulomb,
    cube_self_correction, CoulombValue, PhasePair, QuadratureMethod, QuadratureSpec,
};
pub use energy::{cluster_energy, configuration_energy, two_ball_upper_bound, EnergyBreakdown};
pub use error::{Error, Result};
pub use model::{
    apply_mass_transfer, ball_radius, total_masses, validate_params, ClusterAnsatz,
    ClusterMasses, Configuration, Phase, ProblemParams, Shape,
};
pub use optimizer::{build_e0_surface, e0_approx, envelope_upper, minimize_e0, E0Surface, PartitionResult};
