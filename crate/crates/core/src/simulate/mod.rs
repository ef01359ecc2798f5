//! Seeded numerical experiments.

mod counterexample;
mod deform;
mod diagnostics;
mod projection;
mod rng;
mod sampling;

pub use counterexample::{counterexample_family, Counterexample, Recovery};
pub use deform::{deformation_family, generative_optimality, DeformationFamily, OptimalityReport};
pub use diagnostics::{convergence_equivalence, Equivalence};
pub use projection::{
    project, projection_error, projection_stability_experiment, projector, Basis, RankRow,
    StabilityReport,
};
pub use rng::RngSpec;
pub use sampling::{empirical_covariance, fourth_moment_check, sample_gaussian, MomentReport};
