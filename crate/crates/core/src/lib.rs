//! Geometry of covariance matrices under the Procrustes (Bures–Wasserstein)
//! metric.
//!
//! A covariance `Σ` is identified with the centred Gaussian `N(0, Σ)`; the
//! Procrustes distance between two covariances equals the 2-Wasserstein
//! distance between the Gaussians. On top of that identification the crate
//! provides optimal transport maps, geodesics, exp/log maps, Fréchet means,
//! optimal multicouplings, tangent-space PCA and a set of seeded numerical
//! experiments.
//!
//! Batch work (per-member maps, pairwise distances, Monte Carlo sampling) runs
//! on rayon when the default `parallel` feature is enabled. Reductions are
//! always performed in input order, so results do not depend on the schedule.

pub mod barycenter;
pub mod bures;
pub mod error;
pub mod exec;
pub mod geometry;
pub mod simulate;
pub mod spectral;
pub mod tpca;

pub use barycenter::{
    fixed_point_residual, frechet_functional, mean_fixed_point, mean_procrustes_averaging,
    multicoupling, multicoupling_cost, pairwise_alignment, Init, JointCovariance, MeanConfig,
    MeanResult,
};
pub use bures::{
    gaussian_w2, kernel_condition, optimal_map, procrustes_distance,
    procrustes_distance_via_alignment, AlignmentResult, TransportMap,
};
pub use error::{Error, Result};
pub use geometry::{exp_map, geodesic, log_map, tangent_inner, TangentVector};
pub use tpca::{lift, principal_geodesic, reconstruct, tangent_pca, PcaResult};
pub use spectral::{
    norms, pinv_sqrt, sqrt_psd, sym_eigen, trace_sqrt, validate_psd, Covariance, Norms, Spectrum,
    SymMatrix,
};

