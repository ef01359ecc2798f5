use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "procrustes", version, about = "Procrustes (Bures-Wasserstein) geometry of covariance matrices")]
pub struct Cli {
    #[command(flatten)]
    pub opts: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalOpts {
    /// Solver tolerance
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub rel_tol: f64,
    /// Solver iteration cap
    #[arg(long, global = true, default_value_t = 200)]
    pub max_iter: usize,
    /// Relative rank tolerance (default: dim * machine epsilon)
    #[arg(long, global = true)]
    pub rank_tol: Option<f64>,
    /// Seed for every random draw
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Directory for matrix outputs
    #[arg(long, global = true, default_value = ".")]
    pub output: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Algorithm {
    Descent,
    Gpa,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BasisKind {
    Standard,
    Eigen,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Procrustes distance and the equivalent metrics between two matrices
    Distance { a: PathBuf, b: PathBuf },
    /// Fréchet mean of a manifest family
    Mean {
        manifest: PathBuf,
        #[arg(long, value_enum, default_value_t = Algorithm::Descent)]
        algorithm: Algorithm,
        /// Also run the other algorithm and report the distance between the means
        #[arg(long)]
        cross_check: bool,
    },
    /// Points on the geodesic from A to B with a constant-speed table
    Geodesic {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value_t = 11)]
        steps: usize,
    },
    /// Tangent-space PCA at the Fréchet mean
    Pca {
        manifest: PathBuf,
        #[arg(long)]
        k: usize,
    },
    /// Optimal multicoupling built from the maps out of the mean
    Multicouple { manifest: PathBuf },
    /// Seeded experiments
    #[command(subcommand)]
    Simulate(Simulate),
}

#[derive(Debug, Subcommand)]
pub enum Simulate {
    /// Deform a template by random maps averaging to the identity
    Deform {
        template: PathBuf,
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long, default_value_t = 0.3)]
        eps: f64,
        /// Random perturbations per step size in the optimality check
        #[arg(long, default_value_t = 50)]
        perturbations: usize,
    },
    /// Finite-rank projection errors and mean stability
    Project {
        manifest: PathBuf,
        /// Increasing ranks (default: 1..=d)
        #[arg(long, value_delimiter = ',')]
        ranks: Vec<usize>,
        #[arg(long, value_enum, default_value_t = BasisKind::Standard)]
        basis: BasisKind,
    },
    /// Two-member family whose mean dominates no fixed multiple of a member
    Counterexample {
        #[arg(long, default_value_t = 3)]
        m: usize,
        #[arg(long, default_value_t = 5.0)]
        ratio: f64,
        #[arg(long, default_value_t = 1.0)]
        b0: f64,
    },
    /// Monte Carlo check of the Gaussian fourth moment
    Moments {
        input: PathBuf,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
    },
}
