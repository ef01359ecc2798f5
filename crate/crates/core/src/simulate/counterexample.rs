//! A two-member family whose Fréchet mean `Σ̄` is not bounded below by any
//! fixed multiple of a member: `Σ̄ − c·S₁` is indefinite for every `c` above
//! a threshold that shrinks geometrically with the dimension.
//!
//! On the pairs `(e_k, f_k)` the mean is `diag(λ_k, μ_k)` with `λ_k/μ_k`
//! growing like `ratio^k`, and the deformation is `T(e_k) = e_k + b_k f_k`,
//! `T(f_k) = b_k e_k + f_k`. The members are `S₁ = TΣ̄T` and
//! `S₂ = (2I − T)Σ̄(2I − T)`.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::barycenter::{mean_fixed_point, MeanConfig};
use crate::bures::procrustes_distance;
use crate::error::{Error, Result};
use crate::spectral::{Covariance, SymMatrix};

const MAX_PAIRS: usize = 15;
const SAFETY: f64 = 0.9;

#[derive(Clone, Debug)]
pub struct Counterexample {
    pub mean: Covariance,
    pub s1: Covariance,
    pub s2: Covariance,
    /// `thresholds[k] = μ_k / (μ_k + b_k² λ_k)`
    pub thresholds: Vec<f64>,
    pub recovery: Recovery,
}

#[derive(Clone, Debug, Serialize)]
pub struct Recovery {
    /// `Π(solver mean, Σ̄)`
    pub distance: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl Counterexample {
    pub fn min_threshold(&self) -> f64 {
        self.thresholds.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

pub fn counterexample_family(m: usize, ratio: f64, b0: f64, cfg: &MeanConfig) -> Result<Counterexample> {
    if m == 0 || m > MAX_PAIRS {
        return Err(Error::OutOfRange {
            what: "number of pairs",
            value: m as f64,
        });
    }
    if ratio.is_nan() || ratio < 5.0 || ratio.is_infinite() {
        return Err(Error::OutOfRange {
            what: "eigenvalue ratio",
            value: ratio,
        });
    }
    if !(0.0..=1.0).contains(&b0) {
        return Err(Error::OutOfRange {
            what: "coupling strength",
            value: b0,
        });
    }
    let d = 2 * m;
    let lambda: Vec<f64> = (1..=m).map(|k| 0.5f64.powi(k as i32)).collect();
    let mu: Vec<f64> = (1..=m)
        .map(|k| SAFETY * lambda[k - 1] / ratio.powi(k as i32))
        .collect();
    let b: Vec<f64> = (1..=m).map(|k| b0 * 0.5f64.powi(k as i32)).collect();
    if mu[m - 1] / lambda[0] <= 16.0 * d as f64 * f64::EPSILON {
        return Err(Error::Degenerate(format!(
            "smallest eigenvalue {:e} is below working precision for {m} pairs",
            mu[m - 1]
        )));
    }

    let mut mean = DMatrix::zeros(d, d);
    let mut t = DMatrix::identity(d, d);
    for k in 0..m {
        let (e, f) = (2 * k, 2 * k + 1);
        mean[(e, e)] = lambda[k];
        mean[(f, f)] = mu[k];
        t[(e, f)] = b[k];
        t[(f, e)] = b[k];
    }
    let mean = Covariance::from_psd(SymMatrix::symmetrize(mean));
    let t = SymMatrix::symmetrize(t);
    let reflected = &SymMatrix::identity(d).scale(2.0) - &t;
    let s1 = Covariance::from_psd(t.congruence(mean.as_sym()));
    let s2 = Covariance::from_psd(reflected.congruence(mean.as_sym()));
    let thresholds = (0..m)
        .map(|k| mu[k] / (mu[k] + b[k] * b[k] * lambda[k]))
        .collect();

    let solved = mean_fixed_point(&[s1.clone(), s2.clone()], cfg)?;
    let recovery = Recovery {
        distance: procrustes_distance(&solved.mean, &mean)?,
        iterations: solved.iterations,
        converged: solved.converged,
    };
    Ok(Counterexample {
        mean,
        s1,
        s2,
        thresholds,
        recovery,
    })
}
