//! Tangent-bundle calculus at a covariance: inner product, exp and log maps,
//! and McCann geodesics.

use crate::bures::optimal_map;
use crate::error::{Error, Result};
use crate::spectral::{default_psd_tol, sym_eigen, Covariance, SymMatrix};

/// A symmetric direction `A` anchored at a covariance `Σ`; the log map
/// produces `t − I` with `t` the optimal map out of `Σ`.
#[derive(Clone, Debug)]
pub struct TangentVector {
    pub base: Covariance,
    pub direction: SymMatrix,
}

impl TangentVector {
    pub fn norm(&self) -> f64 {
        tangent_norm(&self.base, &self.direction)
    }
}

/// `⟨A, B⟩_Σ = tr(A Σ B)`.
pub fn tangent_inner(s: &Covariance, a: &SymMatrix, b: &SymMatrix) -> Result<f64> {
    s.as_sym().check_dim(a)?;
    s.as_sym().check_dim(b)?;
    Ok(inner_unchecked(s, a, b))
}

pub(crate) fn inner_unchecked(s: &Covariance, a: &SymMatrix, b: &SymMatrix) -> f64 {
    (a.as_matrix() * s.as_matrix()).dot(b.as_matrix())
}

pub fn tangent_norm(s: &Covariance, a: &SymMatrix) -> f64 {
    inner_unchecked(s, a, a).max(0.0).sqrt()
}

/// `exp_Σ(A) = (I + A) Σ (I + A)`; fails when `I + A` is not PSD.
pub fn exp_map(s: &Covariance, a: &SymMatrix) -> Result<Covariance> {
    s.as_sym().check_dim(a)?;
    let shifted = &SymMatrix::identity(a.dim()) + a;
    let spec = sym_eigen(&shifted);
    if spec.min() < -default_psd_tol(&spec) {
        return Err(Error::LeavesCone {
            min_eigenvalue: spec.min(),
            admissible: None,
        });
    }
    Ok(Covariance::from_psd(shifted.congruence(s.as_sym())))
}

/// `log_{Σ₀} Σ₁ = t − I`; exists iff `ker Σ₀ ⊆ ker Σ₁`.
pub fn log_map(s0: &Covariance, s1: &Covariance, rank_tol: Option<f64>) -> Result<TangentVector> {
    let t = optimal_map(s0, s1, rank_tol)?;
    let direction = &t.map - &SymMatrix::identity(s0.dim());
    Ok(TangentVector {
        base: s0.clone(),
        direction,
    })
}

/// Point at time `t ∈ [0, 1]` on the constant-speed geodesic from `Σ₀` to `Σ₁`,
/// evaluated as `(I + tA) Σ₀ (I + tA)` with `A = log_{Σ₀} Σ₁`.
pub fn geodesic(s0: &Covariance, s1: &Covariance, t: f64, rank_tol: Option<f64>) -> Result<Covariance> {
    let log = log_map(s0, s1, rank_tol)?;
    geodesic_from_log(&log, s1, t)
}

/// Geodesic points at each of `times`, sharing one log-map evaluation.
pub fn geodesic_path(
    s0: &Covariance,
    s1: &Covariance,
    times: &[f64],
    rank_tol: Option<f64>,
) -> Result<Vec<Covariance>> {
    let log = log_map(s0, s1, rank_tol)?;
    times
        .iter()
        .map(|&t| geodesic_from_log(&log, s1, t))
        .collect()
}

fn geodesic_from_log(log: &TangentVector, end: &Covariance, t: f64) -> Result<Covariance> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::OutOfRange {
            what: "geodesic time",
            value: t,
        });
    }
    if t == 0.0 {
        return Ok(log.base.clone());
    }
    if t == 1.0 {
        return Ok(end.clone());
    }
    let step = &SymMatrix::identity(log.base.dim()) + &log.direction.scale(t);
    Ok(Covariance::from_psd(step.congruence(log.base.as_sym())))
}
