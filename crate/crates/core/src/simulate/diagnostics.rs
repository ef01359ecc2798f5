//! Metric-equivalence diagnostics: the Procrustes distance against the
//! Hilbert–Schmidt distance of square roots and the trace-norm distance.

use serde::Serialize;

use crate::bures::procrustes_distance;
use crate::error::Result;
use crate::spectral::{sqrt_psd, trace_norm, Covariance};

#[derive(Clone, Debug, Serialize)]
pub struct Equivalence {
    pub wasserstein: f64,
    pub root_hs: f64,
    pub trace_dist: f64,
    /// `√(tr B + 2) + √(tr B)`
    pub bound_constant: f64,
    /// Whether `tr A ≤ tr B + 1`, the regime in which the trace bound holds.
    pub bound_applies: bool,
    pub within_bound: bool,
}

/// Compares `Π(A, B)`, `‖√A − √B‖_HS` and `‖A − B‖₁`.
pub fn convergence_equivalence(a: &Covariance, b: &Covariance) -> Result<Equivalence> {
    a.check_dim(b)?;
    let wasserstein = procrustes_distance(a, b)?;
    let root_hs = (sqrt_psd(a).as_matrix() - sqrt_psd(b).as_matrix()).norm();
    let trace_dist = trace_norm(&(a.as_sym() - b.as_sym()));
    let tb = b.trace();
    let bound_constant = (tb + 2.0).sqrt() + tb.sqrt();
    Ok(Equivalence {
        wasserstein,
        root_hs,
        trace_dist,
        bound_constant,
        bound_applies: a.trace() <= tb + 1.0,
        within_bound: trace_dist <= bound_constant * wasserstein + 1e-8,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equivalence_examples() {
        let s = Covariance::from_row_slice(2, &[3.0, 1.0, 1.0, 2.0]).unwrap();
        let e = convergence_equivalence(&s, &s).unwrap();
        assert!(e.wasserstein < 1e-7 && e.root_hs < 1e-12 && e.trace_dist < 1e-12);

        let a = Covariance::from_diagonal(&[4.0, 1.0]).unwrap();
        let b = Covariance::from_diagonal(&[1.0, 4.0]).unwrap();
        let e = convergence_equivalence(&a, &b).unwrap();
        assert!((e.wasserstein - 2f64.sqrt()).abs() < 1e-12);
        assert!((e.root_hs - 2f64.sqrt()).abs() < 1e-12);
        assert!((e.trace_dist - 6.0).abs() < 1e-12);
        assert!(e.within_bound);

        let e = convergence_equivalence(&s, &Covariance::zeros(2)).unwrap();
        assert!((e.wasserstein - 5f64.sqrt()).abs() < 1e-12);
        assert!((e.root_hs - 5f64.sqrt()).abs() < 1e-12);
        assert!((e.trace_dist - 5.0).abs() < 1e-12);
        assert!(!e.bound_applies);
    }

    #[test]
    fn dimension_mismatch() {
        assert!(convergence_equivalence(&Covariance::identity(2), &Covariance::identity(3)).is_err());
    }
}
