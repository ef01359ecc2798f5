//! Procrustes (Bures–Wasserstein) distance and Gaussian optimal transport maps.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::exec;
use crate::spectral::{
    default_rank_tol, pinv_sqrt, sqrt_psd, sym_eigen, trace_sqrt, Covariance, SymMatrix,
};

/// Optimal transport map between centred Gaussians: a symmetric PSD matrix
/// `t` pushing `N(0, Σ₁)` forward to `N(0, t Σ₁ t)`.
#[derive(Clone, Debug)]
pub struct TransportMap {
    pub map: SymMatrix,
    pub source_rank_tol: f64,
}

impl TransportMap {
    /// Covariance of the pushforward, `t Σ t`.
    pub fn push_forward(&self, source: &Covariance) -> Covariance {
        Covariance::from_psd(self.map.congruence(source.as_sym()))
    }

    /// `λ_max(t) / λ_min⁺(t)`, the smallest eigenvalue taken over the
    /// numerical range of `t`. Diagnostic only.
    pub fn condition(&self) -> f64 {
        let spec = sym_eigen(&self.map);
        let max = spec.max();
        let thr = default_rank_tol(spec.dim()) * max;
        let min_pos = spec
            .values
            .iter()
            .copied()
            .filter(|&l| l > thr)
            .fold(f64::INFINITY, f64::min);
        if max > 0.0 && min_pos.is_finite() {
            max / min_pos
        } else {
            f64::INFINITY
        }
    }
}

/// Minimiser of `‖Σ₁^{1/2} − U Σ₂^{1/2}‖_HS` over orthogonal `U`.
#[derive(Clone, Debug)]
pub struct AlignmentResult {
    pub distance: f64,
    pub rotation: DMatrix<f64>,
}

/// `Π(Σ₁, Σ₂)² = tr Σ₁ + tr Σ₂ − 2 tr (Σ₂^{1/2} Σ₁ Σ₂^{1/2})^{1/2}`, clamped at zero.
pub fn procrustes_distance(s1: &Covariance, s2: &Covariance) -> Result<f64> {
    Ok(procrustes_distance_sq(s1, s2)?.sqrt())
}

pub fn procrustes_distance_sq(s1: &Covariance, s2: &Covariance) -> Result<f64> {
    s1.check_dim(s2)?;
    let r2 = sqrt_psd(s2);
    let cross = Covariance::from_psd(r2.congruence(s1.as_sym()));
    Ok(bures_sq(s1.trace(), s2.trace(), trace_sqrt(&cross)))
}

pub(crate) fn bures_sq(tr1: f64, tr2: f64, cross: f64) -> f64 {
    (tr1 + tr2 - 2.0 * cross).max(0.0)
}

/// Distance through the explicit orthogonal alignment of the square roots.
///
/// The rotation is `Wᵀ` where `W` is the polar factor of `Σ₂^{1/2} Σ₁^{1/2}`;
/// the distance is evaluated directly at that rotation.
pub fn procrustes_distance_via_alignment(
    s1: &Covariance,
    s2: &Covariance,
) -> Result<AlignmentResult> {
    s1.check_dim(s2)?;
    let r1 = sqrt_psd(s1);
    let r2 = sqrt_psd(s2);
    let k = r2.as_matrix() * r1.as_matrix();
    let rotation = polar_factor(&k).transpose();
    let residual = r1.as_matrix() - &rotation * r2.as_matrix();
    Ok(AlignmentResult {
        distance: residual.norm(),
        rotation,
    })
}

/// Orthogonal factor `W` of the polar decomposition `M = W P`, `P = (MᵀM)^{1/2}`.
///
/// On the numerical null space of `M` the factor is completed to an
/// orthogonal matrix by Gram–Schmidt against the standard basis, which is the
/// identity whenever the null space and the range complement coincide.
pub fn polar_factor(m: &DMatrix<f64>) -> DMatrix<f64> {
    let d = m.nrows();
    assert_eq!(d, m.ncols(), "polar factor needs a square matrix");
    let gram = SymMatrix::symmetrize(m.transpose() * m);
    let spec = sym_eigen(&gram);
    let thr = default_rank_tol(d) * spec.max();

    let mut left: Vec<nalgebra::DVector<f64>> = Vec::with_capacity(d);
    let mut right: Vec<nalgebra::DVector<f64>> = Vec::with_capacity(d);
    let mut leftover = Vec::new();
    for j in 0..d {
        let v = spec.vectors.column(j).into_owned();
        let sigma_sq = spec.values[j];
        if sigma_sq > thr && sigma_sq > 0.0 {
            let u = m * &v / sigma_sq.sqrt();
            if let Some(u) = orthonormalize(u, &left) {
                left.push(u);
                right.push(v);
                continue;
            }
        }
        leftover.push(v);
    }
    // complete the left singular vectors against e_1, e_2, ...
    let mut e = 0;
    for v in leftover {
        while e < d {
            let candidate = nalgebra::DVector::from_fn(d, |i, _| if i == e { 1.0 } else { 0.0 });
            e += 1;
            if let Some(u) = orthonormalize(candidate, &left) {
                left.push(u);
                right.push(v);
                break;
            }
        }
    }

    let mut w = DMatrix::zeros(d, d);
    for (u, v) in left.iter().zip(&right) {
        w += u * v.transpose();
    }
    w
}

/// Twice-applied modified Gram–Schmidt; `None` when `x` is (numerically) in
/// the span of `basis`.
fn orthonormalize(
    mut x: nalgebra::DVector<f64>,
    basis: &[nalgebra::DVector<f64>],
) -> Option<nalgebra::DVector<f64>> {
    let start = x.norm();
    if start == 0.0 {
        return None;
    }
    for _ in 0..2 {
        for b in basis {
            let c = b.dot(&x);
            x -= b * c;
        }
    }
    let n = x.norm();
    if n <= 1e-8 * start {
        None
    } else {
        Some(x / n)
    }
}

/// 2-Wasserstein distance between `N(m₁, Σ₁)` and `N(m₂, Σ₂)`.
pub fn gaussian_w2(m1: &[f64], s1: &Covariance, m2: &[f64], s2: &Covariance) -> Result<f64> {
    s1.check_dim(s2)?;
    for m in [m1, m2] {
        if m.len() != s1.dim() {
            return Err(Error::DimMismatch {
                expected: s1.dim(),
                found: m.len(),
            });
        }
    }
    let mean_sq: f64 = m1.iter().zip(m2).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok((mean_sq + procrustes_distance_sq(s1, s2)?).sqrt())
}

/// `ker Σ₁ ⊆ ker Σ₂`, tested numerically: the restriction of `Σ₂` to the
/// numerical null space of `Σ₁` must vanish to within `rank_tol · (1 + tr Σ₂)`.
pub fn kernel_condition(s1: &Covariance, s2: &Covariance, rank_tol: Option<f64>) -> Result<bool> {
    s1.check_dim(s2)?;
    let rank_tol = rank_tol.unwrap_or_else(|| default_rank_tol(s1.dim()));
    Ok(kernel_condition_with(
        &null_projector(s1, rank_tol),
        s2,
        rank_tol,
    ))
}

fn null_projector(s: &Covariance, rank_tol: f64) -> SymMatrix {
    let thr = s.rank_threshold(Some(rank_tol));
    s.spectrum().projector(|l| l <= thr)
}

fn kernel_condition_with(null: &SymMatrix, s2: &Covariance, rank_tol: f64) -> bool {
    let restricted = null.congruence(s2.as_sym());
    restricted.max_abs() <= rank_tol * (1.0 + s2.trace())
}

/// Optimal map `Σ₁^{-1/2} (Σ₁^{1/2} Σ₂ Σ₁^{1/2})^{1/2} Σ₁^{-1/2}`, extended by
/// the identity on the numerical kernel of `Σ₁`.
pub fn optimal_map(s1: &Covariance, s2: &Covariance, rank_tol: Option<f64>) -> Result<TransportMap> {
    s1.check_dim(s2)?;
    Ok(MapSource::new(s1, rank_tol).map_to(s2)?.map)
}

/// Source-side factors shared by every map out of one covariance.
pub(crate) struct MapSource {
    root: SymMatrix,
    inv_root: SymMatrix,
    null: SymMatrix,
    rank_tol: f64,
}

/// A transport map together with the pieces the mean solvers reuse.
pub(crate) struct MapParts {
    pub map: TransportMap,
    /// `(Σ₁^{1/2} Σ₂ Σ₁^{1/2})^{1/2}`
    pub cross_root: SymMatrix,
    /// `tr (Σ₁^{1/2} Σ₂ Σ₁^{1/2})^{1/2}`
    pub cross_trace: f64,
}

impl MapSource {
    pub fn new(source: &Covariance, rank_tol: Option<f64>) -> Self {
        let rank_tol = rank_tol.unwrap_or_else(|| default_rank_tol(source.dim()));
        Self {
            root: sqrt_psd(source),
            inv_root: pinv_sqrt(source, Some(rank_tol)),
            null: null_projector(source, rank_tol),
            rank_tol,
        }
    }

    pub fn map_to(&self, target: &Covariance) -> Result<MapParts> {
        if !kernel_condition_with(&self.null, target, self.rank_tol) {
            return Err(Error::KernelCondition {
                index: None,
                iteration: None,
            });
        }
        let cross = Covariance::from_psd(self.root.congruence(target.as_sym()));
        let cross_root = sqrt_psd(&cross);
        let core = self.inv_root.congruence(&cross_root);
        let map = &core + &self.null;
        Ok(MapParts {
            map: TransportMap {
                map,
                source_rank_tol: self.rank_tol,
            },
            cross_trace: trace_sqrt(&cross),
            cross_root,
        })
    }
}

/// Symmetric matrix of pairwise Procrustes distances.
pub fn distance_matrix(family: &[Covariance]) -> Result<DMatrix<f64>> {
    let n = family.len();
    if let Some(first) = family.first() {
        for s in family {
            first.check_dim(s)?;
        }
    }
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .collect();
    let dists = exec::try_map_indexed(&pairs, |_, &(i, j)| {
        procrustes_distance(&family[i], &family[j])
    })?;
    let mut out = DMatrix::zeros(n, n);
    for (&(i, j), d) in pairs.iter().zip(dists) {
        out[(i, j)] = d;
        out[(j, i)] = d;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(d: &[f64]) -> Covariance {
        Covariance::from_diagonal(d).unwrap()
    }

    fn cov(d: usize, e: &[f64]) -> Covariance {
        Covariance::from_row_slice(d, e).unwrap()
    }

    fn oracle_distance() -> f64 {
        // tr√M = √(tr M + 2√det M) with tr M = 10, det M = 12
        (9.0 - 2.0 * (10.0 + 4.0 * 3f64.sqrt()).sqrt()).sqrt()
    }

    #[test]
    fn commuting_distance() {
        let d = procrustes_distance(&diag(&[4.0, 1.0]), &diag(&[1.0, 4.0])).unwrap();
        assert!((d - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn distance_to_self_is_zero() {
        let s = cov(2, &[2.0, 1.0, 1.0, 2.0]);
        assert!(procrustes_distance(&s, &s).unwrap() < 1e-7);
        assert!(procrustes_distance(&s, &s).unwrap() >= 0.0);
    }

    #[test]
    fn non_commuting_distance_matches_trace_identity() {
        let d = procrustes_distance(&diag(&[4.0, 1.0]), &cov(2, &[2.0, 1.0, 1.0, 2.0])).unwrap();
        assert!((d - oracle_distance()).abs() < 1e-12);
        assert!((d - 0.878192).abs() < 1e-6);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let e = procrustes_distance(&diag(&[1.0]), &diag(&[1.0, 1.0])).unwrap_err();
        assert!(matches!(e, Error::DimMismatch { expected: 1, found: 2 }));
    }

    #[test]
    fn alignment_examples() {
        let a = procrustes_distance_via_alignment(&diag(&[4.0, 1.0]), &diag(&[1.0, 4.0])).unwrap();
        assert!((a.distance - 2f64.sqrt()).abs() < 1e-14);
        assert!((&a.rotation - DMatrix::identity(2, 2)).amax() < 1e-14);

        let s = cov(2, &[2.0, 1.0, 1.0, 2.0]);
        assert!(procrustes_distance_via_alignment(&s, &s).unwrap().distance < 1e-12);

        let a = procrustes_distance_via_alignment(&diag(&[4.0, 1.0]), &s).unwrap();
        assert!((a.distance - oracle_distance()).abs() < 1e-12);
        let utu = a.rotation.transpose() * &a.rotation;
        assert!((utu - DMatrix::identity(2, 2)).amax() < 1e-12);
    }

    #[test]
    fn polar_factor_of_rank_deficient_is_orthogonal() {
        let m = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 0.0, 2.0, 4.0, 0.0, 0.0, 0.0, 0.0]);
        let w = polar_factor(&m);
        assert!((w.transpose() * &w - DMatrix::identity(3, 3)).amax() < 1e-12);
        // WᵀM is the PSD factor
        let p = w.transpose() * &m;
        assert!((&p - p.transpose()).amax() < 1e-12);
    }

    #[test]
    fn gaussian_w2_examples() {
        let s = diag(&[4.0, 1.0]);
        assert_eq!(gaussian_w2(&[0.0, 0.0], &s, &[0.0, 0.0], &s).unwrap(), 0.0);
        let d = gaussian_w2(&[1.0, 2.0], &s, &[4.0, 6.0], &s).unwrap();
        assert!((d - 5.0).abs() < 1e-12);
        let d = gaussian_w2(&[0.0, 0.0], &s, &[3.0, 0.0], &diag(&[1.0, 4.0])).unwrap();
        assert!((d - 11f64.sqrt()).abs() < 1e-12);
        assert!(gaussian_w2(&[0.0], &s, &[0.0, 0.0], &s).is_err());
    }

    #[test]
    fn kernel_condition_examples() {
        let any = cov(2, &[3.0, 1.0, 1.0, 0.5]);
        assert!(kernel_condition(&Covariance::identity(2), &any, None).unwrap());
        assert!(!kernel_condition(&diag(&[1.0, 0.0]), &diag(&[0.0, 1.0]), None).unwrap());
        assert!(kernel_condition(&diag(&[1.0, 0.0]), &diag(&[2.0, 0.0]), None).unwrap());
    }

    #[test]
    fn optimal_map_examples() {
        let t = optimal_map(&diag(&[4.0, 1.0]), &diag(&[1.0, 4.0]), None).unwrap();
        assert!((t.map.as_matrix() - DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![0.5, 2.0]))).amax() < 1e-14);
        assert!((t.condition() - 4.0).abs() < 1e-12);

        let s = cov(2, &[2.0, 1.0, 1.0, 2.0]);
        let t = optimal_map(&s, &s, None).unwrap();
        assert!((t.map.as_matrix() - DMatrix::identity(2, 2)).amax() < 1e-13);

        let e = optimal_map(&diag(&[1.0, 0.0]), &diag(&[0.0, 1.0]), None).unwrap_err();
        assert!(matches!(e, Error::KernelCondition { .. }));
    }

    #[test]
    fn map_is_identity_on_source_kernel() {
        let t = optimal_map(&diag(&[1.0, 0.0]), &diag(&[4.0, 0.0]), None).unwrap();
        assert_eq!(t.map, SymMatrix::from_diagonal(&[2.0, 1.0]).unwrap());
        let pushed = t.push_forward(&diag(&[1.0, 0.0]));
        assert!((pushed.as_matrix() - diag(&[4.0, 0.0]).as_matrix()).amax() < 1e-14);
    }

    #[test]
    fn distance_matrix_is_symmetric() {
        let fam = vec![diag(&[4.0, 1.0]), diag(&[1.0, 4.0]), Covariance::identity(2)];
        let m = distance_matrix(&fam).unwrap();
        assert_eq!(m, m.transpose());
        assert!((m[(0, 1)] - 2f64.sqrt()).abs() < 1e-14);
        assert_eq!(m[(2, 2)], 0.0);
    }
}
