//! Symmetric eigendecomposition and the PSD matrix functions built on it.
//!
//! Everything else in the crate reduces to one primitive: a deterministic
//! cyclic Jacobi eigensolver for dense symmetric matrices. Square roots,
//! pseudo-inverse square roots, traces of square roots and the Schatten norms
//! are all spectral maps over its output.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Convergence threshold of the Jacobi sweeps, relative to the Frobenius norm.
const JACOBI_REL_TOL: f64 = 1e-14;
const JACOBI_MAX_SWEEPS: usize = 100;

/// Dense real symmetric matrix.
///
/// Construction symmetrizes the input as `(M + Mᵀ)/2`, so entry `(i, j)` and
/// entry `(j, i)` are bit-identical, and rejects non-finite entries.
#[derive(Clone, PartialEq)]
pub struct SymMatrix(DMatrix<f64>);

impl SymMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimMismatch {
                expected: m.nrows(),
                found: m.ncols(),
            });
        }
        for j in 0..m.ncols() {
            for i in 0..m.nrows() {
                if !m[(i, j)].is_finite() {
                    return Err(Error::NonFinite { row: i, col: j });
                }
            }
        }
        Ok(Self::symmetrize(m))
    }

    pub fn from_row_slice(dim: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::DimMismatch {
                expected: dim * dim,
                found: entries.len(),
            });
        }
        Self::new(DMatrix::from_row_slice(dim, dim, entries))
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(
            diag,
        )))
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(DMatrix::zeros(dim, dim))
    }

    /// Symmetrizes a matrix that is symmetric up to roundoff. No checks.
    pub(crate) fn symmetrize(m: DMatrix<f64>) -> Self {
        let t = m.transpose();
        Self((m + t) * 0.5)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    pub fn scale(&self, s: f64) -> SymMatrix {
        SymMatrix(&self.0 * s)
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.0.amax()
    }

    /// Hilbert–Schmidt (Frobenius) inner product `tr(AB)`.
    pub fn hs_inner(&self, other: &SymMatrix) -> f64 {
        self.0.dot(&other.0)
    }

    /// `self · B · self`, re-symmetrized.
    pub fn congruence(&self, b: &SymMatrix) -> SymMatrix {
        SymMatrix::symmetrize(&self.0 * &b.0 * &self.0)
    }

    pub(crate) fn check_dim(&self, other: &SymMatrix) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }
}

impl fmt::Debug for SymMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SymMatrix{}", self.0)
    }
}

impl Add for &SymMatrix {
    type Output = SymMatrix;
    fn add(self, rhs: &SymMatrix) -> SymMatrix {
        SymMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &SymMatrix {
    type Output = SymMatrix;
    fn sub(self, rhs: &SymMatrix) -> SymMatrix {
        SymMatrix(&self.0 - &rhs.0)
    }
}

impl Mul<f64> for &SymMatrix {
    type Output = SymMatrix;
    fn mul(self, rhs: f64) -> SymMatrix {
        self.scale(rhs)
    }
}

/// Eigenvalues in descending order with an orthonormal matrix of eigenvectors
/// stored column-wise.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

impl Spectrum {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn max(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn min(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// `V · diag(f(λ)) · Vᵀ`, re-symmetrized.
    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> SymMatrix {
        let mut scaled = self.vectors.clone();
        for (j, &lambda) in self.values.iter().enumerate() {
            let fl = f(lambda);
            scaled.column_mut(j).scale_mut(fl);
        }
        SymMatrix::symmetrize(&scaled * self.vectors.transpose())
    }

    pub fn reconstruct(&self) -> SymMatrix {
        self.map(|l| l)
    }

    /// Projector onto the span of eigenvectors whose eigenvalue satisfies `keep`.
    pub fn projector<F: Fn(f64) -> bool>(&self, keep: F) -> SymMatrix {
        self.map(|l| if keep(l) { 1.0 } else { 0.0 })
    }

    /// Columns of `V` whose eigenvalue satisfies `keep`, in spectral order.
    pub fn basis<F: Fn(f64) -> bool>(&self, keep: F) -> DMatrix<f64> {
        let cols: Vec<usize> = (0..self.dim()).filter(|&j| keep(self.values[j])).collect();
        DMatrix::from_fn(self.dim(), cols.len(), |i, j| self.vectors[(i, cols[j])])
    }
}

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Deterministic: sweeps visit pairs `(p, q)` in row-major order, eigenpairs
/// are stable-sorted by descending value then by the index of the dominant
/// eigenvector coordinate, and each eigenvector is signed so that its
/// dominant coordinate is positive.
pub fn sym_eigen(m: &SymMatrix) -> Spectrum {
    let n = m.dim();
    // row-major working copy; the matrix is symmetric so layout is irrelevant
    let mut a: Vec<f64> = m.as_matrix().iter().copied().collect();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }

    let fro = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    if fro > 0.0 {
        let tol = JACOBI_REL_TOL * fro;
        for _ in 0..JACOBI_MAX_SWEEPS {
            if off_diagonal_norm(&a, n) <= tol {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    rotate(&mut a, &mut v, n, p, q);
                }
            }
        }
    }

    let mut order: Vec<(f64, usize, usize)> = (0..n)
        .map(|j| (a[j * n + j], dominant_index(&v, n, j), j))
        .collect();
    // stable: equal (value, dominant) keep original column order
    order.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)));

    let mut values = Vec::with_capacity(n);
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &(lambda, dom, src)) in order.iter().enumerate() {
        values.push(lambda);
        let sign = if v[dom * n + src] < 0.0 { -1.0 } else { 1.0 };
        for i in 0..n {
            vectors[(i, dst)] = sign * v[i * n + src];
        }
    }
    Spectrum { values, vectors }
}

fn off_diagonal_norm(a: &[f64], n: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[i * n + j] * a[i * n + j];
            }
        }
    }
    s.sqrt()
}

/// First coordinate whose magnitude is within roundoff of the largest one.
fn dominant_index(v: &[f64], n: usize, col: usize) -> usize {
    let max = (0..n).fold(0.0_f64, |m, i| m.max(v[i * n + col].abs()));
    (0..n)
        .find(|&i| v[i * n + col].abs() >= max - 1e-12)
        .unwrap_or(0)
}

fn rotate(a: &mut [f64], v: &mut [f64], n: usize, p: usize, q: usize) {
    let apq = a[p * n + q];
    if apq == 0.0 {
        return;
    }
    let app = a[p * n + p];
    let aqq = a[q * n + q];
    let theta = (aqq - app) / (2.0 * apq);
    let t = if theta.abs() > 1e150 {
        0.5 / theta
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    for k in 0..n {
        let akp = a[k * n + p];
        let akq = a[k * n + q];
        a[k * n + p] = c * akp - s * akq;
        a[k * n + q] = s * akp + c * akq;
    }
    for k in 0..n {
        let apk = a[p * n + k];
        let aqk = a[q * n + k];
        a[p * n + k] = c * apk - s * aqk;
        a[q * n + k] = s * apk + c * aqk;
    }
    a[p * n + q] = 0.0;
    a[q * n + p] = 0.0;
    for k in 0..n {
        let vkp = v[k * n + p];
        let vkq = v[k * n + q];
        v[k * n + p] = c * vkp - s * vkq;
        v[k * n + q] = s * vkp + c * vkq;
    }
}

/// Default PSD clamping tolerance: `dim · ε · max|λ|`.
pub fn default_psd_tol(spectrum: &Spectrum) -> f64 {
    spectrum.dim() as f64 * f64::EPSILON * spectrum.max_abs()
}

/// Default relative rank tolerance: eigenvalues at or below
/// `rank_tol · λ_max` count as zero.
pub fn default_rank_tol(dim: usize) -> f64 {
    dim as f64 * f64::EPSILON
}

/// Symmetric positive semi-definite matrix with its cached spectrum.
#[derive(Clone, Debug, PartialEq)]
pub struct Covariance {
    matrix: SymMatrix,
    spectrum: Spectrum,
}

impl Covariance {
    pub fn identity(dim: usize) -> Self {
        Self::from_psd(SymMatrix::identity(dim))
    }

    pub fn zeros(dim: usize) -> Self {
        Self::from_psd(SymMatrix::zeros(dim))
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        validate_psd(&SymMatrix::from_diagonal(diag)?)
    }

    pub fn from_row_slice(dim: usize, entries: &[f64]) -> Result<Self> {
        validate_psd(&SymMatrix::from_row_slice(dim, entries)?)
    }

    /// Wraps a matrix that is PSD by construction (a congruence or product
    /// of PSD factors). Every negative eigenvalue is treated as roundoff and
    /// clamped to zero.
    pub(crate) fn from_psd(m: SymMatrix) -> Self {
        let spectrum = sym_eigen(&m);
        Self::clamped(m, spectrum)
    }

    fn clamped(m: SymMatrix, mut spectrum: Spectrum) -> Self {
        if spectrum.values.iter().any(|&l| l < 0.0) {
            for l in spectrum.values.iter_mut() {
                *l = l.max(0.0);
            }
            let matrix = spectrum.reconstruct();
            Self { matrix, spectrum }
        } else {
            Self {
                matrix: m,
                spectrum,
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn as_sym(&self) -> &SymMatrix {
        &self.matrix
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        self.matrix.as_matrix()
    }

    pub fn into_sym(self) -> SymMatrix {
        self.matrix
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.spectrum.min()
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.spectrum.max()
    }

    /// Absolute rank threshold for a relative `rank_tol` (default `dim · ε`).
    pub fn rank_threshold(&self, rank_tol: Option<f64>) -> f64 {
        rank_tol.unwrap_or_else(|| default_rank_tol(self.dim())) * self.spectrum.max()
    }

    pub fn rank(&self, rank_tol: Option<f64>) -> usize {
        let thr = self.rank_threshold(rank_tol);
        self.spectrum.values.iter().filter(|&&l| l > thr).count()
    }

    /// True when no eigenvalue falls at or below the rank threshold.
    pub fn is_injective(&self, rank_tol: Option<f64>) -> bool {
        self.dim() == 0 || (self.spectrum.max() > 0.0 && self.rank(rank_tol) == self.dim())
    }

    pub(crate) fn check_dim(&self, other: &Covariance) -> Result<()> {
        self.matrix.check_dim(&other.matrix)
    }
}

/// Checks that `m` is PSD up to the default tolerance and clamps the
/// eigenvalues in `[-psd_tol, 0)` to zero.
pub fn validate_psd(m: &SymMatrix) -> Result<Covariance> {
    let spectrum = sym_eigen(m);
    let tol = default_psd_tol(&spectrum);
    validate_with_spectrum(m, spectrum, tol)
}

/// [`validate_psd`] with an explicit absolute tolerance.
pub fn validate_psd_with(m: &SymMatrix, psd_tol: f64) -> Result<Covariance> {
    let spectrum = sym_eigen(m);
    validate_with_spectrum(m, spectrum, psd_tol)
}

fn validate_with_spectrum(m: &SymMatrix, spectrum: Spectrum, tol: f64) -> Result<Covariance> {
    let min = spectrum.min();
    if min < -tol {
        return Err(Error::NotPsd {
            min_eigenvalue: min,
        });
    }
    Ok(Covariance::clamped(m.clone(), spectrum))
}

/// Principal square root. Eigenvalues at or below the PSD tolerance are
/// roundoff and map to zero; taking their root would promote `ε` noise to `√ε`.
pub fn sqrt_psd(s: &Covariance) -> SymMatrix {
    let floor = default_psd_tol(&s.spectrum);
    s.spectrum.map(|l| root_or_zero(l, floor))
}

fn root_or_zero(l: f64, floor: f64) -> f64 {
    if l > floor {
        l.sqrt()
    } else {
        0.0
    }
}

/// Moore–Penrose inverse of the square root: `λ ↦ 1/√λ` above
/// `rank_tol · λ_max`, zero otherwise.
pub fn pinv_sqrt(s: &Covariance, rank_tol: Option<f64>) -> SymMatrix {
    let thr = s.rank_threshold(rank_tol);
    s.spectrum
        .map(|l| if l > thr && l > 0.0 { 1.0 / l.sqrt() } else { 0.0 })
}

pub fn trace_sqrt(s: &Covariance) -> f64 {
    let floor = default_psd_tol(&s.spectrum);
    s.spectrum.values.iter().map(|&l| root_or_zero(l, floor)).sum()
}

/// Operator, Hilbert–Schmidt and trace norms of a symmetric matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Norms {
    pub op: f64,
    pub hs: f64,
    pub trace: f64,
}

pub fn norms(a: &SymMatrix) -> Norms {
    spectral_norms(&sym_eigen(a))
}

pub fn spectral_norms(spectrum: &Spectrum) -> Norms {
    let v = &spectrum.values;
    Norms {
        op: v.iter().fold(0.0_f64, |m, x| m.max(x.abs())),
        hs: v.iter().map(|x| x * x).sum::<f64>().sqrt(),
        trace: v.iter().map(|x| x.abs()).sum(),
    }
}

pub fn trace_norm(a: &SymMatrix) -> f64 {
    norms(a).trace
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sym(d: usize, e: &[f64]) -> SymMatrix {
        SymMatrix::from_row_slice(d, e).unwrap()
    }

    fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
        (a - b).amax()
    }

    #[test]
    fn diagonal_input_is_already_diagonal() {
        let s = sym_eigen(&SymMatrix::from_diagonal(&[4.0, 1.0]).unwrap());
        assert_eq!(s.values, vec![4.0, 1.0]);
        assert_eq!(s.vectors, DMatrix::identity(2, 2));
    }

    #[test]
    fn two_by_two_closed_form() {
        // λ = ((a+c) ± √((a−c)² + 4b²))/2 = (3, 1)
        let s = sym_eigen(&sym(2, &[2.0, 1.0, 1.0, 2.0]));
        assert!((s.values[0] - 3.0).abs() < 1e-14);
        assert!((s.values[1] - 1.0).abs() < 1e-14);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let expected = DMatrix::from_row_slice(2, 2, &[r, r, r, -r]);
        assert!(max_abs_diff(&s.vectors, &expected) < 1e-14);
    }

    #[test]
    fn zero_matrix_has_identity_vectors() {
        let s = sym_eigen(&SymMatrix::zeros(3));
        assert_eq!(s.values, vec![0.0; 3]);
        assert_eq!(s.vectors, DMatrix::identity(3, 3));
    }

    #[test]
    fn rejects_non_finite_entries() {
        let e = SymMatrix::from_row_slice(2, &[1.0, f64::NAN, 0.0, 1.0]).unwrap_err();
        assert!(matches!(e, Error::NonFinite { row: 0, col: 1 }));
        assert!(SymMatrix::from_diagonal(&[f64::INFINITY]).is_err());
    }

    #[test]
    fn construction_symmetrizes_exactly() {
        let m = sym(2, &[1.0, 0.3, 0.1, 2.0]);
        assert_eq!(m.get(0, 1), m.get(1, 0));
        assert_eq!(m.get(0, 1), 0.2);
    }

    #[test]
    fn validate_psd_boundary_and_clamp() {
        let c = validate_psd(&SymMatrix::from_diagonal(&[1.0, 0.0]).unwrap()).unwrap();
        assert_eq!(c.as_sym(), &SymMatrix::from_diagonal(&[1.0, 0.0]).unwrap());

        let c = validate_psd(&SymMatrix::from_diagonal(&[1.0, -1e-20]).unwrap()).unwrap();
        assert_eq!(c.as_sym(), &SymMatrix::from_diagonal(&[1.0, 0.0]).unwrap());
        assert_eq!(c.min_eigenvalue(), 0.0);

        match validate_psd(&SymMatrix::from_diagonal(&[1.0, -0.5]).unwrap()) {
            Err(Error::NotPsd { min_eigenvalue }) => assert_eq!(min_eigenvalue, -0.5),
            other => panic!("expected NotPsd, got {other:?}"),
        }
    }

    #[test]
    fn sqrt_examples() {
        let r = sqrt_psd(&Covariance::from_diagonal(&[4.0, 1.0]).unwrap());
        assert_eq!(r, SymMatrix::from_diagonal(&[2.0, 1.0]).unwrap());

        let r = sqrt_psd(&Covariance::from_row_slice(2, &[2.0, 1.0, 1.0, 2.0]).unwrap());
        let s3 = 3f64.sqrt();
        let expected = DMatrix::from_row_slice(
            2,
            2,
            &[(s3 + 1.0) / 2.0, (s3 - 1.0) / 2.0, (s3 - 1.0) / 2.0, (s3 + 1.0) / 2.0],
        );
        assert!(max_abs_diff(r.as_matrix(), &expected) < 1e-14);

        let r = sqrt_psd(&Covariance::identity(3));
        assert!(max_abs_diff(r.as_matrix(), &DMatrix::identity(3, 3)) < 1e-15);
    }

    #[test]
    fn pinv_sqrt_examples() {
        let p = pinv_sqrt(&Covariance::from_diagonal(&[4.0, 1.0]).unwrap(), None);
        assert_eq!(p, SymMatrix::from_diagonal(&[0.5, 1.0]).unwrap());
        let p = pinv_sqrt(&Covariance::from_diagonal(&[4.0, 0.0]).unwrap(), None);
        assert_eq!(p, SymMatrix::from_diagonal(&[0.5, 0.0]).unwrap());
        let p = pinv_sqrt(&Covariance::identity(4), None);
        assert_eq!(p, SymMatrix::identity(4));
    }

    #[test]
    fn trace_sqrt_examples() {
        assert_eq!(trace_sqrt(&Covariance::from_diagonal(&[4.0, 4.0]).unwrap()), 4.0);
        assert_eq!(trace_sqrt(&Covariance::zeros(3)), 0.0);

        // Σ₂^{1/2} Σ₁ Σ₂^{1/2}: tr = 10, det = 12, so tr√ = √(10 + 2√12)
        let s1 = Covariance::from_diagonal(&[4.0, 1.0]).unwrap();
        let s2 = Covariance::from_row_slice(2, &[2.0, 1.0, 1.0, 2.0]).unwrap();
        let m = Covariance::from_psd(sqrt_psd(&s2).congruence(s1.as_sym()));
        assert!((m.trace() - 10.0).abs() < 1e-13);
        let expected = (10.0 + 2.0 * 12f64.sqrt()).sqrt();
        assert!((trace_sqrt(&m) - expected).abs() < 1e-13);
        assert!((expected - 4.11439).abs() < 1e-5);
    }

    #[test]
    fn norm_examples() {
        let n = norms(&SymMatrix::from_diagonal(&[3.0, -4.0]).unwrap());
        assert_eq!((n.op, n.hs, n.trace), (4.0, 5.0, 7.0));
        let n = norms(&SymMatrix::identity(4));
        assert_eq!((n.op, n.hs, n.trace), (1.0, 2.0, 4.0));
        let n = norms(&SymMatrix::zeros(2));
        assert_eq!((n.op, n.hs, n.trace), (0.0, 0.0, 0.0));
    }

    #[test]
    fn repeated_eigenvalues_are_reproducible() {
        let m = sym(3, &[2.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0, 1.0]);
        let a = sym_eigen(&m);
        let b = sym_eigen(&m);
        assert_eq!(a, b);
        assert_eq!(a.vectors, DMatrix::identity(3, 3));
    }

    fn symmetric_strategy() -> impl Strategy<Value = SymMatrix> {
        (1usize..=16).prop_flat_map(|d| {
            proptest::collection::vec(-10.0f64..10.0, d * d)
                .prop_map(move |e| SymMatrix::from_row_slice(d, &e).unwrap())
        })
    }

    fn psd_strategy() -> impl Strategy<Value = Covariance> {
        (1usize..=10, 0usize..=10).prop_flat_map(|(d, k)| {
            proptest::collection::vec(-2.0f64..2.0, d * k.max(1)).prop_map(move |e| {
                let k = k.max(1);
                let b = DMatrix::from_row_slice(d, k, &e);
                Covariance::from_psd(SymMatrix::symmetrize(&b * b.transpose()))
            })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(500))]

        #[test]
        fn eigen_reconstructs_and_is_orthonormal(m in symmetric_strategy()) {
            let s = sym_eigen(&m);
            let d = m.dim();
            let scale = 1.0 + m.max_abs();
            prop_assert!(max_abs_diff(s.reconstruct().as_matrix(), m.as_matrix()) <= 1e-10 * scale);
            let vvt = &s.vectors * s.vectors.transpose();
            prop_assert!(max_abs_diff(&vvt, &DMatrix::identity(d, d)) <= 1e-10);
            prop_assert!(s.values.windows(2).all(|w| w[0] >= w[1]));
            let n = spectral_norms(&s);
            prop_assert!(n.op <= n.hs + 1e-12 && n.hs <= n.trace + 1e-12);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn sqrt_squares_back(s in psd_strategy()) {
            let r = sqrt_psd(&s);
            let rr = r.as_matrix() * r.as_matrix();
            prop_assert!(max_abs_diff(&rr, s.as_matrix()) <= 1e-10 * (1.0 + s.trace()));
            // tr√S equals the trace norm of √S
            prop_assert!((trace_sqrt(&s) - trace_norm(&r)).abs() <= 1e-10 * (1.0 + trace_sqrt(&s)));
        }

        #[test]
        fn whitened_root_is_range_projector(s in psd_strategy()) {
            let p = pinv_sqrt(&s, None);
            let whitened = Covariance::from_psd(p.congruence(s.as_sym()));
            let root = sqrt_psd(&whitened);
            let thr = s.rank_threshold(None);
            let projector = s.spectrum().projector(|l| l > thr);
            prop_assert!(max_abs_diff(root.as_matrix(), projector.as_matrix()) <= 1e-8);
        }
    }
}
