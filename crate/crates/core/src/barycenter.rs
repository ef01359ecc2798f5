//! Fréchet means of covariance families under the Procrustes metric.
//!
//! Two solvers are provided. [`mean_fixed_point`] is steepest descent on the
//! Fréchet functional: push the current iterate through the average of its
//! optimal maps to every family member. [`mean_procrustes_averaging`] is the
//! generalised Procrustes iteration: rotate every square root onto the current
//! average root and re-average. Both record per-iteration diagnostics in a
//! [`MeanResult`].
//!
//! The module also exposes the fixed-point optimality residual and the
//! optimal Gaussian multicoupling built from the maps out of a mean.

use nalgebra::DMatrix;

use crate::bures::{bures_sq, polar_factor, procrustes_distance_sq, MapSource};
use crate::error::{Error, Result};
use crate::exec;
use crate::geometry::tangent_norm;
use crate::spectral::{
    default_rank_tol, sqrt_psd, sym_eigen, trace_norm, Covariance, SymMatrix,
};

/// Starting point of the descent solver.
#[derive(Clone, Debug, Default)]
pub enum Init {
    /// `(1/N) Σ Σᵢ`
    #[default]
    EuclideanMean,
    /// `((1/N) Σ Σᵢ^{1/2})²`
    RootMeanSquare,
    Explicit(Covariance),
}

#[derive(Clone, Debug)]
pub struct MeanConfig {
    pub max_iter: usize,
    /// Tolerance on the fixed-point residual relative to the trace of the
    /// iterate (descent) or on the relative change of the average root in
    /// Hilbert–Schmidt norm (Procrustes averaging).
    pub rel_tol: f64,
    pub init: Init,
    /// Relative rank tolerance; `None` uses `dim · ε`.
    pub rank_tol: Option<f64>,
}

impl Default for MeanConfig {
    fn default() -> Self {
        Self {
            max_iter: 200,
            rel_tol: 1e-9,
            init: Init::EuclideanMean,
            rank_tol: None,
        }
    }
}

impl MeanConfig {
    fn validate(&self) -> Result<()> {
        if self.max_iter == 0 {
            return Err(Error::OutOfRange {
                what: "max_iter",
                value: 0.0,
            });
        }
        if !(self.rel_tol > 0.0 && self.rel_tol.is_finite()) {
            return Err(Error::OutOfRange {
                what: "rel_tol",
                value: self.rel_tol,
            });
        }
        Ok(())
    }
}

/// Output of a mean solver. Trace vectors hold one entry per iterate,
/// starting with the initial point.
#[derive(Clone, Debug)]
pub struct MeanResult {
    pub mean: Covariance,
    /// Number of updates applied to the initial point.
    pub iterations: usize,
    pub converged: bool,
    pub functional_trace: Vec<f64>,
    pub residual_trace: Vec<f64>,
    pub trace_of_iterates: Vec<f64>,
    /// Smallest eigenvalue of each iterate; the regularity of the limit is
    /// reported here but never asserted.
    pub min_eigenvalue_trace: Vec<f64>,
}

impl MeanResult {
    fn empty(mean: Covariance) -> Self {
        Self {
            mean,
            iterations: 0,
            converged: false,
            functional_trace: Vec::new(),
            residual_trace: Vec::new(),
            trace_of_iterates: Vec::new(),
            min_eigenvalue_trace: Vec::new(),
        }
    }

    fn record(&mut self, iterate: &Covariance, functional: f64, residual: f64) {
        self.functional_trace.push(functional);
        self.residual_trace.push(residual);
        self.trace_of_iterates.push(iterate.trace());
        self.min_eigenvalue_trace.push(iterate.min_eigenvalue());
    }

    /// Largest increase of the functional between consecutive iterates
    /// (non-positive for a descent run).
    pub fn max_functional_increase(&self) -> f64 {
        max_step(&self.functional_trace, |a, b| b - a)
    }

    /// Largest decrease of `tr Σᵏ` between consecutive iterates from index
    /// `from` onward (non-positive when the traces are non-decreasing).
    pub fn max_trace_decrease(&self, from: usize) -> f64 {
        let tail = self.trace_of_iterates.get(from..).unwrap_or(&[]);
        max_step(tail, |a, b| a - b)
    }

    fn embed(mut self, deflation: &Deflation) -> Self {
        if deflation.basis.is_some() {
            self.mean = deflation.embed(&self.mean);
            // embedded iterates gain zero eigenvalues on the common kernel
            for m in self.min_eigenvalue_trace.iter_mut() {
                *m = m.min(0.0);
            }
        }
        self
    }
}

fn max_step(xs: &[f64], f: impl Fn(f64, f64) -> f64) -> f64 {
    xs.windows(2)
        .map(|w| f(w[0], w[1]))
        .fold(f64::NEG_INFINITY, f64::max)
}

fn check_family(family: &[Covariance]) -> Result<usize> {
    let first = family.first().ok_or(Error::EmptyFamily)?;
    for s in family {
        first.check_dim(s)?;
    }
    Ok(first.dim())
}

fn average(mats: impl Iterator<Item = DMatrix<f64>>, n: usize, dim: usize) -> DMatrix<f64> {
    let mut acc = DMatrix::zeros(dim, dim);
    for m in mats {
        acc += m;
    }
    acc / n as f64
}

/// `F(Σ) = (1/2N) Σᵢ Π²(Σ, Σᵢ)`.
pub fn frechet_functional(s: &Covariance, family: &[Covariance]) -> Result<f64> {
    check_family(family)?;
    family[0].check_dim(s)?;
    let sq = exec::try_map_indexed(family, |_, si| procrustes_distance_sq(s, si))?;
    Ok(sq.iter().sum::<f64>() / (2.0 * family.len() as f64))
}

/// Trace norm of `Σ − (1/N) Σᵢ (Σ^{1/2} Σᵢ Σ^{1/2})^{1/2}`; zero exactly at a
/// Fréchet mean.
pub fn fixed_point_residual(s: &Covariance, family: &[Covariance]) -> Result<f64> {
    let dim = check_family(family)?;
    family[0].check_dim(s)?;
    let root = sqrt_psd(s);
    let cross_roots = exec::map_indexed(family, |_, si| {
        sqrt_psd(&Covariance::from_psd(root.congruence(si.as_sym()))).into_matrix()
    });
    let avg = average(cross_roots.into_iter(), family.len(), dim);
    Ok(trace_norm(&SymMatrix::symmetrize(s.as_matrix() - avg)))
}

/// Tangent norm at `mean` of the average log map `(1/N) Σᵢ log_mean Σᵢ`,
/// the first-order optimality gap.
pub fn mean_gradient_norm(
    mean: &Covariance,
    family: &[Covariance],
    rank_tol: Option<f64>,
) -> Result<f64> {
    let dim = check_family(family)?;
    family[0].check_dim(mean)?;
    let source = MapSource::new(mean, rank_tol);
    let maps = exec::try_map_indexed(family, |i, si| {
        source
            .map_to(si)
            .map(|p| p.map.map.into_matrix())
            .map_err(|e| e.at_member(i))
    })?;
    let avg = average(maps.into_iter(), family.len(), dim);
    let grad = SymMatrix::symmetrize(avg - DMatrix::identity(dim, dim));
    Ok(tangent_norm(mean, &grad))
}

/// Orthonormal basis of the common range of the family, when the family has
/// a nontrivial common kernel.
struct Deflation {
    basis: Option<DMatrix<f64>>,
}

impl Deflation {
    fn new(family: &[Covariance], dim: usize, rank_tol: Option<f64>) -> (Self, usize) {
        let sum = SymMatrix::symmetrize(average(
            family.iter().map(|s| s.as_matrix().clone()),
            family.len(),
            dim,
        ));
        let spec = sym_eigen(&sum);
        let thr = rank_tol.unwrap_or_else(|| default_rank_tol(dim)) * spec.max();
        let rank = spec.values.iter().filter(|&&l| l > thr && l > 0.0).count();
        if rank == dim {
            (Self { basis: None }, rank)
        } else {
            let basis = spec.basis(|l| l > thr && l > 0.0);
            (Self { basis: Some(basis) }, rank)
        }
    }

    fn reduce(&self, c: &Covariance) -> Covariance {
        match &self.basis {
            None => c.clone(),
            Some(q) => Covariance::from_psd(SymMatrix::symmetrize(
                q.transpose() * c.as_matrix() * q,
            )),
        }
    }

    fn embed(&self, c: &Covariance) -> Covariance {
        match &self.basis {
            None => c.clone(),
            Some(q) => {
                Covariance::from_psd(SymMatrix::symmetrize(q * c.as_matrix() * q.transpose()))
            }
        }
    }
}

fn initial_point(family: &[Covariance], init: &Init, dim: usize) -> Covariance {
    let n = family.len();
    match init {
        Init::EuclideanMean => Covariance::from_psd(SymMatrix::symmetrize(average(
            family.iter().map(|s| s.as_matrix().clone()),
            n,
            dim,
        ))),
        Init::RootMeanSquare => {
            let avg = SymMatrix::symmetrize(average(
                family.iter().map(|s| sqrt_psd(s).into_matrix()),
                n,
                dim,
            ));
            Covariance::from_psd(SymMatrix::symmetrize(avg.as_matrix() * avg.as_matrix()))
        }
        Init::Explicit(c) => c.clone(),
    }
}

/// Fréchet mean by steepest descent: `Σᵏ⁺¹ = T_k Σᵏ T_k` with `T_k` the
/// average of the optimal maps from `Σᵏ` to the family.
///
/// Stops when the fixed-point residual falls to `rel_tol · tr Σᵏ`, or when
/// both the functional and the residual have stalled at rounding level. A common kernel of the whole family is deflated away first, so
/// only the initial point's injectivity on the common range is required.
pub fn mean_fixed_point(family: &[Covariance], cfg: &MeanConfig) -> Result<MeanResult> {
    cfg.validate()?;
    let dim = check_family(family)?;
    if let Init::Explicit(c) = &cfg.init {
        family[0].check_dim(c)?;
    }
    let (deflation, rank) = Deflation::new(family, dim, cfg.rank_tol);
    if rank == 0 {
        let mut res = MeanResult::empty(Covariance::zeros(dim));
        res.record(&res.mean.clone(), 0.0, 0.0);
        res.converged = true;
        return Ok(res);
    }
    let reduced: Vec<Covariance> = family.iter().map(|s| deflation.reduce(s)).collect();
    let init = deflation.reduce(&initial_point(family, &cfg.init, dim));
    descent(&reduced, init, cfg).map(|r| r.embed(&deflation)).map_err(|e| match e {
        Error::MaxIterExceeded { best } => Error::MaxIterExceeded {
            best: Box::new(best.embed(&deflation)),
        },
        other => other,
    })
}

fn descent(family: &[Covariance], init: Covariance, cfg: &MeanConfig) -> Result<MeanResult> {
    let n = family.len();
    let dim = init.dim();
    if !init.is_injective(cfg.rank_tol) {
        return Err(Error::KernelCondition {
            index: None,
            iteration: Some(0),
        });
    }

    let mean_trace = family.iter().map(|s| s.trace()).sum::<f64>() / n as f64;
    let mut current = init;
    let mut result = MeanResult::empty(current.clone());
    let mut best: Option<(f64, Covariance)> = None;

    for k in 0..=cfg.max_iter {
        let source = MapSource::new(&current, cfg.rank_tol);
        let parts = exec::try_map_indexed(family, |i, s| {
            source.map_to(s).map_err(|e| e.at_member(i).at_iteration(k))
        })?;

        let tr = current.trace();
        let functional = family
            .iter()
            .zip(&parts)
            .map(|(s, p)| bures_sq(tr, s.trace(), p.cross_trace))
            .sum::<f64>()
            / (2.0 * n as f64);
        let avg_cross = average(parts.iter().map(|p| p.cross_root.as_matrix().clone()), n, dim);
        let residual = trace_norm(&SymMatrix::symmetrize(current.as_matrix() - avg_cross));
        result.record(&current, functional, residual);
        if best.as_ref().is_none_or(|(f, _)| functional < *f) {
            best = Some((functional, current.clone()));
        }

        // F and the residual are differences of traces; below these levels
        // changes are rounding noise
        let scale = tr + mean_trace;
        let residual_floor = 64.0 * dim as f64 * f64::EPSILON * scale;
        let functional_floor = 8.0 * dim as f64 * f64::EPSILON * scale;
        let stalled = k >= 1
            && (result.functional_trace[k - 1] - functional).abs() <= functional_floor
            && residual >= result.residual_trace[k - 1];
        if residual <= cfg.rel_tol * tr + residual_floor || stalled {
            result.converged = true;
            result.iterations = k;
            result.mean = current;
            return Ok(result);
        }
        if k == cfg.max_iter {
            break;
        }

        let t_avg = SymMatrix::symmetrize(average(
            parts.into_iter().map(|p| p.map.map.into_matrix()),
            n,
            dim,
        ));
        current = Covariance::from_psd(t_avg.congruence(current.as_sym()));
    }

    result.iterations = cfg.max_iter;
    result.mean = best.map(|(_, c)| c).unwrap_or(current);
    Err(Error::MaxIterExceeded {
        best: Box::new(result),
    })
}

/// Orthogonal `R` minimising `‖L₁ − L₂ R‖_HS`: the polar factor of `L₂ᵀ L₁`.
pub fn pairwise_alignment(l1: &DMatrix<f64>, l2: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if l1.shape() != l2.shape() {
        return Err(Error::DimMismatch {
            expected: l1.nrows(),
            found: l2.nrows(),
        });
    }
    if !l1.is_square() {
        return Err(Error::DimMismatch {
            expected: l1.nrows(),
            found: l1.ncols(),
        });
    }
    Ok(polar_factor(&(l2.transpose() * l1)))
}

/// Fréchet mean by generalised Procrustes averaging of square roots,
/// started from the average root `(1/N) Σ Σᵢ^{1/2}`.
///
/// Stops when the relative Hilbert–Schmidt change of the average root falls
/// to `rel_tol`. The returned mean is `𝓛 𝓛ᵀ`.
pub fn mean_procrustes_averaging(family: &[Covariance], cfg: &MeanConfig) -> Result<MeanResult> {
    cfg.validate()?;
    let dim = check_family(family)?;
    let n = family.len();
    let roots: Vec<DMatrix<f64>> = family.iter().map(|s| sqrt_psd(s).into_matrix()).collect();
    let mut avg = average(roots.iter().cloned(), n, dim);
    let mut result = MeanResult::empty(Covariance::zeros(dim));
    let mut best: Option<(f64, Covariance)> = None;

    for k in 0..=cfg.max_iter {
        let sigma = Covariance::from_psd(SymMatrix::symmetrize(&avg * avg.transpose()));
        let functional = frechet_functional(&sigma, family)?;
        let residual = fixed_point_residual(&sigma, family)?;
        result.record(&sigma, functional, residual);
        if best.as_ref().is_none_or(|(f, _)| functional < *f) {
            best = Some((functional, sigma.clone()));
        }
        if k == cfg.max_iter {
            break;
        }

        // Aligning the original roots is equivalent to aligning the previous
        // rotated roots: both range over Lᵢ·O(d).
        let aligned = exec::map_indexed(&roots, |_, l| {
            l * polar_factor(&(l.transpose() * &avg))
        });
        let next = average(aligned.into_iter(), n, dim);
        let change = (&next - &avg).norm();
        let scale = next.norm();
        avg = next;
        if change <= cfg.rel_tol * scale {
            let sigma = Covariance::from_psd(SymMatrix::symmetrize(&avg * avg.transpose()));
            let functional = frechet_functional(&sigma, family)?;
            let residual = fixed_point_residual(&sigma, family)?;
            result.record(&sigma, functional, residual);
            result.iterations = k + 1;
            result.converged = true;
            result.mean = sigma;
            return Ok(result);
        }
    }

    result.iterations = cfg.max_iter;
    result.mean = best.map(|(_, c)| c).unwrap_or(result.mean);
    Err(Error::MaxIterExceeded {
        best: Box::new(result),
    })
}

/// Covariance of the optimal multicoupling `(t₁(Z), …, t_N(Z))`,
/// `Z ~ N(0, Σ̄)`, stored as an `N × N` grid of `d × d` blocks.
#[derive(Clone, Debug)]
pub struct JointCovariance {
    pub n: usize,
    pub dim: usize,
    blocks: Vec<DMatrix<f64>>,
}

impl JointCovariance {
    /// Block `(i, j) = tᵢ Σ̄ tⱼ`.
    pub fn block(&self, i: usize, j: usize) -> &DMatrix<f64> {
        &self.blocks[i * self.n + j]
    }

    pub fn to_matrix(&self) -> SymMatrix {
        let (n, d) = (self.n, self.dim);
        let mut m = DMatrix::zeros(n * d, n * d);
        for i in 0..n {
            for j in 0..n {
                m.view_mut((i * d, j * d), (d, d)).copy_from(self.block(i, j));
            }
        }
        SymMatrix::symmetrize(m)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        sym_eigen(&self.to_matrix()).min()
    }
}

/// Optimal multicoupling of `family` assembled from the maps out of `mean`.
pub fn multicoupling(
    mean: &Covariance,
    family: &[Covariance],
    rank_tol: Option<f64>,
) -> Result<JointCovariance> {
    let dim = check_family(family)?;
    family[0].check_dim(mean)?;
    let n = family.len();
    let source = MapSource::new(mean, rank_tol);
    let maps = exec::try_map_indexed(family, |i, s| {
        source
            .map_to(s)
            .map(|p| p.map.map.into_matrix())
            .map_err(|e| e.at_member(i))
    })?;
    let pushed: Vec<DMatrix<f64>> = maps.iter().map(|t| t * mean.as_matrix()).collect();
    let mut blocks = Vec::with_capacity(n * n);
    for left in &pushed {
        for t in &maps {
            blocks.push(left * t);
        }
    }
    Ok(JointCovariance { n, dim, blocks })
}

/// `G = (1/2N²) Σ_{i<j} E‖Xᵢ − Xⱼ‖²` for the coupling with joint covariance `J`.
pub fn multicoupling_cost(j: &JointCovariance) -> f64 {
    let n = j.n;
    let mut total = 0.0;
    for a in 0..n {
        for b in (a + 1)..n {
            total += j.block(a, a).trace() + j.block(b, b).trace() - 2.0 * j.block(a, b).trace();
        }
    }
    total / (2.0 * (n * n) as f64)
}

/// `(1/N) Σ tr Σᵢ`, the upper bound on the trace of the mean.
pub fn mean_trace_bound(family: &[Covariance]) -> Result<f64> {
    check_family(family)?;
    Ok(family.iter().map(|s| s.trace()).sum::<f64>() / family.len() as f64)
}

/// Average of square roots squared: the mean of a commuting family.
pub fn commuting_mean(family: &[Covariance]) -> Result<Covariance> {
    let dim = check_family(family)?;
    Ok(initial_point(family, &Init::RootMeanSquare, dim))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bures::procrustes_distance;

    fn diag(d: &[f64]) -> Covariance {
        Covariance::from_diagonal(d).unwrap()
    }

    fn pair() -> Vec<Covariance> {
        vec![diag(&[4.0, 1.0]), diag(&[1.0, 4.0])]
    }

    fn close(a: &Covariance, b: &Covariance, tol: f64) -> bool {
        (a.as_matrix() - b.as_matrix()).amax() <= tol
    }

    #[test]
    fn functional_examples() {
        let s = Covariance::from_row_slice(2, &[2.0, 1.0, 1.0, 2.0]).unwrap();
        assert!(frechet_functional(&s, &[s.clone(), s.clone()]).unwrap() < 1e-14);
        let f = frechet_functional(&diag(&[2.25, 2.25]), &pair()).unwrap();
        assert!((f - 0.25).abs() < 1e-14);
        let f = frechet_functional(&Covariance::zeros(2), std::slice::from_ref(&s)).unwrap();
        assert!((f - 2.0).abs() < 1e-14);
        assert!(matches!(frechet_functional(&s, &[]), Err(Error::EmptyFamily)));
    }

    #[test]
    fn descent_on_identical_family_stops_at_start() {
        let s = Covariance::from_row_slice(2, &[2.0, 1.0, 1.0, 2.0]).unwrap();
        let r = mean_fixed_point(&[s.clone(), s.clone()], &MeanConfig::default()).unwrap();
        assert_eq!(r.iterations, 0);
        assert!(close(&r.mean, &s, 1e-12));
    }

    #[test]
    fn descent_commuting_pair() {
        let r = mean_fixed_point(&pair(), &MeanConfig::default()).unwrap();
        assert!(close(&r.mean, &diag(&[2.25, 2.25]), 1e-12));
        assert_eq!(r.min_eigenvalue_trace[0], 2.5);
        assert!(r.residual_trace[1] <= 1e-12);
    }

    #[test]
    fn descent_recovers_template_of_symmetric_deformations() {
        let s = Covariance::from_row_slice(3, &[3.0, 0.5, 0.1, 0.5, 2.0, 0.3, 0.1, 0.3, 1.0]).unwrap();
        let a = SymMatrix::from_row_slice(3, &[0.1, 0.05, -0.02, 0.05, -0.08, 0.03, -0.02, 0.03, 0.04]).unwrap();
        let i = SymMatrix::identity(3);
        let t = &i + &a;
        let u = &i - &a;
        let fam = vec![s.clone(), Covariance::from_psd(t.congruence(s.as_sym())), Covariance::from_psd(u.congruence(s.as_sym()))];
        let r = mean_fixed_point(&fam, &MeanConfig::default()).unwrap();
        assert!(procrustes_distance(&r.mean, &s).unwrap() < 1e-7);
    }

    #[test]
    fn descent_deflates_common_kernel() {
        let fam = vec![diag(&[4.0, 1.0, 0.0]), diag(&[1.0, 4.0, 0.0])];
        let r = mean_fixed_point(&fam, &MeanConfig::default()).unwrap();
        assert!(close(&r.mean, &diag(&[2.25, 2.25, 0.0]), 1e-12));
    }

    #[test]
    fn descent_rejects_singular_explicit_start() {
        let cfg = MeanConfig {
            init: Init::Explicit(diag(&[1.0, 0.0])),
            ..MeanConfig::default()
        };
        assert!(matches!(
            mean_fixed_point(&pair(), &cfg),
            Err(Error::KernelCondition { iteration: Some(0), .. })
        ));
    }

    #[test]
    fn descent_max_iter_carries_best_iterate() {
        let fam = vec![
            Covariance::from_row_slice(2, &[3.0, 1.0, 1.0, 1.0]).unwrap(),
            Covariance::from_row_slice(2, &[1.0, -0.7, -0.7, 2.0]).unwrap(),
            diag(&[0.5, 4.0]),
        ];
        let cfg = MeanConfig {
            max_iter: 1,
            rel_tol: 1e-15,
            ..MeanConfig::default()
        };
        match mean_fixed_point(&fam, &cfg) {
            Err(Error::MaxIterExceeded { best }) => {
                assert_eq!(best.iterations, 1);
                assert_eq!(best.functional_trace.len(), 2);
                assert!(!best.converged);
            }
            other => panic!("expected MaxIterExceeded, got {other:?}"),
        }
    }

    #[test]
    fn config_is_validated() {
        let cfg = MeanConfig {
            rel_tol: 0.0,
            ..MeanConfig::default()
        };
        assert!(matches!(mean_fixed_point(&pair(), &cfg), Err(Error::OutOfRange { .. })));
        assert!(matches!(mean_fixed_point(&[], &MeanConfig::default()), Err(Error::EmptyFamily)));
    }

    #[test]
    fn procrustes_averaging_examples() {
        let s = Covariance::from_row_slice(2, &[2.0, 1.0, 1.0, 2.0]).unwrap();
        let r = mean_procrustes_averaging(&[s.clone(), s.clone()], &MeanConfig::default()).unwrap();
        assert!(close(&r.mean, &s, 1e-12));
        let r = mean_procrustes_averaging(&pair(), &MeanConfig::default()).unwrap();
        assert!(close(&r.mean, &diag(&[2.25, 2.25]), 1e-12));
        assert_eq!(r.iterations, 1);
    }

    #[test]
    fn alignment_examples() {
        let l = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, -0.3, 1.0]);
        let r = pairwise_alignment(&l, &l).unwrap();
        assert!((r - DMatrix::identity(2, 2)).amax() < 1e-12);

        let (c, s) = (0.6_f64, 0.8_f64);
        let q = DMatrix::from_row_slice(2, 2, &[c, -s, s, c]);
        let r = pairwise_alignment(&DMatrix::identity(2, 2), &q).unwrap();
        assert!((r - q.transpose()).amax() < 1e-12);

        let r = pairwise_alignment(
            &DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 1.0]),
            &DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 2.0]),
        )
        .unwrap();
        assert!((r - DMatrix::identity(2, 2)).amax() < 1e-14);
        assert!(pairwise_alignment(&DMatrix::identity(2, 2), &DMatrix::identity(3, 3)).is_err());
    }

    #[test]
    fn residual_examples() {
        let s = Covariance::from_row_slice(2, &[2.0, 1.0, 1.0, 2.0]).unwrap();
        assert!(fixed_point_residual(&s, std::slice::from_ref(&s)).unwrap() < 1e-13);
        assert!(fixed_point_residual(&diag(&[2.25, 2.25]), &pair()).unwrap() < 1e-10);
        let r = fixed_point_residual(&Covariance::identity(2), &pair()).unwrap();
        assert!((r - 1.0).abs() < 1e-13);
    }

    #[test]
    fn multicoupling_examples() {
        let s = Covariance::from_row_slice(2, &[2.0, 1.0, 1.0, 2.0]).unwrap();
        let j = multicoupling(&s, std::slice::from_ref(&s), None).unwrap();
        assert_eq!(j.n, 1);
        assert!((j.block(0, 0) - s.as_matrix()).amax() < 1e-13);

        let mean = diag(&[2.25, 2.25]);
        let j = multicoupling(&mean, &pair(), None).unwrap();
        assert!((j.block(0, 1) - diag(&[2.0, 2.0]).as_matrix()).amax() < 1e-13);
        assert!((multicoupling_cost(&j) - 0.25).abs() < 1e-13);

        let j = multicoupling(&s, &[s.clone(), s.clone()], None).unwrap();
        for a in 0..2 {
            for b in 0..2 {
                assert!((j.block(a, b) - s.as_matrix()).amax() < 1e-12);
            }
        }
        assert!(multicoupling_cost(&j).abs() < 1e-12);
    }

    #[test]
    fn multicoupling_reports_failing_member() {
        let e = multicoupling(&diag(&[1.0, 0.0]), &[diag(&[1.0, 0.0]), diag(&[0.0, 1.0])], None)
            .unwrap_err();
        assert!(matches!(e, Error::KernelCondition { index: Some(1), .. }));
    }

    #[test]
    fn cost_of_uncorrelated_blocks() {
        let j = JointCovariance {
            n: 2,
            dim: 2,
            blocks: vec![
                diag(&[4.0, 1.0]).as_matrix().clone(),
                DMatrix::zeros(2, 2),
                DMatrix::zeros(2, 2),
                diag(&[1.0, 4.0]).as_matrix().clone(),
            ],
        };
        assert!((multicoupling_cost(&j) - 10.0 / 8.0).abs() < 1e-15);
    }
}
