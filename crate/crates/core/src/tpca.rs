//! Tangent-space PCA at a Fréchet mean.
//!
//! Family members are lifted to the tangent space at the mean with the log
//! map, centred at their tangent average, and analysed through the `N × N`
//! Gram matrix of the `tr(A Σ̄ B)` inner product. Components are symmetric
//! matrices orthonormal under that inner product; principal geodesics and
//! reconstructions retract back with the exp map.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::exec;
use crate::geometry::{exp_map, inner_unchecked, log_map, TangentVector};
use crate::spectral::{sym_eigen, Covariance, SymMatrix};

/// Gram eigenvalues at or below this fraction of the largest count as zero.
const RANK_REL_TOL: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct PcaResult {
    pub base: Covariance,
    /// Orthonormal under `tangent_inner(base, ·, ·)`; one per nonzero variance.
    pub components: Vec<SymMatrix>,
    /// Descending, length `k`; trailing entries are zero when the lifted data
    /// span fewer than `k` directions.
    pub variances: Vec<f64>,
    /// `scores[(i, a)] = ⟨Aᵢ − Ā, componentₐ⟩`, shape `N × components.len()`.
    pub scores: DMatrix<f64>,
    /// Empirical tangent average `Ā` of the lifted data.
    pub mean_direction: SymMatrix,
    /// Tangent norm of `Ā`; vanishes at an exact Fréchet mean.
    pub lifted_mean_norm: f64,
    /// `(1/N) Σ ‖Aᵢ − Ā‖²`.
    pub total_variance: f64,
}

impl PcaResult {
    pub fn effective_rank(&self) -> usize {
        self.components.len()
    }
}

/// Lifts every member to the tangent space at `mean`.
pub fn lift(
    family: &[Covariance],
    mean: &Covariance,
    rank_tol: Option<f64>,
) -> Result<Vec<TangentVector>> {
    exec::try_map_indexed(family, |i, s| {
        mean.check_dim(s)?;
        log_map(mean, s, rank_tol).map_err(|e| e.at_member(i))
    })
}

/// Linear PCA of lifted data under the tangent inner product at `mean`.
pub fn tangent_pca(lifted: &[TangentVector], mean: &Covariance, k: usize) -> Result<PcaResult> {
    let n = lifted.len();
    if n == 0 {
        return Err(Error::EmptyFamily);
    }
    let d = mean.dim();
    for v in lifted {
        mean.check_dim(&v.base)?;
    }
    let max_k = n.min(d * (d + 1) / 2);
    if k > max_k {
        return Err(Error::OutOfRange {
            what: "number of components",
            value: k as f64,
        });
    }

    let mut avg = DMatrix::zeros(d, d);
    for v in lifted {
        avg += v.direction.as_matrix();
    }
    let mean_direction = SymMatrix::symmetrize(avg / n as f64);
    let centred: Vec<SymMatrix> = lifted
        .iter()
        .map(|v| &v.direction - &mean_direction)
        .collect();

    let rows = exec::map_range(n, |i| {
        (0..n)
            .map(|j| inner_unchecked(mean, &centred[i], &centred[j]))
            .collect::<Vec<f64>>()
    });
    let gram = SymMatrix::symmetrize(DMatrix::from_fn(n, n, |i, j| rows[i][j]));
    let total_variance = gram.trace() / n as f64;
    let spec = sym_eigen(&gram);
    let thr = RANK_REL_TOL * spec.max().max(0.0);

    let mut components: Vec<SymMatrix> = Vec::new();
    for a in 0..k {
        let lambda = spec.values[a];
        if lambda.is_nan() || lambda <= thr {
            break;
        }
        let mut comp = DMatrix::zeros(d, d);
        for (i, c) in centred.iter().enumerate() {
            comp += c.as_matrix() * spec.vectors[(i, a)];
        }
        let mut comp = SymMatrix::symmetrize(comp / lambda.sqrt());
        // re-orthonormalize against earlier components to absorb roundoff
        for prev in &components {
            let c = inner_unchecked(mean, prev, &comp);
            comp = &comp - &prev.scale(c);
        }
        let norm = inner_unchecked(mean, &comp, &comp).max(0.0).sqrt();
        if norm == 0.0 {
            break;
        }
        components.push(comp.scale(1.0 / norm));
    }

    let m = components.len();
    let scores = DMatrix::from_fn(n, m, |i, a| {
        inner_unchecked(mean, &centred[i], &components[a])
    });
    let variances = (0..k)
        .map(|a| {
            if a < m {
                (scores.column(a).norm_squared() / n as f64).max(0.0)
            } else {
                0.0
            }
        })
        .collect();
    let lifted_mean_norm = inner_unchecked(mean, &mean_direction, &mean_direction)
        .max(0.0)
        .sqrt();

    Ok(PcaResult {
        base: mean.clone(),
        components,
        variances,
        scores,
        mean_direction,
        lifted_mean_norm,
        total_variance,
    })
}

/// Admissible step interval `[s⁻, s⁺]` for which `I + s·C` stays PSD.
pub fn admissible_interval(component: &SymMatrix) -> (f64, f64) {
    let spec = sym_eigen(component);
    let upper = if spec.min() < 0.0 {
        -1.0 / spec.min()
    } else {
        f64::INFINITY
    };
    let lower = if spec.max() > 0.0 {
        -1.0 / spec.max()
    } else {
        f64::NEG_INFINITY
    };
    (lower, upper)
}

/// `exp_base(s · component)`.
pub fn principal_geodesic(base: &Covariance, component: &SymMatrix, s: f64) -> Result<Covariance> {
    let step = component.scale(s);
    exp_map(base, &step).map_err(|e| match e {
        Error::LeavesCone { min_eigenvalue, .. } => Error::LeavesCone {
            min_eigenvalue,
            admissible: Some(admissible_interval(component)),
        },
        other => other,
    })
}

/// Retracts `Ā + Σ_{a<k} scores(i, a)·componentₐ` at the mean.
pub fn reconstruct(mean: &Covariance, pca: &PcaResult, i: usize, k: usize) -> Result<Covariance> {
    if i >= pca.scores.nrows() {
        return Err(Error::OutOfRange {
            what: "member index",
            value: i as f64,
        });
    }
    if k > pca.components.len() {
        return Err(Error::OutOfRange {
            what: "number of components",
            value: k as f64,
        });
    }
    mean.check_dim(&pca.base)?;
    let mut dir = pca.mean_direction.clone();
    for a in 0..k {
        dir = &dir + &pca.components[a].scale(pca.scores[(i, a)]);
    }
    exp_map(mean, &dir)
}
