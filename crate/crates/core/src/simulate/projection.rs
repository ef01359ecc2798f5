//! Finite-rank projections `P Σ P` and the stability of means under them.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::barycenter::{mean_fixed_point, MeanConfig};
use crate::bures::procrustes_distance;
use crate::error::{Error, Result};
use crate::exec;
use crate::spectral::{trace_norm, Covariance, SymMatrix};

#[derive(Clone, Debug)]
pub enum Basis {
    /// First `r` coordinate vectors.
    Standard,
    /// Leading `r` eigenvectors of the reference covariance.
    Eigen(Covariance),
}

/// Rank-`r` orthogonal projector in the chosen basis.
pub fn projector(dim: usize, r: usize, basis: &Basis) -> Result<SymMatrix> {
    if r == 0 || r > dim {
        return Err(Error::OutOfRange {
            what: "projection rank",
            value: r as f64,
        });
    }
    let q = match basis {
        Basis::Standard => DMatrix::identity(dim, r),
        Basis::Eigen(reference) => {
            if reference.dim() != dim {
                return Err(Error::DimMismatch {
                    expected: dim,
                    found: reference.dim(),
                });
            }
            reference.spectrum().vectors.columns(0, r).into_owned()
        }
    };
    Ok(SymMatrix::symmetrize(&q * q.transpose()))
}

pub fn project(s: &Covariance, r: usize, basis: &Basis) -> Result<Covariance> {
    let p = projector(s.dim(), r, basis)?;
    Ok(Covariance::from_psd(p.congruence(s.as_sym())))
}

/// `tr((I − P) Σ)`, which equals `Π²(Σ, PΣP)`.
pub fn projection_error(s: &Covariance, r: usize, basis: &Basis) -> Result<f64> {
    let p = projector(s.dim(), r, basis)?;
    Ok((s.trace() - p.hs_inner(s.as_sym())).max(0.0))
}

#[derive(Clone, Debug, Serialize)]
pub struct RankRow {
    pub rank: usize,
    /// `‖mean(PΣᵢP) − mean(Σᵢ)‖₁`; `None` when the projected solve failed.
    pub mean_trace_distance: Option<f64>,
    /// `maxᵢⱼ |Π(PΣᵢP, PΣⱼP) − Π(Σᵢ, Σⱼ)|`
    pub pairwise_discrepancy: f64,
    /// `maxᵢ tr((I − P)Σᵢ)`, the uniform tail mass of the family.
    pub max_tail: f64,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct StabilityReport {
    pub rows: Vec<RankRow>,
}

impl StabilityReport {
    pub fn last(&self) -> Option<&RankRow> {
        self.rows.last()
    }
}

/// Means and pairwise distances of the projected family at each rank,
/// compared with the full-dimension quantities.
pub fn projection_stability_experiment(
    family: &[Covariance],
    ranks: &[usize],
    basis: &Basis,
    cfg: &MeanConfig,
) -> Result<StabilityReport> {
    let first = family.first().ok_or(Error::EmptyFamily)?;
    let dim = first.dim();
    if ranks.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::OutOfRange {
            what: "rank sequence (must increase)",
            value: f64::NAN,
        });
    }
    for &r in ranks {
        projector(dim, r, basis)?;
    }
    let full = mean_fixed_point(family, cfg)?.mean;
    let n = family.len();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .collect();
    let full_dists = exec::try_map_indexed(&pairs, |_, &(i, j)| {
        procrustes_distance(&family[i], &family[j])
    })?;

    let rows = exec::try_map_indexed(ranks, |_, &r| -> Result<RankRow> {
        let projected = family
            .iter()
            .map(|s| project(s, r, basis))
            .collect::<Result<Vec<_>>>()?;
        let mut discrepancy = 0.0_f64;
        for (&(i, j), &full_d) in pairs.iter().zip(&full_dists) {
            let d = procrustes_distance(&projected[i], &projected[j])?;
            discrepancy = discrepancy.max((d - full_d).abs());
        }
        let max_tail = family
            .iter()
            .map(|s| projection_error(s, r, basis))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        let (mean_trace_distance, error) = match mean_fixed_point(&projected, cfg) {
            Ok(res) => (
                Some(trace_norm(&(res.mean.as_sym() - full.as_sym()))),
                None,
            ),
            Err(e) => (None, Some(e.to_string())),
        };
        Ok(RankRow {
            rank: r,
            mean_trace_distance,
            pairwise_discrepancy: discrepancy,
            max_tail,
            error,
        })
    })?;
    Ok(StabilityReport { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bures::procrustes_distance_sq;

    fn diag(d: &[f64]) -> Covariance {
        Covariance::from_diagonal(d).unwrap()
    }

    #[test]
    fn projection_examples() {
        let s = Covariance::from_row_slice(2, &[4.0, 1.0, 1.0, 2.0]).unwrap();
        let full = project(&s, 2, &Basis::Standard).unwrap();
        assert_eq!(full.as_matrix(), s.as_matrix());
        let p = project(&diag(&[4.0, 1.0]), 1, &Basis::Standard).unwrap();
        assert_eq!(p.as_matrix(), diag(&[4.0, 0.0]).as_matrix());

        let top = project(&s, 1, &Basis::Eigen(s.clone())).unwrap();
        let l1 = s.spectrum().values[0];
        let v1 = s.spectrum().vectors.column(0);
        assert!((top.as_matrix() - v1 * v1.transpose() * l1).amax() < 1e-13);
        assert!(project(&s, 0, &Basis::Standard).is_err());
        assert!(project(&s, 3, &Basis::Standard).is_err());
    }

    #[test]
    fn projection_error_examples() {
        assert_eq!(projection_error(&diag(&[4.0, 1.0]), 2, &Basis::Standard).unwrap(), 0.0);
        assert_eq!(projection_error(&diag(&[4.0, 1.0]), 1, &Basis::Standard).unwrap(), 1.0);
        assert_eq!(projection_error(&Covariance::identity(5), 2, &Basis::Standard).unwrap(), 3.0);
        let s = Covariance::from_row_slice(3, &[3.0, 1.0, 0.5, 1.0, 2.0, 0.2, 0.5, 0.2, 1.0]).unwrap();
        for r in 1..=3 {
            let e = projection_error(&s, r, &Basis::Standard).unwrap();
            let p = project(&s, r, &Basis::Standard).unwrap();
            assert!((e - procrustes_distance_sq(&s, &p).unwrap()).abs() < 1e-9);
        }
    }

    #[test]
    fn full_rank_experiment_has_no_discrepancy() {
        let fam = vec![
            Covariance::from_row_slice(2, &[3.0, 1.0, 1.0, 2.0]).unwrap(),
            diag(&[1.0, 4.0]),
        ];
        let rep = projection_stability_experiment(&fam, &[2], &Basis::Standard, &MeanConfig::default()).unwrap();
        let row = &rep.rows[0];
        assert!(row.pairwise_discrepancy < 1e-9);
        assert!(row.mean_trace_distance.unwrap() < 1e-9);
        assert_eq!(row.max_tail, 0.0);
    }

    #[test]
    fn diagonal_family_tail_sums() {
        let a = [4.0, 2.0, 1.0, 0.5];
        let b = [1.0, 3.0, 0.25, 2.0];
        let fam = vec![diag(&a), diag(&b)];
        let rep = projection_stability_experiment(&fam, &[1, 2, 3, 4], &Basis::Standard, &MeanConfig::default()).unwrap();
        // commuting: mean diagonal is ((√aₖ + √bₖ)/2)², truncated means drop the tail
        let mean: Vec<f64> = a.iter().zip(&b).map(|(x, y)| ((x.sqrt() + y.sqrt()) / 2.0).powi(2)).collect();
        let full_sq: f64 = a.iter().zip(&b).map(|(x, y)| (x.sqrt() - y.sqrt()).powi(2)).sum();
        for row in &rep.rows {
            let r = row.rank;
            let tail: f64 = mean[r..].iter().sum();
            assert!((row.mean_trace_distance.unwrap() - tail).abs() < 1e-9);
            let head_sq: f64 = a[..r].iter().zip(&b[..r]).map(|(x, y)| (x.sqrt() - y.sqrt()).powi(2)).sum();
            assert!((row.pairwise_discrepancy - (full_sq.sqrt() - head_sq.sqrt())).abs() < 1e-9);
            let max_tail = a[r..].iter().sum::<f64>().max(b[r..].iter().sum());
            assert!((row.max_tail - max_tail).abs() < 1e-12);
        }
        let traces: Vec<f64> = rep.rows.iter().map(|r| r.mean_trace_distance.unwrap()).collect();
        assert!(traces.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    }

    #[test]
    fn ranks_must_increase() {
        let fam = vec![diag(&[1.0, 2.0])];
        assert!(projection_stability_experiment(&fam, &[2, 1], &Basis::Standard, &MeanConfig::default()).is_err());
    }
}
