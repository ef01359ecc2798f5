use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use super::rng::RngSpec;
use crate::error::{Error, Result};
use crate::exec;
use crate::spectral::{sqrt_psd, Covariance};

/// `n` independent draws from `N(0, S)`, one per row, row `i` generated from
/// draw `i` of `rng`.
pub fn sample_gaussian(s: &Covariance, n: usize, rng: &RngSpec) -> DMatrix<f64> {
    let d = s.dim();
    let root = sqrt_psd(s);
    let rows = exec::map_range(n, |i| {
        let mut r = rng.draw(i as u64);
        let z = DVector::from_fn(d, |_, _| StandardNormal.sample(&mut r));
        root.as_matrix() * z
    });
    DMatrix::from_fn(n, d, |i, j| rows[i][j])
}

/// Second-moment matrix `XᵀX / n` of zero-mean rows.
pub fn empirical_covariance(samples: &DMatrix<f64>) -> DMatrix<f64> {
    samples.transpose() * samples / samples.nrows().max(1) as f64
}

#[derive(Clone, Debug, Serialize)]
pub struct MomentReport {
    pub samples: usize,
    /// `(tr S)² + 2‖S‖₂²`
    pub exact: f64,
    pub estimate: f64,
    pub std_error: f64,
    pub z_score: f64,
    /// `3 (tr S)²`
    pub bound: f64,
    pub rank: usize,
    pub within_five_se: bool,
    pub exact_within_bound: bool,
    /// Exact value attains the bound; happens only for rank ≤ 1.
    pub equality: bool,
}

/// Monte Carlo check of `E‖X‖⁴ = (tr S)² + 2‖S‖₂² ≤ 3 (tr S)²` for `X ~ N(0, S)`.
pub fn fourth_moment_check(s: &Covariance, n: usize, rng: &RngSpec) -> Result<MomentReport> {
    if n < 10_000 {
        return Err(Error::OutOfRange {
            what: "sample count",
            value: n as f64,
        });
    }
    let d = s.dim();
    let root = sqrt_psd(s);
    let fourth: Vec<f64> = exec::map_range(n, |i| {
        let mut r = rng.draw(i as u64);
        let z = DVector::from_fn(d, |_, _| StandardNormal.sample(&mut r));
        let x = root.as_matrix() * z;
        let sq = x.norm_squared();
        sq * sq
    });
    let nf = n as f64;
    let estimate = fourth.iter().sum::<f64>() / nf;
    let var = fourth.iter().map(|v| (v - estimate).powi(2)).sum::<f64>() / (nf - 1.0);
    let std_error = (var / nf).sqrt();

    let tr = s.trace();
    let hs_sq: f64 = s.spectrum().values.iter().map(|l| l * l).sum();
    let exact = tr * tr + 2.0 * hs_sq;
    let bound = 3.0 * tr * tr;
    let z_score = if std_error > 0.0 {
        (estimate - exact) / std_error
    } else if estimate == exact {
        0.0
    } else {
        f64::INFINITY
    };
    let scale = bound.max(1.0);
    Ok(MomentReport {
        samples: n,
        exact,
        estimate,
        std_error,
        z_score,
        bound,
        rank: s.rank(None),
        within_five_se: z_score.abs() <= 5.0,
        exact_within_bound: exact <= bound + 1e-12 * scale,
        equality: (bound - exact).abs() <= 1e-12 * scale,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_covariance_gives_zero_rows() {
        let x = sample_gaussian(&Covariance::zeros(3), 5, &RngSpec::new(1, "t"));
        assert_eq!(x, DMatrix::zeros(5, 3));
    }

    #[test]
    fn sampling_is_deterministic() {
        let s = Covariance::from_row_slice(2, &[2.0, 0.5, 0.5, 1.0]).unwrap();
        let rng = RngSpec::new(42, "det");
        assert_eq!(sample_gaussian(&s, 100, &rng), sample_gaussian(&s, 100, &rng));
    }

    #[test]
    fn identity_sample_covariance() {
        // CLT scale 3/√n ≈ 0.0095 per entry, well inside 0.05
        let x = sample_gaussian(&Covariance::identity(3), 100_000, &RngSpec::new(2024, "clt"));
        let c = empirical_covariance(&x);
        assert!((c - DMatrix::identity(3, 3)).amax() < 0.05);
    }

    #[test]
    fn exact_moment_values() {
        let rng = RngSpec::new(3, "m");
        let r = fourth_moment_check(&Covariance::identity(2), 10_000, &rng).unwrap();
        assert!((r.exact - 8.0).abs() < 1e-12);
        assert!(!r.equality);
        let r = fourth_moment_check(&Covariance::from_diagonal(&[2.0, 1.0]).unwrap(), 10_000, &rng).unwrap();
        assert!((r.exact - 19.0).abs() < 1e-12);
        // vvᵀ with v = (1, 2, −1), tr = 6
        let rank1 = Covariance::from_row_slice(3, &[1.0, 2.0, -1.0, 2.0, 4.0, -2.0, -1.0, -2.0, 1.0]).unwrap();
        let r = fourth_moment_check(&rank1, 10_000, &rng).unwrap();
        assert!((r.exact - 3.0 * 36.0).abs() < 1e-10);
        assert!(r.equality);
        assert_eq!(r.rank, 1);
        assert!(fourth_moment_check(&rank1, 100, &rng).is_err());
    }
}
