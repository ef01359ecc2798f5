//! Random-deformation generative model: `Σᵢ = Tᵢ Σ Tᵢ` with PSD maps whose
//! empirical average is exactly the identity.

use nalgebra::DMatrix;
use rand::Rng;
use serde::Serialize;

use super::rng::RngSpec;
use crate::barycenter::frechet_functional;
use crate::error::{Error, Result};
use crate::exec;
use crate::spectral::{norms, Covariance, SymMatrix};

#[derive(Clone, Debug)]
pub struct DeformationFamily {
    pub template: Covariance,
    pub maps: Vec<SymMatrix>,
    pub deformed: Vec<Covariance>,
}

/// Symmetric matrix with i.i.d. uniform `[-1, 1]` upper triangle.
fn uniform_symmetric(d: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    let mut g = DMatrix::zeros(d, d);
    for i in 0..d {
        for j in i..d {
            let v = rng.random_range(-1.0..=1.0);
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    g
}

/// Draws `n` maps `Tᵢ = I + Aᵢ` with `Σ Aᵢ = 0` and `max ‖Aᵢ‖_op = eps`, and
/// deforms `s` by each of them.
pub fn deformation_family(
    s: &Covariance,
    n: usize,
    eps: f64,
    rng: &RngSpec,
) -> Result<DeformationFamily> {
    if n < 2 {
        return Err(Error::OutOfRange {
            what: "family size",
            value: n as f64,
        });
    }
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::OutOfRange {
            what: "deformation size",
            value: eps,
        });
    }
    let d = s.dim();
    let raw = exec::map_range(n, |i| uniform_symmetric(d, &mut rng.draw(i as u64)));
    let mut centre = DMatrix::zeros(d, d);
    for g in &raw {
        centre += g;
    }
    centre /= n as f64;

    let mut dirs: Vec<DMatrix<f64>> = raw[..n - 1].iter().map(|g| g - &centre).collect();
    // last direction closes the sum exactly
    let mut last = DMatrix::zeros(d, d);
    for a in &dirs {
        last -= a;
    }
    dirs.push(last);

    let max_op = dirs
        .iter()
        .map(|a| norms(&SymMatrix::symmetrize(a.clone())).op)
        .fold(0.0_f64, f64::max);
    let scale = if max_op > 0.0 { eps / max_op } else { 0.0 };

    let maps: Vec<SymMatrix> = dirs
        .into_iter()
        .map(|a| &SymMatrix::identity(d) + &SymMatrix::symmetrize(a * scale))
        .collect();
    let deformed = exec::map_indexed(&maps, |_, t| Covariance::from_psd(t.congruence(s.as_sym())));
    Ok(DeformationFamily {
        template: s.clone(),
        maps,
        deformed,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct OptimalityReport {
    pub template_value: f64,
    pub min_perturbed_value: f64,
    pub perturbations: usize,
    /// Perturbations that scored strictly below the template.
    pub violations: usize,
}

/// Compares the Fréchet functional at `template` with its value at
/// `count` random perturbations `template + δE` for each `δ` in `deltas`,
/// `E` symmetric with unit operator norm. Perturbed matrices are projected
/// back onto the PSD cone.
pub fn generative_optimality(
    template: &Covariance,
    family: &[Covariance],
    deltas: &[f64],
    count: usize,
    rng: &RngSpec,
) -> Result<OptimalityReport> {
    let base = frechet_functional(template, family)?;
    let d = template.dim();
    let jobs: Vec<(usize, f64, usize)> = deltas
        .iter()
        .enumerate()
        .flat_map(|(di, &delta)| (0..count).map(move |j| (di, delta, j)))
        .collect();
    let values = exec::try_map_indexed(&jobs, |_, &(di, delta, j)| {
        let e = uniform_symmetric(d, &mut rng.substream(di).draw(j as u64));
        let e = SymMatrix::symmetrize(e);
        let op = norms(&e).op;
        let step = if op > 0.0 { e.scale(delta / op) } else { e };
        let perturbed = Covariance::from_psd(template.as_sym() + &step);
        frechet_functional(&perturbed, family)
    })?;
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(OptimalityReport {
        template_value: base,
        min_perturbed_value: min,
        perturbations: values.len(),
        violations: values.iter().filter(|&&v| v < base).count(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::barycenter::fixed_point_residual;

    fn template() -> Covariance {
        Covariance::from_row_slice(3, &[3.0, 0.5, 0.1, 0.5, 2.0, 0.3, 0.1, 0.3, 1.0]).unwrap()
    }

    #[test]
    fn maps_average_to_identity() {
        let f = deformation_family(&template(), 5, 0.3, &RngSpec::new(9, "d")).unwrap();
        let mut sum = DMatrix::zeros(3, 3);
        for t in &f.maps {
            sum += t.as_matrix();
        }
        assert!((sum / 5.0 - DMatrix::identity(3, 3)).amax() < 1e-12);
        let max_dev = f
            .maps
            .iter()
            .map(|t| norms(&(t - &SymMatrix::identity(3))).op)
            .fold(0.0, f64::max);
        assert!((max_dev - 0.3).abs() < 1e-12);
    }

    #[test]
    fn two_member_maps_are_reflections() {
        let f = deformation_family(&template(), 2, 0.5, &RngSpec::new(1, "d")).unwrap();
        let two_minus = &SymMatrix::identity(3).scale(2.0) - &f.maps[0];
        assert!((two_minus.as_matrix() - f.maps[1].as_matrix()).amax() < 1e-15);
    }

    #[test]
    fn zero_deformation_copies_template() {
        let f = deformation_family(&template(), 3, 0.0, &RngSpec::new(1, "d")).unwrap();
        for s in &f.deformed {
            assert_eq!(s.as_matrix(), template().as_matrix());
        }
    }

    #[test]
    fn template_solves_fixed_point_equation() {
        let f = deformation_family(&template(), 4, 0.3, &RngSpec::new(5, "d")).unwrap();
        assert!(fixed_point_residual(&template(), &f.deformed).unwrap() < 1e-8);
    }

    #[test]
    fn invalid_parameters() {
        let rng = RngSpec::new(0, "d");
        assert!(deformation_family(&template(), 1, 0.1, &rng).is_err());
        assert!(deformation_family(&template(), 3, 1.0, &rng).is_err());
        assert!(deformation_family(&template(), 3, -0.1, &rng).is_err());
    }
}
