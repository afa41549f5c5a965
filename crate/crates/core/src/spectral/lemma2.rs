//! Sup-norm inequalities for spectral windows and the admissibility test for
//! approximate eigenfunctions.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::supnorm::{sup_norm, SupOptions};
use super::{apply_window, CoefficientVector, EigenData, WindowSpec};
use crate::error::{Error, Result};

/// Both sides of the near-window and far-window estimates at one `(lambda, delta)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lemma2Report {
    pub lambda: f64,
    pub delta: f64,
    /// `||(Delta + lambda^2) f||_2`.
    pub residual: f64,
    /// `||chi_1 (I - chi_delta) f||_inf`.
    pub near_lhs: f64,
    /// `lambda^{1/2} (lambda delta)^{-1} ||(Delta + lambda^2) f||_2`.
    pub near_rhs: f64,
    /// `||(I - chi_1) S_{2 lambda} f||_inf`.
    pub far_lhs: f64,
    /// `lambda^{1/2} lambda^{-1} ||(Delta + lambda^2) f||_2`.
    pub far_rhs: f64,
}

fn ratio(lhs: f64, rhs: f64) -> f64 {
    if lhs == 0.0 {
        0.0
    } else if rhs == 0.0 {
        f64::INFINITY
    } else {
        lhs / rhs
    }
}

impl Lemma2Report {
    pub fn near_ratio(&self) -> f64 {
        ratio(self.near_lhs, self.near_rhs)
    }

    pub fn far_ratio(&self) -> f64 {
        ratio(self.far_lhs, self.far_rhs)
    }
}

fn dimension_factor(lambda: f64) -> f64 {
    // Surfaces: lambda^{(n-1)/2} with n = 2.
    lambda.sqrt()
}

/// `chi_1 (I - chi_delta) f`: frequencies in `[lambda-1, lambda+1]` but outside `[lambda-delta, lambda+delta]`.
pub fn near_part(f: &CoefficientVector, lambda: f64, delta: f64) -> Result<CoefficientVector> {
    let inner = WindowSpec::centered(lambda, delta)?;
    let outer = WindowSpec::centered(lambda, 1.0)?;
    Ok(f.filter(|c| outer.contains(c.lambda) && !inner.contains(c.lambda)))
}

/// `(I - chi_1) S_{2 lambda} f`.
pub fn far_part(f: &CoefficientVector, lambda: f64) -> Result<CoefficientVector> {
    let outer = WindowSpec::centered(lambda, 1.0)?;
    let low = WindowSpec::LowPass { mu: 2.0 * lambda };
    Ok(f.filter(|c| low.contains(c.lambda) && !outer.contains(c.lambda)))
}

/// Evaluate both sides of the two window estimates for `f`.
pub fn lemma2_check(
    basis: &EigenData,
    f: &CoefficientVector,
    lambda: f64,
    delta: f64,
    opts: &SupOptions,
) -> Result<Lemma2Report> {
    Ok(lemma2_sweep(basis, f, lambda, &[delta], opts)?.remove(0))
}

/// [`lemma2_check`] for several `delta` at once; the far part is shared.
pub fn lemma2_sweep(
    basis: &EigenData,
    f: &CoefficientVector,
    lambda: f64,
    deltas: &[f64],
    opts: &SupOptions,
) -> Result<Vec<Lemma2Report>> {
    if !(lambda > 0.0) {
        return Err(Error::Domain(format!("lambda must be positive, got {lambda}")));
    }
    if let Some(d) = deltas.iter().find(|d| !(**d > 0.0 && **d <= 1.0)) {
        return Err(Error::Domain(format!("delta must lie in (0, 1], got {d}")));
    }
    let residual = f.laplace_residual(lambda);
    let far_lhs = sup_norm(basis, &far_part(f, lambda)?, opts)?.value;
    let a = dimension_factor(lambda);
    deltas
        .iter()
        .map(|&delta| {
            let near_lhs = sup_norm(basis, &near_part(f, lambda, delta)?, opts)?.value;
            Ok(Lemma2Report {
                lambda,
                delta,
                residual,
                near_lhs,
                near_rhs: a / (lambda * delta) * residual,
                far_lhs,
                far_rhs: a / lambda * residual,
            })
        })
        .collect()
}

/// Both sides of the unit-band estimate at offset `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandReport {
    pub k: f64,
    /// `||Pi_{[lambda+k, lambda+k+1)} g||_inf`.
    pub lhs: f64,
    /// `lambda^{1/2} (lambda k)^{-1} ||Pi (Delta + lambda^2) g||_2`.
    pub rhs: f64,
}

impl BandReport {
    pub fn ratio(&self) -> f64 {
        ratio(self.lhs, self.rhs)
    }
}

pub fn band_check(basis: &EigenData, g: &CoefficientVector, lambda: f64, k: f64, opts: &SupOptions) -> Result<BandReport> {
    if !(k >= 1.0) {
        return Err(Error::Domain(format!("band offset must be at least 1, got {k}")));
    }
    let band = apply_window(&WindowSpec::UnitBand { start: lambda + k }, g);
    let lhs = sup_norm(basis, &band, opts)?.value;
    let rhs = dimension_factor(lambda) / (lambda * k) * band.laplace_residual(lambda);
    Ok(BandReport { k, lhs, rhs })
}

/// `(||(Delta + lambda^2) f||_2, ||S_{2 lambda}^perp f||_inf, ||f||_2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Admissibility {
    pub residual: f64,
    pub high_sup: f64,
    pub norm: f64,
}

pub fn admissibility_check(basis: &EigenData, f: &CoefficientVector, lambda: f64, opts: &SupOptions) -> Result<Admissibility> {
    let high = apply_window(&WindowSpec::HighPass { mu: 2.0 * lambda }, f);
    Ok(Admissibility {
        residual: f.laplace_residual(lambda),
        high_sup: sup_norm(basis, &high, opts)?.value,
        norm: f.norm(),
    })
}

/// Recipe for seeded random test functions on a torus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomSpectrum {
    /// Frequency the amplitudes concentrate around.
    pub lambda: f64,
    /// Largest frequency carried.
    pub spectrum_max: f64,
    pub seed: u64,
}

/// Unit-norm `f` with amplitudes `u_j (1 + |lambda_j - lambda|)^{-2}`, `u_j`
/// uniform on `[0, 1)`, and uniform random phases.
pub fn random_torus_coefficients(basis: &EigenData, spec: &RandomSpectrum) -> Result<CoefficientVector> {
    if !basis.is_torus() {
        return Err(Error::Unsupported("random test functions are drawn on torus bases".into()));
    }
    if spec.spectrum_max > basis.lambda_max() + 1e-9 {
        return Err(Error::Domain(format!(
            "spectrum_max {} exceeds the basis cutoff {}",
            spec.spectrum_max,
            basis.lambda_max()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let end = basis.window_range(&WindowSpec::Sharp { lo: 0.0, hi: spec.spectrum_max }).end;
    let pairs: Vec<(usize, Complex64)> = (0..end)
        .map(|j| {
            let amp: f64 = rng.gen::<f64>() / (1.0 + (basis.eigenvalues[j] - spec.lambda).abs()).powi(2);
            let phase: f64 = rng.gen::<f64>() * std::f64::consts::TAU;
            (j, Complex64::from_polar(amp, phase))
        })
        .collect();
    let f = CoefficientVector::new(basis, pairs)?;
    let n = f.norm();
    Ok(f.scaled(1.0 / n))
}

#[cfg(test)]
mod tests {
    use super::super::{sphere_basis, square_lattice_basis};
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn eigenfunction_has_empty_left_sides() {
        let b = square_lattice_basis(2.0 * PI, 12.0).unwrap();
        let j = b.window_range(&WindowSpec::Sharp { lo: 5.0, hi: 5.0 }).start;
        let f = CoefficientVector::eigenfunction(&b, j).unwrap();
        let r = lemma2_check(&b, &f, 5.0, 0.1, &SupOptions::default()).unwrap();
        assert_eq!(r.near_lhs, 0.0);
        assert_eq!(r.far_lhs, 0.0);
        assert_eq!(r.residual, 0.0);
        let a = admissibility_check(&b, &f, 5.0, &SupOptions::default()).unwrap();
        assert_eq!((a.residual, a.high_sup), (0.0, 0.0));
        assert!((a.norm - 1.0).abs() < 1e-15);
    }

    #[test]
    fn decomposition_is_exact() {
        let b = square_lattice_basis(2.0 * PI, 30.0).unwrap();
        let f = random_torus_coefficients(&b, &RandomSpectrum { lambda: 10.0, spectrum_max: 30.0, seed: 7 }).unwrap();
        let (lambda, delta) = (10.0, 0.3);
        let inner = WindowSpec::centered(lambda, delta).unwrap();
        let lhs = super::super::apply_complement(&inner, &f);
        let high = apply_window(&WindowSpec::HighPass { mu: 2.0 * lambda }, &f);
        let rhs = near_part(&f, lambda, delta).unwrap().add(&far_part(&f, lambda).unwrap()).add(&high);
        assert_eq!(lhs.max_difference(&rhs), 0.0);
    }

    #[test]
    fn seeded_draws_are_reproducible() {
        let b = square_lattice_basis(2.0 * PI, 15.0).unwrap();
        let spec = RandomSpectrum { lambda: 5.0, spectrum_max: 15.0, seed: 3 };
        let f1 = random_torus_coefficients(&b, &spec).unwrap();
        let f2 = random_torus_coefficients(&b, &spec).unwrap();
        assert_eq!(f1, f2);
        assert!((f1.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sphere_cluster_is_admissible() {
        let b = sphere_basis(30).unwrap();
        let l = 25usize;
        let start = l * l;
        let f = CoefficientVector::new(&b, (start..start + 2 * l + 1).map(|j| (j, Complex64::new(0.2, 0.0)))).unwrap();
        let lam = ((l * (l + 1)) as f64).sqrt();
        let a = admissibility_check(&b, &f, lam, &SupOptions::default()).unwrap();
        assert!(a.residual < 1e-9);
        assert_eq!(a.high_sup, 0.0);
    }
}
