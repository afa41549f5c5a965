//! Plane waves on a flat torus `R^2 / Gamma`.

use std::f64::consts::PI;

use super::{EigenData, Family, Mode};
use crate::error::{Error, Result};

const MAX_FREQUENCY: f64 = 500.0;

/// Dual basis `b*` with `b_i . b*_j = delta_ij`.
pub(crate) fn dual_basis(basis: &[[f64; 2]; 2]) -> Result<[[f64; 2]; 2]> {
    let det = basis[0][0] * basis[1][1] - basis[0][1] * basis[1][0];
    if det.abs() < 1e-12 {
        return Err(Error::Domain("degenerate lattice basis".into()));
    }
    Ok([
        [basis[1][1] / det, -basis[1][0] / det],
        [-basis[0][1] / det, basis[0][0] / det],
    ])
}

/// Exponentials `exp(i k.x) / sqrt(covolume)` for all dual-lattice `k` with `|k| <= lambda_max`.
pub fn torus_basis(basis: [[f64; 2]; 2], lambda_max: f64) -> Result<EigenData> {
    if !(lambda_max >= 0.0 && lambda_max <= MAX_FREQUENCY) {
        return Err(Error::Domain(format!("lambda_max must lie in [0, {MAX_FREQUENCY}], got {lambda_max}")));
    }
    let dual = dual_basis(&basis)?;
    let covolume = (basis[0][0] * basis[1][1] - basis[0][1] * basis[1][0]).abs();
    let bound = |b: [f64; 2]| (lambda_max * b[0].hypot(b[1]) / (2.0 * PI)).floor() as i64 + 1;
    let (r0, r1) = (bound(basis[0]), bound(basis[1]));
    let mut items: Vec<(f64, [i64; 2], [f64; 2])> = Vec::new();
    for n0 in -r0..=r0 {
        for n1 in -r1..=r1 {
            let k = [
                2.0 * PI * (n0 as f64 * dual[0][0] + n1 as f64 * dual[1][0]),
                2.0 * PI * (n0 as f64 * dual[0][1] + n1 as f64 * dual[1][1]),
            ];
            let k2 = k[0] * k[0] + k[1] * k[1];
            if k2 <= lambda_max * lambda_max * (1.0 + 1e-14) {
                items.push((k2, [n0, n1], k));
            }
        }
    }
    items.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let eigenvalues = items.iter().map(|it| it.0.sqrt()).collect();
    let modes = items.into_iter().map(|(_, index, wave)| Mode::Lattice { index, wave }).collect();
    Ok(EigenData::from_sorted(Family::Torus { basis, covolume }, eigenvalues, modes, 1e-12))
}

/// Square torus of the given side.
pub fn square_lattice_basis(side: f64, lambda_max: f64) -> Result<EigenData> {
    if !(side > 0.0) {
        return Err(Error::Domain(format!("side must be positive, got {side}")));
    }
    torus_basis([[side, 0.0], [0.0, side]], lambda_max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multiplicity_of_five() {
        let b = square_lattice_basis(2.0 * PI, 6.0).unwrap();
        let c = b.clusters().iter().find(|c| (c.lambda - 5.0).abs() < 1e-12).unwrap();
        assert_eq!(c.indices.len(), 12);
    }

    #[test]
    fn constant_modulus() {
        let b = torus_basis([[1.0, 0.0], [0.4, 1.3]], 30.0).unwrap();
        let cov: f64 = 1.3;
        for j in (0..b.len()).step_by(17) {
            let v = b.eval_mode(j, &[0.37, -2.1]).unwrap();
            assert!((v.norm() - 1.0 / cov.sqrt()).abs() < 1e-14);
        }
    }

    #[test]
    fn plane_waves_are_periodic() {
        let basis = [[1.0, 0.2], [0.3, 1.1]];
        let b = torus_basis(basis, 20.0).unwrap();
        let x = [0.1, 0.7];
        for j in (0..b.len()).step_by(11) {
            let v0 = b.eval_mode(j, &x).unwrap();
            let v1 = b.eval_mode(j, &[x[0] + basis[1][0], x[1] + basis[1][1]]).unwrap();
            assert!((v0 - v1).norm() < 1e-11);
        }
    }

    #[test]
    fn orthonormal_subset() {
        let b = torus_basis([[1.0, 0.0], [0.4, 1.3]], 60.0).unwrap();
        let idx: Vec<usize> = (0..b.len()).step_by(b.len() / 20).take(20).collect();
        let g = b.gram_matrix(&idx).unwrap();
        for (a, row) in g.iter().enumerate() {
            for (c, v) in row.iter().enumerate() {
                let want = if a == c { 1.0 } else { 0.0 };
                assert!((v - want).norm() < 1e-12);
            }
        }
    }
}
