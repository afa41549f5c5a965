//! Real spherical harmonics on the unit sphere `S^2`.

use std::collections::BTreeMap;
use std::f64::consts::SQRT_2;

use num_complex::Complex64;

use super::{CoefficientVector, EigenData, Family, Mode};
use crate::error::{Error, Result};
use crate::numerics::special::normalized_assoc_legendre;

const MAX_DEGREE: usize = 400;

/// All real harmonics of degree `l <= l_max`, index `l^2 + l + m`.
pub fn sphere_basis(l_max: usize) -> Result<EigenData> {
    if l_max > MAX_DEGREE {
        return Err(Error::Domain(format!("degree {l_max} exceeds the supported {MAX_DEGREE}")));
    }
    let count = (l_max + 1) * (l_max + 1);
    let mut eigenvalues = Vec::with_capacity(count);
    let mut modes = Vec::with_capacity(count);
    for l in 0..=l_max {
        let lam = ((l * (l + 1)) as f64).sqrt();
        for m in -(l as i64)..=(l as i64) {
            eigenvalues.push(lam);
            modes.push(Mode::Spherical { l, m });
        }
    }
    Ok(EigenData::from_sorted(Family::Sphere { l_max }, eigenvalues, modes, 1e-12))
}

/// Basis index of `Y_{l m}`.
pub fn sphere_index(l: usize, m: i64) -> usize {
    (l * l) as usize + (l as i64 + m) as usize
}

/// `(cos t, sin t, phi)` of a point, colatitude measured from the `x_0` axis.
pub(crate) fn angles(x: &[f64]) -> Result<(f64, f64, f64)> {
    if x.len() != 3 {
        return Err(Error::Domain(format!("sphere points live in R^3, got {} coordinates", x.len())));
    }
    let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
    if (r - 1.0).abs() > 1e-6 {
        return Err(Error::Domain(format!("point has norm {r}, expected 1")));
    }
    let rho = (x[1] * x[1] + x[2] * x[2]).sqrt();
    Ok((x[0] / r, rho / r, x[2].atan2(x[1])))
}

pub(crate) fn real_factor(m: i64, phi: f64) -> f64 {
    match m {
        0 => 1.0,
        m if m > 0 => SQRT_2 * (m as f64 * phi).cos(),
        m => SQRT_2 * ((-m) as f64 * phi).sin(),
    }
}

pub(crate) fn evaluate(basis: &EigenData, f: &CoefficientVector, x: &[f64]) -> Result<Complex64> {
    let (ct, st, phi) = angles(x)?;
    let mut top: BTreeMap<usize, usize> = BTreeMap::new();
    for c in f.entries() {
        if let Mode::Spherical { l, m } = basis.modes[c.index] {
            let e = top.entry(m.unsigned_abs() as usize).or_insert(l);
            *e = (*e).max(l);
        }
    }
    let tables: BTreeMap<usize, Vec<f64>> = top
        .into_iter()
        .map(|(m, lmax)| (m, normalized_assoc_legendre(m, lmax, ct, st)))
        .collect();
    let mut acc = Complex64::new(0.0, 0.0);
    for c in f.entries() {
        if let Mode::Spherical { l, m } = basis.modes[c.index] {
            let am = m.unsigned_abs() as usize;
            acc += c.value * tables[&am][l - am] * real_factor(m, phi);
        }
    }
    Ok(acc)
}
