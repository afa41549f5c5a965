//! Separated eigenfunctions `R(s) e^{i m theta}` on a surface of revolution
//! `ds^2 + f(s)^2 dtheta^2`.
//!
//! Each angular mode leaves the Sturm-Liouville problem
//! `-(f R')' / f + m^2 R / f^2 = lambda^2 R` on `(0, L)`, discretized by a
//! cell-centered finite-volume scheme. The flux `f` vanishes at the poles, so
//! no boundary condition is imposed there; regularity comes for free. The
//! scheme is symmetrized with the mass matrix `diag(f_i h)`, solved by Sturm
//! bisection on a coarse and a twice-finer grid, and Richardson-extrapolated.

use std::f64::consts::PI;

use super::{EigenData, Family, Mode};
use crate::error::{Error, Result};
use crate::geometry::Profile;
use crate::numerics::tridiag::SymTridiag;

/// Discretization controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RevolutionOptions {
    /// Coarse cell count; `None` picks `max(2000, 100 lambda_max)`.
    pub cells: Option<usize>,
    /// Largest relative eigenvalue change between refinements.
    pub tolerance: f64,
}

impl Default for RevolutionOptions {
    fn default() -> Self {
        RevolutionOptions { cells: None, tolerance: 1e-4 }
    }
}

/// One radial eigenfunction, normalized by `int R^2 f ds = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialMode {
    pub m: usize,
    pub lambda: f64,
    /// Eigenvalue of the fine discrete problem (the square of a frequency).
    pub discrete_eigenvalue: f64,
    /// Values at the fine-grid cell centers.
    pub values: Vec<f64>,
}

impl RadialMode {
    /// Cubic interpolation at `s in [0, L]`, using the parity `R(-s) = (-1)^m R(s)`
    /// across each pole.
    pub fn value_at(&self, nodes: &[f64], s: f64) -> f64 {
        let n = self.values.len() as i64;
        let h = PI / n as f64;
        let sign = if self.m % 2 == 0 { 1.0 } else { -1.0 };
        let get = |i: i64| -> f64 {
            if i < 0 {
                sign * self.values[(-i - 1) as usize]
            } else if i >= n {
                sign * self.values[(2 * n - 1 - i) as usize]
            } else {
                self.values[i as usize]
            }
        };
        debug_assert!(nodes.len() == self.values.len());
        let p = s / h - 0.5;
        let base = p.floor() as i64;
        let t = p - base as f64;
        let (y0, y1, y2, y3) = (get(base - 1), get(base), get(base + 1), get(base + 2));
        // Lagrange weights on offsets -1, 0, 1, 2.
        let w0 = -t * (t - 1.0) * (t - 2.0) / 6.0;
        let w1 = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0;
        let w2 = -(t + 1.0) * t * (t - 2.0) / 2.0;
        let w3 = (t + 1.0) * t * (t - 1.0) / 6.0;
        w0 * y0 + w1 * y1 + w2 * y2 + w3 * y3
    }
}

/// `(s, theta)` from a chart point.
pub(crate) fn chart_point(x: &[f64]) -> Result<(f64, f64)> {
    if x.len() != 2 {
        return Err(Error::Domain(format!("surface-of-revolution points are (s, theta), got {} values", x.len())));
    }
    if !(x[0] >= -1e-12 && x[0] <= PI + 1e-12) {
        return Err(Error::Domain(format!("meridian coordinate {} outside [0, pi]", x[0])));
    }
    Ok((x[0].clamp(0.0, PI), x[1]))
}

/// Normalized angular factor.
pub(crate) fn angular(m: i64, theta: f64) -> f64 {
    match m {
        0 => 1.0 / (2.0 * PI).sqrt(),
        m if m > 0 => (m as f64 * theta).cos() / PI.sqrt(),
        m => ((-m) as f64 * theta).sin() / PI.sqrt(),
    }
}

struct RadialProblem {
    matrix: SymTridiag,
    mass: Vec<f64>,
}

fn radial_problem(profile: &Profile, m: usize, cells: usize) -> RadialProblem {
    let l = profile.length();
    let h = l / cells as f64;
    let f: Vec<f64> = (0..cells).map(|i| profile.jet((i as f64 + 0.5) * h).f).collect();
    let face: Vec<f64> = (1..cells).map(|i| profile.jet(i as f64 * h).f).collect();
    let mass: Vec<f64> = f.iter().map(|fi| fi * h).collect();
    let m2 = (m * m) as f64;
    let mut diag = Vec::with_capacity(cells);
    for i in 0..cells {
        let left = if i > 0 { face[i - 1] } else { 0.0 };
        let right = if i + 1 < cells { face[i] } else { 0.0 };
        let k = (left + right) / h + m2 * h / f[i];
        diag.push(k / mass[i]);
    }
    let off = (0..cells - 1)
        .map(|i| -face[i] / h / (mass[i] * mass[i + 1]).sqrt())
        .collect();
    RadialProblem { matrix: SymTridiag::new(diag, off), mass }
}

/// Recompute a fine-grid eigenvector for a known discrete eigenvalue.
pub(crate) fn radial_vector(profile: &Profile, m: usize, fine_cells: usize, mu: f64) -> Vec<f64> {
    let p = radial_problem(profile, m, fine_cells);
    let v = p.matrix.eigenvector(mu);
    v.iter().zip(&p.mass).map(|(vi, w)| vi / w.sqrt()).collect()
}

pub(crate) fn default_cells(lambda_max: f64) -> usize {
    (100.0 * lambda_max).ceil().max(2000.0) as usize
}

/// Eigenpairs with `lambda <= lambda_max` across angular modes `m <= m_max`.
pub fn sor_basis(profile: &Profile, m_max: usize, lambda_max: f64) -> Result<EigenData> {
    sor_basis_with(profile, m_max, lambda_max, &RevolutionOptions::default())
}

pub fn sor_basis_with(
    profile: &Profile,
    m_max: usize,
    lambda_max: f64,
    opts: &RevolutionOptions,
) -> Result<EigenData> {
    profile.validate().map_err(Error::Domain)?;
    if !(lambda_max >= 0.0 && lambda_max.is_finite()) {
        return Err(Error::Domain(format!("lambda_max must be finite and non-negative, got {lambda_max}")));
    }
    let cells = opts.cells.unwrap_or_else(|| default_cells(lambda_max));
    let fine_cells = 2 * cells;
    let mu_cap = lambda_max * lambda_max * (1.0 + 1e-3) + 1e-6;
    let per_m: Vec<Result<Vec<RadialMode>>> = (0..=m_max)
        .map(|m| {
            let coarse = radial_problem(profile, m, cells);
            let fine = radial_problem(profile, m, fine_cells);
            let mu_f = fine.matrix.eigenvalues_below(mu_cap);
            let mut out = Vec::new();
            for (idx, &mf) in mu_f.iter().enumerate() {
                let mc = coarse.matrix.eigenvalue(idx);
                let ext = ((4.0 * mf - mc) / 3.0).max(0.0);
                let lam = ext.sqrt();
                let change = (lam - mf.max(0.0).sqrt()).abs() / lam.max(1.0);
                if change > opts.tolerance {
                    return Err(Error::numerical(
                        "radial discretization under-resolved",
                        format!("m = {m}, index = {idx}, lambda = {lam}, relative change = {change:e}, cells = {cells}"),
                    ));
                }
                if lam > lambda_max {
                    break;
                }
                let v = fine.matrix.eigenvector(mf);
                let values = v.iter().zip(&fine.mass).map(|(vi, w)| vi / w.sqrt()).collect();
                out.push(RadialMode { m, lambda: lam, discrete_eigenvalue: mf, values });
            }
            Ok(out)
        })
        .collect();
    let mut radial = Vec::new();
    for r in per_m {
        radial.extend(r?);
    }
    Ok(assemble(profile.clone(), radial, fine_cells, m_max, lambda_max))
}

pub(crate) fn assemble(
    profile: Profile,
    radial: Vec<RadialMode>,
    fine_cells: usize,
    m_max: usize,
    lambda_max: f64,
) -> EigenData {
    let h = profile.length() / fine_cells as f64;
    let nodes: Vec<f64> = (0..fine_cells).map(|i| (i as f64 + 0.5) * h).collect();
    let weights: Vec<f64> = nodes.iter().map(|&s| profile.jet(s).f).collect();
    let mut items: Vec<(f64, i64, usize)> = Vec::new();
    for (r, mode) in radial.iter().enumerate() {
        items.push((mode.lambda, mode.m as i64, r));
        if mode.m > 0 {
            items.push((mode.lambda, -(mode.m as i64), r));
        }
    }
    items.sort_by(|a, b| {
        a.0.total_cmp(&b.0)
            .then(a.1.unsigned_abs().cmp(&b.1.unsigned_abs()))
            .then(b.1.cmp(&a.1))
    });
    let eigenvalues = items.iter().map(|it| it.0).collect();
    let modes = items.iter().map(|&(_, m, radial)| Mode::Revolution { m, radial }).collect();
    EigenData::from_sorted(
        Family::Revolution { profile, radial, nodes, weights, m_max, lambda_max },
        eigenvalues,
        modes,
        1e-6,
    )
}

impl EigenData {
    /// Radial eigenfunctions of a surface-of-revolution basis.
    pub fn radial_modes(&self) -> Option<&[RadialMode]> {
        match &self.family {
            Family::Revolution { radial, .. } => Some(radial),
            _ => None,
        }
    }

    /// Meridian quadrature `(s_i, f(s_i) h)` matching the discrete inner product.
    pub fn meridian_rule(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        match &self.family {
            Family::Revolution { nodes, weights, .. } => {
                let h = PI / nodes.len() as f64;
                Some((nodes.clone(), weights.iter().map(|f| f * h).collect()))
            }
            _ => None,
        }
    }

    pub fn profile(&self) -> Option<&Profile> {
        match &self.family {
            Family::Revolution { profile, .. } => Some(profile),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::special::legendre_p;

    #[test]
    fn sine_profile_reproduces_sphere_spectrum() {
        let b = sor_basis(&Profile::Sine, 6, 12.0).unwrap();
        for mode in b.radial_modes().unwrap() {
            // l = m + radial order; recover l from the eigenvalue.
            let l = (0.5 * (-1.0 + (1.0 + 4.0 * mode.lambda * mode.lambda).sqrt())).round();
            let exact = (l * (l + 1.0)).sqrt();
            assert!((mode.lambda - exact).abs() <= 1e-3 * exact.max(1.0), "{} vs {}", mode.lambda, exact);
            assert!(l as usize >= mode.m);
        }
        // Multiplicity 2l+1 in every complete cluster.
        for c in b.clusters().iter().take(10) {
            let l = (0.5 * (-1.0 + (1.0 + 4.0 * c.lambda * c.lambda).sqrt())).round() as usize;
            if l <= 6 {
                assert_eq!(c.indices.len(), 2 * l + 1, "l = {l}");
            }
        }
    }

    #[test]
    fn ground_state_is_constant() {
        let b = sor_basis(&Profile::Sine, 0, 3.0).unwrap();
        let g = &b.radial_modes().unwrap()[0];
        assert!(g.lambda < 1e-8);
        let (nodes, _) = b.meridian_rule().unwrap();
        let v0 = g.value_at(&nodes, 0.0);
        let v1 = g.value_at(&nodes, 2.0);
        assert!((v0 - v1).abs() < 1e-10);
        assert!((v0 - 1.0 / 2f64.sqrt()).abs() < 1e-6);
    }

    #[test]
    fn zonal_modes_match_legendre() {
        let b = sor_basis(&Profile::Sine, 0, 8.0).unwrap();
        let (nodes, _) = b.meridian_rule().unwrap();
        for (l, mode) in b.radial_modes().unwrap().iter().enumerate() {
            let norm = ((2 * l + 1) as f64 / 2.0).sqrt();
            for s in [0.0, 0.4, 1.3, 2.9, PI] {
                let want = norm * legendre_p(l, s.cos());
                assert!((mode.value_at(&nodes, s) - want).abs() < 1e-4 * norm, "l = {l}, s = {s}");
            }
        }
    }

    #[test]
    fn discrete_gram_is_identity() {
        let profile = Profile::PerturbedSine { amplitude: 0.2, center: 1.4, width: 0.6 };
        let b = sor_basis(&profile, 4, 8.0).unwrap();
        let idx: Vec<usize> = (0..b.len()).take(20).collect();
        let g = b.gram_matrix(&idx).unwrap();
        for (a, row) in g.iter().enumerate() {
            for (c, v) in row.iter().enumerate() {
                let want = if a == c { 1.0 } else { 0.0 };
                assert!((v - want).norm() < 1e-6, "{a} {c} {v}");
            }
        }
    }
}
