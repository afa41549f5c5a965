//! Explicit eigenbases of the Laplacian on the round sphere, flat tori and
//! surfaces of revolution, with window projectors, sup-norm estimation,
//! smoothed spectral sums and the quasimode inequality checks built on them.
//!
//! Points are passed in each model's natural coordinates: ambient unit
//! vectors in `R^3` for the sphere, Cartesian `R^2` points for the torus and
//! chart coordinates `(s, theta)` for a surface of revolution.

mod cache;
mod kernel;
mod lemma2;
mod revolution;
mod sphere;
mod supnorm;
mod torus;

use std::f64::consts::PI;
use std::ops::Range;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::Profile;

pub use cache::{read_cache, sor_basis_cached, write_cache};
pub use kernel::{smoothed_sum, DirectionCutoff, SmoothingKernel};
pub use lemma2::{
    admissibility_check, band_check, far_part, lemma2_check, lemma2_sweep, near_part, random_torus_coefficients, Admissibility, BandReport,
    Lemma2Report, RandomSpectrum,
};
pub use revolution::{sor_basis, sor_basis_with, RadialMode, RevolutionOptions};
pub use sphere::{sphere_basis, sphere_index};
pub use supnorm::{evaluation_grid, projector_sup_norm, sup_norm, SupEstimate, SupOptions};
pub use torus::{square_lattice_basis, torus_basis};

/// Which eigenfunction a basis index refers to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mode {
    /// Real spherical harmonic of degree `l`; `m > 0` is the cosine and
    /// `m < 0` the sine member.
    Spherical { l: usize, m: i64 },
    /// `exp(i k.x) / sqrt(covolume)` with `k = 2 pi (n0 b0* + n1 b1*)`.
    Lattice { index: [i64; 2], wave: [f64; 2] },
    /// `R(s) cos(m theta)` for `m >= 0`, `R(s) sin(|m| theta)` for `m < 0`.
    Revolution { m: i64, radial: usize },
}

/// Model-specific data needed for evaluation.
#[derive(Debug, Clone)]
pub(crate) enum Family {
    Sphere {
        l_max: usize,
    },
    Torus {
        basis: [[f64; 2]; 2],
        covolume: f64,
    },
    Revolution {
        profile: Profile,
        radial: Vec<RadialMode>,
        /// Cell-centered meridian nodes of the fine grid.
        nodes: Vec<f64>,
        /// Profile values at the nodes.
        weights: Vec<f64>,
        m_max: usize,
        lambda_max: f64,
    },
}

/// A run of equal eigenvalues.
#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    pub lambda: f64,
    pub indices: Range<usize>,
}

/// An explicit orthonormal eigenbasis, sorted by frequency `lambda_j`
/// (the square root of the Laplace eigenvalue).
#[derive(Debug, Clone)]
pub struct EigenData {
    pub(crate) family: Family,
    pub(crate) eigenvalues: Vec<f64>,
    pub(crate) modes: Vec<Mode>,
    pub(crate) clusters: Vec<Cluster>,
}

impl EigenData {
    pub(crate) fn from_sorted(family: Family, eigenvalues: Vec<f64>, modes: Vec<Mode>, tol: f64) -> Self {
        let mut clusters: Vec<Cluster> = Vec::new();
        for (j, &lam) in eigenvalues.iter().enumerate() {
            match clusters.last_mut() {
                Some(c) if (lam - c.lambda).abs() <= tol * (1.0 + c.lambda) => c.indices.end = j + 1,
                _ => clusters.push(Cluster { lambda: lam, indices: j..j + 1 }),
            }
        }
        EigenData { family, eigenvalues, modes, clusters }
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn clusters(&self) -> &[Cluster] {
        &self.clusters
    }

    pub fn label(&self) -> String {
        match &self.family {
            Family::Sphere { l_max } => format!("sphere(l_max={l_max})"),
            Family::Torus { basis, .. } => format!("torus({basis:?})"),
            Family::Revolution { profile, m_max, lambda_max, .. } => {
                format!("revolution({profile:?}, m_max={m_max}, lambda_max={lambda_max})")
            }
        }
    }

    /// Largest frequency in the basis.
    pub fn lambda_max(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    /// Riemannian area of the underlying surface.
    pub fn volume(&self) -> f64 {
        match &self.family {
            Family::Sphere { .. } => 4.0 * PI,
            Family::Torus { covolume, .. } => *covolume,
            Family::Revolution { nodes, weights, .. } => {
                let h = nodes.get(1).map_or(0.0, |s1| s1 - nodes[0]);
                2.0 * PI * h * weights.iter().sum::<f64>()
            }
        }
    }

    pub fn is_torus(&self) -> bool {
        matches!(self.family, Family::Torus { .. })
    }

    pub fn torus_lattice(&self) -> Option<[[f64; 2]; 2]> {
        match &self.family {
            Family::Torus { basis, .. } => Some(*basis),
            _ => None,
        }
    }

    /// Indices whose frequency lies in the window; windows are intervals, so
    /// this is a contiguous range of the sorted basis.
    pub fn window_range(&self, window: &WindowSpec) -> Range<usize> {
        let (lo, lo_closed, hi, hi_closed) = window.bounds();
        let start = self
            .eigenvalues
            .partition_point(|&l| if lo_closed { l < lo } else { l <= lo });
        let end = self
            .eigenvalues
            .partition_point(|&l| if hi_closed { l <= hi } else { l < hi });
        start..end.max(start)
    }

    /// Value of the `j`-th eigenfunction at `x`.
    pub fn eval_mode(&self, j: usize, x: &[f64]) -> Result<Complex64> {
        let mode = *self
            .modes
            .get(j)
            .ok_or_else(|| Error::Domain(format!("basis index {j} out of range")))?;
        match (&self.family, mode) {
            (Family::Sphere { .. }, Mode::Spherical { l, m }) => {
                let (ct, st, phi) = sphere::angles(x)?;
                let p = crate::numerics::special::normalized_assoc_legendre(m.unsigned_abs() as usize, l, ct, st);
                Ok(Complex64::new(sphere::real_factor(m, phi) * p[p.len() - 1], 0.0))
            }
            (Family::Torus { covolume, .. }, Mode::Lattice { wave, .. }) => {
                let ph = wave[0] * x[0] + wave[1] * x[1];
                Ok(Complex64::from_polar(1.0 / covolume.sqrt(), ph))
            }
            (Family::Revolution { radial, nodes, .. }, Mode::Revolution { m, radial: r }) => {
                let (s, th) = revolution::chart_point(x)?;
                let value = radial[r].value_at(nodes, s) * revolution::angular(m, th);
                Ok(Complex64::new(value, 0.0))
            }
            _ => unreachable!("mode and family disagree"),
        }
    }

    /// `f(x)` for `f = sum c_j e_j`.
    pub fn evaluate(&self, f: &CoefficientVector, x: &[f64]) -> Result<Complex64> {
        if f.is_empty() {
            return Ok(Complex64::new(0.0, 0.0));
        }
        match &self.family {
            Family::Sphere { .. } => sphere::evaluate(self, f, x),
            Family::Torus { covolume, .. } => {
                let mut acc = Complex64::new(0.0, 0.0);
                for c in &f.entries {
                    if let Mode::Lattice { wave, .. } = self.modes[c.index] {
                        acc += c.value * Complex64::from_polar(1.0, wave[0] * x[0] + wave[1] * x[1]);
                    }
                }
                Ok(acc / covolume.sqrt())
            }
            Family::Revolution { .. } => {
                let mut acc = Complex64::new(0.0, 0.0);
                for c in &f.entries {
                    acc += c.value * self.eval_mode(c.index, x)?;
                }
                Ok(acc)
            }
        }
    }

    /// Diagonal of the window projector kernel, `sum_{j in W} |e_j(x)|^2`.
    pub fn window_density(&self, window: &WindowSpec, x: &[f64]) -> Result<f64> {
        self.range_density(self.window_range(window), x)
    }

    /// `sum_{j in range} |e_j(x)|^2`; the range must not split a `+-m` pair.
    pub(crate) fn range_density(&self, range: Range<usize>, x: &[f64]) -> Result<f64> {
        if range.is_empty() {
            return Ok(0.0);
        }
        match &self.family {
            // Addition theorem: each full degree-l eigenspace contributes (2l+1)/(4 pi).
            Family::Sphere { .. } => {
                sphere::angles(x)?;
                Ok(range.len() as f64 / (4.0 * PI))
            }
            Family::Torus { covolume, .. } => Ok(range.len() as f64 / covolume),
            Family::Revolution { radial, nodes, .. } => {
                let (s, _) = revolution::chart_point(x)?;
                let mut acc = 0.0;
                for j in range {
                    if let Mode::Revolution { m, radial: r } = self.modes[j] {
                        // cos^2 + sin^2 of the two members combine; count each once.
                        if m < 0 {
                            continue;
                        }
                        let v = radial[r].value_at(nodes, s);
                        let weight = if m == 0 { 1.0 / (2.0 * PI) } else { 1.0 / PI };
                        acc += weight * v * v;
                    }
                }
                Ok(acc)
            }
        }
    }

    /// Gram matrix of the listed eigenfunctions under a quadrature that is
    /// exact for the discrete basis (tensor Gauss rule on the sphere,
    /// trapezoid on the torus, midpoint rule in `s` on a surface of revolution).
    pub fn gram_matrix(&self, indices: &[usize]) -> Result<Vec<Vec<Complex64>>> {
        let points_weights = self.quadrature_rule(indices)?;
        let k = indices.len();
        let mut g = vec![vec![Complex64::new(0.0, 0.0); k]; k];
        for (x, w) in &points_weights {
            let vals: Vec<Complex64> = indices.iter().map(|&j| self.eval_mode(j, x)).collect::<Result<_>>()?;
            for a in 0..k {
                for b in 0..k {
                    g[a][b] += vals[a].conj() * vals[b] * *w;
                }
            }
        }
        Ok(g)
    }

    fn quadrature_rule(&self, indices: &[usize]) -> Result<Vec<(Vec<f64>, f64)>> {
        let lam = indices
            .iter()
            .map(|&j| self.eigenvalues.get(j).copied().ok_or_else(|| Error::Domain(format!("index {j}"))))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        let mut out = Vec::new();
        match &self.family {
            Family::Sphere { .. } => {
                let l = lam.ceil() as usize + 2;
                let rule = crate::numerics::quad::GaussLegendre::get((l + 2).max(8));
                let nphi = 2 * l + 4;
                for (ct, wt) in rule.nodes.iter().zip(&rule.weights) {
                    let st = (1.0 - ct * ct).sqrt();
                    for p in 0..nphi {
                        let phi = 2.0 * PI * p as f64 / nphi as f64;
                        out.push((vec![*ct, st * phi.cos(), st * phi.sin()], wt * 2.0 * PI / nphi as f64));
                    }
                }
            }
            Family::Torus { basis, covolume } => {
                let mut nmax = [0i64; 2];
                for &j in indices {
                    if let Mode::Lattice { index, .. } = self.modes[j] {
                        nmax[0] = nmax[0].max(index[0].abs());
                        nmax[1] = nmax[1].max(index[1].abs());
                    }
                }
                let n0 = 2 * nmax[0] as usize + 2;
                let n1 = 2 * nmax[1] as usize + 2;
                let w = covolume / (n0 * n1) as f64;
                for a in 0..n0 {
                    for b in 0..n1 {
                        let (u, v) = (a as f64 / n0 as f64, b as f64 / n1 as f64);
                        out.push((
                            vec![u * basis[0][0] + v * basis[1][0], u * basis[0][1] + v * basis[1][1]],
                            w,
                        ));
                    }
                }
            }
            Family::Revolution { nodes, weights, .. } => {
                let mut mmax = 0;
                for &j in indices {
                    if let Mode::Revolution { m, .. } = self.modes[j] {
                        mmax = mmax.max(m.unsigned_abs() as usize);
                    }
                }
                let h = nodes[1] - nodes[0];
                let nth = 2 * mmax + 2;
                for (s, f) in nodes.iter().zip(weights) {
                    for t in 0..nth {
                        let th = 2.0 * PI * t as f64 / nth as f64;
                        out.push((vec![*s, th], f * h * 2.0 * PI / nth as f64));
                    }
                }
            }
        }
        Ok(out)
    }
}

/// One coefficient of a [`CoefficientVector`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coefficient {
    pub index: usize,
    pub lambda: f64,
    pub value: Complex64,
}

/// A finite expansion `f = sum_j c_j e_j`, stored sorted by basis index.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CoefficientVector {
    entries: Vec<Coefficient>,
}

impl CoefficientVector {
    /// Build from `(index, value)` pairs; repeated indices are summed.
    pub fn new(basis: &EigenData, pairs: impl IntoIterator<Item = (usize, Complex64)>) -> Result<Self> {
        let mut entries: Vec<Coefficient> = Vec::new();
        for (index, value) in pairs {
            let lambda = *basis
                .eigenvalues
                .get(index)
                .ok_or_else(|| Error::Domain(format!("basis index {index} out of range (len {})", basis.len())))?;
            entries.push(Coefficient { index, lambda, value });
        }
        entries.sort_by_key(|c| c.index);
        let mut merged: Vec<Coefficient> = Vec::with_capacity(entries.len());
        for c in entries {
            match merged.last_mut() {
                Some(last) if last.index == c.index => last.value += c.value,
                _ => merged.push(c),
            }
        }
        Ok(CoefficientVector { entries: merged })
    }

    /// The single eigenfunction `e_j`.
    pub fn eigenfunction(basis: &EigenData, j: usize) -> Result<Self> {
        Self::new(basis, [(j, Complex64::new(1.0, 0.0))])
    }

    pub fn entries(&self) -> &[Coefficient] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `||f||_2`, by Parseval.
    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|c| c.value.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `||(Delta + lambda^2) f||_2 = sqrt(sum |lambda^2 - lambda_j^2|^2 |c_j|^2)`.
    pub fn laplace_residual(&self, lambda: f64) -> f64 {
        let l2 = lambda * lambda;
        self.entries
            .iter()
            .map(|c| (l2 - c.lambda * c.lambda).powi(2) * c.value.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Coefficients of `(Delta + lambda^2) f`.
    pub fn apply_shifted_laplacian(&self, lambda: f64) -> Self {
        let l2 = lambda * lambda;
        CoefficientVector {
            entries: self
                .entries
                .iter()
                .map(|c| Coefficient { value: c.value * (l2 - c.lambda * c.lambda), ..*c })
                .collect(),
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        CoefficientVector {
            entries: self.entries.iter().map(|c| Coefficient { value: c.value * s, ..*c }).collect(),
        }
    }

    /// Largest frequency carried.
    pub fn max_lambda(&self) -> f64 {
        self.entries.iter().map(|c| c.lambda).fold(0.0, f64::max)
    }

    pub fn filter(&self, keep: impl Fn(&Coefficient) -> bool) -> Self {
        CoefficientVector { entries: self.entries.iter().filter(|c| keep(c)).copied().collect() }
    }

    /// Coefficientwise sum.
    pub fn add(&self, other: &Self) -> Self {
        let mut out = Vec::with_capacity(self.len() + other.len());
        let (mut i, mut j) = (0, 0);
        while i < self.entries.len() || j < other.entries.len() {
            let take_left = j >= other.entries.len()
                || (i < self.entries.len() && self.entries[i].index < other.entries[j].index);
            let take_right = i >= self.entries.len()
                || (j < other.entries.len() && other.entries[j].index < self.entries[i].index);
            if take_left {
                out.push(self.entries[i]);
                i += 1;
            } else if take_right {
                out.push(other.entries[j]);
                j += 1;
            } else {
                let mut c = self.entries[i];
                c.value += other.entries[j].value;
                out.push(c);
                i += 1;
                j += 1;
            }
        }
        CoefficientVector { entries: out }
    }

    /// Largest coefficientwise difference.
    pub fn max_difference(&self, other: &Self) -> f64 {
        let diff = self.add(&other.scaled(-1.0));
        diff.entries.iter().map(|c| c.value.norm()).fold(0.0, f64::max)
    }
}

/// Spectral window, an interval of frequencies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WindowSpec {
    /// `[lo, hi]`, closed.
    Sharp { lo: f64, hi: f64 },
    /// `[0, mu)`.
    LowPass { mu: f64 },
    /// `[mu, infinity)`.
    HighPass { mu: f64 },
    /// `[start, start + 1)`.
    UnitBand { start: f64 },
}

impl WindowSpec {
    /// `[lambda, lambda + delta]`.
    pub fn sharp(lambda: f64, delta: f64) -> Result<Self> {
        if !(delta > 0.0) {
            return Err(Error::Domain(format!("window width must be positive, got {delta}")));
        }
        Ok(WindowSpec::Sharp { lo: lambda, hi: lambda + delta })
    }

    /// `[lambda - delta, lambda + delta]`.
    pub fn centered(lambda: f64, delta: f64) -> Result<Self> {
        if !(delta > 0.0) {
            return Err(Error::Domain(format!("window half-width must be positive, got {delta}")));
        }
        Ok(WindowSpec::Sharp { lo: lambda - delta, hi: lambda + delta })
    }

    /// `(lo, lo_closed, hi, hi_closed)`.
    fn bounds(&self) -> (f64, bool, f64, bool) {
        match *self {
            WindowSpec::Sharp { lo, hi } => (lo, true, hi, true),
            WindowSpec::LowPass { mu } => (f64::NEG_INFINITY, true, mu, false),
            WindowSpec::HighPass { mu } => (mu, true, f64::INFINITY, true),
            WindowSpec::UnitBand { start } => (start, true, start + 1.0, false),
        }
    }

    pub fn contains(&self, lambda: f64) -> bool {
        let (lo, lc, hi, hc) = self.bounds();
        let above = if lc { lambda >= lo } else { lambda > lo };
        let below = if hc { lambda <= hi } else { lambda < hi };
        above && below
    }
}

/// Keep the coefficients whose frequency lies in the window.
pub fn apply_window(window: &WindowSpec, f: &CoefficientVector) -> CoefficientVector {
    f.filter(|c| window.contains(c.lambda))
}

/// Keep the coefficients whose frequency lies outside the window.
pub fn apply_complement(window: &WindowSpec, f: &CoefficientVector) -> CoefficientVector {
    f.filter(|c| !window.contains(c.lambda))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(basis: &EigenData) -> CoefficientVector {
        let pairs = (0..basis.len()).step_by(3).map(|j| (j, Complex64::new(1.0 / (1.0 + j as f64), 0.5)));
        CoefficientVector::new(basis, pairs).unwrap()
    }

    #[test]
    fn low_and_high_pass_partition() {
        let basis = square_lattice_basis(2.0 * PI, 20.0).unwrap();
        let f = sample(&basis);
        for mu in [0.0, 3.0, 7.5, 12.2] {
            let lo = apply_window(&WindowSpec::LowPass { mu }, &f);
            let hi = apply_window(&WindowSpec::HighPass { mu }, &f);
            assert_eq!(lo.add(&hi), f);
        }
    }

    #[test]
    fn windows_are_idempotent() {
        let basis = sphere_basis(20).unwrap();
        let f = sample(&basis);
        let w = WindowSpec::centered(8.0, 1.5).unwrap();
        let once = apply_window(&w, &f);
        assert_eq!(apply_window(&w, &once), once);
        assert!(once.norm() <= f.norm());
    }

    #[test]
    fn window_range_matches_contains() {
        let basis = square_lattice_basis(2.0 * PI, 30.0).unwrap();
        for w in [
            WindowSpec::Sharp { lo: 5.0, hi: 5.0 },
            WindowSpec::UnitBand { start: 5.0 },
            WindowSpec::LowPass { mu: 10.0 },
            WindowSpec::HighPass { mu: 29.0 },
        ] {
            let r = basis.window_range(&w);
            let count = basis.eigenvalues().iter().filter(|&&l| w.contains(l)).count();
            assert_eq!(r.len(), count, "{w:?}");
        }
    }

    #[test]
    fn sharp_window_needs_width() {
        assert!(WindowSpec::sharp(1.0, 0.0).is_err());
    }

    #[test]
    fn residual_vanishes_on_eigenfunction() {
        let basis = sphere_basis(10).unwrap();
        let f = CoefficientVector::eigenfunction(&basis, 30).unwrap();
        assert!(f.laplace_residual(basis.eigenvalues()[30]) < 1e-12);
    }
}
