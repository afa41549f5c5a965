//! Oscillatory-integral quasimodes concentrated at a blow-down point.
//!
//! In normal coordinates `x` at `z` the local piece is
//!
//! ```text
//! Phi(x) = (2 pi h)^{(1-n)/2} int exp(i <x, theta/|theta|> / h) chi_R(|theta|) dtheta
//! ```
//!
//! with `h = 1 / r_k` and `r_k = (2 pi / T)(k + beta / 4)`. The phase is
//! homogeneous of degree zero in `theta`, so in polar form the integral splits
//! into the radial mass `M_R = int chi_R(r) r^{n-1} dr` times the angular
//! integral `int_{S^{n-1}} exp(i |x| <e, w> / h) dw`.

mod residual;

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::dynamics::{classify_point, LoopParams, Verdict};
use crate::error::{Error, Result};
use crate::flow::morse_index_of_blowdown;
use crate::geometry::{normal_metric, ManifoldModel};
use crate::numerics::fit::{fit_exponent, FitResult};
use crate::numerics::quad::{composite_with_error, panels_for_phase};
use crate::numerics::smooth_step;
use crate::numerics::special::bessel_j0;

pub use residual::{patched_profile, residual_norm};

/// `r_k = (2 pi / T)(k + beta / 4)` for each `k`.
pub fn frequencies(period: f64, beta: usize, ks: impl IntoIterator<Item = usize>) -> Result<Vec<f64>> {
    if !(period > 0.0 && period.is_finite()) {
        return Err(Error::Domain(format!("period must be positive, got {period}")));
    }
    Ok(ks
        .into_iter()
        .map(|k| 2.0 * PI / period * (k as f64 + beta as f64 / 4.0))
        .collect())
}

/// Quadrature controls for oscillatory integrals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureControls {
    /// Panels per oscillation of the fastest factor; each panel carries a
    /// 16-point Gauss rule.
    pub nodes_per_oscillation: usize,
    /// Relative tolerance on the embedded error estimate.
    pub tolerance: f64,
}

impl Default for QuadratureControls {
    fn default() -> Self {
        QuadratureControls { nodes_per_oscillation: 10, tolerance: 1e-10 }
    }
}

/// Parameters shared by every mode of a quasimode family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuasimodeDefaults {
    pub cutoff_radius: f64,
    /// `None` picks `1 - 1/(2n)`.
    pub annulus_exponent: Option<f64>,
    /// Radius `eps_0` of the normal ball the mass is measured on.
    pub ball_radius: f64,
    pub quadrature: QuadratureControls,
}

impl Default for QuasimodeDefaults {
    fn default() -> Self {
        QuasimodeDefaults {
            cutoff_radius: 2.0,
            annulus_exponent: None,
            ball_radius: PI / 4.0,
            quadrature: QuadratureControls::default(),
        }
    }
}

/// The data defining one local quasimode `Phi_k`.
#[derive(Debug, Clone)]
pub struct QuasimodeSpec {
    pub model: ManifoldModel,
    pub z: Vec<f64>,
    pub period: f64,
    pub beta: usize,
    pub k: usize,
    pub cutoff_radius: f64,
    hbar: f64,
    annulus_exponent: f64,
    ball_radius: f64,
    pub quadrature: QuadratureControls,
    radial_mass: f64,
    radial_mass_error: f64,
}

impl QuasimodeSpec {
    pub fn new(model: ManifoldModel, z: Vec<f64>, period: f64, beta: usize, k: usize, cutoff_radius: f64) -> Result<Self> {
        Self::with_defaults(
            model,
            z,
            period,
            beta,
            k,
            &QuasimodeDefaults { cutoff_radius, ..QuasimodeDefaults::default() },
        )
    }

    pub fn with_defaults(
        model: ManifoldModel,
        z: Vec<f64>,
        period: f64,
        beta: usize,
        k: usize,
        defaults: &QuasimodeDefaults,
    ) -> Result<Self> {
        let n = model.dim();
        if n != 2 && n != 3 {
            return Err(Error::Unsupported(format!("quasimodes are built in dimensions 2 and 3, not {n}")));
        }
        let r = frequencies(period, beta, [k])?[0];
        if !(r > 0.0) {
            return Err(Error::Domain(format!("frequency r_k = {r} must be positive")));
        }
        if !(defaults.cutoff_radius > 1.0 && defaults.cutoff_radius.is_finite()) {
            return Err(Error::Domain(format!("cutoff radius must exceed 1, got {}", defaults.cutoff_radius)));
        }
        let (mass, mass_err) = radial_mass_with_error(n, defaults.cutoff_radius);
        let mut spec = QuasimodeSpec {
            model,
            z,
            period,
            beta,
            k,
            cutoff_radius: defaults.cutoff_radius,
            hbar: 1.0 / r,
            annulus_exponent: 1.0 - 1.0 / (2.0 * n as f64),
            ball_radius: PI / 4.0,
            quadrature: defaults.quadrature,
            radial_mass: mass,
            radial_mass_error: mass_err,
        };
        if let Some(d) = defaults.annulus_exponent {
            spec = spec.with_annulus_exponent(d)?;
        }
        spec.with_ball_radius(defaults.ball_radius)
    }

    /// Replace the semiclassical parameter, detaching it from `r_k`.
    pub fn with_hbar(mut self, hbar: f64) -> Result<Self> {
        if !(hbar > 0.0 && hbar.is_finite()) {
            return Err(Error::Domain(format!("hbar must be positive, got {hbar}")));
        }
        self.hbar = hbar;
        Ok(self)
    }

    pub fn with_annulus_exponent(mut self, delta: f64) -> Result<Self> {
        let n = self.dim() as f64;
        if !(delta > 1.0 - 1.0 / n && delta < 1.0) {
            return Err(Error::Domain(format!("annulus exponent {delta} outside ({}, 1)", 1.0 - 1.0 / n)));
        }
        self.annulus_exponent = delta;
        Ok(self)
    }

    pub fn with_ball_radius(mut self, eps0: f64) -> Result<Self> {
        let cap = self.model.injectivity_radius().min(1.0);
        if !(eps0 > 0.0 && eps0 < cap) {
            return Err(Error::Domain(format!("ball radius {eps0} outside (0, {cap})")));
        }
        self.ball_radius = eps0;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.model.dim()
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    /// `1 / hbar`, equal to `r_k` unless overridden.
    pub fn frequency(&self) -> f64 {
        1.0 / self.hbar
    }

    pub fn annulus_exponent(&self) -> f64 {
        self.annulus_exponent
    }

    pub fn ball_radius(&self) -> f64 {
        self.ball_radius
    }

    /// `M_R = int_0^inf chi_R(r) r^{n-1} dr`.
    pub fn radial_mass(&self) -> f64 {
        self.radial_mass
    }

    /// Radius `hbar^delta` separating the inner ball from the annulus.
    pub fn annulus_inner_radius(&self) -> f64 {
        self.hbar.powf(self.annulus_exponent)
    }

    fn prefactor(&self) -> f64 {
        (2.0 * PI * self.hbar).powf((1.0 - self.dim() as f64) / 2.0)
    }
}

/// Radial cutoff: 1 for `|r| <= R`, 0 for `|r| >= 2R`, smooth and monotone between.
pub fn cutoff(radius: f64, r: f64) -> f64 {
    1.0 - smooth_step((r.abs() - radius) / radius)
}

fn radial_mass_with_error(n: usize, radius: f64) -> (f64, f64) {
    let inner = radius.powi(n as i32) / n as f64;
    let (outer, err) = composite_with_error(
        |r| cutoff(radius, r) * r.powi(n as i32 - 1),
        radius,
        2.0 * radius,
        64,
    );
    (inner + outer, err)
}

/// `int_0^inf chi_R(r) r^{n-1} dr`.
pub fn radial_mass(n: usize, radius: f64) -> f64 {
    radial_mass_with_error(n, radius).0
}

/// Surface measure of the unit sphere `S^{n-1}`.
pub fn sphere_measure(n: usize) -> f64 {
    match n {
        2 => 2.0 * PI,
        3 => 4.0 * PI,
        _ => 2.0 * PI.powf(n as f64 / 2.0) / gamma_half_integer(n),
    }
}

fn gamma_half_integer(n: usize) -> f64 {
    // Gamma(n / 2) for integer n >= 1.
    if n % 2 == 0 {
        (1..n / 2).map(|k| k as f64).product()
    } else {
        let mut g = PI.sqrt();
        let mut x = 0.5;
        while x < n as f64 / 2.0 - 0.25 {
            g *= x;
            x += 1.0;
        }
        g
    }
}

/// `int_{S^{n-1}} exp(i s <e, w>) dw` in closed form.
pub fn angular_integral(n: usize, s: f64) -> Result<Complex64> {
    match n {
        2 => Ok(Complex64::new(2.0 * PI * bessel_j0(s), 0.0)),
        3 => {
            let sinc = if s.abs() < 1e-4 { 1.0 - s * s / 6.0 + s.powi(4) / 120.0 } else { s.sin() / s };
            Ok(Complex64::new(4.0 * PI * sinc, 0.0))
        }
        _ => Err(Error::Domain(format!("angular integral implemented for n = 2, 3, not {n}"))),
    }
}

/// The same angular integral by panel quadrature, with an error estimate.
pub fn angular_quadrature(n: usize, s: f64, nodes_per_oscillation: usize) -> Result<(Complex64, f64)> {
    match n {
        2 => {
            let panels = panels_for_phase(4.0 * s, nodes_per_oscillation);
            Ok(composite_with_error(
                |a: f64| Complex64::from_polar(1.0, s * a.cos()),
                0.0,
                2.0 * PI,
                panels,
            ))
        }
        3 => {
            let panels = panels_for_phase(2.0 * s, nodes_per_oscillation);
            let (v, e) = composite_with_error(
                |p: f64| Complex64::from_polar(p.sin(), s * p.cos()),
                0.0,
                PI,
                panels,
            );
            Ok((v * 2.0 * PI, e * 2.0 * PI))
        }
        _ => Err(Error::Domain(format!("angular integral implemented for n = 2, 3, not {n}"))),
    }
}

/// `phi(x, theta) = <x, theta / |theta|>`.
pub fn phase_eval(x_nc: &[f64], theta: &[f64]) -> Result<f64> {
    let t = theta.iter().map(|v| v * v).sum::<f64>().sqrt();
    if t == 0.0 || !t.is_finite() {
        return Err(Error::Domain("phase needs a nonzero frequency vector".into()));
    }
    if x_nc.len() != theta.len() {
        return Err(Error::Domain("x and theta dimensions differ".into()));
    }
    Ok(x_nc.iter().zip(theta).map(|(a, b)| a * b).sum::<f64>() / t)
}

fn unit(theta: &[f64]) -> Result<Vec<f64>> {
    let t = theta.iter().map(|v| v * v).sum::<f64>().sqrt();
    if t == 0.0 {
        return Err(Error::Domain("zero frequency vector".into()));
    }
    Ok(theta.iter().map(|v| v / t).collect())
}

/// `| |grad_x phi|_g^2 - 1 |` with the metric pulled back to normal coordinates.
///
/// The gradient of `phi` is the constant covector `theta/|theta|`, so this is
/// `|theta^T g^{-1}(x) theta - 1|`, which vanishes wherever `theta` is parallel
/// to `x` (the critical set of the phase) by the Gauss lemma.
pub fn eikonal_residual(model: &ManifoldModel, z: &[f64], x_nc: &[f64], theta: &[f64]) -> Result<f64> {
    let u = unit(theta)?;
    let g = normal_metric(model, z, x_nc)?;
    let ginv = g
        .try_inverse()
        .ok_or_else(|| Error::numerical("singular pulled-back metric", format!("x = {x_nc:?}")))?;
    let n = u.len();
    let mut q = 0.0;
    for i in 0..n {
        for j in 0..n {
            q += u[i] * ginv[(i, j)] * u[j];
        }
    }
    Ok((q - 1.0).abs())
}

/// `| <x, theta>_{g(x)} - <x, theta> |` for unit `theta` (unit at `z`, where the
/// metric is Euclidean). The Gauss lemma `g(x) x = x` makes this vanish.
pub fn gauss_pairing_defect(model: &ManifoldModel, z: &[f64], x_nc: &[f64], theta: &[f64]) -> Result<f64> {
    let u = unit(theta)?;
    let g = normal_metric(model, z, x_nc)?;
    let n = u.len();
    let mut pairing = 0.0;
    for i in 0..n {
        for j in 0..n {
            pairing += x_nc[i] * g[(i, j)] * u[j];
        }
    }
    Ok((pairing - phase_eval(x_nc, &u)?).abs())
}

/// Leading amplitude, identically 1.
pub fn amplitude(_x_nc: &[f64], _theta: &[f64]) -> f64 {
    1.0
}

/// Transport residual at the leading amplitude, by central differences:
/// `|g^{ij} d_i phi d_j a| + |sum_i d_i d_i phi| a` in normal coordinates.
pub fn transport_residual(model: &ManifoldModel, z: &[f64], x_nc: &[f64], theta: &[f64]) -> Result<f64> {
    let n = x_nc.len();
    let g = normal_metric(model, z, x_nc)?;
    let ginv = g
        .try_inverse()
        .ok_or_else(|| Error::numerical("singular pulled-back metric", format!("x = {x_nc:?}")))?;
    let h = 1e-3;
    let shifted = |i: usize, d: f64| {
        let mut y = x_nc.to_vec();
        y[i] += d;
        y
    };
    let mut dphi = vec![0.0; n];
    let mut da = vec![0.0; n];
    let mut lap = 0.0;
    let phi0 = phase_eval(x_nc, theta)?;
    for i in 0..n {
        let (p, m) = (shifted(i, h), shifted(i, -h));
        let (fp, fm) = (phase_eval(&p, theta)?, phase_eval(&m, theta)?);
        dphi[i] = (fp - fm) / (2.0 * h);
        da[i] = (amplitude(&p, theta) - amplitude(&m, theta)) / (2.0 * h);
        lap += (fp - 2.0 * phi0 + fm) / (h * h);
    }
    let mut cross = 0.0;
    for i in 0..n {
        for j in 0..n {
            cross += ginv[(i, j)] * dphi[i] * da[j];
        }
    }
    Ok(cross.abs() + lap.abs() * amplitude(x_nc, theta))
}

/// Value of `Phi_k` with its quadrature error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuasimodeValue {
    pub value: Complex64,
    pub error: f64,
}

fn radius_of(spec: &QuasimodeSpec, x_nc: &[f64]) -> Result<f64> {
    if x_nc.len() != spec.dim() {
        return Err(Error::Domain(format!("expected {} normal coordinates", spec.dim())));
    }
    let rho = x_nc.iter().map(|v| v * v).sum::<f64>().sqrt();
    if rho > spec.ball_radius {
        return Err(Error::Domain(format!("|x| = {rho} outside the normal ball of radius {}", spec.ball_radius)));
    }
    Ok(rho)
}

/// `Phi_k(x)` by panel quadrature of the angular integral times the radial mass.
pub fn quasimode_eval(spec: &QuasimodeSpec, x_nc: &[f64]) -> Result<QuasimodeValue> {
    let rho = radius_of(spec, x_nc)?;
    let n = spec.dim();
    let (ang, ang_err) = angular_quadrature(n, rho / spec.hbar, spec.quadrature.nodes_per_oscillation)?;
    let pref = spec.prefactor();
    let value = ang * spec.radial_mass * pref;
    let error = pref * (spec.radial_mass * ang_err + ang.norm() * spec.radial_mass_error);
    let scale = pref * spec.radial_mass * sphere_measure(n);
    if error > spec.quadrature.tolerance * scale {
        return Err(Error::numerical(
            "quasimode quadrature missed its tolerance",
            format!("estimate {error:e} against {:e}", spec.quadrature.tolerance * scale),
        ));
    }
    Ok(QuasimodeValue { value, error })
}

/// `Phi_k` as a function of the normal radius, from the closed-form angular integral.
pub fn quasimode_profile(spec: &QuasimodeSpec, rho: f64) -> Complex64 {
    let ang = angular_integral(spec.dim(), rho / spec.hbar).expect("dimension checked at construction");
    ang * spec.radial_mass * spec.prefactor()
}

/// Coefficients `(c_+, c_-)` of the two-wave asymptotics.
///
/// From `J_0(s) ~ sqrt(2/(pi s)) cos(s - pi/4)` for `n = 2` and the exact
/// `sin(s)/s` for `n = 3`, each folded against the radial mass.
pub fn stationary_phase_coefficients(spec: &QuasimodeSpec) -> (Complex64, Complex64) {
    let m = spec.radial_mass;
    match spec.dim() {
        2 => (Complex64::from_polar(m, -PI / 4.0), Complex64::from_polar(m, PI / 4.0)),
        _ => (Complex64::new(0.0, -m), Complex64::new(0.0, m)),
    }
}

/// `|x|^{(1-n)/2} (c_+ e^{i|x|/h} + c_- e^{-i|x|/h})`, valid on the annulus `|x| >= h^delta`.
pub fn stationary_phase_approx(x_nc: &[f64], spec: &QuasimodeSpec) -> Result<Complex64> {
    let rho = radius_of(spec, x_nc)?;
    let inner = spec.annulus_inner_radius();
    if rho < inner {
        return Err(Error::Domain(format!("|x| = {rho} inside the excluded ball of radius {inner}")));
    }
    let (cp, cm) = stationary_phase_coefficients(spec);
    let s = rho / spec.hbar;
    let w = Complex64::from_polar(1.0, s);
    Ok((cp * w + cm * w.conj()) * rho.powf((1.0 - spec.dim() as f64) / 2.0))
}

/// Mass of `|Phi_k|^2` over the normal ball, split at `h^delta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normalization {
    pub total: f64,
    pub ball: f64,
    pub annulus: f64,
    /// `|S^{n-1}| (|c_+|^2 + |c_-|^2) eps_0`, the limit of `total`.
    pub leading: f64,
    pub error: f64,
}

/// `Phi_k / sqrt(C_k)`, of unit mass on the normal ball.
#[derive(Debug, Clone)]
pub struct NormalizedQuasimode {
    pub spec: QuasimodeSpec,
    pub normalization: Normalization,
}

impl NormalizedQuasimode {
    pub fn eval(&self, x_nc: &[f64]) -> Result<Complex64> {
        let rho = radius_of(&self.spec, x_nc)?;
        Ok(quasimode_profile(&self.spec, rho) / self.normalization.total.sqrt())
    }

    /// `|Phi_k(z)| / sqrt(C_k)`.
    pub fn center_modulus(&self) -> f64 {
        quasimode_profile(&self.spec, 0.0).norm() / self.normalization.total.sqrt()
    }
}

fn mass_between(spec: &QuasimodeSpec, a: f64, b: f64) -> (f64, f64) {
    let n = spec.dim();
    let meas = sphere_measure(n);
    let panels = panels_for_phase(2.0 * (b - a) / spec.hbar, spec.quadrature.nodes_per_oscillation).max(16);
    let (v, e) = composite_with_error(
        |r: f64| quasimode_profile(spec, r).norm_sqr() * r.powi(n as i32 - 1),
        a,
        b,
        panels,
    );
    (meas * v, meas * e)
}

/// Mass `C_k = int_{|x| < eps_0} |Phi_k|^2 dx` in normal coordinates and the rescaled quasimode.
pub fn l2_normalize(spec: &QuasimodeSpec) -> Result<NormalizedQuasimode> {
    let split = spec.annulus_inner_radius().min(spec.ball_radius);
    let (ball, e1) = mass_between(spec, 0.0, split);
    let (annulus, e2) = mass_between(spec, split, spec.ball_radius);
    let total = ball + annulus;
    let error = e1 + e2;
    if error > spec.quadrature.tolerance.max(1e-12) * total * 1e3 {
        return Err(Error::numerical("normalization quadrature missed its tolerance", format!("{error:e}")));
    }
    let (cp, cm) = stationary_phase_coefficients(spec);
    let leading = sphere_measure(spec.dim()) * (cp.norm_sqr() + cm.norm_sqr()) * spec.ball_radius;
    Ok(NormalizedQuasimode {
        spec: spec.clone(),
        normalization: Normalization { total, ball, annulus, leading, error },
    })
}

/// Sequence of normalized peak values and its power-law fit.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthFit {
    pub ks: Vec<usize>,
    /// `(r_k, |Phi_k(z)| / sqrt(C_k))`.
    pub points: Vec<(f64, f64)>,
    pub normalizations: Vec<f64>,
    pub fit: FitResult,
    pub period: f64,
    pub beta: usize,
}

/// Growth table for a known period and Morse index.
pub fn growth_table(
    model: &ManifoldModel,
    z: &[f64],
    period: f64,
    beta: usize,
    ks: &[usize],
    defaults: &QuasimodeDefaults,
) -> Result<GrowthFit> {
    if ks.len() < 5 {
        return Err(Error::Domain(format!("a growth fit needs at least 5 modes, got {}", ks.len())));
    }
    let mut points = Vec::with_capacity(ks.len());
    let mut normalizations = Vec::with_capacity(ks.len());
    for &k in ks {
        let spec = QuasimodeSpec::with_defaults(model.clone(), z.to_vec(), period, beta, k, defaults)?;
        let q = l2_normalize(&spec)?;
        points.push((spec.frequency(), q.center_modulus()));
        normalizations.push(q.normalization.total);
    }
    let fit = fit_exponent(&points)?;
    Ok(GrowthFit { ks: ks.to_vec(), points, normalizations, fit, period, beta })
}

/// Classify `z`, read off `T` and `beta`, and fit the growth of `|Phi_k(z)|`.
pub fn sup_growth(model: &ManifoldModel, z: &[f64], ks: &[usize], defaults: &QuasimodeDefaults) -> Result<GrowthFit> {
    if ks.len() < 5 {
        return Err(Error::Domain(format!("a growth fit needs at least 5 modes, got {}", ks.len())));
    }
    let cls = classify_point(model, z, &LoopParams::for_model(model))?;
    let period = match cls.verdict {
        Verdict::BlowDown { period } if cls.identity_map => period,
        Verdict::BlowDown { .. } => {
            return Err(Error::Precondition("blow-down point whose return map is not the identity".into()))
        }
        other => return Err(Error::Precondition(format!("point is not a blow-down point ({other:?})"))),
    };
    let beta = morse_index_of_blowdown(model, z, period, 8)?;
    growth_table(model, z, period, beta, ks, defaults)
}

/// Convergence of the normalization constants along a mode ladder.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizationConvergence {
    /// `(hbar_k, C_k)`.
    pub samples: Vec<(f64, f64)>,
    /// Intercept of the least-squares line `C_k = C_inf + A hbar_k`.
    pub limit: f64,
    pub slope: f64,
    /// Power-law fit of `|C_k - C_inf|` against `hbar_k`.
    pub rate: FitResult,
}

pub fn normalization_convergence(
    model: &ManifoldModel,
    z: &[f64],
    period: f64,
    beta: usize,
    ks: &[usize],
    defaults: &QuasimodeDefaults,
) -> Result<NormalizationConvergence> {
    if ks.len() < 5 {
        return Err(Error::Domain(format!("a convergence fit needs at least 5 modes, got {}", ks.len())));
    }
    let mut samples = Vec::with_capacity(ks.len());
    for &k in ks {
        let spec = QuasimodeSpec::with_defaults(model.clone(), z.to_vec(), period, beta, k, defaults)?;
        samples.push((spec.hbar(), l2_normalize(&spec)?.normalization.total));
    }
    let n = samples.len() as f64;
    let mx = samples.iter().map(|s| s.0).sum::<f64>() / n;
    let my = samples.iter().map(|s| s.1).sum::<f64>() / n;
    let sxx: f64 = samples.iter().map(|s| (s.0 - mx).powi(2)).sum();
    let sxy: f64 = samples.iter().map(|s| (s.0 - mx) * (s.1 - my)).sum();
    let slope = sxy / sxx;
    let limit = my - slope * mx;
    let gaps: Vec<(f64, f64)> = samples.iter().map(|&(h, c)| (h, (c - limit).abs())).collect();
    let rate = fit_exponent(&gaps)?;
    Ok(NormalizationConvergence { samples, limit, slope, rate })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sphere_spec(k: usize) -> QuasimodeSpec {
        let m = ManifoldModel::unit_sphere();
        let z = m.pole().unwrap();
        QuasimodeSpec::new(m, z, 2.0 * PI, 2, k, 2.0).unwrap()
    }

    #[test]
    fn frequency_arithmetic() {
        let r = frequencies(2.0 * PI, 2, [5, 0]).unwrap();
        assert_eq!(r, vec![5.5, 0.5]);
        assert_eq!(frequencies(2.0 * PI, 0, [0]).unwrap(), vec![0.0]);
        assert!(frequencies(0.0, 0, [1]).is_err());
    }

    #[test]
    fn zero_frequency_spec_rejected() {
        let m = ManifoldModel::unit_sphere();
        let z = m.pole().unwrap();
        assert!(QuasimodeSpec::new(m.clone(), z.clone(), 2.0 * PI, 0, 0, 2.0).is_err());
        assert!(QuasimodeSpec::new(m, z, 2.0 * PI, 2, 3, 1.0).is_err());
    }

    #[test]
    fn phase_basics() {
        assert_eq!(phase_eval(&[0.0, 0.0], &[1.0, 2.0]).unwrap(), 0.0);
        let v = phase_eval(&[0.3, 0.4], &[3.0, 4.0]).unwrap();
        assert!((v - 0.5).abs() < 1e-15);
        assert!(phase_eval(&[0.1, 0.1], &[0.0, 0.0]).is_err());
    }

    #[test]
    fn angular_integral_small_argument() {
        assert!((angular_integral(2, 0.0).unwrap().re - 2.0 * PI).abs() < 1e-15);
        assert!((angular_integral(3, 0.0).unwrap().re - 4.0 * PI).abs() < 1e-15);
        assert!(angular_integral(4, 1.0).is_err());
    }

    #[test]
    fn radial_mass_bounds() {
        // chi_R is 1 on [0, R] and vanishes beyond 2R; the smooth transition
        // is symmetric, so in 1D it contributes exactly R/2.
        let m = radial_mass(1, 2.0);
        assert!((m - 3.0).abs() < 1e-12, "{m}");
        let m2 = radial_mass(2, 2.0);
        assert!(m2 > 2.0 && m2 < 8.0);
    }

    #[test]
    fn center_value_is_real_positive() {
        let spec = sphere_spec(30);
        let v = quasimode_eval(&spec, &[0.0, 0.0]).unwrap();
        let want = (2.0 * PI * spec.hbar()).powf(-0.5) * 2.0 * PI * spec.radial_mass();
        assert!((v.value.re - want).abs() < 1e-10 * want);
        assert!(v.value.im.abs() < 1e-10 * want);
    }

    #[test]
    fn annulus_required_for_asymptotics() {
        let spec = sphere_spec(40);
        let inner = spec.annulus_inner_radius();
        assert!(stationary_phase_approx(&[0.5 * inner, 0.0], &spec).is_err());
        assert!(stationary_phase_approx(&[0.0, 1.1 * inner], &spec).is_ok());
    }

    #[test]
    fn coefficients_have_equal_modulus() {
        let (cp, cm) = stationary_phase_coefficients(&sphere_spec(10));
        assert!((cp.norm() - cm.norm()).abs() < 1e-15);
        assert!(cp.norm() > 0.0);
    }

    #[test]
    fn growth_needs_five_modes() {
        let m = ManifoldModel::unit_sphere();
        let z = m.pole().unwrap();
        let e = sup_growth(&m, &z, &[10, 20, 30, 40], &QuasimodeDefaults::default());
        assert!(matches!(e, Err(Error::Domain(_))));
    }
}
