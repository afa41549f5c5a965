//! Smoothing kernels, direction cutoffs and smoothed spectral sums.

use std::f64::consts::PI;
use std::sync::OnceLock;

use super::{EigenData, Mode, WindowSpec};
use crate::error::{Error, Result};
use crate::numerics::quad::{composite, panels_for_phase};
use crate::numerics::{mollifier, smooth_step, wrap_angle};

/// Even bump `rho = (phi * phi) / phi_hat(0)^2` with `phi(t) = m(4t)`, so
/// `rho` is supported in `|t| <= 1/2` and `rho_hat = |phi_hat|^2 / phi_hat(0)^2 >= 0`.
#[derive(Debug, Clone)]
pub struct SmoothingKernel {
    phi_hat_zero: f64,
    /// Beyond this frequency `rho_hat^2` stays below `WEIGHT_FLOOR`.
    tail_start: f64,
}

/// Weights below this are dropped from smoothed sums.
pub const WEIGHT_FLOOR: f64 = 1e-12;
const PHI_HALF_WIDTH: f64 = 0.25;
const SCAN_LIMIT: f64 = 4000.0;

impl SmoothingKernel {
    pub fn new() -> Result<Self> {
        let mut k = SmoothingKernel { phi_hat_zero: 1.0, tail_start: SCAN_LIMIT };
        k.phi_hat_zero = k.phi_hat(0.0);
        // Scan the decay envelope to find where the squared weight stays tiny.
        let step = 0.5;
        let mut tail = 0.0;
        let mut tau = SCAN_LIMIT;
        while tau > 0.0 {
            if k.weight(tau) >= WEIGHT_FLOOR {
                tail = tau;
                break;
            }
            tau -= step;
        }
        if tail >= SCAN_LIMIT - step {
            return Err(Error::numerical("smoothing kernel decays too slowly", format!("weight({SCAN_LIMIT}) too large")));
        }
        k.tail_start = tail + step;
        Ok(k)
    }

    /// Shared instance.
    pub fn standard() -> &'static SmoothingKernel {
        static KERNEL: OnceLock<SmoothingKernel> = OnceLock::new();
        KERNEL.get_or_init(|| SmoothingKernel::new().expect("standard smoothing kernel"))
    }

    pub fn bump(t: f64) -> f64 {
        mollifier(t / PHI_HALF_WIDTH)
    }

    fn phi_hat(&self, tau: f64) -> f64 {
        let panels = panels_for_phase(tau * PHI_HALF_WIDTH, 10).max(8);
        2.0 * composite(|t| Self::bump(t) * (tau * t).cos(), 0.0, PHI_HALF_WIDTH, panels, 16)
    }

    /// `rho_hat(tau)`, normalized to 1 at the origin.
    pub fn rho_hat(&self, tau: f64) -> f64 {
        let r = self.phi_hat(tau) / self.phi_hat_zero;
        r * r
    }

    /// Weight `rho_hat(tau)^2` used in smoothed sums.
    pub fn weight(&self, tau: f64) -> f64 {
        let r = self.rho_hat(tau);
        r * r
    }

    /// `rho(t)`, the normalized autocorrelation of the bump.
    pub fn rho(&self, t: f64) -> f64 {
        let t = t.abs();
        if t >= 2.0 * PHI_HALF_WIDTH {
            return 0.0;
        }
        let lo = t - PHI_HALF_WIDTH;
        let v = composite(|s| Self::bump(s) * Self::bump(s - t), lo, PHI_HALF_WIDTH, 32, 16);
        v / (self.phi_hat_zero * self.phi_hat_zero)
    }

    /// Half-width of the support of `rho`.
    pub fn support(&self) -> f64 {
        2.0 * PHI_HALF_WIDTH
    }

    /// Frequency beyond which `weight` is below [`WEIGHT_FLOOR`].
    pub fn tail_start(&self) -> f64 {
        self.tail_start
    }
}

/// Smooth cap on the unit circle: `b = 1` within `width` of `center`, zero
/// beyond `2 width`, with a smooth monotone transition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectionCutoff {
    pub center: f64,
    pub width: f64,
}

impl DirectionCutoff {
    pub fn new(center: f64, width: f64) -> Result<Self> {
        if !(width > 0.0 && 2.0 * width < PI) {
            return Err(Error::Domain(format!("cap width must lie in (0, pi/2), got {width}")));
        }
        Ok(DirectionCutoff { center, width })
    }

    /// Cap whose integral `int b` equals `measure`.
    pub fn with_measure(center: f64, measure: f64) -> Result<Self> {
        Self::new(center, measure / 3.0)
    }

    fn profile(t: f64) -> f64 {
        1.0 - smooth_step(t - 1.0)
    }

    /// `b` at the direction with angle `alpha`.
    pub fn value_at_angle(&self, alpha: f64) -> f64 {
        Self::profile(wrap_angle(alpha - self.center).abs() / self.width)
    }

    /// `b(xi)` for a nonzero planar vector; zero at the origin.
    pub fn value(&self, xi: [f64; 2]) -> f64 {
        if xi[0] == 0.0 && xi[1] == 0.0 {
            return 0.0;
        }
        self.value_at_angle(xi[1].atan2(xi[0]))
    }

    /// `B = 1 - b`.
    pub fn complement(&self, xi: [f64; 2]) -> f64 {
        1.0 - self.value(xi)
    }

    /// `int_{S^1} b`, exact: the transition integrates to half its length.
    pub fn measure(&self) -> f64 {
        3.0 * self.width
    }
}

/// `sum_j rho_hat(T (lambda - lambda_j))^2 |b e_j(x)|^2`, dropping weights below [`WEIGHT_FLOOR`].
///
/// With a cutoff the basis must be a torus, where `b(D / |D|)` multiplies each
/// plane wave by `b(k / |k|)`.
pub fn smoothed_sum(
    basis: &EigenData,
    t_smooth: f64,
    lambda: f64,
    x: &[f64],
    cutoff: Option<&DirectionCutoff>,
) -> Result<f64> {
    if !(t_smooth > 0.0) {
        return Err(Error::Domain(format!("smoothing time must be positive, got {t_smooth}")));
    }
    if cutoff.is_some() && !basis.is_torus() {
        return Err(Error::Unsupported("direction cutoffs act as exact multipliers only on a torus basis".into()));
    }
    let kernel = SmoothingKernel::standard();
    let reach = kernel.tail_start() / t_smooth;
    if lambda + reach > basis.lambda_max() {
        return Err(Error::Precondition(format!(
            "basis stops at {} but the kernel reaches {}",
            basis.lambda_max(),
            lambda + reach
        )));
    }
    let window = WindowSpec::Sharp { lo: lambda - reach, hi: lambda + reach };
    let range = basis.window_range(&window);
    let mut acc = 0.0;
    for cluster in basis.clusters() {
        if cluster.indices.end <= range.start || cluster.indices.start >= range.end {
            continue;
        }
        let w = kernel.weight(t_smooth * (lambda - cluster.lambda));
        if w < WEIGHT_FLOOR {
            continue;
        }
        let density = match cutoff {
            None => basis.range_density(cluster.indices.clone(), x)?,
            Some(b) => {
                let cov = basis.volume();
                cluster
                    .indices
                    .clone()
                    .map(|j| match basis.modes[j] {
                        Mode::Lattice { wave, .. } => b.value(wave).powi(2) / cov,
                        _ => 0.0,
                    })
                    .sum()
            }
        };
        acc += w * density;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::quad::composite;

    #[test]
    fn kernel_normalized_and_nonnegative() {
        let k = SmoothingKernel::standard();
        assert!((k.rho_hat(0.0) - 1.0).abs() < 1e-10);
        for i in 0..400 {
            assert!(k.rho_hat(i as f64 * 0.37) >= 0.0);
        }
        assert_eq!(k.rho(0.5), 0.0);
        assert_eq!(k.rho(0.75), 0.0);
        assert!(k.rho(0.49) >= 0.0);
        // rho_hat(0) = int rho.
        let total = composite(|t| k.rho(t), -0.5, 0.5, 64, 16);
        assert!((total - 1.0).abs() < 1e-8, "{total}");
    }

    #[test]
    fn rho_hat_is_fourier_transform_of_rho() {
        let k = SmoothingKernel::standard();
        for tau in [1.0, 7.5, 20.0] {
            let ft = composite(|t| k.rho(t) * (tau * t).cos(), -0.5, 0.5, 64, 16);
            assert!((ft - k.rho_hat(tau)).abs() < 1e-8, "tau = {tau}");
        }
    }

    #[test]
    fn cap_measure_and_complement() {
        let b = DirectionCutoff::with_measure(0.3, 0.16).unwrap();
        let m = composite(|a| b.value_at_angle(a), -PI, PI, 2000, 16);
        assert!((m - 0.16).abs() < 1e-9, "{m}");
        for i in 0..100 {
            let a = i as f64 * 0.0631;
            let xi = [a.cos(), a.sin()];
            let v = b.value(xi);
            assert!((0.0..=1.0).contains(&v));
            assert_eq!(v + b.complement(xi), 1.0);
        }
    }

    #[test]
    fn cutoff_needs_torus() {
        let s = super::super::sphere_basis(5).unwrap();
        let b = DirectionCutoff::new(0.0, 0.1).unwrap();
        assert!(matches!(
            smoothed_sum(&s, 1.0, 3.0, &[1.0, 0.0, 0.0], Some(&b)),
            Err(Error::Unsupported(_))
        ));
    }
}
