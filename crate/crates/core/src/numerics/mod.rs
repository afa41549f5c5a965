//! Numerical building blocks shared by the geometric and spectral modules.

pub mod fit;
pub mod ode;
pub mod quad;
pub mod special;
pub mod tridiag;

/// Smooth step: 0 for `t <= 0`, 1 for `t >= 1`, C-infinity in between.
///
/// Built as the normalized ratio of `exp(-1/t)` factors, so every derivative
/// vanishes at both ends.
pub fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    let a = (-1.0 / t).exp();
    let b = (-1.0 / (1.0 - t)).exp();
    a / (a + b)
}

/// Standard mollifier profile `exp(-1/(1-t^2))` on `|t| < 1`, zero outside.
pub fn mollifier(t: f64) -> f64 {
    if t.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - t * t)).exp()
    }
}

/// Wrap an angle to `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut w = a.rem_euclid(two_pi);
    if w > std::f64::consts::PI {
        w -= two_pi;
    }
    w
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
