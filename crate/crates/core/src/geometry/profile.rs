//! Meridian profiles `f(s)` for surfaces of revolution `ds^2 + f(s)^2 dtheta^2`.

use std::f64::consts::PI;

use crate::numerics::mollifier;

/// Profile function of a surface of revolution, parametrized by meridian
/// arc length `s in [0, L]` with `f(0) = f(L) = 0` and `|f'| = 1` at both poles.
///
/// Internally the profile is extended to all of `R` as a `2L`-periodic odd
/// function, which turns the `(s, theta)` chart into a smooth double cover
/// through both poles.
#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    /// `f(s) = sin s`: the unit round sphere.
    Sine,
    /// `f(s) = sin s * (1 + amplitude * m((s - center) / width))` with `m` the
    /// unit-height mollifier. The bump stays away from the poles, so every
    /// meridian is still a geodesic loop of length `2 pi` through each pole.
    PerturbedSine { amplitude: f64, center: f64, width: f64 },
}

/// `(f, f', f'')` at a point.
#[derive(Debug, Clone, Copy)]
pub struct ProfileJet {
    pub f: f64,
    pub df: f64,
    pub ddf: f64,
}

impl Profile {
    pub fn length(&self) -> f64 {
        PI
    }

    pub fn validate(&self) -> Result<(), String> {
        match *self {
            Profile::Sine => Ok(()),
            Profile::PerturbedSine { amplitude, center, width } => {
                if amplitude <= -1.0 {
                    return Err(format!("amplitude {amplitude} makes the profile non-positive"));
                }
                if !(width > 0.0 && center - width > 0.0 && center + width < PI) {
                    return Err(format!(
                        "bump support [{}, {}] must lie strictly inside (0, pi)",
                        center - width,
                        center + width
                    ));
                }
                Ok(())
            }
        }
    }

    /// Jet on the canonical interval `[0, L]`.
    fn jet_canonical(&self, s: f64) -> ProfileJet {
        let (sn, cs) = s.sin_cos();
        match *self {
            Profile::Sine => ProfileJet { f: sn, df: cs, ddf: -sn },
            Profile::PerturbedSine { amplitude, center, width } => {
                let u = (s - center) / width;
                let (g, dg, ddg) = if u.abs() < 1.0 {
                    let one = 1.0 - u * u;
                    let m = std::f64::consts::E * mollifier(u);
                    let q1 = -2.0 * u / (one * one);
                    let q2 = -2.0 / (one * one) - 8.0 * u * u / (one * one * one);
                    (
                        1.0 + amplitude * m,
                        amplitude * m * q1 / width,
                        amplitude * m * (q1 * q1 + q2) / (width * width),
                    )
                } else {
                    (1.0, 0.0, 0.0)
                };
                ProfileJet {
                    f: sn * g,
                    df: cs * g + sn * dg,
                    ddf: -sn * g + 2.0 * cs * dg + sn * ddg,
                }
            }
        }
    }

    /// True when the perturbation is inactive at canonical `s`.
    fn unperturbed_at(&self, s: f64) -> bool {
        match *self {
            Profile::Sine => true,
            Profile::PerturbedSine { center, width, .. } => ((s - center) / width).abs() >= 1.0,
        }
    }

    /// Jet at an arbitrary real `s` via the odd `2L`-periodic extension.
    pub fn jet(&self, s: f64) -> ProfileJet {
        let l = self.length();
        let mut r = (s + l).rem_euclid(2.0 * l) - l; // r in [-L, L)
        let sign = if r < 0.0 {
            r = -r;
            -1.0
        } else {
            1.0
        };
        let j = self.jet_canonical(r);
        ProfileJet {
            f: sign * j.f,
            df: j.df,
            ddf: sign * j.ddf,
        }
    }

    /// Gaussian curvature `-f''/f`, continuous through the poles.
    pub fn curvature(&self, s: f64) -> f64 {
        let l = self.length();
        let r = (s + l).rem_euclid(2.0 * l) - l;
        let r = r.abs();
        if self.unperturbed_at(r) {
            return 1.0;
        }
        let j = self.jet_canonical(r);
        -j.ddf / j.f
    }

    /// Reduce an unfolded meridian coordinate to the canonical chart.
    ///
    /// Returns `(s_c, theta_shift, orientation)` where the canonical point is
    /// `(s_c, theta + theta_shift)` and `orientation = -1` on the reflected sheet.
    pub fn canonicalize(&self, s: f64) -> (f64, f64, f64) {
        let l = self.length();
        let r = s.rem_euclid(2.0 * l);
        if r <= l {
            (r, 0.0, 1.0)
        } else {
            (2.0 * l - r, PI, -1.0)
        }
    }

    /// Length of the shortest closed geodesic among meridian loops and parallels.
    pub fn shortest_closed_geodesic(&self) -> f64 {
        let l = self.length();
        let mut best = 2.0 * l;
        let n = 20_000;
        let mut prev = self.jet_canonical(l / n as f64).df;
        for i in 2..n {
            let s = i as f64 * l / n as f64;
            let d = self.jet_canonical(s).df;
            if prev.signum() != d.signum() {
                best = best.min(2.0 * PI * self.jet_canonical(s).f);
            }
            prev = d;
        }
        best
    }

    pub fn max_curvature(&self) -> f64 {
        let l = self.length();
        let n = 20_000;
        (1..n)
            .map(|i| self.curvature(i as f64 * l / n as f64))
            .fold(1.0_f64, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn odd_extension_is_smooth_through_poles() {
        let p = Profile::PerturbedSine { amplitude: 0.3, center: 1.2, width: 0.5 };
        for &s in &[0.0, PI, -PI, 2.0 * PI] {
            let a = p.jet(s - 1e-7);
            let b = p.jet(s + 1e-7);
            assert!((a.f - b.f).abs() < 1e-6);
            assert!((a.df - b.df).abs() < 1e-6);
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let p = Profile::PerturbedSine { amplitude: 0.3, center: 1.2, width: 0.5 };
        let h = 1e-5;
        for i in 1..40 {
            let s = 0.8 + i as f64 * 0.02;
            let j = p.jet(s);
            let fd = (p.jet(s + h).f - p.jet(s - h).f) / (2.0 * h);
            let fdd = (p.jet(s + h).df - p.jet(s - h).df) / (2.0 * h);
            assert!((j.df - fd).abs() < 1e-8, "f' at {s}");
            assert!((j.ddf - fdd).abs() < 1e-6, "f'' at {s}: {} vs {fdd}", j.ddf);
        }
    }

    #[test]
    fn sine_profile_is_round() {
        assert!((Profile::Sine.curvature(0.3) - 1.0).abs() < 1e-15);
        assert!((Profile::Sine.shortest_closed_geodesic() - 2.0 * PI).abs() < 1e-6);
    }
}
