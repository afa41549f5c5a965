//! Residual of the globally patched zonal quasimode on rotationally symmetric
//! models.
//!
//! Around each pole the local piece is `sqrt(rho / f(rho)) J_0(r rho)` in the
//! geodesic distance `rho` from that pole. The two pieces are glued with a
//! smooth partition of unity across the equator; the southern piece carries
//! the phase `exp(i (r_k T/2 - pi beta/4)) = (-1)^k` picked up along half a
//! loop, which is consistent only when `r_k` satisfies the quantization rule.

use std::f64::consts::PI;

use super::QuasimodeSpec;
use crate::error::{Error, Result};
use crate::geometry::{ModelKind, Pole, Profile};
use crate::numerics::quad::{panels_for_phase, GaussLegendre};
use crate::numerics::smooth_step;
use crate::numerics::special::{bessel_j0, legendre_all};
use crate::spectral::{EigenData, Mode};

/// Meridian profile seen from `z`: `f_z(rho)` with `rho` the distance from `z`.
struct Meridian {
    profile: Profile,
    from_south: bool,
}

impl Meridian {
    fn of(spec: &QuasimodeSpec) -> Result<Self> {
        match spec.model.kind() {
            ModelKind::RoundSphere { dim: 2, radius } if (*radius - 1.0).abs() < 1e-12 => {
                let z = &spec.z;
                if z.len() != 3 || (z[0].abs() - 1.0).abs() > 1e-9 {
                    return Err(Error::Precondition("the zonal quasimode is centered at a pole".into()));
                }
                Ok(Meridian { profile: Profile::Sine, from_south: z[0] < 0.0 })
            }
            ModelKind::SurfaceOfRevolution { profile } => match spec.model.sor_pole(&spec.z) {
                Some(p) => Ok(Meridian { profile: profile.clone(), from_south: p == Pole::South }),
                None => Err(Error::Precondition("the zonal quasimode is centered at a pole".into())),
            },
            _ => Err(Error::Unsupported(format!("no patched quasimode on {}", spec.model.label()))),
        }
    }

    fn length(&self) -> f64 {
        self.profile.length()
    }

    /// Distance from `z` of the meridian point `s`.
    fn rho(&self, s: f64) -> f64 {
        if self.from_south {
            self.length() - s
        } else {
            s
        }
    }

    fn f_from_z(&self, rho: f64) -> f64 {
        let s = if self.from_south { self.length() - rho } else { rho };
        self.profile.jet(s).f
    }

    fn f_from_antipode(&self, rho: f64) -> f64 {
        self.f_from_z(self.length() - rho)
    }
}

fn half_density(rho: f64, f: f64) -> f64 {
    if rho < 1e-8 {
        1.0
    } else {
        (rho / f).sqrt()
    }
}

fn profile_value(m: &Meridian, r: f64, glue: f64, rho: f64) -> f64 {
    let l = m.length();
    let chi = 1.0 - smooth_step((rho - 0.25 * l) / (0.5 * l));
    let mut v = 0.0;
    if chi > 0.0 {
        v += chi * half_density(rho, m.f_from_z(rho)) * bessel_j0(r * rho);
    }
    if chi < 1.0 {
        let rs = l - rho;
        v += (1.0 - chi) * glue * half_density(rs, m.f_from_antipode(rho)) * bessel_j0(r * rs);
    }
    v
}

/// Patched zonal quasimode at distance `rho` from `z` (unnormalized).
pub fn patched_profile(spec: &QuasimodeSpec, rho: f64) -> Result<f64> {
    let m = Meridian::of(spec)?;
    Ok(profile_value(&m, spec.frequency(), glue_sign(spec), rho))
}

fn glue_sign(spec: &QuasimodeSpec) -> f64 {
    (PI * spec.k as f64).cos()
}

/// `||(-Delta - r_k^2) Phi|| / ||Phi||` for the patched zonal quasimode, from
/// its coefficients in the zonal eigenfunctions of `basis`.
pub fn residual_norm(spec: &QuasimodeSpec, basis: &EigenData) -> Result<f64> {
    let meridian = Meridian::of(spec)?;
    let r = spec.frequency();
    let glue = glue_sign(spec);
    let needed = 2.0 * r + 20.0;
    if basis.lambda_max() < needed {
        return Err(Error::Precondition(format!(
            "basis reaches lambda = {}, the expansion needs {needed}",
            basis.lambda_max()
        )));
    }
    let (coeffs, norm2): (Vec<(f64, f64)>, f64) = if let Some(radial) = basis.radial_modes() {
        if basis.profile() != Some(&meridian.profile) {
            return Err(Error::Unsupported("basis profile differs from the model".into()));
        }
        let (nodes, weights) = basis.meridian_rule().expect("revolution basis");
        let phi: Vec<f64> = nodes.iter().map(|&s| profile_value(&meridian, r, glue, meridian.rho(s))).collect();
        let norm2 = 2.0 * PI * phi.iter().zip(&weights).map(|(p, w)| p * p * w).sum::<f64>();
        let coeffs = radial
            .iter()
            .filter(|rm| rm.m == 0)
            .map(|rm| {
                let c: f64 = rm.values.iter().zip(&phi).zip(&weights).map(|((v, p), w)| v * p * w).sum();
                (rm.lambda, (2.0 * PI).sqrt() * c)
            })
            .collect();
        (coeffs, norm2)
    } else if matches!(basis.modes().first(), Some(Mode::Spherical { .. })) {
        if meridian.profile != Profile::Sine {
            return Err(Error::Unsupported("sphere basis paired with a non-spherical model".into()));
        }
        let l_max = basis.clusters().len() - 1;
        let rule = GaussLegendre::get(16);
        let panels = panels_for_phase((r + l_max as f64) * PI, 10);
        let h = PI / panels as f64;
        let mut acc = vec![0.0; l_max + 1];
        let mut norm2 = 0.0;
        let mut p = Vec::new();
        for k in 0..panels {
            let mid = (k as f64 + 0.5) * h;
            for (x, w) in rule.nodes.iter().zip(&rule.weights) {
                let s = mid + 0.5 * h * x;
                let weight = w * 0.5 * h * 2.0 * PI * s.sin();
                let phi = profile_value(&meridian, r, glue, meridian.rho(s));
                norm2 += weight * phi * phi;
                legendre_all(l_max, s.cos(), &mut p);
                for (l, pl) in p.iter().enumerate() {
                    acc[l] += weight * phi * pl * ((2 * l + 1) as f64 / (4.0 * PI)).sqrt();
                }
            }
        }
        let coeffs = acc
            .into_iter()
            .enumerate()
            .map(|(l, c)| (((l * (l + 1)) as f64).sqrt(), c))
            .collect();
        (coeffs, norm2)
    } else {
        return Err(Error::Unsupported("zonal expansions need a sphere or surface-of-revolution basis".into()));
    };
    let captured: f64 = coeffs.iter().map(|(_, c)| c * c).sum::<f64>() / norm2;
    if (1.0 - captured).abs() > 1e-6 {
        return Err(Error::numerical(
            "zonal expansion does not capture the quasimode",
            format!("captured fraction {captured}"),
        ));
    }
    let r2 = r * r;
    let res2: f64 = coeffs.iter().map(|(lam, c)| (lam * lam - r2).powi(2) * c * c).sum();
    Ok((res2 / norm2).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ManifoldModel;
    use crate::spectral::sphere_basis;

    #[test]
    fn patched_profile_continuous_and_peaked() {
        let m = ManifoldModel::unit_sphere();
        let spec = QuasimodeSpec::new(m.clone(), m.pole().unwrap(), 2.0 * PI, 2, 12, 2.0).unwrap();
        assert!((patched_profile(&spec, 0.0).unwrap() - 1.0).abs() < 1e-14);
        let a = patched_profile(&spec, 1.0).unwrap();
        let b = patched_profile(&spec, 1.0 + 1e-7).unwrap();
        assert!((a - b).abs() < 1e-5);
    }

    #[test]
    fn small_mode_has_finite_residual() {
        let m = ManifoldModel::unit_sphere();
        let spec = QuasimodeSpec::new(m.clone(), m.pole().unwrap(), 2.0 * PI, 2, 0, 2.0).unwrap();
        let b = sphere_basis(60).unwrap();
        let res = residual_norm(&spec, &b).unwrap();
        assert!(res.is_finite());
    }

    #[test]
    fn torus_is_unsupported() {
        let m = ManifoldModel::square_torus(4.0);
        let spec = QuasimodeSpec::new(m, vec![0.0, 0.0], 1.0, 0, 3, 2.0).unwrap();
        let b = sphere_basis(50).unwrap();
        assert!(matches!(residual_norm(&spec, &b), Err(Error::Unsupported(_))));
    }
}
