//! Exponential and logarithm maps, normal coordinates and the pulled-back
//! metric in normal coordinates.

use nalgebra::{DMatrix, DVector};

use super::{GeodesicSystem, ManifoldModel, ModelKind, Representation};
use crate::error::{Error, Result};
use crate::numerics::ode::{integrate, OdeOptions};
use crate::numerics::{dot, norm};

/// A tangent vector at `base`, stored by its components in the orthonormal
/// frame at `base` (see [`ManifoldModel::frame_at`]; at a pole of a surface of
/// revolution the frame is the Cartesian one of the tangent plane).
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    base: Vec<f64>,
    components: Vec<f64>,
    norm: f64,
}

impl TangentVector {
    pub fn new(base: Vec<f64>, components: Vec<f64>) -> Self {
        let norm = norm(&components);
        TangentVector { base, components, norm }
    }

    pub fn zero(model: &ManifoldModel, base: Vec<f64>) -> Self {
        Self::new(base, vec![0.0; model.dim()])
    }

    pub fn base(&self) -> &[f64] {
        &self.base
    }

    pub fn components(&self) -> &[f64] {
        &self.components
    }

    /// Cached `|v|_g`.
    pub fn norm(&self) -> f64 {
        self.norm
    }

    /// The vector in native coordinates (ambient for embedded models, chart
    /// coordinates otherwise). Fails at a pole of a surface of revolution.
    pub fn native(&self, model: &ManifoldModel) -> Result<Vec<f64>> {
        let frame = model.frame_at(&self.base)?;
        let mut out = vec![0.0; model.native_dim()];
        for (c, e) in self.components.iter().zip(&frame) {
            for (o, ei) in out.iter_mut().zip(e) {
                *o += c * ei;
            }
        }
        Ok(out)
    }

    /// `|v|_g` recomputed from the metric.
    pub fn metric_norm(&self, model: &ManifoldModel) -> Result<f64> {
        if model.sor_pole(&self.base).is_some() {
            return Ok(norm(&self.components));
        }
        let v = self.native(model)?;
        Ok(model.inner(&self.base, &v, &v).sqrt())
    }
}

/// Endpoint state of the unit-speed geodesic from `z` in direction `u`
/// after length `r`, with the scalar Jacobi field `j(0) = 0, j'(0) = 1`.
fn shoot(model: &ManifoldModel, z: &[f64], u: &[f64], r: f64) -> Result<(Vec<f64>, f64)> {
    let sys = GeodesicSystem::with_jacobi(model);
    let mut y0 = model.initial_state(z, u)?;
    y0.extend([0.0, 1.0]);
    let sol = integrate(&sys, 0.0, &y0, r, &OdeOptions::default(), None)?;
    let j = sol.y_end[sys.base_dim()];
    let mut y = sol.y_end;
    y.truncate(sys.base_dim());
    Ok((y, j))
}

/// `exp_z(v)`: endpoint of the geodesic from `z` with initial velocity `v`
/// at time 1.
pub fn exp_map(model: &ManifoldModel, z: &[f64], v: &TangentVector) -> Result<Vec<f64>> {
    let r = v.norm();
    if !r.is_finite() {
        return Err(Error::Domain("tangent vector norm is not finite".into()));
    }
    if r == 0.0 {
        return Ok(model.canonical_point(z));
    }
    if let ModelKind::FlatTorus { .. } = model.kind() {
        let c = v.components();
        return Ok(model.canonical_point(&[z[0] + c[0], z[1] + c[1]]));
    }
    let u: Vec<f64> = v.components().iter().map(|c| c / r).collect();
    let sys = GeodesicSystem::new(model);
    let y0 = model.initial_state(z, &u)?;
    let sol = integrate(&sys, 0.0, &y0, r, &OdeOptions::default(), None)?;
    Ok(model.state_position(&sol.y_end))
}

/// Residual space used by the shooting method: ambient tangent vectors for
/// embedded models, frame components at the endpoint for chart models.
struct Differential {
    /// Columns: image of each frame vector at `z`.
    columns: Vec<Vec<f64>>,
    endpoint_state: Vec<f64>,
}

/// `d(exp_z)` at `w`, evaluated through the Jacobi field along the geodesic.
fn differential(model: &ManifoldModel, z: &[f64], w: &[f64]) -> Result<Differential> {
    let n = model.dim();
    let r = norm(w);
    if let ModelKind::FlatTorus { .. } = model.kind() {
        let p = model.canonical_point(&[z[0] + w[0], z[1] + w[1]]);
        return Ok(Differential {
            columns: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            endpoint_state: vec![p[0], p[1], 0.0, 0.0],
        });
    }
    if r < 1e-300 {
        // Degenerate: identity on the frame at z.
        let y = model.initial_state(z, &unit(n, 0))?;
        let columns = match model.representation() {
            Representation::Embedded => model.frame_at(z)?,
            Representation::Chart => (0..n).map(|i| unit(n, i)).collect(),
        };
        return Ok(Differential { columns, endpoint_state: y });
    }
    let u: Vec<f64> = w.iter().map(|c| c / r).collect();
    let (y, j) = shoot(model, z, &u, r)?;
    let scale = j / r;
    let mut columns = Vec::with_capacity(n);
    match model.representation() {
        Representation::Embedded => {
            let nd = model.native_dim();
            let frame = model.frame_at(z)?;
            let u_amb = combine(&frame, &u);
            let vel = y[nd..2 * nd].to_vec();
            let is_sphere = matches!(model.kind(), ModelKind::RoundSphere { .. });
            let (nz, np) = (model.unit_normal(z), model.unit_normal(&y[..nd]));
            for e in &frame {
                let a = dot(e, &u_amb);
                let perp: Vec<f64> = e.iter().zip(&u_amb).map(|(ei, ui)| ei - a * ui).collect();
                // Parallel transport of the normal direction: constant ambient
                // vector along a great circle; normal-cross-velocity on a surface.
                let transported = if is_sphere {
                    perp
                } else {
                    let b = dot(&perp, &cross(&nz, &u_amb));
                    cross(&np, &vel).into_iter().map(|c| b * c).collect()
                };
                columns.push(
                    vel.iter()
                        .zip(&transported)
                        .map(|(v, t)| a * v + scale * t)
                        .collect(),
                );
            }
        }
        Representation::Chart => {
            let p = model.state_position(&y);
            let g = model.direction_at(&p, &y)?;
            let e_end = rot90(&g, model.frame_orientation(&p));
            let u_perp = rot90(&u, model.frame_orientation(z));
            for i in 0..n {
                let a = u[i];
                let b = u_perp[i];
                columns.push(vec![a * g[0] + scale * b * e_end[0], a * g[1] + scale * b * e_end[1]]);
            }
        }
    }
    Ok(Differential { columns, endpoint_state: y })
}

fn unit(n: usize, i: usize) -> Vec<f64> {
    let mut e = vec![0.0; n];
    e[i] = 1.0;
    e
}

fn combine(frame: &[Vec<f64>], c: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; frame[0].len()];
    for (ci, e) in c.iter().zip(frame) {
        for (o, ei) in out.iter_mut().zip(e) {
            *o += ci * ei;
        }
    }
    out
}

fn cross(a: &[f64], b: &[f64]) -> Vec<f64> {
    vec![
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn rot90(v: &[f64], orientation: f64) -> Vec<f64> {
    vec![-orientation * v[1], orientation * v[0]]
}

/// Shooting residual at the endpoint `p` of the current guess.
fn residual(model: &ManifoldModel, y_end: &[f64], x: &[f64]) -> Result<Vec<f64>> {
    let p = model.state_position(y_end);
    match model.representation() {
        Representation::Embedded => {
            let nrm = model.unit_normal(&p);
            let d: Vec<f64> = x.iter().zip(&p).map(|(a, b)| a - b).collect();
            let dn = dot(&d, &nrm);
            Ok(d.iter().zip(&nrm).map(|(di, ni)| di - dn * ni).collect())
        }
        Representation::Chart => model.local_offset(&p, x),
    }
}

/// `log_z(x)`: the initial velocity of the shortest geodesic from `z` to `x`,
/// found by Newton shooting. Requires `dist(z, x)` below the injectivity
/// radius of the model.
pub fn log_map(model: &ManifoldModel, z: &[f64], x: &[f64]) -> Result<TangentVector> {
    let n = model.dim();
    if x.len() != model.native_dim() || z.len() != model.native_dim() {
        return Err(Error::Domain("point dimension does not match the model".into()));
    }
    if model.representation() == Representation::Embedded && model.level_set(x).abs() > 1e-9 {
        return Err(Error::Domain(format!("{x:?} is not on the surface")));
    }
    let inj = model.injectivity_radius();
    let mut w = initial_guess(model, z, x)?;
    let exact_guess = matches!(model.kind(), ModelKind::RoundSphere { .. } | ModelKind::FlatTorus { .. });
    if norm(&w) >= inj {
        if exact_guess {
            return Err(Error::Domain(format!(
                "distance {:.6} is not below the injectivity radius {inj:.6}",
                norm(&w)
            )));
        }
        // Chart offsets can overshoot the true distance; start inside the ball.
        let shrink = 0.9 * inj / norm(&w);
        w.iter_mut().for_each(|wi| *wi *= shrink);
    }
    if let ModelKind::FlatTorus { .. } = model.kind() {
        return Ok(TangentVector::new(z.to_vec(), w));
    }
    let scale = inj.max(1.0);
    let mut last = f64::INFINITY;
    for _ in 0..60 {
        let d = differential(model, z, &w)?;
        let res = residual(model, &d.endpoint_state, x)?;
        let rn = norm(&res);
        if rn <= 1e-12 * scale {
            last = rn;
            break;
        }
        let rows = res.len();
        let a = DMatrix::from_fn(rows, n, |i, j| d.columns[j][i]);
        let b = DVector::from_vec(res);
        let step = (a.transpose() * &a)
            .lu()
            .solve(&(a.transpose() * b))
            .ok_or_else(|| Error::numerical("singular exponential differential", format!("w = {w:?}")))?;
        let mut sn = step.norm();
        let cap = 0.25 * inj;
        let damp = if sn > cap { cap / sn } else { 1.0 };
        for (wi, si) in w.iter_mut().zip(step.iter()) {
            *wi += damp * si;
        }
        sn *= damp;
        last = rn;
        // Transient iterates may overshoot; the final check below decides.
        let wn = norm(&w);
        if wn >= 0.95 * inj {
            w.iter_mut().for_each(|wi| *wi *= 0.95 * inj / wn);
        }
        if sn <= 1e-15 * scale {
            break;
        }
    }
    // Verify the final guess independently.
    let end = exp_map(model, z, &TangentVector::new(z.to_vec(), w.clone()))?;
    let miss = point_distance(model, &end, x)?;
    if miss > 1e-9 * scale {
        return Err(Error::numerical(
            "log map shooting did not converge",
            format!("residual {last:e}, endpoint miss {miss:e}"),
        ));
    }
    if norm(&w) >= inj {
        return Err(Error::Domain(format!(
            "distance {:.6} is not below the injectivity radius {inj:.6}",
            norm(&w)
        )));
    }
    Ok(TangentVector::new(z.to_vec(), w))
}

/// Small-distance proxy: ambient chord for embedded models, first-order
/// offset length for chart models.
pub(crate) fn point_distance(model: &ManifoldModel, a: &[f64], b: &[f64]) -> Result<f64> {
    match model.representation() {
        Representation::Embedded => Ok(norm(&a.iter().zip(b).map(|(x, y)| x - y).collect::<Vec<_>>())),
        Representation::Chart => Ok(norm(&model.local_offset(a, b)?)),
    }
}

fn initial_guess(model: &ManifoldModel, z: &[f64], x: &[f64]) -> Result<Vec<f64>> {
    let off = model.local_offset(z, x)?;
    match model.kind() {
        ModelKind::RoundSphere { radius, .. } => {
            let c = (dot(z, x) / (radius * radius)).clamp(-1.0, 1.0);
            let angle = c.acos() * radius;
            let on = norm(&off);
            if on < 1e-300 {
                if angle > 1e-8 {
                    return Err(Error::Domain("antipodal point: log map undefined".into()));
                }
                return Ok(vec![0.0; model.dim()]);
            }
            Ok(off.into_iter().map(|v| v * angle / on).collect())
        }
        ModelKind::TriaxialEllipsoid { .. } => {
            let chord = point_distance(model, z, x)?;
            let on = norm(&off);
            if on < 1e-300 {
                if chord > 1e-8 {
                    return Err(Error::Domain("no tangent displacement toward target".into()));
                }
                return Ok(vec![0.0; 2]);
            }
            Ok(off.into_iter().map(|v| v * chord / on).collect())
        }
        _ => Ok(off),
    }
}

/// Geodesic normal coordinates of `x` centred at `z`: the frame components of
/// `log_z(x)`.
pub fn normal_coordinates(model: &ManifoldModel, z: &[f64], x: &[f64]) -> Result<Vec<f64>> {
    Ok(log_map(model, z, x)?.components().to_vec())
}

/// Metric matrix `g_ij` of the normal coordinate chart at `z`, evaluated at
/// the normal-coordinate point `x_nc`.
pub fn normal_metric(model: &ManifoldModel, z: &[f64], x_nc: &[f64]) -> Result<DMatrix<f64>> {
    let n = model.dim();
    if x_nc.len() != n {
        return Err(Error::Domain("normal coordinate has wrong dimension".into()));
    }
    if norm(x_nc) >= model.injectivity_radius() {
        return Err(Error::Domain("point outside the normal chart".into()));
    }
    let d = differential(model, z, x_nc)?;
    Ok(DMatrix::from_fn(n, n, |i, j| dot(&d.columns[i], &d.columns[j])))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Profile;
    use std::f64::consts::PI;

    #[test]
    fn sphere_exp_reaches_antipode() {
        let m = ManifoldModel::unit_sphere();
        let z = m.pole().unwrap();
        let x = exp_map(&m, &z, &TangentVector::new(z.clone(), vec![0.0, PI])).unwrap();
        assert!((x[0] + 1.0).abs() < 1e-8 && x[1].abs() < 1e-8 && x[2].abs() < 1e-8);
    }

    #[test]
    fn sphere_log_has_colatitude_norm() {
        let m = ManifoldModel::unit_sphere();
        let z = m.pole().unwrap();
        let x = vec![0.3f64.cos(), 0.3f64.sin() * 0.6, 0.3f64.sin() * 0.8];
        let v = log_map(&m, &z, &x).unwrap();
        assert!((v.norm() - 0.3).abs() < 1e-10);
    }

    #[test]
    fn torus_log_is_shortest_representative() {
        let m = ManifoldModel::square_torus(1.0);
        let v = log_map(&m, &[0.1, 0.1], &[0.9, 0.2]).unwrap();
        assert!((v.components()[0] + 0.2).abs() < 1e-14);
        assert!((v.components()[1] - 0.1).abs() < 1e-14);
    }

    #[test]
    fn roundtrip_on_ellipsoid_and_sor() {
        let e = ManifoldModel::triaxial_ellipsoid(1.0, 0.8, 0.6).unwrap();
        let z = e.umbilic().unwrap();
        let v = TangentVector::new(z.clone(), vec![0.2, -0.15]);
        let x = exp_map(&e, &z, &v).unwrap();
        let back = log_map(&e, &z, &x).unwrap();
        for (a, b) in back.components().iter().zip(v.components()) {
            assert!((a - b).abs() < 1e-9);
        }
        let s = ManifoldModel::surface_of_revolution(Profile::PerturbedSine {
            amplitude: 0.2,
            center: 1.5,
            width: 0.6,
        })
        .unwrap();
        for z in [s.pole().unwrap(), vec![1.2, 0.3]] {
            let v = TangentVector::new(z.clone(), vec![0.25, 0.4]);
            let x = exp_map(&s, &z, &v).unwrap();
            let back = log_map(&s, &z, &x).unwrap();
            for (a, b) in back.components().iter().zip(v.components()) {
                assert!((a - b).abs() < 1e-9, "{z:?}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn normal_metric_matches_finite_differences() {
        let e = ManifoldModel::triaxial_ellipsoid(1.0, 0.8, 0.6).unwrap();
        let z = e.umbilic().unwrap();
        let xn = [0.3, 0.2];
        let g = normal_metric(&e, &z, &xn).unwrap();
        let h = 1e-5;
        let mut cols = Vec::new();
        for i in 0..2 {
            let mut a = xn;
            let mut b = xn;
            a[i] += h;
            b[i] -= h;
            let pa = exp_map(&e, &z, &TangentVector::new(z.clone(), a.to_vec())).unwrap();
            let pb = exp_map(&e, &z, &TangentVector::new(z.clone(), b.to_vec())).unwrap();
            cols.push(pa.iter().zip(&pb).map(|(p, q)| (p - q) / (2.0 * h)).collect::<Vec<_>>());
        }
        for i in 0..2 {
            for j in 0..2 {
                assert!((g[(i, j)] - dot(&cols[i], &cols[j])).abs() < 1e-5);
            }
        }
    }
}
