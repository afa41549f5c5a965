//! Geodesic equations as first-order systems, plus the per-model conversions
//! between flow states, positions and unit directions in orthonormal frames.

use std::f64::consts::PI;

use super::{reduce_lattice, ManifoldModel, ModelKind, Pole, Representation};
use crate::error::{Error, Result};
use crate::numerics::ode::OdeSystem;
use crate::numerics::{dot, norm, wrap_angle};

/// Unit-speed geodesic flow of a model, optionally carrying the scalar Jacobi
/// equation `j'' + K(gamma(t)) j = 0` in two extra slots.
///
/// Embedded state: `[x, v]` in ambient coordinates. Chart state:
/// `[x, p]` with `p` the momentum covector.
#[derive(Debug, Clone)]
pub struct GeodesicSystem<'a> {
    model: &'a ManifoldModel,
    jacobi: bool,
    base: usize,
}

impl<'a> GeodesicSystem<'a> {
    pub fn new(model: &'a ManifoldModel) -> Self {
        GeodesicSystem {
            model,
            jacobi: false,
            base: 2 * model.native_dim(),
        }
    }

    pub fn with_jacobi(model: &'a ManifoldModel) -> Self {
        GeodesicSystem {
            jacobi: true,
            ..Self::new(model)
        }
    }

    /// Length of the geodesic part of the state.
    pub fn base_dim(&self) -> usize {
        self.base
    }
}

impl OdeSystem for GeodesicSystem<'_> {
    fn dim(&self) -> usize {
        self.base + if self.jacobi { 2 } else { 0 }
    }

    fn rhs(&self, y: &[f64], dy: &mut [f64]) {
        let m = self.model;
        match &m.kind {
            ModelKind::RoundSphere { .. } | ModelKind::TriaxialEllipsoid { .. } => {
                let ax = m.axes_sq().expect("embedded");
                let n = ax.len();
                let (x, v) = y[..2 * n].split_at(n);
                let mut q = 0.0;
                let mut s = 0.0;
                for i in 0..n {
                    q += v[i] * v[i] / ax[i];
                    s += x[i] * x[i] / (ax[i] * ax[i]);
                }
                let lam = q / s;
                for i in 0..n {
                    dy[i] = v[i];
                    dy[n + i] = -lam * x[i] / ax[i];
                }
            }
            ModelKind::FlatTorus { .. } => {
                dy[0] = y[2];
                dy[1] = y[3];
                dy[2] = 0.0;
                dy[3] = 0.0;
            }
            ModelKind::SurfaceOfRevolution { profile } => {
                let j = profile.jet(y[0]);
                let pt = y[3];
                dy[0] = y[2];
                if pt == 0.0 {
                    dy[1] = 0.0;
                    dy[2] = 0.0;
                } else {
                    let f2 = j.f * j.f;
                    dy[1] = pt / f2;
                    dy[2] = pt * pt * j.df / (f2 * j.f);
                }
                dy[3] = 0.0;
            }
        }
        if self.jacobi {
            let k = m.curvature_on_state(y);
            dy[self.base] = y[self.base + 1];
            dy[self.base + 1] = -k * y[self.base];
        }
    }

    fn project(&self, y: &mut [f64]) -> f64 {
        let m = self.model;
        match &m.kind {
            ModelKind::RoundSphere { .. } | ModelKind::TriaxialEllipsoid { .. } => {
                let n = m.native_dim();
                let before = y[..n].to_vec();
                m.project_to_surface(&mut y[..n]);
                let moved = norm(
                    &before.iter().zip(&y[..n]).map(|(a, b)| a - b).collect::<Vec<_>>(),
                );
                let nrm = m.unit_normal(&y[..n]);
                let (x, v) = y[..2 * n].split_at_mut(n);
                let _ = x;
                let d = dot(v, &nrm);
                for (vi, ni) in v.iter_mut().zip(&nrm) {
                    *vi -= d * ni;
                }
                let speed = norm(v);
                for vi in v.iter_mut() {
                    *vi /= speed;
                }
                moved.max(d.abs()).max((speed - 1.0).abs())
            }
            ModelKind::FlatTorus { .. } => {
                let speed = (y[2] * y[2] + y[3] * y[3]).sqrt();
                y[2] /= speed;
                y[3] /= speed;
                (speed - 1.0).abs()
            }
            ModelKind::SurfaceOfRevolution { .. } => {
                let speed = m.chart_speed(y);
                y[2] /= speed;
                y[3] /= speed;
                (speed - 1.0).abs()
            }
        }
    }
}

impl ManifoldModel {
    /// Gaussian (sectional) curvature at the position of a flow state.
    pub(crate) fn curvature_on_state(&self, y: &[f64]) -> f64 {
        self.gaussian_curvature(&y[..self.native_dim()])
    }

    /// `|xi|_g` of a chart state.
    pub(crate) fn chart_speed(&self, y: &[f64]) -> f64 {
        match &self.kind {
            ModelKind::SurfaceOfRevolution { profile } => {
                let f = profile.jet(y[0]).f;
                let t = if y[3] == 0.0 { 0.0 } else { y[3] * y[3] / (f * f) };
                (y[2] * y[2] + t).sqrt()
            }
            _ => (y[2] * y[2] + y[3] * y[3]).sqrt(),
        }
    }

    /// `| |xi|_g - 1 |` for a flow state, plus the level-set defect for
    /// embedded models.
    pub fn state_defect(&self, y: &[f64]) -> (f64, f64) {
        let n = self.native_dim();
        match self.representation() {
            Representation::Embedded => {
                let v = &y[n..2 * n];
                let nrm = self.unit_normal(&y[..n]);
                let tang: Vec<f64> = {
                    let d = dot(v, &nrm);
                    v.iter().zip(&nrm).map(|(a, b)| a - d * b).collect()
                };
                ((norm(&tang) - 1.0).abs(), self.level_set(&y[..n]).abs())
            }
            Representation::Chart => ((self.chart_speed(y) - 1.0).abs(), 0.0),
        }
    }

    /// Position part of a flow state in canonical native form.
    pub fn state_position(&self, y: &[f64]) -> Vec<f64> {
        self.canonical_point(&y[..self.native_dim()])
    }

    /// Reduce a native point to its canonical representative (fundamental
    /// cell on the torus, `s in [0, L]` and `theta in (-pi, pi]` on a surface of
    /// revolution).
    pub fn canonical_point(&self, x: &[f64]) -> Vec<f64> {
        match &self.kind {
            ModelKind::FlatTorus { basis } => {
                let det = basis[0][0] * basis[1][1] - basis[0][1] * basis[1][0];
                let a0 = ((x[0] * basis[1][1] - x[1] * basis[1][0]) / det).rem_euclid(1.0);
                let a1 = ((basis[0][0] * x[1] - basis[0][1] * x[0]) / det).rem_euclid(1.0);
                vec![
                    a0 * basis[0][0] + a1 * basis[1][0],
                    a0 * basis[0][1] + a1 * basis[1][1],
                ]
            }
            ModelKind::SurfaceOfRevolution { profile } => {
                let (s, shift, _) = profile.canonicalize(x[0]);
                let th = if s.abs() < 1e-15 || (s - profile.length()).abs() < 1e-15 {
                    0.0
                } else {
                    wrap_angle(x[1] + shift)
                };
                vec![s, th]
            }
            _ => x.to_vec(),
        }
    }

    /// Orientation sign of the direction frame at `z` relative to the model's
    /// global orientation (only needed on chart models).
    pub(crate) fn frame_orientation(&self, z: &[f64]) -> f64 {
        match self.sor_pole(z) {
            Some(Pole::South) => -1.0,
            _ => 1.0,
        }
    }

    /// Unit-speed flow state leaving `z` in the direction with orthonormal
    /// frame components `w` (normalized here).
    pub fn initial_state(&self, z: &[f64], w: &[f64]) -> Result<Vec<f64>> {
        if w.len() != self.dim() {
            return Err(Error::Domain(format!(
                "direction has {} components, model dimension is {}",
                w.len(),
                self.dim()
            )));
        }
        let wn = norm(w);
        if !(wn > 0.0) || !wn.is_finite() {
            return Err(Error::Domain("direction must be nonzero and finite".into()));
        }
        let w: Vec<f64> = w.iter().map(|v| v / wn).collect();
        match self.representation() {
            Representation::Embedded => {
                if z.len() != self.native_dim() || self.level_set(z).abs() > 1e-9 {
                    return Err(Error::Domain(format!("{z:?} is not on the surface")));
                }
                let frame = self.frame_at(z)?;
                let mut y = z.to_vec();
                let mut v = vec![0.0; z.len()];
                for (wi, e) in w.iter().zip(&frame) {
                    for (vk, ek) in v.iter_mut().zip(e) {
                        *vk += wi * ek;
                    }
                }
                y.extend(v);
                Ok(y)
            }
            Representation::Chart => {
                if z.len() != 2 {
                    return Err(Error::Domain(format!("{z:?} is not a chart point")));
                }
                match &self.kind {
                    ModelKind::FlatTorus { .. } => Ok(vec![z[0], z[1], w[0], w[1]]),
                    ModelKind::SurfaceOfRevolution { profile } => match self.sor_pole(z) {
                        Some(Pole::North) => Ok(vec![0.0, w[1].atan2(w[0]), 1.0, 0.0]),
                        Some(Pole::South) => Ok(vec![profile.length(), w[1].atan2(w[0]), -1.0, 0.0]),
                        None => {
                            let zc = self.canonical_point(z);
                            let f = profile.jet(zc[0]).f;
                            Ok(vec![zc[0], zc[1], w[0], w[1] * f])
                        }
                    },
                    _ => unreachable!(),
                }
            }
        }
    }

    /// Unit direction of a state, expressed in the frame at `z`. Meant for
    /// states whose position is at or very near `z`; the velocity is carried
    /// to `z` by orthogonal projection onto `T_z M`, which agrees with
    /// parallel transport to first order in the (tiny) separation.
    pub fn direction_at(&self, z: &[f64], y: &[f64]) -> Result<Vec<f64>> {
        let raw = match self.representation() {
            Representation::Embedded => {
                let n = self.native_dim();
                let frame = self.frame_at(z)?;
                frame.iter().map(|e| dot(e, &y[n..2 * n])).collect::<Vec<_>>()
            }
            Representation::Chart => match &self.kind {
                ModelKind::FlatTorus { .. } => vec![y[2], y[3]],
                ModelKind::SurfaceOfRevolution { profile } => {
                    let f = profile.jet(y[0]).f;
                    let pt = if y[3] == 0.0 { 0.0 } else { y[3] / f };
                    match self.sor_pole(z) {
                        Some(Pole::North) => {
                            let (s, c) = y[1].sin_cos();
                            vec![y[2] * c - pt * s, y[2] * s + pt * c]
                        }
                        Some(Pole::South) => {
                            let (s, c) = y[1].sin_cos();
                            vec![-y[2] * c - pt * s, -y[2] * s + pt * c]
                        }
                        None => {
                            let (_, _, orient) = profile.canonicalize(y[0]);
                            vec![orient * y[2], orient * pt]
                        }
                    }
                }
                _ => unreachable!(),
            },
        };
        let n = norm(&raw);
        if !(n > 1e-6) {
            return Err(Error::numerical("direction degenerate at base point", format!("|w| = {n:e}")));
        }
        Ok(raw.into_iter().map(|v| v / n).collect())
    }

    /// First-order approximation of `log_z(x)` for `x` near `z`, in frame
    /// components at `z` (for embedded models: ambient displacement projected
    /// onto `T_z M`).
    pub fn local_offset(&self, z: &[f64], x: &[f64]) -> Result<Vec<f64>> {
        match self.representation() {
            Representation::Embedded => {
                let d: Vec<f64> = x.iter().zip(z).map(|(a, b)| a - b).collect();
                let frame = self.frame_at(z)?;
                Ok(frame.iter().map(|e| dot(e, &d)).collect())
            }
            Representation::Chart => match &self.kind {
                ModelKind::FlatTorus { basis } => {
                    let r = reduce_lattice(basis, [x[0] - z[0], x[1] - z[1]]);
                    Ok(vec![r[0], r[1]])
                }
                ModelKind::SurfaceOfRevolution { profile } => {
                    let l = profile.length();
                    match self.sor_pole(z) {
                        Some(Pole::North) => {
                            let sig = x[0] - 2.0 * l * (x[0] / (2.0 * l)).round();
                            Ok(vec![sig * x[1].cos(), sig * x[1].sin()])
                        }
                        Some(Pole::South) => {
                            let sig = (x[0] - l) - 2.0 * l * ((x[0] - l) / (2.0 * l)).round();
                            Ok(vec![-sig * x[1].cos(), -sig * x[1].sin()])
                        }
                        None => {
                            let zc = self.canonical_point(z);
                            let (sx, shift, _) = profile.canonicalize(x[0]);
                            let f0 = profile.jet(zc[0]).f;
                            Ok(vec![sx - zc[0], f0 * wrap_angle(x[1] + shift - zc[1])])
                        }
                    }
                }
                _ => unreachable!(),
            },
        }
    }

    /// Derivative in `t` of the native position of a state, mapped like
    /// [`local_offset`](Self::local_offset) (needed to polish returns).
    pub fn offset_velocity(&self, z: &[f64], y: &[f64]) -> Result<Vec<f64>> {
        match self.representation() {
            Representation::Embedded => {
                let n = self.native_dim();
                let frame = self.frame_at(z)?;
                Ok(frame.iter().map(|e| dot(e, &y[n..2 * n])).collect())
            }
            Representation::Chart => match &self.kind {
                ModelKind::FlatTorus { .. } => Ok(vec![y[2], y[3]]),
                ModelKind::SurfaceOfRevolution { profile } => {
                    let f = profile.jet(y[0]).f;
                    let thd = if y[3] == 0.0 { 0.0 } else { y[3] / (f * f) };
                    let l = profile.length();
                    match self.sor_pole(z) {
                        Some(pole) => {
                            let sig = match pole {
                                Pole::North => y[0] - 2.0 * l * (y[0] / (2.0 * l)).round(),
                                Pole::South => {
                                    -((y[0] - l) - 2.0 * l * ((y[0] - l) / (2.0 * l)).round())
                                }
                            };
                            let sd = if pole == Pole::North { y[2] } else { -y[2] };
                            let (s, c) = y[1].sin_cos();
                            Ok(vec![sd * c - sig * thd * s, sd * s + sig * thd * c])
                        }
                        None => {
                            let zc = self.canonical_point(z);
                            let (_, _, orient) = profile.canonicalize(y[0]);
                            let f0 = profile.jet(zc[0]).f;
                            Ok(vec![orient * y[2], f0 * thd])
                        }
                    }
                }
                _ => unreachable!(),
            },
        }
    }

    /// Angle between two unit directions at the same base point.
    pub fn direction_distance(a: &[f64], b: &[f64]) -> f64 {
        let d = dot(a, b).clamp(-1.0, 1.0);
        // atan2 form is accurate for nearly parallel vectors.
        let cross: f64 = {
            let c: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - d * y).collect();
            norm(&c)
        };
        cross.atan2(d).abs().min(PI)
    }
}
