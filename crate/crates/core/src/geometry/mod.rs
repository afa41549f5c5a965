//! Model manifolds: metrics, connection coefficients, orthonormal frames, and
//! the exponential/logarithm maps used to build geodesic normal coordinates.
//!
//! Two representations are used. The round sphere and the triaxial ellipsoid
//! are *embedded*: points are ambient vectors on the level set
//! `F(x) = sum x_i^2 / A_i - 1 = 0`, and the flow state is (position, velocity).
//! The flat torus and surfaces of revolution use a global *chart*: points are
//! chart coordinates and the flow state is (position, covector).

mod geodesic;
mod maps;
mod profile;

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::numerics::{dot, norm};

pub use geodesic::GeodesicSystem;
pub use maps::{exp_map, log_map, normal_coordinates, normal_metric, TangentVector};
pub use profile::{Profile, ProfileJet};

/// The built-in model families.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelKind {
    RoundSphere { dim: usize, radius: f64 },
    /// Flat torus `R^2 / Gamma`; `basis` holds the two lattice generators as rows.
    FlatTorus { basis: [[f64; 2]; 2] },
    SurfaceOfRevolution { profile: Profile },
    /// Semi-axes `a > b > c > 0` along x, y, z.
    TriaxialEllipsoid { a: f64, b: f64, c: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Representation {
    Chart,
    Embedded,
}

/// Which pole of a surface of revolution a point sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pole {
    North,
    South,
}

/// Connection coefficients `Gamma^k_{ij}` stored densely.
#[derive(Debug, Clone)]
pub struct Christoffel {
    n: usize,
    data: Vec<f64>,
}

impl Christoffel {
    fn zeros(n: usize) -> Self {
        Christoffel { n, data: vec![0.0; n * n * n] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.data[(k * self.n + i) * self.n + j]
    }

    fn set(&mut self, k: usize, i: usize, j: usize, v: f64) {
        let n = self.n;
        self.data[(k * n + i) * n + j] = v;
    }

    /// Largest `|Gamma^k_ij - Gamma^k_ji|`.
    pub fn symmetry_defect(&self) -> f64 {
        let mut m = 0.0_f64;
        for k in 0..self.n {
            for i in 0..self.n {
                for j in 0..self.n {
                    m = m.max((self.get(k, i, j) - self.get(k, j, i)).abs());
                }
            }
        }
        m
    }
}

/// A model Riemannian manifold. Immutable after construction.
#[derive(Debug, Clone)]
pub struct ManifoldModel {
    kind: ModelKind,
    injectivity_radius: f64,
    diameter: f64,
}

impl ManifoldModel {
    pub fn new(kind: ModelKind) -> Result<Self> {
        match &kind {
            ModelKind::RoundSphere { dim, radius } => {
                if *dim < 2 || *dim > 3 {
                    return Err(Error::Domain(format!("sphere dimension {dim} outside 2..=3")));
                }
                if !(*radius > 0.0) {
                    return Err(Error::Domain("sphere radius must be positive".into()));
                }
            }
            ModelKind::FlatTorus { basis } => {
                let det = basis[0][0] * basis[1][1] - basis[0][1] * basis[1][0];
                if det.abs() < 1e-12 {
                    return Err(Error::Domain("degenerate torus lattice".into()));
                }
            }
            ModelKind::SurfaceOfRevolution { profile } => profile.validate().map_err(Error::Domain)?,
            ModelKind::TriaxialEllipsoid { a, b, c } => {
                if !(a > b && b > c && *c > 0.0) {
                    return Err(Error::Domain(format!(
                        "ellipsoid needs a > b > c > 0, got ({a}, {b}, {c})"
                    )));
                }
            }
        }
        let mut m = ManifoldModel {
            kind,
            injectivity_radius: 0.0,
            diameter: 0.0,
        };
        m.injectivity_radius = m.compute_injectivity_radius();
        m.diameter = m.compute_diameter();
        Ok(m)
    }

    pub fn round_sphere(dim: usize, radius: f64) -> Result<Self> {
        Self::new(ModelKind::RoundSphere { dim, radius })
    }

    pub fn unit_sphere() -> Self {
        Self::round_sphere(2, 1.0).expect("unit sphere is valid")
    }

    pub fn flat_torus(basis: [[f64; 2]; 2]) -> Result<Self> {
        Self::new(ModelKind::FlatTorus { basis })
    }

    /// `R^2 / (side Z)^2`.
    pub fn square_torus(side: f64) -> Self {
        Self::flat_torus([[side, 0.0], [0.0, side]]).expect("square torus is valid")
    }

    pub fn surface_of_revolution(profile: Profile) -> Result<Self> {
        Self::new(ModelKind::SurfaceOfRevolution { profile })
    }

    pub fn triaxial_ellipsoid(a: f64, b: f64, c: f64) -> Result<Self> {
        Self::new(ModelKind::TriaxialEllipsoid { a, b, c })
    }

    pub fn kind(&self) -> &ModelKind {
        &self.kind
    }

    /// Short human-readable label.
    pub fn label(&self) -> String {
        match &self.kind {
            ModelKind::RoundSphere { dim, radius } => format!("round-sphere(n={dim},r={radius})"),
            ModelKind::FlatTorus { basis } => format!("flat-torus({basis:?})"),
            ModelKind::SurfaceOfRevolution { profile } => format!("surface-of-revolution({profile:?})"),
            ModelKind::TriaxialEllipsoid { a, b, c } => format!("triaxial-ellipsoid({a},{b},{c})"),
        }
    }

    /// Intrinsic dimension.
    pub fn dim(&self) -> usize {
        match &self.kind {
            ModelKind::RoundSphere { dim, .. } => *dim,
            _ => 2,
        }
    }

    pub fn representation(&self) -> Representation {
        match &self.kind {
            ModelKind::RoundSphere { .. } | ModelKind::TriaxialEllipsoid { .. } => Representation::Embedded,
            _ => Representation::Chart,
        }
    }

    /// Length of a native point (ambient dimension or chart dimension).
    pub fn native_dim(&self) -> usize {
        match self.representation() {
            Representation::Embedded => self.dim() + 1,
            Representation::Chart => self.dim(),
        }
    }

    /// Hard bound for [`log_map`]: `pi r` on the sphere, half the shortest
    /// lattice vector on the torus, and the Klingenberg estimate
    /// `min(pi / sqrt(K_max), l_min / 2)` on the other models.
    pub fn injectivity_radius(&self) -> f64 {
        self.injectivity_radius
    }

    /// Diameter (exact for sphere, torus and surfaces of revolution; for the
    /// ellipsoid the distance between the ends of the long axis along the
    /// shorter principal section through them).
    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    fn compute_injectivity_radius(&self) -> f64 {
        match &self.kind {
            ModelKind::RoundSphere { radius, .. } => PI * radius,
            ModelKind::FlatTorus { basis } => 0.5 * shortest_lattice_vector(basis),
            ModelKind::SurfaceOfRevolution { profile } => {
                (PI / profile.max_curvature().sqrt()).min(0.5 * profile.shortest_closed_geodesic())
            }
            ModelKind::TriaxialEllipsoid { a, b, c } => {
                // Curvature peaks at the ends of the long axis: K = a^2 / (b^2 c^2).
                let kmax = a * a / (b * b * c * c);
                let shortest = ellipse_perimeter(*b, *c);
                (PI / kmax.sqrt()).min(0.5 * shortest)
            }
        }
    }

    fn compute_diameter(&self) -> f64 {
        match &self.kind {
            ModelKind::RoundSphere { radius, .. } => PI * radius,
            ModelKind::FlatTorus { basis } => {
                // Max over the fundamental cell of the shortest representative.
                let n = 64;
                let mut best = 0.0_f64;
                for i in 0..=n {
                    for j in 0..=n {
                        let a = i as f64 / n as f64;
                        let b = j as f64 / n as f64;
                        let v = [
                            a * basis[0][0] + b * basis[1][0],
                            a * basis[0][1] + b * basis[1][1],
                        ];
                        best = best.max(norm(&reduce_lattice(basis, v)));
                    }
                }
                best
            }
            ModelKind::SurfaceOfRevolution { profile } => profile.length(),
            ModelKind::TriaxialEllipsoid { a, c, .. } => 0.5 * ellipse_perimeter(*a, *c),
        }
    }

    /// Squared semi-axes of the level set for embedded models.
    pub(crate) fn axes_sq(&self) -> Option<Vec<f64>> {
        match &self.kind {
            ModelKind::RoundSphere { dim, radius } => Some(vec![radius * radius; dim + 1]),
            ModelKind::TriaxialEllipsoid { a, b, c } => Some(vec![a * a, b * b, c * c]),
            _ => None,
        }
    }

    /// Level-set function `F(x)` for embedded models.
    pub fn level_set(&self, x: &[f64]) -> f64 {
        match self.axes_sq() {
            Some(ax) => x.iter().zip(&ax).map(|(xi, a)| xi * xi / a).sum::<f64>() - 1.0,
            None => 0.0,
        }
    }

    /// Newton projection onto `F = 0` along the gradient.
    pub fn project_to_surface(&self, x: &mut [f64]) {
        if let Some(ax) = self.axes_sq() {
            for _ in 0..8 {
                let f: f64 = x.iter().zip(&ax).map(|(xi, a)| xi * xi / a).sum::<f64>() - 1.0;
                if f.abs() < 1e-15 {
                    break;
                }
                let g: Vec<f64> = x.iter().zip(&ax).map(|(xi, a)| 2.0 * xi / a).collect();
                let gg = dot(&g, &g);
                for (xi, gi) in x.iter_mut().zip(&g) {
                    *xi -= f * gi / gg;
                }
            }
        }
    }

    /// Unit normal of the level set at an ambient point.
    pub(crate) fn unit_normal(&self, x: &[f64]) -> Vec<f64> {
        let ax = self.axes_sq().expect("embedded model");
        let g: Vec<f64> = x.iter().zip(&ax).map(|(xi, a)| xi / a).collect();
        let n = norm(&g);
        g.into_iter().map(|v| v / n).collect()
    }

    /// North pole (sphere: `(r, 0, ..)`; surface of revolution: `s = 0`).
    pub fn pole(&self) -> Result<Vec<f64>> {
        match &self.kind {
            ModelKind::RoundSphere { dim, radius } => {
                let mut p = vec![0.0; dim + 1];
                p[0] = *radius;
                Ok(p)
            }
            ModelKind::SurfaceOfRevolution { .. } => Ok(vec![0.0, 0.0]),
            _ => Err(Error::Unsupported(format!("{} has no distinguished pole", self.label()))),
        }
    }

    /// Antipode of [`pole`](Self::pole).
    pub fn south_pole(&self) -> Result<Vec<f64>> {
        match &self.kind {
            ModelKind::RoundSphere { dim, radius } => {
                let mut p = vec![0.0; dim + 1];
                p[0] = -radius;
                Ok(p)
            }
            ModelKind::SurfaceOfRevolution { profile } => Ok(vec![profile.length(), 0.0]),
            _ => Err(Error::Unsupported(format!("{} has no distinguished pole", self.label()))),
        }
    }

    /// The four umbilic points of a triaxial ellipsoid, all in the x-z plane:
    /// `(+-a sqrt((a^2-b^2)/(a^2-c^2)), 0, +-c sqrt((b^2-c^2)/(a^2-c^2)))`.
    pub fn umbilic_points(&self) -> Result<Vec<Vec<f64>>> {
        match &self.kind {
            ModelKind::TriaxialEllipsoid { a, b, c } => {
                let (a2, b2, c2) = (a * a, b * b, c * c);
                let x = a * ((a2 - b2) / (a2 - c2)).sqrt();
                let z = c * ((b2 - c2) / (a2 - c2)).sqrt();
                Ok(vec![
                    vec![x, 0.0, z],
                    vec![-x, 0.0, z],
                    vec![x, 0.0, -z],
                    vec![-x, 0.0, -z],
                ])
            }
            _ => Err(Error::Unsupported(format!("{} has no umbilic points", self.label()))),
        }
    }

    /// The umbilic with positive x and z.
    pub fn umbilic(&self) -> Result<Vec<f64>> {
        Ok(self.umbilic_points()?.swap_remove(0))
    }

    /// Pole classification of a surface-of-revolution point.
    pub fn sor_pole(&self, z: &[f64]) -> Option<Pole> {
        if let ModelKind::SurfaceOfRevolution { profile } = &self.kind {
            let (s, _, _) = profile.canonicalize(z[0]);
            if s.abs() < 1e-12 {
                return Some(Pole::North);
            }
            if (s - profile.length()).abs() < 1e-12 {
                return Some(Pole::South);
            }
        }
        None
    }

    /// Embedding of chart coordinates into native coordinates.
    ///
    /// Sphere: hyperspherical angles `(t, phi_1, ..)` with `t` the colatitude
    /// from the pole `(r, 0, ..)`. Ellipsoid: `(u, v)` with
    /// `x = (a sin u cos v, b sin u sin v, c cos u)`. Chart models: identity.
    pub fn chart_to_native(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.check_chart_len(u)?;
        match &self.kind {
            ModelKind::RoundSphere { dim, radius } => {
                let mut x = vec![0.0; dim + 1];
                let mut prod = *radius;
                for k in 0..*dim {
                    x[k] = prod * u[k].cos();
                    prod *= u[k].sin();
                }
                x[*dim] = prod;
                Ok(x)
            }
            ModelKind::TriaxialEllipsoid { a, b, c } => {
                let (su, cu) = u[0].sin_cos();
                let (sv, cv) = u[1].sin_cos();
                Ok(vec![a * su * cv, b * su * sv, c * cu])
            }
            _ => Ok(u.to_vec()),
        }
    }

    /// Inverse of [`chart_to_native`](Self::chart_to_native).
    pub fn native_to_chart(&self, x: &[f64]) -> Result<Vec<f64>> {
        match &self.kind {
            ModelKind::RoundSphere { dim, radius } => {
                let mut u = vec![0.0; *dim];
                u[0] = (x[0] / radius).clamp(-1.0, 1.0).acos();
                for k in 1..*dim {
                    let tail: f64 = x[k + 1..].iter().map(|v| v * v).sum::<f64>().sqrt();
                    if k + 1 == *dim {
                        u[k] = x[k + 1].atan2(x[k]);
                    } else {
                        u[k] = tail.atan2(x[k]);
                    }
                }
                Ok(u)
            }
            ModelKind::TriaxialEllipsoid { a, b, c } => {
                let u = (x[2] / c).clamp(-1.0, 1.0).acos();
                let v = (x[1] / b).atan2(x[0] / a);
                Ok(vec![u, v])
            }
            _ => Ok(x.to_vec()),
        }
    }

    fn check_chart_len(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.dim() {
            return Err(Error::Domain(format!(
                "chart point has {} coordinates, model dimension is {}",
                u.len(),
                self.dim()
            )));
        }
        Ok(())
    }

    fn check_chart_domain(&self, u: &[f64]) -> Result<()> {
        self.check_chart_len(u)?;
        let bad = match &self.kind {
            ModelKind::RoundSphere { dim, .. } => (0..dim - 1).any(|k| u[k].sin().abs() < 1e-12),
            ModelKind::TriaxialEllipsoid { .. } => u[0].sin().abs() < 1e-12,
            ModelKind::SurfaceOfRevolution { profile } => profile.jet(u[0]).f.abs() < 1e-12,
            ModelKind::FlatTorus { .. } => false,
        };
        if bad || u.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("chart point {u:?} is outside the chart domain")));
        }
        Ok(())
    }

    /// Diagonal metric entries and their first derivatives `dg[k][j] = d_j g_kk`
    /// for the models whose chart metric is diagonal.
    fn diagonal_metric(&self, u: &[f64]) -> Option<(Vec<f64>, Vec<Vec<f64>>)> {
        match &self.kind {
            ModelKind::RoundSphere { dim, radius } => {
                let n = *dim;
                let mut g = vec![radius * radius; n];
                for k in 1..n {
                    g[k] = g[k - 1] * u[k - 1].sin().powi(2);
                }
                let mut dg = vec![vec![0.0; n]; n];
                for k in 1..n {
                    for j in 0..k {
                        dg[k][j] = g[k] * 2.0 * u[j].cos() / u[j].sin();
                    }
                }
                Some((g, dg))
            }
            ModelKind::SurfaceOfRevolution { profile } => {
                let j = profile.jet(u[0]);
                Some((vec![1.0, j.f * j.f], vec![vec![0.0, 0.0], vec![2.0 * j.f * j.df, 0.0]]))
            }
            ModelKind::FlatTorus { .. } => Some((vec![1.0, 1.0], vec![vec![0.0; 2]; 2])),
            ModelKind::TriaxialEllipsoid { .. } => None,
        }
    }

    /// Ellipsoid embedding derivatives `(X_u, X_v, X_uu, X_uv, X_vv)`.
    fn ellipsoid_jets(&self, u: &[f64]) -> [[f64; 3]; 5] {
        let ModelKind::TriaxialEllipsoid { a, b, c } = self.kind else {
            unreachable!("ellipsoid only")
        };
        let (su, cu) = u[0].sin_cos();
        let (sv, cv) = u[1].sin_cos();
        [
            [a * cu * cv, b * cu * sv, -c * su],
            [-a * su * sv, b * su * cv, 0.0],
            [-a * su * cv, -b * su * sv, -c * cu],
            [-a * cu * sv, b * cu * cv, 0.0],
            [-a * su * cv, -b * su * sv, 0.0],
        ]
    }

    /// Metric matrix `g_ij` at a chart point.
    pub fn metric_at(&self, u: &[f64]) -> Result<DMatrix<f64>> {
        self.check_chart_domain(u)?;
        if let Some((g, _)) = self.diagonal_metric(u) {
            return Ok(DMatrix::from_diagonal(&nalgebra::DVector::from_vec(g)));
        }
        let j = self.ellipsoid_jets(u);
        let (xu, xv) = (&j[0], &j[1]);
        Ok(DMatrix::from_row_slice(
            2,
            2,
            &[dot(xu, xu), dot(xu, xv), dot(xv, xu), dot(xv, xv)],
        ))
    }

    /// Connection coefficients `Gamma^k_ij` at a chart point.
    pub fn christoffel_at(&self, u: &[f64]) -> Result<Christoffel> {
        self.check_chart_domain(u)?;
        let n = self.dim();
        let mut gam = Christoffel::zeros(n);
        if let Some((g, dg)) = self.diagonal_metric(u) {
            for k in 0..n {
                for i in 0..n {
                    if i == k {
                        gam.set(k, k, k, dg[k][k] / (2.0 * g[k]));
                    } else {
                        let v = dg[k][i] / (2.0 * g[k]);
                        gam.set(k, k, i, v);
                        gam.set(k, i, k, v);
                        gam.set(k, i, i, -dg[i][k] / (2.0 * g[k]));
                    }
                }
            }
            return Ok(gam);
        }
        // Ellipsoid: Gamma^k_ij = g^{kl} <X_l, X_ij>.
        let j = self.ellipsoid_jets(u);
        let first = [j[0], j[1]];
        let second = [[j[2], j[3]], [j[3], j[4]]];
        let g = self.metric_at(u)?;
        let ginv = g.try_inverse().ok_or_else(|| Error::Domain("singular metric".into()))?;
        for k in 0..2 {
            for i in 0..2 {
                for jj in 0..2 {
                    let mut v = 0.0;
                    for l in 0..2 {
                        v += ginv[(k, l)] * dot(&first[l], &second[i][jj]);
                    }
                    gam.set(k, i, jj, v);
                }
            }
        }
        Ok(gam)
    }

    /// Sectional (Gaussian) curvature at a native point; constant `1/r^2` on
    /// the sphere in every dimension.
    pub fn gaussian_curvature(&self, x: &[f64]) -> f64 {
        match &self.kind {
            ModelKind::RoundSphere { radius, .. } => 1.0 / (radius * radius),
            ModelKind::FlatTorus { .. } => 0.0,
            ModelKind::SurfaceOfRevolution { profile } => profile.curvature(x[0]),
            ModelKind::TriaxialEllipsoid { a, b, c } => {
                let q = x[0] * x[0] / a.powi(4) + x[1] * x[1] / b.powi(4) + x[2] * x[2] / c.powi(4);
                1.0 / (a * a * b * b * c * c * q * q)
            }
        }
    }

    /// Orthonormal frame of `T_z M`, expressed as native tangent vectors.
    ///
    /// Built by Gram-Schmidt on the ambient (or chart) basis vectors in index
    /// order. Not available at the poles of a surface of revolution, where the
    /// chart degenerates; there directions are handled by angle directly.
    pub fn frame_at(&self, z: &[f64]) -> Result<Vec<Vec<f64>>> {
        match self.representation() {
            Representation::Embedded => {
                let nrm = self.unit_normal(z);
                let mut frame: Vec<Vec<f64>> = Vec::new();
                for i in 0..z.len() {
                    if frame.len() == self.dim() {
                        break;
                    }
                    let mut e = vec![0.0; z.len()];
                    e[i] = 1.0;
                    let d = dot(&e, &nrm);
                    for (ei, ni) in e.iter_mut().zip(&nrm) {
                        *ei -= d * ni;
                    }
                    for f in &frame {
                        let d = dot(&e, f);
                        for (ei, fi) in e.iter_mut().zip(f) {
                            *ei -= d * fi;
                        }
                    }
                    let n = norm(&e);
                    if n > 0.1 {
                        frame.push(e.into_iter().map(|v| v / n).collect());
                    }
                }
                Ok(frame)
            }
            Representation::Chart => match &self.kind {
                ModelKind::FlatTorus { .. } => Ok(vec![vec![1.0, 0.0], vec![0.0, 1.0]]),
                ModelKind::SurfaceOfRevolution { profile } => {
                    if self.sor_pole(z).is_some() {
                        return Err(Error::Domain("chart frame is singular at a pole".into()));
                    }
                    let f = profile.jet(z[0]).f;
                    Ok(vec![vec![1.0, 0.0], vec![0.0, 1.0 / f]])
                }
                _ => unreachable!("chart models are torus and surface of revolution"),
            },
        }
    }

    /// `<a, b>_g` for native tangent vectors at `x`.
    pub fn inner(&self, x: &[f64], a: &[f64], b: &[f64]) -> f64 {
        match &self.kind {
            ModelKind::SurfaceOfRevolution { profile } => {
                let f = profile.jet(x[0]).f;
                a[0] * b[0] + f * f * a[1] * b[1]
            }
            _ => dot(a, b),
        }
    }

    /// Lattice basis when the model is a flat torus.
    pub fn torus_basis(&self) -> Option<[[f64; 2]; 2]> {
        match &self.kind {
            ModelKind::FlatTorus { basis } => Some(*basis),
            _ => None,
        }
    }

    pub fn profile(&self) -> Option<&Profile> {
        match &self.kind {
            ModelKind::SurfaceOfRevolution { profile } => Some(profile),
            _ => None,
        }
    }
}

/// Shortest representative of `v` modulo the lattice.
pub fn reduce_lattice(basis: &[[f64; 2]; 2], v: [f64; 2]) -> [f64; 2] {
    let det = basis[0][0] * basis[1][1] - basis[0][1] * basis[1][0];
    // v = a0 b0 + a1 b1
    let a0 = (v[0] * basis[1][1] - v[1] * basis[1][0]) / det;
    let a1 = (basis[0][0] * v[1] - basis[0][1] * v[0]) / det;
    let (r0, r1) = (a0.round(), a1.round());
    let mut best = v;
    let mut best_n = f64::INFINITY;
    for d0 in -1..=1 {
        for d1 in -1..=1 {
            let m0 = r0 + d0 as f64;
            let m1 = r1 + d1 as f64;
            let w = [
                v[0] - m0 * basis[0][0] - m1 * basis[1][0],
                v[1] - m0 * basis[0][1] - m1 * basis[1][1],
            ];
            let n = w[0] * w[0] + w[1] * w[1];
            if n < best_n {
                best_n = n;
                best = w;
            }
        }
    }
    best
}

fn shortest_lattice_vector(basis: &[[f64; 2]; 2]) -> f64 {
    let mut best = f64::INFINITY;
    for m0 in -4i32..=4 {
        for m1 in -4i32..=4 {
            if m0 == 0 && m1 == 0 {
                continue;
            }
            let w = [
                m0 as f64 * basis[0][0] + m1 as f64 * basis[1][0],
                m0 as f64 * basis[0][1] + m1 as f64 * basis[1][1],
            ];
            best = best.min(norm(&w));
        }
    }
    best
}

/// Perimeter of an ellipse with semi-axes `p, q`.
pub fn ellipse_perimeter(p: f64, q: f64) -> f64 {
    // Periodic integrand: the trapezoid rule converges geometrically.
    let m = 2048;
    let h = 2.0 * PI / m as f64;
    (0..m)
        .map(|i| {
            let (s, c) = (i as f64 * h).sin_cos();
            (p * p * s * s + q * q * c * c).sqrt()
        })
        .sum::<f64>()
        * h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ellipse_perimeter_of_circle() {
        assert!((ellipse_perimeter(1.0, 1.0) - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_models() {
        assert!(ManifoldModel::triaxial_ellipsoid(1.0, 1.0, 0.5).is_err());
        assert!(ManifoldModel::round_sphere(1, 1.0).is_err());
        assert!(ManifoldModel::flat_torus([[1.0, 0.0], [2.0, 0.0]]).is_err());
    }

    #[test]
    fn umbilics_lie_on_the_ellipsoid() {
        let m = ManifoldModel::triaxial_ellipsoid(1.0, 0.8, 0.6).unwrap();
        for u in m.umbilic_points().unwrap() {
            assert!(m.level_set(&u).abs() < 1e-15);
        }
    }

    #[test]
    fn chart_roundtrip_sphere3() {
        let m = ManifoldModel::round_sphere(3, 2.0).unwrap();
        let u = vec![0.7, 1.1, -2.0];
        let x = m.chart_to_native(&u).unwrap();
        assert!(m.level_set(&x).abs() < 1e-14);
        let back = m.native_to_chart(&x).unwrap();
        for (a, b) in u.iter().zip(&back) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn lattice_reduction() {
        let b = [[2.0 * PI, 0.0], [0.0, 2.0 * PI]];
        let r = reduce_lattice(&b, [7.0, -6.0]);
        assert!((r[0] - (7.0 - 2.0 * PI)).abs() < 1e-12);
        assert!((r[1] - (-6.0 + 2.0 * PI)).abs() < 1e-12);
    }

    #[test]
    fn frame_is_orthonormal_on_ellipsoid() {
        let m = ManifoldModel::triaxial_ellipsoid(1.0, 0.8, 0.6).unwrap();
        let z = m.umbilic().unwrap();
        let f = m.frame_at(&z).unwrap();
        assert_eq!(f.len(), 2);
        let nrm = m.unit_normal(&z);
        for i in 0..2 {
            assert!(dot(&f[i], &nrm).abs() < 1e-14);
            for j in 0..2 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((dot(&f[i], &f[j]) - e).abs() < 1e-14);
            }
        }
    }
}
