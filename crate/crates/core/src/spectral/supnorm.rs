//! Grid suprema of expansions and of window projector kernels.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use super::{CoefficientVector, EigenData, Family, Mode, WindowSpec};
use crate::error::{Error, Result};

/// Evaluation-grid controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupOptions {
    /// Grid points per shortest wavelength `2 pi / lambda_max`, per dimension.
    pub points_per_wavelength: f64,
    /// Run one local refinement pass around the grid maximizer.
    pub refine: bool,
}

impl Default for SupOptions {
    fn default() -> Self {
        SupOptions { points_per_wavelength: 10.0, refine: true }
    }
}

/// Estimated `||f||_inf` and where it is attained.
#[derive(Debug, Clone, PartialEq)]
pub struct SupEstimate {
    pub value: f64,
    pub location: Vec<f64>,
    pub grid_points: usize,
}

/// Smallest size `>= n` whose prime factors are 2, 3 and 5.
fn smooth_size(n: usize) -> usize {
    let mut m = n.max(1);
    loop {
        let mut r = m;
        for p in [2, 3, 5] {
            while r % p == 0 {
                r /= p;
            }
        }
        if r == 1 {
            return m;
        }
        m += 1;
    }
}

/// Regular evaluation grid resolving frequency `lambda` at the given density.
pub fn evaluation_grid(basis: &EigenData, lambda: f64, points_per_wavelength: f64) -> Vec<Vec<f64>> {
    let lam = lambda.max(1.0);
    match &basis.family {
        Family::Sphere { .. } => {
            let nt = (points_per_wavelength * lam / 2.0).ceil() as usize + 1;
            let np = (points_per_wavelength * lam).ceil() as usize;
            let mut pts = Vec::with_capacity(nt * np);
            for i in 0..=nt {
                let t = PI * i as f64 / nt as f64;
                let (st, ct) = t.sin_cos();
                for j in 0..np {
                    let p = 2.0 * PI * j as f64 / np as f64;
                    pts.push(vec![ct, st * p.cos(), st * p.sin()]);
                }
            }
            pts
        }
        Family::Torus { basis: b, .. } => {
            let n0 = (points_per_wavelength * lam * b[0][0].hypot(b[0][1]) / (2.0 * PI)).ceil() as usize;
            let n1 = (points_per_wavelength * lam * b[1][0].hypot(b[1][1]) / (2.0 * PI)).ceil() as usize;
            let mut pts = Vec::with_capacity(n0 * n1);
            for i in 0..n0 {
                for j in 0..n1 {
                    let (u, v) = (i as f64 / n0 as f64, j as f64 / n1 as f64);
                    pts.push(vec![u * b[0][0] + v * b[1][0], u * b[0][1] + v * b[1][1]]);
                }
            }
            pts
        }
        Family::Revolution { .. } => {
            let ns = (points_per_wavelength * lam / 2.0).ceil() as usize + 1;
            let nt = (points_per_wavelength * lam).ceil() as usize;
            let mut pts = Vec::with_capacity(ns * nt);
            for i in 0..=ns {
                let s = PI * i as f64 / ns as f64;
                for j in 0..nt {
                    pts.push(vec![s, 2.0 * PI * j as f64 / nt as f64]);
                }
            }
            pts
        }
    }
}

/// `||W||_{L^2 -> L^inf} = sqrt(max_x sum_{j in W} |e_j(x)|^2)` over the grid.
pub fn projector_sup_norm(basis: &EigenData, window: &WindowSpec, grid: &[Vec<f64>]) -> Result<f64> {
    if basis.window_range(window).is_empty() {
        return Ok(0.0);
    }
    let mut best: f64 = 0.0;
    for x in grid {
        best = best.max(basis.window_density(window, x)?);
    }
    Ok(best.sqrt())
}

/// Grid supremum of `|f|` with optional local refinement.
pub fn sup_norm(basis: &EigenData, f: &CoefficientVector, opts: &SupOptions) -> Result<SupEstimate> {
    if !(opts.points_per_wavelength >= 2.0) {
        return Err(Error::Domain("at least 2 points per wavelength are needed".into()));
    }
    if f.is_empty() {
        return Ok(SupEstimate { value: 0.0, location: origin(basis), grid_points: 0 });
    }
    match &basis.family {
        Family::Torus { .. } => torus_sup(basis, f, opts),
        _ => generic_sup(basis, f, opts),
    }
}

fn origin(basis: &EigenData) -> Vec<f64> {
    match basis.family {
        Family::Sphere { .. } => vec![1.0, 0.0, 0.0],
        _ => vec![0.0, 0.0],
    }
}

fn generic_sup(basis: &EigenData, f: &CoefficientVector, opts: &SupOptions) -> Result<SupEstimate> {
    let lam = f.max_lambda().max(1.0);
    let grid = evaluation_grid(basis, lam, opts.points_per_wavelength);
    let values: Vec<f64> = grid
        .par_iter()
        .map(|x| basis.evaluate(f, x).map(|v| v.norm()))
        .collect::<Result<_>>()?;
    let (mut arg, mut best) = (0, 0.0);
    for (i, v) in values.iter().enumerate() {
        if *v > best {
            best = *v;
            arg = i;
        }
    }
    let mut location = grid[arg].clone();
    if opts.refine {
        // Local pass in intrinsic angles around the maximizer.
        let step = 2.0 * PI / (opts.points_per_wavelength * lam);
        let sphere = matches!(basis.family, Family::Sphere { .. });
        let (a0, b0) = if sphere {
            let t = location[0].clamp(-1.0, 1.0).acos();
            (t, location[2].atan2(location[1]))
        } else {
            (location[0], location[1])
        };
        for i in -2i32..=2 {
            for j in -2i32..=2 {
                let a = (a0 + 0.25 * step * i as f64).clamp(0.0, PI);
                let b = b0 + 0.25 * step * j as f64;
                let x = if sphere {
                    vec![a.cos(), a.sin() * b.cos(), a.sin() * b.sin()]
                } else {
                    vec![a, b]
                };
                let v = basis.evaluate(f, &x)?.norm();
                if v > best {
                    best = v;
                    location = x;
                }
            }
        }
    }
    Ok(SupEstimate { value: best, location, grid_points: grid.len() })
}

/// Direct evaluation at lattice coordinates `(u, v)` through per-axis phase tables.
struct LatticeEvaluator<'a> {
    f: &'a CoefficientVector,
    indices: Vec<[i64; 2]>,
    range: [i64; 2],
    scale: f64,
}

impl<'a> LatticeEvaluator<'a> {
    fn new(basis: &EigenData, f: &'a CoefficientVector, covolume: f64) -> Self {
        let indices: Vec<[i64; 2]> = f
            .entries()
            .iter()
            .map(|c| match basis.modes[c.index] {
                Mode::Lattice { index, .. } => index,
                _ => [0, 0],
            })
            .collect();
        let mut range = [0i64; 2];
        for n in &indices {
            range[0] = range[0].max(n[0].abs());
            range[1] = range[1].max(n[1].abs());
        }
        LatticeEvaluator { f, indices, range, scale: 1.0 / covolume.sqrt() }
    }

    fn eval(&self, u: f64, v: f64) -> Complex64 {
        let table = |r: i64, a: f64| -> Vec<Complex64> {
            (-r..=r).map(|n| Complex64::from_polar(1.0, 2.0 * PI * n as f64 * a)).collect()
        };
        let e0 = table(self.range[0], u);
        let e1 = table(self.range[1], v);
        let mut acc = Complex64::new(0.0, 0.0);
        for (c, n) in self.f.entries().iter().zip(&self.indices) {
            acc += c.value * e0[(n[0] + self.range[0]) as usize] * e1[(n[1] + self.range[1]) as usize];
        }
        acc * self.scale
    }
}

fn torus_sup(basis: &EigenData, f: &CoefficientVector, opts: &SupOptions) -> Result<SupEstimate> {
    let (lattice, covolume) = match &basis.family {
        Family::Torus { basis, covolume } => (*basis, *covolume),
        _ => unreachable!(),
    };
    let eval = LatticeEvaluator::new(basis, f, covolume);
    let lam = f.max_lambda().max(1.0);
    let size = |axis: usize| {
        let len = lattice[axis][0].hypot(lattice[axis][1]);
        let resolved = (opts.points_per_wavelength * lam * len / (2.0 * PI)).ceil() as usize;
        smooth_size(resolved.max(2 * eval.range[axis] as usize + 1).max(8))
    };
    let (n0, n1) = (size(0), size(1));
    let mut data = vec![Complex64::new(0.0, 0.0); n0 * n1];
    for (c, n) in f.entries().iter().zip(&eval.indices) {
        let p = n[0].rem_euclid(n0 as i64) as usize;
        let q = n[1].rem_euclid(n1 as i64) as usize;
        data[p * n1 + q] += c.value;
    }
    let mut planner = FftPlanner::new();
    // Inverse transforms carry the positive exponent, matching exp(+i k.x).
    planner.plan_fft_inverse(n1).process(&mut data);
    let mut transposed = vec![Complex64::new(0.0, 0.0); n0 * n1];
    for p in 0..n0 {
        for q in 0..n1 {
            transposed[q * n0 + p] = data[p * n1 + q];
        }
    }
    drop(data);
    planner.plan_fft_inverse(n0).process(&mut transposed);
    let (mut arg, mut best) = (0usize, 0.0f64);
    for (i, v) in transposed.iter().enumerate() {
        let m = v.norm_sqr();
        if m > best {
            best = m;
            arg = i;
        }
    }
    drop(transposed);
    let (q, p) = (arg / n0, arg % n0);
    let mut u_best = (p as f64 / n0 as f64, q as f64 / n1 as f64);
    let mut best = best.sqrt() * eval.scale;
    if opts.refine {
        let (du, dv) = (0.5 / n0 as f64, 0.5 / n1 as f64);
        let (u0, v0) = u_best;
        for i in -2i32..=2 {
            for j in -2i32..=2 {
                if i == 0 && j == 0 {
                    continue;
                }
                let (u, v) = (u0 + du * i as f64, v0 + dv * j as f64);
                let m = eval.eval(u, v).norm();
                if m > best {
                    best = m;
                    u_best = (u, v);
                }
            }
        }
    }
    let (u, v) = u_best;
    let location = vec![
        u * lattice[0][0] + v * lattice[1][0],
        u * lattice[0][1] + v * lattice[1][1],
    ];
    Ok(SupEstimate { value: best, location, grid_points: n0 * n1 })
}
