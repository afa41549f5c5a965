//! Unit-speed geodesic flow: trajectories with dense output, detection of
//! returns to a base point, conjugate points and the Morse index of loops.

use std::io::Write;

use crate::error::{Error, Result};
use crate::geometry::{GeodesicSystem, ManifoldModel, ModelKind, Representation};
use crate::numerics::dot;
use crate::numerics::ode::{integrate as ode_integrate, DenseStep, OdeOptions, Solution};

/// A point of the unit sphere bundle together with a time stamp.
///
/// `covector` is the ambient unit velocity for embedded models and the
/// momentum `p` for chart models.
#[derive(Debug, Clone, PartialEq)]
pub struct CotangentState {
    pub position: Vec<f64>,
    pub covector: Vec<f64>,
    pub t: f64,
}

impl CotangentState {
    /// State at `z` pointing along the frame direction `w`.
    pub fn from_direction(model: &ManifoldModel, z: &[f64], w: &[f64]) -> Result<Self> {
        let y = model.initial_state(z, w)?;
        Ok(Self::from_raw(model, &y, 0.0))
    }

    pub(crate) fn from_raw(model: &ManifoldModel, y: &[f64], t: f64) -> Self {
        let n = model.native_dim();
        CotangentState {
            position: y[..n].to_vec(),
            covector: y[n..2 * n].to_vec(),
            t,
        }
    }

    pub(crate) fn raw(&self) -> Vec<f64> {
        let mut y = self.position.clone();
        y.extend_from_slice(&self.covector);
        y
    }

    /// `| |xi|_g - 1 |`.
    pub fn norm_defect(&self, model: &ManifoldModel) -> f64 {
        model.state_defect(&self.raw()).0
    }

    /// The same point with the direction reversed.
    pub fn reversed(&self) -> Self {
        CotangentState {
            position: self.position.clone(),
            covector: self.covector.iter().map(|v| -v).collect(),
            t: self.t,
        }
    }
}

/// Dense-output trajectory of the geodesic flow over `[t0, t0 + T]`.
#[derive(Debug, Clone)]
pub struct Trajectory {
    model: ManifoldModel,
    solution: Solution,
    energy_drift: f64,
    constraint_defect: f64,
}

impl Trajectory {
    pub fn t_start(&self) -> f64 {
        self.solution.t_start
    }

    pub fn t_end(&self) -> f64 {
        self.solution.t_end
    }

    pub fn state_at(&self, t: f64) -> CotangentState {
        CotangentState::from_raw(&self.model, &self.solution.eval(t), t)
    }

    pub fn final_state(&self) -> CotangentState {
        CotangentState::from_raw(&self.model, &self.solution.y_end, self.solution.t_end)
    }

    /// Largest `| |xi|_g - 1 |` observed, including the normalization applied
    /// by each projection step.
    pub fn energy_drift(&self) -> f64 {
        self.energy_drift
    }

    /// Largest `|F(x)|` at step ends (embedded models; zero otherwise).
    pub fn constraint_defect(&self) -> f64 {
        self.constraint_defect
    }

    pub fn step_count(&self) -> usize {
        self.solution.steps.len()
    }

    pub fn rejected_steps(&self) -> usize {
        self.solution.rejected
    }

    /// Step-end states, starting with the initial state.
    pub fn nodes(&self) -> Vec<CotangentState> {
        let mut out = vec![CotangentState::from_raw(&self.model, &self.solution.y_start, self.t_start())];
        for s in &self.solution.steps {
            out.push(CotangentState::from_raw(&self.model, &s.eval(s.t1()), s.t1()));
        }
        out
    }

    /// CSV dump with columns `t, x0.., xi0..`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let n = self.model.native_dim();
        let mut header = vec!["t".to_string()];
        header.extend((0..n).map(|i| format!("x{i}")));
        header.extend((0..n).map(|i| format!("xi{i}")));
        writeln!(w, "{}", header.join(","))?;
        for s in self.nodes() {
            let mut row = vec![format!("{:.15e}", s.t)];
            row.extend(s.position.iter().map(|v| format!("{v:.15e}")));
            row.extend(s.covector.iter().map(|v| format!("{v:.15e}")));
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

fn options(rtol: f64) -> OdeOptions {
    OdeOptions {
        rtol,
        atol: rtol * 1e-2,
        ..OdeOptions::default()
    }
}

/// Integrate the unit-speed geodesic flow from `state` over `[0, t_max]`.
pub fn integrate(model: &ManifoldModel, state: &CotangentState, t_max: f64, rtol: f64) -> Result<Trajectory> {
    if !(t_max > 0.0) {
        return Err(Error::Domain("T_max must be positive".into()));
    }
    let y0 = state.raw();
    let (defect, level) = model.state_defect(&y0);
    if defect > 1e-9 || level > 1e-9 {
        return Err(Error::Domain(format!(
            "initial state is not a unit covector on the manifold (|xi|-1 = {defect:e}, |F| = {level:e})"
        )));
    }
    let sys = GeodesicSystem::new(model);
    let sol = ode_integrate(&sys, state.t, &y0, state.t + t_max, &options(rtol), None)?;
    let mut drift = sol.max_projection;
    let mut level = 0.0_f64;
    for s in &sol.steps {
        let (d, l) = model.state_defect(&s.eval(s.t1()));
        drift = drift.max(d);
        level = level.max(l);
    }
    Ok(Trajectory {
        model: model.clone(),
        solution: sol,
        energy_drift: drift,
        constraint_defect: level,
    })
}

/// One detected return of the geodesic from `(z, xi)` to `z`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnRecord {
    /// Return time (length).
    pub time: f64,
    /// Terminal direction at `z`, frame components.
    pub direction: Vec<f64>,
    /// Positional miss distance at the polished return time.
    pub miss: f64,
    /// Angle between the terminal and the initial direction.
    pub gap: f64,
}

/// Thresholds for [`detect_returns`].
#[derive(Debug, Clone, Copy)]
pub struct ReturnOptions {
    pub eps_return: f64,
    pub t_min: f64,
    /// Stop after this many returns.
    pub max_returns: Option<usize>,
    pub rtol: f64,
}

impl ReturnOptions {
    /// Defaults scaled by the model diameter: `eps = 1e-4 diam`, `t_min = 1e-3 diam`.
    pub fn for_model(model: &ManifoldModel) -> Self {
        let d = model.diameter();
        ReturnOptions {
            eps_return: 1e-4 * d,
            t_min: 1e-3 * d,
            max_returns: None,
            rtol: 1e-10,
        }
    }
}

/// Half squared distance to `z` and its time derivative, for a state near `z`.
fn gap_function(model: &ManifoldModel, z: &[f64], y: &[f64]) -> (f64, f64) {
    match model.representation() {
        Representation::Embedded => {
            let n = model.native_dim();
            let d: Vec<f64> = y[..n].iter().zip(z).map(|(a, b)| a - b).collect();
            (0.5 * dot(&d, &d), dot(&d, &y[n..2 * n]))
        }
        Representation::Chart => {
            let off = model.local_offset(z, &y[..2]).unwrap_or_else(|_| vec![f64::INFINITY; 2]);
            let vel = model.offset_velocity(z, y).unwrap_or_else(|_| vec![0.0; 2]);
            (0.5 * dot(&off, &off), dot(&off, &vel))
        }
    }
}

/// Root of the gap derivative inside a step where it changes sign `- -> +`.
fn polish(model: &ManifoldModel, z: &[f64], step: &DenseStep, mut a: f64, mut b: f64) -> (f64, Vec<f64>) {
    let mut buf = vec![0.0; step.y0().len()];
    for _ in 0..100 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        step.eval_into(m, &mut buf);
        if gap_function(model, z, &buf).1 < 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    let t = 0.5 * (a + b);
    (t, step.eval(t))
}

/// All local minima of `t -> dist(x(t), z)` on `(t_min, T_max]` whose value is
/// below `eps_return`, polished to the zero of the derivative of the squared
/// distance.
pub fn detect_returns(
    model: &ManifoldModel,
    z: &[f64],
    xi: &[f64],
    t_max: f64,
    opts: &ReturnOptions,
) -> Result<Vec<ReturnRecord>> {
    if opts.eps_return >= model.injectivity_radius() / 10.0 {
        return Err(Error::Domain("eps_return must be below a tenth of the injectivity radius".into()));
    }
    let y0 = model.initial_state(z, xi)?;
    let w0 = model.direction_at(z, &y0)?;
    let sys = GeodesicSystem::new(model);
    let mut records: Vec<ReturnRecord> = Vec::new();
    let mut failure: Option<Error> = None;
    // Sample spacing well below the injectivity radius, so no minimum of the
    // distance can hide between samples even when steps are long.
    let spacing = 0.1 * model.injectivity_radius();
    {
        let mut buf = vec![0.0; y0.len()];
        let mut observer = |step: &DenseStep| -> bool {
            let mut prev_t = step.t0;
            let mut prev = gap_function(model, z, step.y0());
            let samples = ((step.h / spacing).ceil() as usize).max(4);
            for k in 1..=samples {
                let t = step.t0 + step.h * k as f64 / samples as f64;
                step.eval_into(t, &mut buf);
                let cur = gap_function(model, z, &buf);
                // Cheap rejection: the gap must be plausibly small.
                if prev.1 < 0.0 && cur.1 >= 0.0 && t > opts.t_min && prev.0.min(cur.0) < 0.5 * (100.0 * opts.eps_return + step.h).powi(2) {
                    let (tp, yp) = polish(model, z, step, prev_t, t);
                    let miss = (2.0 * gap_function(model, z, &yp).0).sqrt();
                    if tp > opts.t_min && miss <= opts.eps_return {
                        match model.direction_at(z, &yp) {
                            Ok(eta) => {
                                let gap = ManifoldModel::direction_distance(&eta, &w0);
                                records.push(ReturnRecord { time: tp, direction: eta, miss, gap });
                                if let Some(m) = opts.max_returns {
                                    if records.len() >= m {
                                        return true;
                                    }
                                }
                            }
                            Err(e) => {
                                failure = Some(e);
                                return true;
                            }
                        }
                    }
                }
                prev_t = t;
                prev = cur;
            }
            false
        };
        ode_integrate(&sys, 0.0, &y0, t_max, &options(opts.rtol), Some(&mut observer))?;
    }
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(records)
}

/// Conjugate points along a geodesic segment.
#[derive(Debug, Clone, PartialEq)]
pub struct ConjugacyReport {
    /// `(time, multiplicity)` in increasing order, over `(0, T]`.
    pub conjugate_times: Vec<(f64, usize)>,
    /// Morse index: total multiplicity on `(0, T]`, endpoint included.
    pub beta: usize,
    /// The Jacobi determinant vanishes at `T` itself.
    pub endpoint_degenerate: bool,
}

/// Multiplicity of each zero of the scalar Jacobi field: `n - 1` on round
/// spheres (all normal directions are equivalent), 1 on surfaces.
fn jacobi_multiplicity(model: &ManifoldModel) -> usize {
    match model.kind() {
        ModelKind::RoundSphere { dim, .. } => dim - 1,
        _ => 1,
    }
}

fn jacobi_solution(model: &ManifoldModel, z: &[f64], xi: &[f64], t: f64) -> Result<(Solution, usize)> {
    let sys = GeodesicSystem::with_jacobi(model);
    let mut y0 = model.initial_state(z, xi)?;
    y0.extend([0.0, 1.0]);
    let sol = ode_integrate(&sys, 0.0, &y0, t, &options(1e-11), None)?;
    Ok((sol, sys.base_dim()))
}

/// `det J(t)` for the Jacobi solution matrix with `J(0) = 0, J'(0) = I`.
pub fn jacobi_determinant(model: &ManifoldModel, z: &[f64], xi: &[f64], t: f64) -> Result<f64> {
    let (sol, b) = jacobi_solution(model, z, xi, t)?;
    Ok(sol.y_end[b].powi(jacobi_multiplicity(model) as i32))
}

/// Conjugate times of `z` along the geodesic with initial direction `xi`
/// over `(0, T]`.
///
/// Along a geodesic in dimension 2 (and on round spheres, where the normal
/// Jacobi equation decouples into identical scalar copies) the Jacobi matrix
/// is a multiple of a scalar solution of `j'' + K j = 0`, so its zeros are
/// bracketed by sign changes of `j` and refined by bisection.
pub fn jacobi_conjugate_points(model: &ManifoldModel, z: &[f64], xi: &[f64], t: f64) -> Result<ConjugacyReport> {
    if !(t > 0.0) {
        return Err(Error::Domain("T must be positive".into()));
    }
    let (sol, b) = jacobi_solution(model, z, xi, t)?;
    let mult = jacobi_multiplicity(model);
    let scale = sol
        .steps
        .iter()
        .map(|s| s.eval(s.t1())[b].abs())
        .fold(1e-300_f64, f64::max);
    let j_end = sol.y_end[b];
    let endpoint_degenerate = j_end.abs() <= 1e-7 * scale;
    let guard = 1e-6 * t.max(1.0);
    let mut times = Vec::new();
    let mut buf = vec![0.0; sol.y_start.len()];
    for step in &sol.steps {
        let sub = 8;
        let mut ta = step.t0;
        let mut ja = step.y0()[b];
        for k in 1..=sub {
            let tb = step.t0 + step.h * k as f64 / sub as f64;
            step.eval_into(tb, &mut buf);
            let jb = buf[b];
            if ta > 0.0 && ja != 0.0 && (ja < 0.0) != (jb < 0.0) {
                let (mut lo, mut hi) = (ta, tb);
                for _ in 0..100 {
                    let m = 0.5 * (lo + hi);
                    if m <= lo || m >= hi {
                        break;
                    }
                    step.eval_into(m, &mut buf);
                    if (buf[b] < 0.0) == (ja < 0.0) {
                        lo = m;
                    } else {
                        hi = m;
                    }
                }
                let root = 0.5 * (lo + hi);
                if !(endpoint_degenerate && (t - root) < guard) {
                    times.push((root, mult));
                }
            } else if jb == 0.0 && tb < t - guard {
                times.push((tb, mult));
            }
            ta = tb;
            ja = jb;
        }
    }
    if endpoint_degenerate {
        times.push((t, mult));
    }
    let beta = times.iter().map(|(_, m)| m).sum();
    Ok(ConjugacyReport {
        conjugate_times: times,
        beta,
        endpoint_degenerate,
    })
}

/// Sample directions on the unit sphere of `T_z M`: half-offset uniform angles
/// for `n = 2`, a Fibonacci lattice for `n = 3`.
pub fn direction_grid(dim: usize, count: usize) -> Vec<Vec<f64>> {
    use std::f64::consts::PI;
    match dim {
        2 => (0..count)
            .map(|i| {
                let a = (i as f64 + 0.5) * 2.0 * PI / count as f64;
                vec![a.cos(), a.sin()]
            })
            .collect(),
        _ => {
            let golden = PI * (3.0 - 5.0f64.sqrt());
            (0..count)
                .map(|i| {
                    let y = 1.0 - 2.0 * (i as f64 + 0.5) / count as f64;
                    let r = (1.0 - y * y).sqrt();
                    let phi = golden * i as f64;
                    vec![y, r * phi.cos(), r * phi.sin()]
                })
                .collect()
        }
    }
}

/// Morse index shared by the loops of a blow-down point with common return
/// time `T`, computed over `sample_count` directions.
///
/// Every sampled direction must return to `z` at time `T` (relative
/// tolerance 1e-3); otherwise the point is not a blow-down point at `T` and a
/// precondition error results. Directions that disagree on the index produce
/// an inconsistency error listing the values found.
pub fn morse_index_of_blowdown(model: &ManifoldModel, z: &[f64], t: f64, sample_count: usize) -> Result<usize> {
    use rayon::prelude::*;
    if sample_count == 0 {
        return Err(Error::Domain("sample_count must be positive".into()));
    }
    let dirs = direction_grid(model.dim(), sample_count);
    let mut opts = ReturnOptions::for_model(model);
    opts.max_returns = Some(1);
    let betas: Vec<Result<usize>> = dirs
        .par_iter()
        .map(|w| {
            let rec = detect_returns(model, z, w, t * 1.01, &opts)?;
            match rec.first() {
                Some(r) if (r.time - t).abs() <= 1e-3 * t => {
                    Ok(jacobi_conjugate_points(model, z, w, r.time)?.beta)
                }
                Some(r) => Err(Error::Precondition(format!(
                    "direction {w:?} returns at {:.6}, not at the common time {t:.6}",
                    r.time
                ))),
                None => Err(Error::Precondition(format!(
                    "direction {w:?} does not return by time {t:.6}; z is not a blow-down point"
                ))),
            }
        })
        .collect();
    let mut values = Vec::with_capacity(betas.len());
    for b in betas {
        values.push(b?);
    }
    let first = values[0];
    if values.iter().any(|&v| v != first) {
        let mut distinct = values.clone();
        distinct.sort_unstable();
        distinct.dedup();
        return Err(Error::Inconsistency(format!(
            "Morse index differs across directions: {distinct:?}"
        )));
    }
    Ok(first)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn sphere_first_return_is_identity() {
        let m = ManifoldModel::unit_sphere();
        let z = vec![0.0, 0.6, 0.8];
        let opts = ReturnOptions::for_model(&m);
        let r = detect_returns(&m, &z, &[0.8, 0.6], 7.0, &opts).unwrap();
        assert_eq!(r.len(), 1);
        assert!((r[0].time - 2.0 * PI).abs() < 1e-8);
        assert!(r[0].gap < 1e-6);
    }

    #[test]
    fn sphere_conjugate_points() {
        let m = ManifoldModel::unit_sphere();
        let z = m.pole().unwrap();
        let rep = jacobi_conjugate_points(&m, &z, &[1.0, 0.0], 2.0 * PI).unwrap();
        assert_eq!(rep.beta, 2);
        assert!(rep.endpoint_degenerate);
        assert!((rep.conjugate_times[0].0 - PI).abs() < 1e-6);
    }

    #[test]
    fn torus_morse_index_is_a_precondition_error() {
        let m = ManifoldModel::square_torus(2.0 * PI);
        let r = morse_index_of_blowdown(&m, &[0.0, 0.0], 2.0 * PI, 8);
        assert!(matches!(r, Err(Error::Precondition(_))));
    }

    #[test]
    fn csv_dump_has_header() {
        let m = ManifoldModel::square_torus(1.0);
        let s = CotangentState::from_direction(&m, &[0.0, 0.0], &[1.0, 0.0]).unwrap();
        let tr = integrate(&m, &s, 1.0, 1e-10).unwrap();
        let mut out = Vec::new();
        tr.write_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.starts_with("t,x0,x1,xi0,xi1\n"));
    }
}
