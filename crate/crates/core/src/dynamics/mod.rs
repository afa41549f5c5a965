//! Loop sets, the first return map on `S*_z M`, its iterates, recurrence
//! estimates and the blow-down classification of points.

use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::flow::{detect_returns, direction_grid, ReturnOptions};
use crate::geometry::ManifoldModel;
use crate::numerics::wrap_angle;

/// Numerical parameters shared by the loop-set, recurrence and
/// classification sweeps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoopParams {
    pub grid_size: usize,
    pub t_max: f64,
    pub eps_return: f64,
    pub t_min: f64,
    /// Directional closeness for delta-returns and recurrence (radians).
    pub delta: f64,
    pub n_iter: usize,
    pub blowdown_fraction: f64,
    pub blowdown_spread: f64,
    pub partial_fraction: f64,
    pub rtol: f64,
}

impl LoopParams {
    /// Defaults: 64 directions, `T_max = 30 diam`, `eps = 1e-4 diam`,
    /// `t_min = 1e-3 diam`, `delta = 0.05`, 40 iterations.
    pub fn for_model(model: &ManifoldModel) -> Self {
        let d = model.diameter();
        LoopParams {
            grid_size: 64,
            t_max: 30.0 * d,
            eps_return: 1e-4 * d,
            t_min: 1e-3 * d,
            delta: 0.05,
            n_iter: 40,
            blowdown_fraction: 0.99,
            blowdown_spread: 1e-3,
            partial_fraction: 0.05,
            rtol: 1e-10,
        }
    }

    fn return_options(&self, max_returns: Option<usize>) -> ReturnOptions {
        ReturnOptions {
            eps_return: self.eps_return,
            t_min: self.t_min,
            max_returns,
            rtol: self.rtol,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid_size < 64 {
            return Err(Error::Domain(format!("grid_size {} is below 64", self.grid_size)));
        }
        if !(self.t_max > self.t_min && self.t_min > 0.0 && self.eps_return > 0.0 && self.delta > 0.0) {
            return Err(Error::Domain("need T_max > t_min > 0, eps_return > 0, delta > 0".into()));
        }
        Ok(())
    }
}

/// Per-direction loop data on a grid of `S*_z M`.
#[derive(Debug, Clone)]
pub struct LoopSetEstimate {
    pub directions: Vec<Vec<f64>>,
    /// First return time, `INFINITY` when no return was found.
    pub return_times: Vec<f64>,
    /// Length of the first loop whose terminal direction is within `delta`,
    /// `INFINITY` when none.
    pub delta_return_times: Vec<f64>,
    /// Terminal direction of the first loop.
    pub images: Vec<Option<Vec<f64>>>,
    /// Fraction of directions with a finite return time.
    pub measure_fraction: f64,
    pub params: LoopParams,
}

impl LoopSetEstimate {
    /// Monte-Carlo half-width `1/sqrt(grid size)`.
    pub fn half_width(&self) -> f64 {
        1.0 / (self.directions.len() as f64).sqrt()
    }

    pub fn return_map(&self) -> ReturnMapTable {
        ReturnMapTable {
            directions: self.directions.clone(),
            images: self.images.clone(),
            times: self.return_times.clone(),
        }
    }
}

/// Sweep the direction grid at `z` and record first returns and
/// delta-returns.
pub fn sample_loop_set(model: &ManifoldModel, z: &[f64], params: &LoopParams) -> Result<LoopSetEstimate> {
    params.validate()?;
    let directions = direction_grid(model.dim(), params.grid_size);
    let opts = params.return_options(None);
    let rows: Vec<Result<(f64, f64, Option<Vec<f64>>)>> = directions
        .par_iter()
        .map(|w| {
            let recs = detect_returns(model, z, w, params.t_max, &opts)?;
            let first = recs.first();
            let t = first.map_or(f64::INFINITY, |r| r.time);
            let img = first.map(|r| r.direction.clone());
            let ld = recs
                .iter()
                .find(|r| r.gap <= params.delta)
                .map_or(f64::INFINITY, |r| r.time);
            Ok((t, ld, img))
        })
        .collect();
    let mut return_times = Vec::with_capacity(rows.len());
    let mut delta_return_times = Vec::with_capacity(rows.len());
    let mut images = Vec::with_capacity(rows.len());
    for r in rows {
        let (t, ld, img) = r?;
        return_times.push(t);
        delta_return_times.push(ld);
        images.push(img);
    }
    let finite = return_times.iter().filter(|t| t.is_finite()).count();
    Ok(LoopSetEstimate {
        measure_fraction: finite as f64 / directions.len() as f64,
        directions,
        return_times,
        delta_return_times,
        images,
        params: *params,
    })
}

/// First return time and terminal direction of the loop from `(z, xi)`.
pub fn first_return_map(model: &ManifoldModel, z: &[f64], xi: &[f64], params: &LoopParams) -> Result<(f64, Vec<f64>)> {
    let recs = detect_returns(model, z, xi, params.t_max, &params.return_options(Some(1)))?;
    match recs.into_iter().next() {
        Some(r) => Ok((r.time, r.direction)),
        None => Err(Error::Horizon { t_max: params.t_max }),
    }
}

/// Tabulated first return map on the direction grid.
#[derive(Debug, Clone)]
pub struct ReturnMapTable {
    pub directions: Vec<Vec<f64>>,
    pub images: Vec<Option<Vec<f64>>>,
    pub times: Vec<f64>,
}

impl ReturnMapTable {
    /// Interpolation order used by [`evaluate`](Self::evaluate): linear in the
    /// angle for `n = 2`, nearest grid direction otherwise.
    pub fn interpolation_order(&self) -> usize {
        if self.directions.first().map_or(0, |d| d.len()) == 2 {
            1
        } else {
            0
        }
    }

    /// Evaluate the map off-grid. `None` where a neighbouring grid direction
    /// has no return.
    pub fn evaluate(&self, xi: &[f64]) -> Option<Vec<f64>> {
        let n = self.directions.len();
        if self.interpolation_order() == 1 {
            let a = xi[1].atan2(xi[0]).rem_euclid(std::f64::consts::TAU);
            let h = std::f64::consts::TAU / n as f64;
            let pos = a / h - 0.5;
            let i0 = pos.floor().rem_euclid(n as f64) as usize;
            let i1 = (i0 + 1) % n;
            let frac = pos - pos.floor();
            let e0 = self.images[i0].as_ref()?;
            let e1 = self.images[i1].as_ref()?;
            let a0 = e0[1].atan2(e0[0]);
            let a1 = a0 + wrap_angle(e1[1].atan2(e1[0]) - a0);
            let b = a0 + frac * (a1 - a0);
            Some(vec![b.cos(), b.sin()])
        } else {
            let best = (0..n).max_by(|&i, &j| {
                let di: f64 = self.directions[i].iter().zip(xi).map(|(p, q)| p * q).sum();
                let dj: f64 = self.directions[j].iter().zip(xi).map(|(p, q)| p * q).sum();
                di.total_cmp(&dj)
            })?;
            self.images[best].clone()
        }
    }
}

/// Orbit of a direction under the first return map.
#[derive(Debug, Clone, PartialEq)]
pub struct Orbit {
    /// `eta_0 = xi, eta_1, ...`
    pub directions: Vec<Vec<f64>>,
    /// Return time of each step.
    pub times: Vec<f64>,
    /// Some iterate failed to return within the horizon.
    pub truncated: bool,
}

/// Iterate the first return map `n_iter` times, integrating the flow afresh
/// for every step. An iterate without a return truncates the orbit.
///
/// When `xi` itself does not return the orbit is empty and flagged.
pub fn iterate_return_map(
    model: &ManifoldModel,
    z: &[f64],
    xi: &[f64],
    n_iter: usize,
    params: &LoopParams,
) -> Result<Orbit> {
    let mut dirs = vec![xi.to_vec()];
    let mut times = Vec::new();
    for _ in 0..n_iter {
        match first_return_map(model, z, dirs.last().expect("nonempty"), params) {
            Ok((t, eta)) => {
                times.push(t);
                dirs.push(eta);
            }
            Err(Error::Horizon { .. }) => {
                if times.is_empty() {
                    dirs.clear();
                }
                return Ok(Orbit { directions: dirs, times, truncated: true });
            }
            Err(e) => return Err(e),
        }
    }
    Ok(Orbit { directions: dirs, times, truncated: false })
}

/// Orbit summary for one grid direction.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitSummary {
    pub iterates: usize,
    /// `dist(eta_n, xi)` for `n = 1..`.
    pub distances: Vec<f64>,
    pub truncated: bool,
}

/// Fraction of delta-recurrent grid directions.
///
/// Finite-horizon surrogate: "survives `n_iter` iterations" stands in for
/// membership in the forward-invariant core of the loop set.
#[derive(Debug, Clone)]
pub struct RecurrenceEstimate {
    pub directions: Vec<Vec<f64>>,
    pub recurrent: Vec<bool>,
    pub orbits: Vec<OrbitSummary>,
    pub fraction: f64,
    pub half_width: f64,
    pub loop_fraction: f64,
    pub delta: f64,
    pub n_iter: usize,
}

pub fn recurrence_estimate(model: &ManifoldModel, z: &[f64], params: &LoopParams) -> Result<RecurrenceEstimate> {
    params.validate()?;
    let directions = direction_grid(model.dim(), params.grid_size);
    let results: Vec<Result<OrbitSummary>> = directions
        .par_iter()
        .map(|w| {
            let orbit = iterate_return_map(model, z, w, params.n_iter, params)?;
            let distances = orbit
                .directions
                .iter()
                .skip(1)
                .map(|e| ManifoldModel::direction_distance(e, w))
                .collect();
            Ok(OrbitSummary {
                iterates: orbit.times.len(),
                distances,
                truncated: orbit.truncated,
            })
        })
        .collect();
    let mut orbits = Vec::with_capacity(results.len());
    for r in results {
        orbits.push(r?);
    }
    let recurrent: Vec<bool> = orbits
        .iter()
        .map(|o| o.distances.iter().any(|&d| d <= params.delta))
        .collect();
    let loops = orbits.iter().filter(|o| o.iterates > 0).count();
    let count = recurrent.iter().filter(|&&r| r).count();
    let n = directions.len() as f64;
    Ok(RecurrenceEstimate {
        directions,
        recurrent,
        orbits,
        fraction: count as f64 / n,
        half_width: 1.0 / n.sqrt(),
        loop_fraction: loops as f64 / n,
        delta: params.delta,
        n_iter: params.n_iter,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Verdict {
    BlowDown { period: f64 },
    PartialBlowDown,
    NoPositiveLoopMeasure,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stability {
    Attracting,
    Repelling,
    Neutral,
}

/// Fixed direction of the first return map.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedPoint {
    pub direction: Vec<f64>,
    /// Derivative of the map (in angle) at the fixed point.
    pub multiplier: f64,
    pub stability: Stability,
}

#[derive(Debug, Clone)]
pub struct PointClassification {
    pub verdict: Verdict,
    pub loop_fraction: f64,
    /// Mean return time and its relative spread over returning directions.
    pub return_time: Option<f64>,
    pub return_time_spread: Option<f64>,
    /// The return map is the identity on the whole grid.
    pub identity_map: bool,
    pub fixed_points: Vec<FixedPoint>,
    pub loop_set: LoopSetEstimate,
}

impl PointClassification {
    pub fn is_blowdown(&self) -> bool {
        matches!(self.verdict, Verdict::BlowDown { .. })
    }
}

/// Signed angular displacement of the return map at angle `a` (`n = 2`).
fn displacement(model: &ManifoldModel, z: &[f64], a: f64, params: &LoopParams) -> Result<f64> {
    let (_, eta) = first_return_map(model, z, &[a.cos(), a.sin()], params)?;
    Ok(wrap_angle(eta[1].atan2(eta[0]) - a))
}

/// Classify `z` as a blow-down point, a partial blow-down point, or neither,
/// and locate the fixed points of its first return map.
pub fn classify_point(model: &ManifoldModel, z: &[f64], params: &LoopParams) -> Result<PointClassification> {
    let loop_set = sample_loop_set(model, z, params)?;
    let finite: Vec<f64> = loop_set.return_times.iter().copied().filter(|t| t.is_finite()).collect();
    let (mean, spread) = if finite.is_empty() {
        (None, None)
    } else {
        let mean = finite.iter().sum::<f64>() / finite.len() as f64;
        let lo = finite.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (Some(mean), Some((hi - lo) / mean))
    };
    let verdict = if loop_set.measure_fraction >= params.blowdown_fraction
        && spread.is_some_and(|s| s <= params.blowdown_spread)
    {
        Verdict::BlowDown { period: mean.expect("finite returns") }
    } else if loop_set.measure_fraction >= params.partial_fraction {
        Verdict::PartialBlowDown
    } else {
        Verdict::NoPositiveLoopMeasure
    };

    let gaps: Vec<Option<f64>> = loop_set
        .directions
        .iter()
        .zip(&loop_set.images)
        .map(|(d, img)| img.as_ref().map(|e| ManifoldModel::direction_distance(e, d)))
        .collect();
    let identity_map = loop_set.measure_fraction > 0.0 && gaps.iter().all(|g| g.is_some_and(|g| g <= 1e-6));

    let mut fixed_points = Vec::new();
    if identity_map {
        fixed_points = loop_set
            .directions
            .iter()
            .map(|d| FixedPoint { direction: d.clone(), multiplier: 1.0, stability: Stability::Neutral })
            .collect();
    } else if model.dim() == 2 && loop_set.measure_fraction > 0.0 {
        fixed_points = locate_fixed_points(model, z, &loop_set, params)?;
    }
    Ok(PointClassification {
        verdict,
        loop_fraction: loop_set.measure_fraction,
        return_time: mean,
        return_time_spread: spread,
        identity_map,
        fixed_points,
        loop_set,
    })
}

fn locate_fixed_points(
    model: &ManifoldModel,
    z: &[f64],
    loop_set: &LoopSetEstimate,
    params: &LoopParams,
) -> Result<Vec<FixedPoint>> {
    let n = loop_set.directions.len();
    let angle = |d: &[f64]| d[1].atan2(d[0]);
    let disp: Vec<Option<f64>> = loop_set
        .directions
        .iter()
        .zip(&loop_set.images)
        .map(|(d, img)| img.as_ref().map(|e| wrap_angle(angle(e) - angle(d))))
        .collect();
    let mut brackets = Vec::new();
    for i in 0..n {
        let j = (i + 1) % n;
        if let (Some(a), Some(b)) = (disp[i], disp[j]) {
            // A jump across +-pi is a wrap, not a zero.
            if (a - b).abs() < std::f64::consts::PI && (a == 0.0 || (a < 0.0) != (b < 0.0)) {
                let lo = angle(&loop_set.directions[i]);
                let hi = lo + wrap_angle(angle(&loop_set.directions[j]) - lo);
                brackets.push((lo, hi, a));
            }
        }
    }
    let mut out: Vec<FixedPoint> = Vec::new();
    for (mut lo, mut hi, da) in brackets {
        for _ in 0..50 {
            let mid = 0.5 * (lo + hi);
            let dm = displacement(model, z, mid, params)?;
            if dm == 0.0 {
                lo = mid;
                hi = mid;
                break;
            }
            if (dm < 0.0) == (da < 0.0) {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-10 {
                break;
            }
        }
        let a = 0.5 * (lo + hi);
        let h = 1e-5;
        let dp = displacement(model, z, a + h, params)?;
        let dm = displacement(model, z, a - h, params)?;
        let multiplier = 1.0 + (dp - dm) / (2.0 * h);
        let stability = if (multiplier.abs() - 1.0).abs() <= 1e-3 {
            Stability::Neutral
        } else if multiplier.abs() < 1.0 {
            Stability::Attracting
        } else {
            Stability::Repelling
        };
        let direction = vec![a.cos(), a.sin()];
        if !out
            .iter()
            .any(|f| ManifoldModel::direction_distance(&f.direction, &direction) < 1e-6)
        {
            out.push(FixedPoint { direction, multiplier, stability });
        }
    }
    Ok(out)
}

fn fmt_time(t: f64) -> String {
    if t.is_finite() {
        format!("{t:.12e}")
    } else {
        "inf".to_string()
    }
}

/// CSV table with one row per grid direction:
/// `xi0.., T, L_delta, recurrent, orbit_length`.
pub fn write_direction_table<W: Write>(
    loop_set: &LoopSetEstimate,
    recurrence: Option<&RecurrenceEstimate>,
    mut w: W,
) -> Result<()> {
    let dim = loop_set.directions.first().map_or(0, |d| d.len());
    let mut header: Vec<String> = (0..dim).map(|i| format!("xi{i}")).collect();
    header.extend(["T".into(), "L_delta".into(), "recurrent".into(), "orbit_length".into()]);
    writeln!(w, "{}", header.join(","))?;
    for (i, d) in loop_set.directions.iter().enumerate() {
        let mut row: Vec<String> = d.iter().map(|v| format!("{v:.12e}")).collect();
        row.push(fmt_time(loop_set.return_times[i]));
        row.push(fmt_time(loop_set.delta_return_times[i]));
        match recurrence {
            Some(r) => {
                row.push((r.recurrent[i] as u8).to_string());
                row.push(r.orbits[i].iterates.to_string());
            }
            None => {
                row.push(String::new());
                row.push(String::new());
            }
        }
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_is_a_blowdown_point_with_identity_map() {
        let m = ManifoldModel::unit_sphere();
        let mut p = LoopParams::for_model(&m);
        p.t_max = 7.0;
        let c = classify_point(&m, &[0.0, 0.0, 1.0], &p).unwrap();
        assert!(c.is_blowdown());
        assert!(c.identity_map);
        assert_eq!(c.fixed_points.len(), 64);
    }

    #[test]
    fn small_grids_are_rejected() {
        let m = ManifoldModel::unit_sphere();
        let mut p = LoopParams::for_model(&m);
        p.grid_size = 10;
        assert!(sample_loop_set(&m, &[1.0, 0.0, 0.0], &p).is_err());
    }

    #[test]
    fn orbit_without_return_is_empty_and_flagged() {
        let m = ManifoldModel::square_torus(1.0);
        let mut p = LoopParams::for_model(&m);
        p.t_max = 5.0;
        let a: f64 = 0.3;
        let o = iterate_return_map(&m, &[0.0, 0.0], &[a.cos(), a.sin()], 3, &p).unwrap();
        assert!(o.truncated);
        assert!(o.directions.is_empty());
    }
}
