//! One runner per experiment kind.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{ExperimentConfig, ExperimentKind, Parameters};
use super::output::{num, ExperimentOutput, Table};
use crate::dynamics::{
    classify_point, iterate_return_map, recurrence_estimate, sample_loop_set, LoopParams, PointClassification,
    Stability, Verdict,
};
use crate::error::{Error, Result};
use crate::flow::{integrate, morse_index_of_blowdown, CotangentState};
use crate::geometry::{ManifoldModel, ModelKind};
use crate::numerics::fit::fit_exponent;
use crate::quasimode::{
    frequencies, l2_normalize, normalization_convergence, quasimode_eval, residual_norm, stationary_phase_approx,
    sup_growth, QuasimodeDefaults, QuasimodeSpec,
};
use crate::spectral::{
    evaluation_grid, lemma2_sweep, projector_sup_norm, random_torus_coefficients, smoothed_sum, sor_basis,
    sphere_basis, sphere_index, torus_basis, DirectionCutoff, EigenData, RandomSpectrum, SupOptions, WindowSpec,
};

struct Ctx<'a> {
    cfg: &'a ExperimentConfig,
    model: ManifoldModel,
    z: Vec<f64>,
    params: Vec<(String, String)>,
    summary: Vec<(String, String)>,
}

impl Ctx<'_> {
    fn p(&self) -> &Parameters {
        &self.cfg.parameters
    }

    fn param(&mut self, key: &str, value: impl ToString) {
        self.params.push((key.into(), value.to_string()));
    }

    fn result(&mut self, key: &str, value: impl ToString) {
        self.summary.push((key.into(), value.to_string()));
    }
}

/// Run the experiment described by `cfg`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let model = cfg.model.build()?;
    let z = cfg.point.resolve(&model)?;
    let mut ctx = Ctx { cfg, model, z, params: Vec::new(), summary: Vec::new() };
    let table = match cfg.kind {
        ExperimentKind::Flow => flow(&mut ctx)?,
        ExperimentKind::ReturnMap => return_map(&mut ctx)?,
        ExperimentKind::Recurrence => recurrence(&mut ctx)?,
        ExperimentKind::Classify => classify(&mut ctx)?,
        ExperimentKind::Quasimode => quasimode(&mut ctx)?,
        ExperimentKind::Projector => projector(&mut ctx)?,
        ExperimentKind::Growth => growth(&mut ctx)?,
        ExperimentKind::Lemma2 => lemma2(&mut ctx)?,
        ExperimentKind::SmoothedSum => smoothed(&mut ctx)?,
        ExperimentKind::Maslov => maslov(&mut ctx)?,
        ExperimentKind::StationaryPhase => stationary_phase(&mut ctx)?,
        ExperimentKind::Normalization => normalization(&mut ctx)?,
        ExperimentKind::Conservation => conservation(&mut ctx)?,
    };
    Ok(ExperimentOutput {
        name: cfg.name.clone(),
        kind: cfg.kind.name().into(),
        model: ctx.model.label(),
        point: ctx.z,
        seed: cfg.seed,
        parameters: ctx.params,
        summary: ctx.summary,
        table,
    })
}

fn unit(v: &[f64]) -> Result<Vec<f64>> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !(n > 0.0 && n.is_finite()) {
        return Err(Error::config("parameters.direction", "direction must be a nonzero finite vector"));
    }
    Ok(v.iter().map(|x| x / n).collect())
}

fn random_direction(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let n2: f64 = v.iter().map(|x| x * x).sum();
        if n2 > 1e-4 && n2 <= 1.0 {
            let n = n2.sqrt();
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

fn direction_cells(d: &[f64]) -> Vec<String> {
    let mut cells: Vec<String> = d.iter().map(|v| num(*v)).collect();
    if d.len() == 2 {
        cells.push(num(d[1].atan2(d[0])));
    }
    cells
}

fn direction_columns(dim: usize) -> Vec<String> {
    let mut c: Vec<String> = (0..dim).map(|i| format!("xi{i}")).collect();
    if dim == 2 {
        c.push("angle".into());
    }
    c
}

fn loop_params(ctx: &mut Ctx) -> Result<LoopParams> {
    let mut lp = LoopParams::for_model(&ctx.model);
    let p = ctx.p().clone();
    if let Some(g) = p.grid_size {
        lp.grid_size = g;
    }
    if let Some(t) = p.t_max_diameters {
        lp.t_max = t * ctx.model.diameter();
    }
    if let Some(d) = p.delta {
        lp.delta = d;
    }
    if let Some(n) = p.n_iter {
        lp.n_iter = n;
    }
    if let Some(r) = p.rtol {
        lp.rtol = r;
    }
    lp.validate().map_err(|e| Error::config("parameters", e.to_string()))?;
    ctx.param("grid_size", lp.grid_size);
    ctx.param("t_max", num(lp.t_max));
    ctx.param("delta", lp.delta);
    ctx.param("n_iter", lp.n_iter);
    ctx.param("rtol", lp.rtol);
    Ok(lp)
}

fn verdict_text(v: &Verdict) -> String {
    match v {
        Verdict::BlowDown { .. } => "blow-down".into(),
        Verdict::PartialBlowDown => "partial-blow-down".into(),
        Verdict::NoPositiveLoopMeasure => "no-positive-loop-measure".into(),
    }
}

fn stability_text(s: Stability) -> &'static str {
    match s {
        Stability::Attracting => "attracting",
        Stability::Repelling => "repelling",
        Stability::Neutral => "neutral",
    }
}

fn record_classification(ctx: &mut Ctx, c: &PointClassification) {
    ctx.result("verdict", verdict_text(&c.verdict));
    if let Verdict::BlowDown { period } = c.verdict {
        ctx.result("period", num(period));
    }
    ctx.result("loop_fraction", num(c.loop_fraction));
    ctx.result("identity_map", c.identity_map);
    ctx.result("fixed_points", c.fixed_points.len());
    if let Some(t) = c.return_time {
        ctx.result("return_time", num(t));
    }
}

/// Period and Morse index of a blow-down point with identity return map.
fn blowdown_data(model: &ManifoldModel, z: &[f64]) -> Result<(f64, usize)> {
    let cls = classify_point(model, z, &LoopParams::for_model(model))?;
    match cls.verdict {
        Verdict::BlowDown { period } if cls.identity_map => Ok((period, morse_index_of_blowdown(model, z, period, 8)?)),
        Verdict::BlowDown { .. } => Err(Error::Precondition("blow-down point whose return map is not the identity".into())),
        other => Err(Error::Precondition(format!("point is not a blow-down point ({})", verdict_text(&other)))),
    }
}

fn flow(ctx: &mut Ctx) -> Result<Table> {
    let n = ctx.model.dim();
    let p = ctx.p().clone();
    let w = match &p.direction {
        Some(d) if d.len() != n => {
            return Err(Error::config("parameters.direction", format!("expected {n} components")))
        }
        Some(d) => unit(d)?,
        None => {
            let mut e = vec![0.0; n];
            e[0] = 1.0;
            e
        }
    };
    let t_max = p.t_max.unwrap_or(10.0 * ctx.model.diameter());
    let rtol = p.rtol.unwrap_or(1e-10);
    let dump = p.dump.unwrap_or(false);
    ctx.param("direction", format!("{w:?}"));
    ctx.param("t_max", num(t_max));
    ctx.param("rtol", rtol);
    ctx.param("dump", dump);
    let state = CotangentState::from_direction(&ctx.model, &ctx.z, &w)?;
    let traj = integrate(&ctx.model, &state, t_max, rtol)?;
    ctx.result("energy_drift", num(traj.energy_drift()));
    ctx.result("constraint_defect", num(traj.constraint_defect()));
    ctx.result("steps", traj.step_count());
    ctx.result("rejected_steps", traj.rejected_steps());
    let nd = ctx.model.native_dim();
    let mut cols = vec!["t".to_string()];
    cols.extend((0..nd).map(|i| format!("x{i}")));
    cols.extend((0..nd).map(|i| format!("xi{i}")));
    let mut table = Table::new(cols);
    let states = if dump { traj.nodes() } else { vec![traj.state_at(traj.t_start()), traj.final_state()] };
    for s in states {
        let mut row = vec![num(s.t)];
        row.extend(s.position.iter().map(|v| num(*v)));
        row.extend(s.covector.iter().map(|v| num(*v)));
        table.push(row);
    }
    Ok(table)
}

fn return_map(ctx: &mut Ctx) -> Result<Table> {
    let lp = loop_params(ctx)?;
    let orbits = ctx.p().orbits.unwrap_or(16);
    ctx.param("orbits", orbits);
    let cls = classify_point(&ctx.model, &ctx.z, &lp)?;
    record_classification(ctx, &cls);
    for (i, f) in cls.fixed_points.iter().enumerate().take(8) {
        ctx.result(&format!("fixed_point.{i}"), format!("{} {} {}", format_direction(&f.direction), num(f.multiplier), stability_text(f.stability)));
    }
    let dim = ctx.model.dim();
    let mut cols = vec!["orbit".to_string(), "step".into()];
    cols.extend(direction_columns(dim));
    cols.push("return_time".into());
    let mut table = Table::new(cols);
    let attractor = cls
        .fixed_points
        .iter()
        .find(|f| f.stability == Stability::Attracting)
        .map(|f| f.direction.clone());
    let mut converged = 0usize;
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.cfg.seed);
    for o in 0..orbits {
        let xi = random_direction(&mut rng, dim);
        let orbit = iterate_return_map(&ctx.model, &ctx.z, &xi, lp.n_iter, &lp)?;
        if let (Some(a), Some(last), false) = (&attractor, orbit.directions.last(), orbit.truncated) {
            if ManifoldModel::direction_distance(last, a) <= 1e-3 {
                converged += 1;
            }
        }
        for (s, d) in orbit.directions.iter().enumerate() {
            let mut row = vec![o.to_string(), s.to_string()];
            row.extend(direction_cells(d));
            row.push(if s == 0 { String::new() } else { num(orbit.times[s - 1]) });
            table.push(row);
        }
    }
    if attractor.is_some() && orbits > 0 {
        ctx.result("converged_fraction", num(converged as f64 / orbits as f64));
    }
    Ok(table)
}

fn format_direction(d: &[f64]) -> String {
    d.iter().map(|v| format!("{v:.9}")).collect::<Vec<_>>().join(" ")
}

fn recurrence(ctx: &mut Ctx) -> Result<Table> {
    let lp = loop_params(ctx)?;
    let loops = sample_loop_set(&ctx.model, &ctx.z, &lp)?;
    let rec = recurrence_estimate(&ctx.model, &ctx.z, &lp)?;
    ctx.result("recurrent_fraction", num(rec.fraction));
    ctx.result("half_width", num(rec.half_width));
    ctx.result("loop_fraction", num(rec.loop_fraction));
    ctx.result("measure_fraction", num(loops.measure_fraction));
    let mut buf = Vec::new();
    crate::dynamics::write_direction_table(&loops, Some(&rec), &mut buf)?;
    let text = String::from_utf8(buf).map_err(|e| Error::Inconsistency(e.to_string()))?;
    let mut lines = text.lines();
    let mut table = Table::new(lines.next().unwrap_or_default().split(','));
    for l in lines {
        table.push(l.split(',').map(String::from).collect());
    }
    Ok(table)
}

fn classify(ctx: &mut Ctx) -> Result<Table> {
    let lp = loop_params(ctx)?;
    let cls = classify_point(&ctx.model, &ctx.z, &lp)?;
    record_classification(ctx, &cls);
    let mut cols = direction_columns(ctx.model.dim());
    cols.extend(["multiplier".to_string(), "stability".into()]);
    let mut table = Table::new(cols);
    for f in &cls.fixed_points {
        let mut row = direction_cells(&f.direction);
        row.push(num(f.multiplier));
        row.push(stability_text(f.stability).into());
        table.push(row);
    }
    Ok(table)
}

fn quasimode_defaults(ctx: &mut Ctx) -> QuasimodeDefaults {
    let mut d = QuasimodeDefaults::default();
    let p = ctx.p().clone();
    if let Some(r) = p.cutoff_radius {
        d.cutoff_radius = r;
    }
    d.annulus_exponent = p.annulus_exponent;
    if let Some(b) = p.ball_radius {
        d.ball_radius = b;
    }
    ctx.param("cutoff_radius", d.cutoff_radius);
    if let Some(a) = d.annulus_exponent {
        ctx.param("annulus_exponent", a);
    }
    ctx.param("ball_radius", num(d.ball_radius));
    d
}

fn ks_param(ctx: &mut Ctx, default: (usize, usize, usize)) -> Result<Vec<usize>> {
    let ks = ctx.p().k_range(default)?;
    ctx.param("ks", ks.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(" "));
    Ok(ks)
}

/// Basis resolving the zonal residual of modes up to frequency `r_max`.
fn residual_basis(model: &ManifoldModel, r_max: f64) -> Result<EigenData> {
    let needed = 2.0 * r_max + 20.0;
    match model.kind() {
        ModelKind::RoundSphere { dim: 2, radius } if (*radius - 1.0).abs() < 1e-12 => {
            sphere_basis(needed.ceil() as usize + 1)
        }
        ModelKind::SurfaceOfRevolution { profile } => sor_basis(profile, 0, needed + 1.0),
        _ => Err(Error::Unsupported(format!("residuals are computed on the unit sphere and surfaces of revolution, not {}", model.label()))),
    }
}

fn quasimode(ctx: &mut Ctx) -> Result<Table> {
    let ks = ks_param(ctx, (10, 50, 10))?;
    let defaults = quasimode_defaults(ctx);
    let with_residual = ctx.p().residual.unwrap_or(false);
    ctx.param("residual", with_residual);
    let (period, beta) = blowdown_data(&ctx.model, &ctx.z)?;
    ctx.result("period", num(period));
    ctx.result("beta", beta);
    let rs = frequencies(period, beta, ks.iter().copied())?;
    let basis = if with_residual {
        Some(residual_basis(&ctx.model, rs.iter().copied().fold(0.0, f64::max))?)
    } else {
        None
    };
    let mut table = Table::new(["k", "r_k", "hbar", "peak", "normalization", "normalized_peak", "residual"]);
    let mut points = Vec::new();
    for &k in &ks {
        let spec = QuasimodeSpec::with_defaults(ctx.model.clone(), ctx.z.clone(), period, beta, k, &defaults)?;
        let q = l2_normalize(&spec)?;
        let peak = quasimode_eval(&spec, &vec![0.0; spec.dim()])?.value.norm();
        let res = match &basis {
            Some(b) => num(residual_norm(&spec, b)?),
            None => String::new(),
        };
        points.push((spec.frequency(), q.center_modulus()));
        table.push(vec![
            k.to_string(),
            num(spec.frequency()),
            num(spec.hbar()),
            num(peak),
            num(q.normalization.total),
            num(q.center_modulus()),
            res,
        ]);
    }
    if points.len() >= 5 {
        let fit = fit_exponent(&points)?;
        ctx.result("growth_exponent", num(fit.exponent));
        ctx.result("growth_std_error", num(fit.std_error));
    }
    Ok(table)
}

fn lambda_grid(ctx: &mut Ctx, default: (f64, f64, f64)) -> Vec<f64> {
    let p = ctx.p();
    let (a, b, s) = (
        p.lambda_min.unwrap_or(default.0),
        p.lambda_max.unwrap_or(default.1),
        p.lambda_step.unwrap_or(default.2),
    );
    ctx.param("lambda_min", a);
    ctx.param("lambda_max", b);
    ctx.param("lambda_step", s);
    let mut out = Vec::new();
    let mut i = 0;
    loop {
        let v = a + s * i as f64;
        if v > b + 1e-9 {
            break;
        }
        out.push(v);
        i += 1;
    }
    out
}

fn list_param(ctx: &mut Ctx, key: &str, value: Option<Vec<f64>>, default: &[f64]) -> Vec<f64> {
    let v = value.unwrap_or_else(|| default.to_vec());
    ctx.param(key, v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" "));
    v
}

fn projector(ctx: &mut Ctx) -> Result<Table> {
    let lambdas = lambda_grid(ctx, (50.0, 300.0, 25.0));
    let deltas = list_param(ctx, "deltas", ctx.p().deltas.clone(), &[0.05, 0.1, 0.2, 0.4, 0.8]);
    let dmax = deltas.iter().copied().fold(0.0, f64::max);
    let lmax = lambdas.last().copied().unwrap_or(0.0);
    // Sphere windows are centred on the eigenvalue nearest to each grid frequency.
    let (basis, windows): (EigenData, Vec<(f64, WindowSpec)>) = match ctx.model.kind() {
        ModelKind::RoundSphere { dim: 2, radius } if (*radius - 1.0).abs() < 1e-12 => {
            let l_top = lmax.round() as usize + 2;
            let basis = sphere_basis(l_top)?;
            let mut w = Vec::new();
            for &lam in &lambdas {
                let l = (lam - 0.5).round().max(0.0);
                let ev = (l * (l + 1.0)).sqrt();
                for &d in &deltas {
                    w.push((d, WindowSpec::Sharp { lo: ev - d / 2.0, hi: ev + d / 2.0 }));
                }
            }
            (basis, w)
        }
        ModelKind::FlatTorus { basis } => {
            let b = torus_basis(*basis, lmax + dmax + 1.0)?;
            let mut w = Vec::new();
            for &lam in &lambdas {
                for &d in &deltas {
                    w.push((d, WindowSpec::Sharp { lo: lam, hi: lam + d }));
                }
            }
            (b, w)
        }
        _ => return Err(Error::Unsupported("projector sweeps run on the unit 2-sphere and flat tori".into())),
    };
    // Both families have spatially constant window density, so a coarse grid suffices.
    let grid = evaluation_grid(&basis, 1.0, 2.0);
    let mut table = Table::new(["lambda", "delta", "lo", "hi", "count", "sup_squared", "ratio", "ratio_per_delta"]);
    let mut worst_per_delta: f64 = 0.0;
    let mut best_ratio = f64::INFINITY;
    for (d, w) in &windows {
        let WindowSpec::Sharp { lo, hi } = *w else { unreachable!() };
        let lam = (lo + hi) / 2.0;
        let count = basis.window_range(w).len();
        let s2 = projector_sup_norm(&basis, w, &grid)?.powi(2);
        let ratio = s2 / lam;
        worst_per_delta = worst_per_delta.max(ratio / d);
        best_ratio = best_ratio.min(ratio);
        table.push(vec![num(lam), num(*d), num(lo), num(hi), count.to_string(), num(s2), num(ratio), num(ratio / d)]);
    }
    ctx.result("max_ratio_per_delta", num(worst_per_delta));
    ctx.result("min_ratio", num(best_ratio));
    Ok(table)
}

/// Largest `|Y_l0|` along a meridian, sampled at ten points per wavelength and refined.
fn zonal_sup(basis: &EigenData, l: usize) -> Result<f64> {
    let j = sphere_index(l, 0);
    let lam = ((l * (l + 1)) as f64).sqrt().max(1.0);
    let n = (5.0 * lam).ceil() as usize + 1;
    let at = |t: f64| -> Result<f64> { Ok(basis.eval_mode(j, &[t.cos(), t.sin(), 0.0])?.norm()) };
    let h = PI / n as f64;
    let (mut best, mut arg) = (0.0, 0.0);
    for i in 0..=n {
        let t = h * i as f64;
        let v = at(t)?;
        if v > best {
            best = v;
            arg = t;
        }
    }
    for i in 0..=40 {
        let t = (arg - h + h * i as f64 / 20.0).clamp(0.0, PI);
        best = f64::max(best, at(t)?);
    }
    Ok(best)
}

fn growth(ctx: &mut Ctx) -> Result<Table> {
    let mode = ctx.p().mode.clone().unwrap_or_else(|| "zonal".into());
    ctx.param("mode", &mode);
    match mode.as_str() {
        "zonal" => {
            match ctx.model.kind() {
                ModelKind::RoundSphere { dim: 2, radius } if (*radius - 1.0).abs() < 1e-12 => {}
                _ => return Err(Error::Unsupported("zonal growth runs on the unit 2-sphere".into())),
            }
            let p = ctx.p().clone();
            let (a, b) = (p.l_min.unwrap_or(10), p.l_max.unwrap_or(200));
            if a > b {
                return Err(Error::config("parameters.l_max", "empty degree range"));
            }
            ctx.param("l_min", a);
            ctx.param("l_max", b);
            let basis = sphere_basis(b)?;
            let mut table = Table::new(["l", "lambda", "sup"]);
            let mut points = Vec::new();
            for l in a..=b {
                let lam = ((l * (l + 1)) as f64).sqrt();
                let s = zonal_sup(&basis, l)?;
                points.push((lam, s));
                table.push(vec![l.to_string(), num(lam), num(s)]);
            }
            let fit = fit_exponent(&points)?;
            ctx.result("exponent", num(fit.exponent));
            ctx.result("std_error", num(fit.std_error));
            ctx.result("prefactor", num(fit.prefactor));
            Ok(table)
        }
        "quasimode" => {
            let ks = ks_param(ctx, (20, 200, 10))?;
            let defaults = quasimode_defaults(ctx);
            let g = sup_growth(&ctx.model, &ctx.z, &ks, &defaults)?;
            ctx.result("period", num(g.period));
            ctx.result("beta", g.beta);
            ctx.result("exponent", num(g.fit.exponent));
            ctx.result("std_error", num(g.fit.std_error));
            let mut table = Table::new(["k", "r_k", "normalized_peak", "normalization"]);
            for (i, k) in g.ks.iter().enumerate() {
                table.push(vec![k.to_string(), num(g.points[i].0), num(g.points[i].1), num(g.normalizations[i])]);
            }
            Ok(table)
        }
        other => Err(Error::config("parameters.mode", format!("unknown growth mode `{other}` (zonal, quasimode)"))),
    }
}

fn torus_lattice(model: &ManifoldModel) -> Result<[[f64; 2]; 2]> {
    model
        .torus_basis()
        .ok_or_else(|| Error::Unsupported(format!("this experiment runs on flat tori, not {}", model.label())))
}

/// Slope of `log y` against `log x` by least squares (any number of points).
fn log_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

fn lemma2(ctx: &mut Ctx) -> Result<Table> {
    let lattice = torus_lattice(&ctx.model)?;
    let p = ctx.p().clone();
    let trials = p.trials.unwrap_or(50);
    let spectrum_max = p.spectrum_max.unwrap_or(400.0);
    let ppw = p.points_per_wavelength.unwrap_or(10.0);
    ctx.param("trials", trials);
    ctx.param("spectrum_max", spectrum_max);
    ctx.param("points_per_wavelength", ppw);
    let lambdas = list_param(ctx, "lambdas", p.lambdas.clone(), &[100.0, 200.0]);
    let deltas = list_param(ctx, "deltas", p.deltas.clone(), &[0.1, 1.0]);
    if lambdas.iter().any(|l| 2.0 * l > spectrum_max + 1e-9) {
        return Err(Error::config("parameters.lambdas", "the far part needs 2 lambda <= spectrum_max"));
    }
    let basis = torus_basis(lattice, spectrum_max)?;
    let opts = SupOptions { points_per_wavelength: ppw, ..SupOptions::default() };
    let mut table = Table::new([
        "trial", "lambda", "delta", "residual", "near_lhs", "near_rhs", "near_ratio", "far_lhs", "far_rhs", "far_ratio",
    ]);
    let mut near_max = vec![0.0f64; lambdas.len()];
    let mut far_max = vec![0.0f64; lambdas.len()];
    for t in 0..trials {
        for (li, &lam) in lambdas.iter().enumerate() {
            let seed = ctx.cfg.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ ((t as u64) << 16 | li as u64);
            let f = random_torus_coefficients(&basis, &RandomSpectrum { lambda: lam, spectrum_max, seed })?;
            for r in lemma2_sweep(&basis, &f, lam, &deltas, &opts)? {
                near_max[li] = near_max[li].max(r.near_ratio());
                far_max[li] = far_max[li].max(r.far_ratio());
                table.push(vec![
                    t.to_string(),
                    num(lam),
                    num(r.delta),
                    num(r.residual),
                    num(r.near_lhs),
                    num(r.near_rhs),
                    num(r.near_ratio()),
                    num(r.far_lhs),
                    num(r.far_rhs),
                    num(r.far_ratio()),
                ]);
            }
        }
    }
    for (li, lam) in lambdas.iter().enumerate() {
        ctx.result(&format!("near_max_ratio.{lam}"), num(near_max[li]));
        ctx.result(&format!("far_max_ratio.{lam}"), num(far_max[li]));
    }
    if lambdas.len() >= 2 {
        let np: Vec<(f64, f64)> = lambdas.iter().copied().zip(near_max.iter().copied()).collect();
        let fp: Vec<(f64, f64)> = lambdas.iter().copied().zip(far_max.iter().copied()).collect();
        ctx.result("near_ratio_slope", num(log_slope(&np)));
        ctx.result("far_ratio_slope", num(log_slope(&fp)));
    }
    Ok(table)
}

fn smoothed(ctx: &mut Ctx) -> Result<Table> {
    let lattice = torus_lattice(&ctx.model)?;
    let p = ctx.p().clone();
    let t_smooth = p.t_smooth.unwrap_or(1.0);
    let center = p.center.unwrap_or(0.3);
    ctx.param("t_smooth", t_smooth);
    ctx.param("center", center);
    let lambdas = list_param(ctx, "lambdas", p.lambdas.clone(), &[100.0, 150.0, 200.0, 250.0, 300.0]);
    let measures = list_param(ctx, "measures", p.measures.clone(), &[0.01, 0.04, 0.16]);
    let reach = crate::spectral::SmoothingKernel::standard().tail_start() / t_smooth;
    let top = lambdas.iter().copied().fold(0.0, f64::max) + reach + 1.0;
    let basis = torus_basis(lattice, top)?;
    let x = ctx.z.clone();
    let mut table = Table::new(["lambda", "measure", "width", "sum", "full_sum", "scaled"]);
    let mut pooled = Vec::new();
    let mut slopes = Vec::new();
    for &lam in &lambdas {
        let full = smoothed_sum(&basis, t_smooth, lam, &x, None)?;
        let mut per = Vec::new();
        for &m in &measures {
            let b = DirectionCutoff::with_measure(center, m)?;
            let s = smoothed_sum(&basis, t_smooth, lam, &x, Some(&b))?;
            pooled.push((m, s / lam));
            per.push((m, s));
            table.push(vec![num(lam), num(m), num(b.width), num(s), num(full), num(s / lam)]);
        }
        if per.len() >= 2 {
            slopes.push(log_slope(&per));
        }
    }
    if pooled.len() >= 5 {
        let fit = fit_exponent(&pooled)?;
        ctx.result("measure_exponent", num(fit.exponent));
        ctx.result("measure_std_error", num(fit.std_error));
    }
    if let (Some(lo), Some(hi)) = (
        slopes.iter().copied().reduce(f64::min),
        slopes.iter().copied().reduce(f64::max),
    ) {
        ctx.result("per_lambda_exponent_min", num(lo));
        ctx.result("per_lambda_exponent_max", num(hi));
    }
    Ok(table)
}

fn maslov(ctx: &mut Ctx) -> Result<Table> {
    let ks = ks_param(ctx, (10, 100, 10))?;
    match ctx.model.kind() {
        ModelKind::RoundSphere { dim: 2, radius } if (*radius - 1.0).abs() < 1e-12 => {}
        _ => return Err(Error::Unsupported("the eigenvalue comparison runs on the unit 2-sphere".into())),
    }
    let (period, beta) = blowdown_data(&ctx.model, &ctx.z)?;
    ctx.result("period", num(period));
    ctx.result("beta", beta);
    let rs = frequencies(period, beta, ks.iter().copied())?;
    let mut table = Table::new(["k", "r_k", "eigenvalue", "difference", "scaled_difference"]);
    let mut worst: f64 = 0.0;
    for (&k, &r) in ks.iter().zip(&rs) {
        let ev = ((k * (k + 1)) as f64).sqrt();
        let d = (r - ev).abs();
        worst = worst.max(d * k as f64);
        table.push(vec![k.to_string(), num(r), num(ev), num(d), num(d * k as f64)]);
    }
    ctx.result("max_scaled_difference", num(worst));
    Ok(table)
}

fn stationary_phase(ctx: &mut Ctx) -> Result<Table> {
    let p = ctx.p().clone();
    let radii = list_param(ctx, "radii", p.radii.clone(), &[0.1, 0.2]);
    let halvings = p.halvings.unwrap_or(5);
    let k = p.k.unwrap_or(10);
    let cutoff_radius = p.cutoff_radius.unwrap_or(QuasimodeDefaults::default().cutoff_radius);
    ctx.param("halvings", halvings);
    ctx.param("k", k);
    ctx.param("cutoff_radius", cutoff_radius);
    let (period, beta) = blowdown_data(&ctx.model, &ctx.z)?;
    ctx.result("period", num(period));
    ctx.result("beta", beta);
    let n = ctx.model.dim();
    let mut table = Table::new(["radius", "level", "hbar", "quadrature", "asymptotic", "discrepancy", "ratio"]);
    let mut min_ratio = f64::INFINITY;
    let mut max_ratio: f64 = 0.0;
    for &rho in &radii {
        // The ladder keeps rho / hbar a multiple of 4 pi so the phase repeats.
        let h0 = rho / (4.0 * PI);
        let mut prev: Option<f64> = None;
        for j in 0..=halvings {
            let h = h0 / 2f64.powi(j as i32);
            let spec =
                QuasimodeSpec::new(ctx.model.clone(), ctx.z.clone(), period, beta, k, cutoff_radius)?.with_hbar(h)?;
            let mut x = vec![0.0; n];
            x[0] = rho;
            let q = quasimode_eval(&spec, &x)?.value;
            let a = stationary_phase_approx(&x, &spec)?;
            let d = (q - a).norm();
            let ratio = prev.map(|p| p / d);
            if let Some(r) = ratio {
                min_ratio = min_ratio.min(r);
                max_ratio = max_ratio.max(r);
            }
            prev = Some(d);
            table.push(vec![
                num(rho),
                j.to_string(),
                num(h),
                num(q.norm()),
                num(a.norm()),
                num(d),
                ratio.map(num).unwrap_or_default(),
            ]);
        }
    }
    ctx.result("min_halving_ratio", num(min_ratio));
    ctx.result("max_halving_ratio", num(max_ratio));
    Ok(table)
}

fn normalization(ctx: &mut Ctx) -> Result<Table> {
    let ks = ks_param(ctx, (16, 512, 16))?;
    let defaults = quasimode_defaults(ctx);
    let (period, beta) = blowdown_data(&ctx.model, &ctx.z)?;
    ctx.result("period", num(period));
    ctx.result("beta", beta);
    let conv = normalization_convergence(&ctx.model, &ctx.z, period, beta, &ks, &defaults)?;
    ctx.result("limit", num(conv.limit));
    ctx.result("rate_exponent", num(conv.rate.exponent));
    ctx.result("rate_std_error", num(conv.rate.std_error));
    let mut table = Table::new(["k", "hbar", "normalization", "gap"]);
    for (k, &(h, c)) in ks.iter().zip(&conv.samples) {
        table.push(vec![k.to_string(), num(h), num(c), num((c - conv.limit).abs())]);
    }
    Ok(table)
}

fn conservation(ctx: &mut Ctx) -> Result<Table> {
    let p = ctx.p().clone();
    let diameters = p.diameters.unwrap_or(30.0);
    let samples = p.samples.unwrap_or(8);
    ctx.param("diameters", diameters);
    ctx.param("samples", samples);
    let t_max = diameters * ctx.model.diameter();
    let dim = ctx.model.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.cfg.seed);
    let mut cols = vec!["sample".to_string()];
    cols.extend(direction_columns(dim));
    cols.extend(["t_end".to_string(), "energy_drift".into(), "constraint_defect".into(), "steps".into()]);
    let mut table = Table::new(cols);
    let (mut drift, mut defect): (f64, f64) = (0.0, 0.0);
    for s in 0..samples {
        let w = random_direction(&mut rng, dim);
        let state = CotangentState::from_direction(&ctx.model, &ctx.z, &w)?;
        let tr = integrate(&ctx.model, &state, t_max, 1e-10)?;
        drift = drift.max(tr.energy_drift());
        defect = defect.max(tr.constraint_defect());
        let mut row = vec![s.to_string()];
        row.extend(direction_cells(&w));
        row.extend([num(tr.t_end()), num(tr.energy_drift()), num(tr.constraint_defect()), tr.step_count().to_string()]);
        table.push(row);
    }
    ctx.result("max_energy_drift", num(drift));
    ctx.result("max_constraint_defect", num(defect));
    Ok(table)
}
