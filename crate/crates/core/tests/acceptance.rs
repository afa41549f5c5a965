//! End-to-end acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use blowdown::dynamics::{classify_point, LoopParams, Stability, Verdict};
use blowdown::flow::{detect_returns, jacobi_conjugate_points, morse_index_of_blowdown, ReturnOptions};
use blowdown::geometry::{exp_map, log_map, ManifoldModel, Profile, TangentVector};
use blowdown::harness::{run_experiment, shipped_config, ExperimentOutput};
use blowdown::quasimode::{growth_table, QuasimodeDefaults};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<(bool, String), String>;

fn run(name: &str) -> Result<ExperimentOutput, String> {
    let cfg = shipped_config(name).map_err(|e| e.to_string())?;
    run_experiment(&cfg).map_err(|e| format!("{name}: {e}"))
}

fn value(out: &ExperimentOutput, key: &str) -> Result<f64, String> {
    out.summary_value(key)
        .ok_or_else(|| format!("{}: missing result `{key}`", out.name))?
        .parse::<f64>()
        .map_err(|e| format!("{}: `{key}`: {e}", out.name))
}

fn column(out: &ExperimentOutput, name: &str) -> Result<Vec<f64>, String> {
    out.table
        .column(name)
        .ok_or_else(|| format!("{}: missing column `{name}`", out.name))?
        .into_iter()
        .map(|c| c.parse::<f64>().map_err(|e| e.to_string()))
        .collect()
}

fn zonal_growth() -> Check {
    let out = run("growth-sphere-zonal")?;
    let e = value(&out, "exponent")?;
    let c = value(&out, "prefactor")?;
    let target = (2.0 * PI).sqrt().recip();
    let ok = (e - 0.5).abs() <= 0.02 && (c / target - 1.0).abs() <= 0.03;
    Ok((ok, format!("exponent {e:.5}, prefactor {c:.5} against {target:.5}")))
}

fn quasimode_lower_bound() -> Check {
    let model = ManifoldModel::surface_of_revolution(Profile::Sine).map_err(|e| e.to_string())?;
    let z = model.pole().map_err(|e| e.to_string())?;
    let ks: Vec<usize> = (20..=200).step_by(10).collect();
    let defaults = QuasimodeDefaults { cutoff_radius: 2.0, ..QuasimodeDefaults::default() };
    let cls = classify_point(&model, &z, &LoopParams::for_model(&model)).map_err(|e| e.to_string())?;
    let Verdict::BlowDown { period } = cls.verdict else {
        return Ok((false, format!("pole classified as {:?}", cls.verdict)));
    };
    let beta = morse_index_of_blowdown(&model, &z, period, 8).map_err(|e| e.to_string())?;
    let g = growth_table(&model, &z, period, beta, &ks, &defaults).map_err(|e| e.to_string())?;
    let scaled: Vec<f64> = g.points.iter().map(|(r, v)| v / r.sqrt()).collect();
    let lo = scaled.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = scaled.iter().copied().fold(0.0, f64::max);
    let spread = hi / lo - 1.0;
    Ok((spread <= 0.05, format!("|Phi_k(z)|/r_k^(1/2) in [{lo:.5}, {hi:.5}], spread {:.2}%", 100.0 * spread)))
}

fn maslov() -> Check {
    let out = run("maslov-sphere")?;
    let beta = value(&out, "beta")?;
    let ks = column(&out, "k")?;
    let diffs = column(&out, "difference")?;
    let worst = ks
        .iter()
        .zip(&diffs)
        .map(|(k, d)| d - (1.0 / (8.0 * k) + 1e-3))
        .fold(f64::NEG_INFINITY, f64::max);
    let covers = ks.first() == Some(&10.0) && ks.last() == Some(&100.0);
    let ok = beta == 2.0 && worst <= 0.0 && covers;
    Ok((ok, format!("beta {beta}, worst margin {worst:.3e} over k 10..100")))
}

fn stationary_phase() -> Check {
    let out = run("stationary-phase-sphere")?;
    let lo = value(&out, "min_halving_ratio")?;
    let hi = value(&out, "max_halving_ratio")?;
    let ratios: Vec<&str> = out.table.column("ratio").unwrap_or_default().into_iter().filter(|c| !c.is_empty()).collect();
    let ok = (lo - 2.0).abs() <= 0.3 && (hi - 2.0).abs() <= 0.3 && ratios.len() >= 8;
    Ok((ok, format!("{} halving ratios in [{lo:.4}, {hi:.4}]", ratios.len())))
}

fn normalization() -> Check {
    let out = run("normalization-sphere")?;
    let rate = value(&out, "rate_exponent")?;
    let limit = value(&out, "limit")?;
    Ok((rate >= 0.4, format!("rate exponent {rate:.4}, limit {limit:.4}")))
}

fn ellipsoid_umbilic() -> Check {
    let model = ManifoldModel::triaxial_ellipsoid(1.0, 0.8, 0.6).map_err(|e| e.to_string())?;
    let z = model.umbilic().map_err(|e| e.to_string())?;
    let params = LoopParams::for_model(&model);
    let cls = classify_point(&model, &z, &params).map_err(|e| e.to_string())?;
    let stab: Vec<Stability> = cls.fixed_points.iter().map(|f| f.stability).collect();
    let opposite = stab.len() == 2 && stab.contains(&Stability::Attracting) && stab.contains(&Stability::Repelling);
    let blowdown = cls.is_blowdown();
    let orbits = run("returnmap-ellipsoid-umbilic")?;
    let converged = value(&orbits, "converged_fraction")?;
    let n_orbits = orbits.table.column("orbit").map(|c| {
        let mut v: Vec<&str> = c;
        v.dedup();
        v.len()
    });
    let rec = run("recurrence-ellipsoid-umbilic")?;
    let frac = value(&rec, "recurrent_fraction")?;
    let g = params.grid_size as f64;
    let bound = 2.0 / g + 2.0 / g.sqrt();
    let ok = blowdown && opposite && converged == 1.0 && n_orbits == Some(100) && frac <= bound;
    Ok((
        ok,
        format!(
            "{:?}, fixed points {stab:?}, converged {converged}, recurrent {frac:.4} <= {bound:.4}",
            cls.verdict
        ),
    ))
}

fn window_dichotomy() -> Check {
    let torus = run("projector-torus")?;
    let lam = column(&torus, "lambda")?;
    let del = column(&torus, "delta")?;
    let s2 = column(&torus, "sup_squared")?;
    let c = lam
        .iter()
        .zip(&del)
        .zip(&s2)
        .map(|((l, d), s)| s / (d * l))
        .fold(0.0, f64::max);
    let covers = lam.iter().copied().fold(f64::INFINITY, f64::min) <= 50.0 + 1.0
        && lam.iter().copied().fold(0.0, f64::max) >= 300.0 - 1.0;
    // Holdout: a constant fitted on the lower half of the range must cover the upper half.
    let mid = 175.0;
    let c_low = lam
        .iter()
        .zip(&del)
        .zip(&s2)
        .filter(|((l, _), _)| **l < mid)
        .map(|((l, d), s)| s / (d * l))
        .fold(0.0, f64::max);
    let c_high = lam
        .iter()
        .zip(&del)
        .zip(&s2)
        .filter(|((l, _), _)| **l >= mid)
        .map(|((l, d), s)| s / (d * l))
        .fold(0.0, f64::max);
    let sphere = run("projector-sphere")?;
    let counts = column(&sphere, "count")?;
    let ss2 = column(&sphere, "sup_squared")?;
    let sdel = column(&sphere, "delta")?;
    let slam = column(&sphere, "lambda")?;
    let cluster_ratio = counts
        .iter()
        .zip(&ss2)
        .map(|(n, s)| s / n)
        .fold(f64::INFINITY, f64::min);
    let floor = 1.0 / (4.0 * PI) - 0.01;
    let sphere_c = slam
        .iter()
        .zip(&sdel)
        .zip(&ss2)
        .map(|((l, d), s)| s / (d * l))
        .fold(0.0, f64::max);
    let captured = counts.iter().all(|&n| n >= 1.0);
    let ok = covers && c.is_finite() && c_high <= c_low && captured && cluster_ratio >= floor && sphere_c > c;
    Ok((
        ok,
        format!(
            "torus C {c:.4} (lower half {c_low:.4}, upper half {c_high:.4}); sphere sup^2/(2l+1) >= {cluster_ratio:.5} (floor {floor:.5}), sphere sup^2/(delta lambda) up to {sphere_c:.3}"
        ),
    ))
}

fn lemma2() -> Check {
    let out = run("lemma2-torus")?;
    let near = value(&out, "near_ratio_slope")?;
    let far = value(&out, "far_ratio_slope")?;
    let nmax = value(&out, "near_max_ratio.100")?.max(value(&out, "near_max_ratio.200")?);
    let fmax = value(&out, "far_max_ratio.100")?.max(value(&out, "far_max_ratio.200")?);
    let trials = column(&out, "trial")?.iter().copied().fold(0.0, f64::max) + 1.0;
    let ok = near <= 0.1 && far <= 0.1 && trials == 50.0;
    Ok((ok, format!("max ratios near {nmax:.4e}, far {fmax:.4e}; slopes near {near:.4}, far {far:.4}")))
}

fn smoothed_sum() -> Check {
    let out = run("smoothed-sum-torus")?;
    let e = value(&out, "measure_exponent")?;
    Ok(((e - 1.0).abs() <= 0.15, format!("exponent in measure {e:.4}")))
}

fn exp_log_roundtrip() -> Result<f64, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let models = [
        ManifoldModel::unit_sphere(),
        ManifoldModel::square_torus(2.0 * PI),
        ManifoldModel::surface_of_revolution(Profile::PerturbedSine { amplitude: 0.2, center: PI / 2.0, width: 0.6 })
            .map_err(|e| e.to_string())?,
        ManifoldModel::triaxial_ellipsoid(1.0, 0.8, 0.6).map_err(|e| e.to_string())?,
    ];
    let bases: [Vec<f64>; 4] = [
        vec![0.3, -0.4, (1.0f64 - 0.25).sqrt()],
        vec![0.7, 1.9],
        vec![1.0, 0.5],
        {
            let mut x = vec![0.4, 0.3, 0.5];
            models[3].project_to_surface(&mut x);
            x
        },
    ];
    let mut worst: f64 = 0.0;
    for (m, z) in models.iter().zip(&bases) {
        let r = 0.8 * m.injectivity_radius();
        for _ in 0..25 {
            let a: f64 = rng.gen_range(0.0..2.0 * PI);
            let len: f64 = rng.gen_range(0.05..r);
            let v = TangentVector::new(z.clone(), vec![len * a.cos(), len * a.sin()]);
            let x = exp_map(m, z, &v).map_err(|e| e.to_string())?;
            let back = log_map(m, z, &x).map_err(|e| e.to_string())?;
            let d = back.components().iter().zip(v.components()).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
            worst = worst.max(d);
        }
    }
    Ok(worst)
}

fn conservation_suite() -> Check {
    let mut drift: f64 = 0.0;
    let mut notes = Vec::new();
    for name in ["conservation-sphere", "conservation-torus", "conservation-sor", "conservation-ellipsoid"] {
        let out = run(name)?;
        let d = value(&out, "max_energy_drift")?;
        notes.push(format!("{d:.1e}"));
        drift = drift.max(d);
    }
    let roundtrip = exp_log_roundtrip()?;
    let sphere = ManifoldModel::unit_sphere();
    let z = sphere.pole().map_err(|e| e.to_string())?;
    let mut identity: f64 = 0.0;
    for k in 0..8 {
        let a = 2.0 * PI * (k as f64 + 0.3) / 8.0;
        let xi = [a.cos(), a.sin()];
        let rec = detect_returns(&sphere, &z, &xi, 7.0, &ReturnOptions::for_model(&sphere))
            .map_err(|e| e.to_string())?;
        let first = rec.first().ok_or("no sphere return")?;
        identity = identity.max(ManifoldModel::direction_distance(&first.direction, &xi));
    }
    let conj = jacobi_conjugate_points(&sphere, &z, &[1.0, 0.0], 4.0).map_err(|e| e.to_string())?;
    let t = conj.conjugate_times.first().map_or(f64::NAN, |c| c.0);
    let ok = drift <= 1e-9 && roundtrip <= 1e-7 && identity <= 1e-6 && (t - PI).abs() <= 1e-6;
    Ok((
        ok,
        format!(
            "drift [{}], exp/log {roundtrip:.1e}, sphere map {identity:.1e}, conjugate time error {:.1e}",
            notes.join(", "),
            (t - PI).abs()
        ),
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Check); 10] = [
        ("sphere zonal growth", zonal_growth),
        ("quasimode lower bound", quasimode_lower_bound),
        ("Maslov consistency", maslov),
        ("stationary phase", stationary_phase),
        ("L2 normalization", normalization),
        ("ellipsoid umbilic dynamics", ellipsoid_umbilic),
        ("window bound dichotomy", window_dichotomy),
        ("near and far window estimates", lemma2),
        ("smoothed cap sum", smoothed_sum),
        ("conservation and roundtrip", conservation_suite),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (ok, detail) = match f() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        if !ok {
            failed += 1;
        }
        println!(
            "criterion {:>2} {}: {name}: {detail} ({:.1} s)",
            i + 1,
            if ok { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
