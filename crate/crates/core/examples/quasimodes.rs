//! Zonal quasimodes at a blow-down point: peak growth, the two-wave
//! asymptotics away from the center, and the normalization constants.

use blowdown::geometry::ManifoldModel;
use blowdown::quasimode::{
    l2_normalize, quasimode_eval, stationary_phase_approx, sup_growth, QuasimodeDefaults, QuasimodeSpec,
};

fn main() -> blowdown::Result<()> {
    let m = ManifoldModel::unit_sphere();
    let z = m.pole()?;
    let ks: Vec<usize> = (20..=100).step_by(20).collect();
    let g = sup_growth(&m, &z, &ks, &QuasimodeDefaults::default())?;
    println!("period {:.6}, Morse index {}, growth exponent {:.4}", g.period, g.beta, g.fit.exponent);

    let spec = QuasimodeSpec::new(m.clone(), z.clone(), g.period, g.beta, 40, 2.0)?;
    for rho in [0.15, 0.3, 0.6] {
        let q = quasimode_eval(&spec, &[rho, 0.0])?;
        let a = stationary_phase_approx(&[rho, 0.0], &spec)?;
        println!("|x| = {rho}: quadrature {:.6}, two-wave {:.6}", q.value, a);
    }
    let n = l2_normalize(&spec)?;
    println!(
        "mass {:.4} (ball {:.4}, annulus {:.4}, leading {:.4})",
        n.normalization.total, n.normalization.ball, n.normalization.annulus, n.normalization.leading
    );
    Ok(())
}
