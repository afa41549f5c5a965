//! Recurrent fraction of the loop set: small at the ellipsoid umbilic,
//! full at the pole of a surface of revolution.

use blowdown::dynamics::{recurrence_estimate, LoopParams};
use blowdown::geometry::{ManifoldModel, Profile};

fn main() -> blowdown::Result<()> {
    let e = ManifoldModel::triaxial_ellipsoid(1.0, 0.8, 0.6)?;
    let sor = ManifoldModel::surface_of_revolution(Profile::PerturbedSine { amplitude: 0.2, center: 1.3, width: 0.6 })?;
    for (m, z) in [(e.clone(), e.umbilic()?), (sor.clone(), sor.pole()?)] {
        let mut p = LoopParams::for_model(&m);
        p.n_iter = 20;
        let r = recurrence_estimate(&m, &z, &p)?;
        println!(
            "{:<40} recurrent {:.3} +- {:.3}, loops {:.3}",
            m.label(),
            r.fraction,
            r.half_width,
            r.loop_fraction
        );
    }
    Ok(())
}
