//! Laplace residual of sphere quasimodes: bounded with the correct Morse
//! index, growing linearly in k with a wrong one.

use std::f64::consts::PI;

use blowdown::geometry::ManifoldModel;
use blowdown::quasimode::{residual_norm, QuasimodeSpec};
use blowdown::spectral::sphere_basis;

fn main() -> blowdown::Result<()> {
    let m = ManifoldModel::unit_sphere();
    let z = m.pole()?;
    let basis = sphere_basis(250)?;
    for k in [10, 25, 50, 100] {
        let good = residual_norm(&QuasimodeSpec::new(m.clone(), z.clone(), 2.0 * PI, 2, k, 2.0)?, &basis)?;
        let bad = residual_norm(&QuasimodeSpec::new(m.clone(), z.clone(), 2.0 * PI, 3, k, 2.0)?, &basis)?;
        println!("k = {k:>3}: residual {good:.4} (index 2), {bad:.3} (index 3)");
    }
    Ok(())
}
