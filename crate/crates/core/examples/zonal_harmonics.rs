//! Sup norms of zonal spherical harmonics grow like the square root of the
//! frequency; the peak sits at the poles.

use blowdown::harness::fit_exponent;
use blowdown::spectral::{sphere_basis, sphere_index};

fn main() -> blowdown::Result<()> {
    let basis = sphere_basis(200)?;
    let pole = [1.0, 0.0, 0.0];
    let mut points = Vec::new();
    for l in (10..=200).step_by(10) {
        let lam = ((l * (l + 1)) as f64).sqrt();
        let v = basis.eval_mode(sphere_index(l, 0), &pole)?.norm();
        points.push((lam, v));
        println!("l = {l:>3}  lambda = {lam:>8.3}  |Y_l0(pole)| = {v:.6}");
    }
    let fit = fit_exponent(&points)?;
    println!("exponent {:.5} +- {:.1e}, prefactor {:.5}", fit.exponent, fit.std_error, fit.prefactor);
    Ok(())
}
