//! Spectral window projectors: on the torus the sup norm shrinks with the
//! window width, on the sphere a window around one eigenvalue cluster keeps
//! the full sup norm.

use std::f64::consts::PI;

use blowdown::spectral::{evaluation_grid, projector_sup_norm, sphere_basis, square_lattice_basis, WindowSpec};

fn main() -> blowdown::Result<()> {
    let torus = square_lattice_basis(2.0 * PI, 205.0)?;
    let sphere = sphere_basis(202)?;
    let tg = evaluation_grid(&torus, 1.0, 2.0);
    let sg = evaluation_grid(&sphere, 1.0, 2.0);
    let lam = 200.0;
    let ev = (200.0f64 * 201.0).sqrt();
    for delta in [0.1, 0.5, 1.0] {
        let t = projector_sup_norm(&torus, &WindowSpec::Sharp { lo: lam, hi: lam + delta }, &tg)?;
        let s = projector_sup_norm(&sphere, &WindowSpec::Sharp { lo: ev - delta / 2.0, hi: ev + delta / 2.0 }, &sg)?;
        println!(
            "delta {delta:.1}: torus |P|^2/lambda = {:.4}   sphere |P|^2/lambda = {:.4}",
            t * t / lam,
            s * s / ev
        );
    }
    Ok(())
}
