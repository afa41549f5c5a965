//! Sup norms of the near and far spectral parts of a random torus function,
//! against the Laplace residual that controls them.

use blowdown::spectral::{lemma2_sweep, random_torus_coefficients, square_lattice_basis, RandomSpectrum, SupOptions};

fn main() -> blowdown::Result<()> {
    let basis = square_lattice_basis(2.0 * std::f64::consts::PI, 200.0)?;
    for seed in 0..3 {
        let f = random_torus_coefficients(&basis, &RandomSpectrum { lambda: 80.0, spectrum_max: 200.0, seed })?;
        for r in lemma2_sweep(&basis, &f, 80.0, &[0.1, 1.0], &SupOptions::default())? {
            println!(
                "seed {seed} delta {:.1}: near {:.3e} <= {:.3e}, far {:.3e} <= {:.3e}",
                r.delta, r.near_lhs, r.near_rhs, r.far_lhs, r.far_rhs
            );
        }
    }
    Ok(())
}
