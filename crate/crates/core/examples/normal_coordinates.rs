//! Exponential and logarithm maps at the ellipsoid umbilic, and the metric
//! in geodesic normal coordinates.

use blowdown::geometry::{exp_map, log_map, normal_metric, ManifoldModel, TangentVector};

fn main() -> blowdown::Result<()> {
    let m = ManifoldModel::triaxial_ellipsoid(1.0, 0.8, 0.6)?;
    let z = m.umbilic()?;
    println!("umbilic {z:?}, injectivity radius ~ {:.4}", m.injectivity_radius());
    for (i, r) in [0.05, 0.2, 0.4].iter().enumerate() {
        let a = 0.7 * i as f64 + 0.3;
        let v = TangentVector::new(z.clone(), vec![r * a.cos(), r * a.sin()]);
        let x = exp_map(&m, &z, &v)?;
        let back = log_map(&m, &z, &x)?;
        let err: f64 = back
            .components()
            .iter()
            .zip(v.components())
            .map(|(p, q)| (p - q).powi(2))
            .sum::<f64>()
            .sqrt();
        let g = normal_metric(&m, &z, v.components())?;
        println!(
            "|v| = {r:.2}: roundtrip error {err:.1e}, g = [[{:.6}, {:.6}], [{:.6}, {:.6}]]",
            g[(0, 0)],
            g[(0, 1)],
            g[(1, 0)],
            g[(1, 1)]
        );
    }
    Ok(())
}
