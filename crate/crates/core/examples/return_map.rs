//! First return map at an umbilic of a triaxial ellipsoid: two fixed
//! directions, one attracting and one repelling.

use blowdown::dynamics::{classify_point, iterate_return_map, LoopParams};
use blowdown::geometry::ManifoldModel;

fn main() -> blowdown::Result<()> {
    let m = ManifoldModel::triaxial_ellipsoid(1.0, 0.8, 0.6)?;
    let z = m.umbilic()?;
    let params = LoopParams::for_model(&m);
    let c = classify_point(&m, &z, &params)?;
    println!("verdict {:?}, identity map {}", c.verdict, c.identity_map);
    for f in &c.fixed_points {
        println!("  fixed direction {:?}  multiplier {:.4}  {:?}", f.direction, f.multiplier, f.stability);
    }
    let a = 2.0_f64;
    let orbit = iterate_return_map(&m, &z, &[a.cos(), a.sin()], 12, &params)?;
    for (i, d) in orbit.directions.iter().enumerate() {
        println!("  eta_{i:<2} angle {:+.6}", d[1].atan2(d[0]));
    }
    Ok(())
}
