//! Conjugate points along closed geodesics and the Morse index of a
//! blow-down point.

use std::f64::consts::PI;

use blowdown::flow::{jacobi_conjugate_points, morse_index_of_blowdown};
use blowdown::geometry::ManifoldModel;

fn main() -> blowdown::Result<()> {
    let sphere = ManifoldModel::unit_sphere();
    let z = sphere.pole()?;
    let rep = jacobi_conjugate_points(&sphere, &z, &[1.0, 0.0], 2.0 * PI)?;
    println!("sphere: conjugate times {:?}, index {}", rep.conjugate_times, rep.beta);
    println!("sphere: Morse index of the blow-down {}", morse_index_of_blowdown(&sphere, &z, 2.0 * PI, 8)?);

    let s3 = ManifoldModel::round_sphere(3, 1.0)?;
    let z3 = s3.pole()?;
    println!("S^3: Morse index {}", morse_index_of_blowdown(&s3, &z3, 2.0 * PI, 8)?);

    let e = ManifoldModel::triaxial_ellipsoid(1.0, 0.8, 0.6)?;
    let u = e.umbilic()?;
    let rep = jacobi_conjugate_points(&e, &u, &[0.0, 1.0], 6.0)?;
    println!("ellipsoid umbilic: conjugate times {:?}", rep.conjugate_times);
    Ok(())
}
