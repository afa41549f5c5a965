//! Integrate geodesics on each model and report how well the unit-speed
//! constraint survives thirty diameters of flow.

use blowdown::flow::{integrate, CotangentState};
use blowdown::geometry::{ManifoldModel, Profile};

fn main() -> blowdown::Result<()> {
    let ellipsoid = ManifoldModel::triaxial_ellipsoid(1.0, 0.8, 0.6)?;
    let umbilic = ellipsoid.umbilic()?;
    let cases = [
        (ManifoldModel::unit_sphere(), vec![0.6, 0.0, 0.8]),
        (ManifoldModel::square_torus(1.0), vec![0.1, 0.2]),
        (
            ManifoldModel::surface_of_revolution(Profile::PerturbedSine { amplitude: 0.2, center: 1.3, width: 0.6 })?,
            vec![1.0, 0.5],
        ),
        (ellipsoid, umbilic),
    ];
    for (m, z) in &cases {
        let start = CotangentState::from_direction(m, z, &[0.6, 0.8])?;
        let t = 30.0 * m.diameter();
        let traj = integrate(m, &start, t, 1e-10)?;
        println!(
            "{:<28} T = {:>7.2}  steps = {:>6}  drift = {:.2e}  defect = {:.2e}",
            m.label().chars().take(28).collect::<String>(),
            t,
            traj.step_count(),
            traj.energy_drift(),
            traj.constraint_defect()
        );
    }
    Ok(())
}
