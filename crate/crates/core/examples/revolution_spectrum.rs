//! Laplace spectrum of a surface of revolution by separation of variables,
//! compared with the round sphere it perturbs.

use blowdown::geometry::Profile;
use blowdown::spectral::sor_basis;

fn main() -> blowdown::Result<()> {
    let round = sor_basis(&Profile::Sine, 10, 8.0)?;
    let bumped = sor_basis(&Profile::PerturbedSine { amplitude: 0.2, center: 1.3, width: 0.6 }, 10, 8.0)?;
    println!("{:>4} {:>12} {:>6} {:>12} {:>6}", "#", "sine", "mult", "perturbed", "mult");
    for (i, (a, b)) in round.clusters().iter().zip(bumped.clusters()).enumerate().take(8) {
        println!(
            "{i:>4} {:>12.6} {:>6} {:>12.6} {:>6}",
            a.lambda,
            a.indices.len(),
            b.lambda,
            b.indices.len()
        );
    }
    Ok(())
}
