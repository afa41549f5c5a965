//! Smoothed spectral sums with a direction cutoff scale with the measure of
//! the cap of directions it keeps.

use blowdown::spectral::{smoothed_sum, square_lattice_basis, DirectionCutoff, SmoothingKernel};

fn main() -> blowdown::Result<()> {
    let reach = SmoothingKernel::standard().tail_start();
    let basis = square_lattice_basis(2.0 * std::f64::consts::PI, 150.0 + reach + 1.0)?;
    let x = [0.0, 0.0];
    let full = smoothed_sum(&basis, 1.0, 150.0, &x, None)?;
    println!("kernel reach {reach:.1}, full sum at lambda = 150: {full:.4}");
    for m in [0.01, 0.04, 0.16, 0.64] {
        let b = DirectionCutoff::with_measure(0.3, m)?;
        let s = smoothed_sum(&basis, 1.0, 150.0, &x, Some(&b))?;
        println!("cap measure {m:.2}: sum {s:.4}, sum / (measure * full) = {:.4}", s / (m * full));
    }
    Ok(())
}
