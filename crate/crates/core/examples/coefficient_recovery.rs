//! Recover the coefficient functions of a function that is affine in `x`
//! from point evaluations, and see what goes wrong on a slice without
//! interior.

use parconv::geometry::{fig1, triangle, DEFAULT_RESOLUTION};
use parconv::paff::{recover_coefficients, InteriorSelection};

fn main() -> parconv::Result<()> {
    let set = fig1(DEFAULT_RESOLUTION);
    let f = |x: &[f64], y: &[f64]| y[0].sin() + (1.0 + y[0] * y[0]) * x[0];

    let axis = recover_coefficients(&set, f, InteriorSelection::Axis)?;
    let reflected = recover_coefficients(&set, f, InteriorSelection::Reflected)?;

    let mut worst: f64 = 0.0;
    let mut disagreement: f64 = 0.0;
    for ((a, b), y) in axis.values().iter().zip(reflected.values()).zip(set.grid().points()) {
        let (a, b) = (a.as_ref().unwrap(), b.as_ref().unwrap());
        let exact = [y[0].sin(), 1.0 + y[0] * y[0]];
        for i in 0..2 {
            worst = worst.max((a[i] - exact[i]).abs());
            disagreement = disagreement.max((a[i] - b[i]).abs());
        }
    }
    println!("fig1: max coefficient error {worst:.2e}, selections differ by {disagreement:.2e}");
    println!(
        "grid continuity modulus of the recovered coefficients: {:.4}",
        axis.modulus()
    );

    let tri = triangle(DEFAULT_RESOLUTION);
    match recover_coefficients(&tri, f, InteriorSelection::Axis) {
        Err(e) => println!("triangle: {e}"),
        Ok(_) => println!("triangle: unexpectedly recovered"),
    }
    Ok(())
}
