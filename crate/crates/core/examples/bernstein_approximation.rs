//! Uniform approximation of continuous coefficient functions by Bernstein
//! polynomials of increasing degree.

use parconv::geometry::unit_box;
use parconv::paff::{approx_bernstein, sup_distance, CAffFunction};

type Profile = (&'static str, fn(f64) -> f64);

fn main() -> parconv::Result<()> {
    let set = unit_box(1, 1, 201);
    let profiles: [Profile; 3] = [
        ("y^2", |y| y * y),
        ("|y - 0.4|", |y| (y - 0.4).abs()),
        ("exp(2y) x-slope", |y| (2.0 * y).exp()),
    ];
    for (name, g) in profiles {
        let values = set
            .grid()
            .points()
            .iter()
            .map(|y| Some(vec![g(y[0]), 0.5 * g(y[0])]))
            .collect();
        let c = CAffFunction::new(1, set.grid().clone(), values)?;
        print!("{name:16}");
        for d in [1, 2, 4, 8, 16, 32] {
            let p = approx_bernstein(&c, d)?;
            print!("  d={d:<2} {:.3e}", sup_distance(&set, &c, &p));
        }
        println!();
    }
    Ok(())
}
