//! Separate exterior points from the builtin sets with polynomial
//! certificates `p = <v, x> + c + M |y - y_z|^2`, and with a continuous
//! separator built from the minimum value function.

use parconv::geometry::{fig1, unit_box, DEFAULT_RESOLUTION};
use parconv::separation::{separate_continuous, separate_polynomial, validate_certificate, DEFAULT_TOL};

fn main() -> parconv::Result<()> {
    let cases = [
        ("unit_box", unit_box(1, 1, DEFAULT_RESOLUTION), vec![2.0], vec![0.0]),
        ("fig1", fig1(DEFAULT_RESOLUTION), vec![0.0], vec![2.0]),
        ("fig1", fig1(DEFAULT_RESOLUTION), vec![1.5], vec![0.3]),
    ];
    for (name, set, x, y) in &cases {
        let cert = separate_polynomial(set, x, y)?;
        let report = validate_certificate(set, &cert, x, y, DEFAULT_TOL);
        println!(
            "{name:9} z = ({x:?}, {y:?})  {:?}  v = {:?}  c = {:.4}  M = {:.4}  min on K = {:.3e}  p(z) = {:.4}",
            cert.branch,
            cert.v,
            cert.c,
            cert.big_m,
            report.min_on_k.unwrap_or(f64::NAN),
            report.value_at_z,
        );
    }

    let set = fig1(DEFAULT_RESOLUTION);
    let sep = separate_continuous(&set, &[0.9], &[0.0])?;
    let report = sep.validate(&set, &[0.9], DEFAULT_TOL);
    println!(
        "continuous separator for (0.9, 0): {:?}, mu(y_z) = {:.4}, f(z) = {:.4}, min on K = {:.3e}",
        sep.case,
        sep.mu_at_z,
        report.value_at_z,
        report.min_on_k.unwrap_or(f64::NAN)
    );

    match separate_polynomial(&set, &[0.0], &[0.0]) {
        Err(e) => println!("interior point: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
