//! Regularity verdicts for the builtin sets, with the offending witness when
//! a check fails.

use parconv::geometry::{fig1, l_set, m_set, triangle, DEFAULT_RESOLUTION};
use parconv::regularity::{check_regular, DEFAULT_TOL_RATE};

fn main() {
    let r = DEFAULT_RESOLUTION;
    for (name, set) in [
        ("fig1", fig1(r)),
        ("l_set", l_set(r)),
        ("triangle", triangle(r)),
        ("m_set", m_set(r)),
    ] {
        let report = check_regular(&set, DEFAULT_TOL_RATE);
        println!(
            "{name:9} {:?}  min radius {:.4}  lhc {}  uhc {}  {}",
            report.verdict,
            report.interior.min_radius.unwrap_or(0.0),
            report.lhc.ok,
            report.uhc.ok,
            report.reason.as_deref().unwrap_or("")
        );
        if let Some(w) = &report.lhc.witness {
            println!(
                "          x = {:?} in K_{:?} is {:.3} away from K_{:?}",
                w.x, w.y, w.distance, w.y_prime
            );
        }
    }
}
