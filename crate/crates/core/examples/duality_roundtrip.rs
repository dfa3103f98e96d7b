//! Build the free order unit module of a regular set, compute norms and
//! positivity fiber by fiber, and recover the set as a state space.

use parconv::duality::{check_module_axioms, module_from_set, roundtrip_distance, AxiomOptions, ModuleElement};
use parconv::geometry::{fig1, unit_box, DEFAULT_RESOLUTION};
use parconv::poly::MultiPoly;
use parconv::regularity::{check_regular, DEFAULT_TOL_RATE};

fn main() -> parconv::Result<()> {
    let set = fig1(DEFAULT_RESOLUTION);
    let module = module_from_set(&set)?;
    let mid = module.grid().len() / 2;
    println!(
        "fiber at y = {:?}: generators {:?}",
        module.grid().point(mid),
        module.fibers()[mid].generators()
    );

    let e1 = ModuleElement::basis(1, 1);
    let norm = module.global_norm(&e1)?;
    println!("|e1| = {:.6} attained at y = {:?}", norm.value, norm.argmax_y);
    let y_e0 = ModuleElement::from_polys(vec![MultiPoly::var(1, 0), MultiPoly::zero(1)]);
    println!("|y e0| = {:.6}", module.global_norm(&y_e0)?.value);
    for c in [[1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [0.8, 1.0]] {
        println!(
            "{c:?} positive: {}",
            module.is_positive(&ModuleElement::constant(&c, 1))?
        );
    }

    let back = module.state_space()?;
    println!(
        "state space verdict: {:?}",
        check_regular(&back, DEFAULT_TOL_RATE).verdict
    );
    let axioms = check_module_axioms(&module, AxiomOptions::default());
    println!(
        "module axioms pass: {} (norm constants {:.3} .. {:.3})",
        axioms.pass, axioms.norm_lower, axioms.norm_upper
    );

    for (name, s) in [("fig1", set), ("unit_box(2,1)", unit_box(2, 1, 5))] {
        println!("round trip {name}: {:.2e}", roundtrip_distance(&s)?);
    }
    Ok(())
}
