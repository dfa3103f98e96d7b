//! The simplex solver underneath everything: an LP with its dual
//! multipliers, a Chebyshev ball and a support function.

use parconv::geometry::SlicePolytope;
use parconv::lp::{chebyshev, solve, support, Halfspace, LinearProgram, LpResult};

fn main() -> parconv::Result<()> {
    // min -x - y  s.t.  x + 2y <= 4, 3x + y <= 6, x, y >= 0
    let rows = vec![
        Halfspace::new(vec![1.0, 2.0], 4.0),
        Halfspace::new(vec![3.0, 1.0], 6.0),
        Halfspace::new(vec![-1.0, 0.0], 0.0),
        Halfspace::new(vec![0.0, -1.0], 0.0),
    ];
    match solve(&LinearProgram::new(vec![-1.0, -1.0], rows.clone())) {
        LpResult::Optimal(s) => println!("value {:.4} at {:?}, duals {:?}", s.value, s.point, s.duals),
        other => println!("{:?}", other.status()),
    }

    let poly = SlicePolytope::new(2, rows);
    println!("{:?}", chebyshev(&poly));
    println!("support in (1, 1): {:.4}", support(&poly, &[1.0, 1.0])?);
    println!("vertices: {:?}", poly.vertices());
    Ok(())
}
