//! Named example sets.

use std::fmt;
use std::str::FromStr;

use super::{Constraint, PartiallyConvexSet, DEFAULT_X_BOUND};
use crate::error::{invalid, Error};
use crate::grid::BaseGrid;
use crate::lp::Halfspace;
use crate::poly::MultiPoly;

/// Grid points per axis used when no resolution is given.
pub const DEFAULT_RESOLUTION: usize = 41;

fn interval_rows(half_width: f64) -> Vec<Halfspace> {
    vec![
        Halfspace::new(vec![1.0], half_width),
        Halfspace::new(vec![-1.0], half_width),
    ]
}

/// The region between `y = -1`, `y = 1` and the hyperbola `2x^2 = y^2 + 1`,
/// entered with exact per-grid-point rows `|x| <= sqrt((y^2 + 1) / 2)`.
pub fn fig1(resolution: usize) -> PartiallyConvexSet {
    let grid = BaseGrid::tensor(vec![(-1.0, 1.0)], resolution).expect("valid grid");
    let radii: Vec<f64> = grid
        .points()
        .iter()
        .map(|y| ((y[0] * y[0] + 1.0) / 2.0).sqrt())
        .collect();
    let mut set = PartiallyConvexSet::new(1, grid, DEFAULT_X_BOUND).expect("valid set");
    for (k, r) in radii.into_iter().enumerate() {
        set = set.with_numeric_rows(k, interval_rows(r)).expect("valid rows");
    }
    set
}

/// `{(x, y) : y in [0, 1], |x| <= y}`; the slice at `y = 0` has empty interior.
pub fn triangle(resolution: usize) -> PartiallyConvexSet {
    let grid = BaseGrid::tensor(vec![(0.0, 1.0)], resolution).expect("valid grid");
    let y = MultiPoly::var(1, 0);
    PartiallyConvexSet::new(1, grid, DEFAULT_X_BOUND)
        .and_then(|s| {
            s.with_constraint(Constraint {
                a: vec![MultiPoly::constant(1, 1.0)],
                b: y.clone(),
            })
        })
        .and_then(|s| {
            s.with_constraint(Constraint {
                a: vec![MultiPoly::constant(1, -1.0)],
                b: y,
            })
        })
        .expect("valid set")
}

/// The regular box `[-0.8, 0.8] x [0, 1]`.
pub fn l_set(resolution: usize) -> PartiallyConvexSet {
    let grid = BaseGrid::tensor(vec![(0.0, 1.0)], resolution).expect("valid grid");
    let w = MultiPoly::constant(1, 0.8);
    PartiallyConvexSet::new(1, grid, DEFAULT_X_BOUND)
        .and_then(|s| {
            s.with_constraint(Constraint {
                a: vec![MultiPoly::constant(1, 1.0)],
                b: w.clone(),
            })
        })
        .and_then(|s| {
            s.with_constraint(Constraint {
                a: vec![MultiPoly::constant(1, -1.0)],
                b: w,
            })
        })
        .expect("valid set")
}

/// `([-1, 1] x (0, 1]) ∪ ([-2, 2] x {0})`: interiors are nonempty but the
/// slice map collapses as `y` leaves 0.
pub fn m_set(resolution: usize) -> PartiallyConvexSet {
    let grid = BaseGrid::tensor(vec![(0.0, 1.0)], resolution).expect("valid grid");
    let widths: Vec<f64> = grid
        .points()
        .iter()
        .map(|y| if y[0] == 0.0 { 2.0 } else { 1.0 })
        .collect();
    let mut set = PartiallyConvexSet::new(1, grid, DEFAULT_X_BOUND).expect("valid set");
    for (k, w) in widths.into_iter().enumerate() {
        set = set.with_numeric_rows(k, interval_rows(w)).expect("valid rows");
    }
    set
}

/// `[-1, 1]^n x [0, 1]^m`.
pub fn unit_box(n: usize, m: usize, resolution: usize) -> PartiallyConvexSet {
    let grid = BaseGrid::tensor(vec![(0.0, 1.0); m], resolution).expect("valid grid");
    let mut set = PartiallyConvexSet::new(n, grid, DEFAULT_X_BOUND).expect("valid set");
    for j in 0..n {
        for sign in [1.0, -1.0] {
            let a = (0..n)
                .map(|i| MultiPoly::constant(m, if i == j { sign } else { 0.0 }))
                .collect();
            set = set
                .with_constraint(Constraint {
                    a,
                    b: MultiPoly::constant(m, 1.0),
                })
                .expect("valid constraint");
        }
    }
    set
}

/// Builtin set selector, parsed from names such as `fig1`, `triangle`,
/// `l_set`, `m_set`, `unit_box` or `unit_box:2:1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Builtin {
    Fig1,
    Triangle,
    LSet,
    MSet,
    UnitBox { n: usize, m: usize },
}

impl Builtin {
    pub fn build(self, resolution: usize) -> PartiallyConvexSet {
        match self {
            Builtin::Fig1 => fig1(resolution),
            Builtin::Triangle => triangle(resolution),
            Builtin::LSet => l_set(resolution),
            Builtin::MSet => m_set(resolution),
            Builtin::UnitBox { n, m } => unit_box(n, m, resolution),
        }
    }
}

impl FromStr for Builtin {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let lower = s.to_ascii_lowercase();
        match lower.as_str() {
            "fig1" => return Ok(Builtin::Fig1),
            "triangle" => return Ok(Builtin::Triangle),
            "l_set" | "l" => return Ok(Builtin::LSet),
            "m_set" | "m" => return Ok(Builtin::MSet),
            "unit_box" => return Ok(Builtin::UnitBox { n: 1, m: 1 }),
            _ => {}
        }
        let parts: Vec<&str> = lower.split(':').collect();
        if let ["unit_box", n, m] = parts.as_slice() {
            let n = n.parse().map_err(|_| invalid(format!("bad n in {s}")))?;
            let m = m.parse().map_err(|_| invalid(format!("bad m in {s}")))?;
            if n == 0 || m == 0 {
                return Err(invalid("unit_box dimensions must be positive"));
            }
            return Ok(Builtin::UnitBox { n, m });
        }
        Err(invalid(format!("unknown builtin set '{s}'")))
    }
}

impl fmt::Display for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Builtin::Fig1 => write!(f, "fig1"),
            Builtin::Triangle => write!(f, "triangle"),
            Builtin::LSet => write!(f, "l_set"),
            Builtin::MSet => write!(f, "m_set"),
            Builtin::UnitBox { n, m } => write!(f, "unit_box:{n}:{m}"),
        }
    }
}
