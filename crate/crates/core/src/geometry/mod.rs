//! Compact partially convex sets in `R^{n+m}`.
//!
//! A set is described by rows `sum_j a_j(y) x_j <= b(y)` whose coefficients
//! are polynomials in `y`, optional per-grid-point numeric rows, and a
//! mandatory box `|x_j| <= R`. For every fixed `y` the slice is therefore an
//! H-polytope, so partial convexity and compactness hold by construction.
//!
//! Numeric rows are attached to grid points. At a parameter value that is
//! not a grid point they are taken from the nearest grid point.

mod builtins;
mod slice;

use std::collections::BTreeMap;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

pub use builtins::{fig1, l_set, m_set, triangle, unit_box, Builtin, DEFAULT_RESOLUTION};
pub(crate) use slice::Combinations;
pub use slice::SlicePolytope;

use crate::error::{invalid, Error, Result};
use crate::grid::{BaseGrid, GridJson};
use crate::lp::Halfspace;
use crate::poly::{MultiPoly, PolyJson};

/// Default radius of the enforced box on `x`.
pub const DEFAULT_X_BOUND: f64 = 10.0;

const MEMBERSHIP_TOL: f64 = 1e-9;

/// One polynomial row `sum_j a_j(y) x_j <= b(y)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Constraint {
    pub a: Vec<MultiPoly>,
    pub b: MultiPoly,
}

impl Constraint {
    pub fn eval(&self, y: &[f64]) -> Halfspace {
        Halfspace::new(self.a.iter().map(|p| p.eval(y)).collect(), self.b.eval(y))
    }
}

#[derive(Clone, Debug)]
pub struct PartiallyConvexSet {
    n: usize,
    grid: BaseGrid,
    constraints: Vec<Constraint>,
    numeric: BTreeMap<usize, Vec<Halfspace>>,
    x_bound: f64,
    slices: OnceLock<Vec<SlicePolytope>>,
}

impl PartiallyConvexSet {
    pub fn new(n: usize, grid: BaseGrid, x_bound: f64) -> Result<Self> {
        if n == 0 {
            return Err(invalid("x dimension must be at least 1"));
        }
        if !(x_bound.is_finite() && x_bound > 0.0) {
            return Err(invalid(format!("x_bound must be positive, got {x_bound}")));
        }
        Ok(Self {
            n,
            grid,
            constraints: Vec::new(),
            numeric: BTreeMap::new(),
            x_bound,
            slices: OnceLock::new(),
        })
    }

    pub fn with_constraint(mut self, constraint: Constraint) -> Result<Self> {
        let m = self.grid.m();
        if constraint.a.len() != self.n {
            return Err(invalid(format!(
                "constraint has {} x-coefficients, expected {}",
                constraint.a.len(),
                self.n
            )));
        }
        if constraint.a.iter().chain([&constraint.b]).any(|p| p.num_vars() != m) {
            return Err(invalid(format!("constraint polynomials must have {m} variables")));
        }
        self.constraints.push(constraint);
        self.slices = OnceLock::new();
        Ok(self)
    }

    pub fn with_numeric_rows(mut self, index: usize, rows: Vec<Halfspace>) -> Result<Self> {
        if index >= self.grid.len() {
            return Err(invalid(format!("numeric rows for grid index {index} out of range")));
        }
        if let Some(r) = rows.iter().find(|r| r.a.len() != self.n || !r.b.is_finite()) {
            return Err(invalid(format!("malformed numeric row {r:?}")));
        }
        self.numeric.entry(index).or_default().extend(rows);
        self.slices = OnceLock::new();
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.grid.m()
    }

    pub fn grid(&self) -> &BaseGrid {
        &self.grid
    }

    pub fn x_bound(&self) -> f64 {
        self.x_bound
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn numeric_rows(&self) -> &BTreeMap<usize, Vec<Halfspace>> {
        &self.numeric
    }

    fn box_rows(&self) -> Vec<Halfspace> {
        let mut rows = Vec::with_capacity(2 * self.n);
        for j in 0..self.n {
            for sign in [1.0, -1.0] {
                let mut a = vec![0.0; self.n];
                a[j] = sign;
                rows.push(Halfspace::new(a, self.x_bound));
            }
        }
        rows
    }

    fn rows_with_index(&self, y: &[f64], index: usize) -> Vec<Halfspace> {
        let mut rows: Vec<Halfspace> = self.constraints.iter().map(|c| c.eval(y)).collect();
        if let Some(extra) = self.numeric.get(&index) {
            rows.extend(extra.iter().cloned());
        }
        rows.extend(self.box_rows());
        rows
    }

    /// All rows defining the slice at `y`, including the `x` box.
    pub fn rows_at(&self, y: &[f64]) -> Result<Vec<Halfspace>> {
        if !self.grid.contains(y) {
            return Err(Error::YOutsideBox { y: y.to_vec() });
        }
        let index = self.grid.index_of(y).unwrap_or_else(|| self.grid.nearest(y));
        Ok(self.rows_with_index(y, index))
    }

    /// The slice `K_y` with its Chebyshev data.
    pub fn slice(&self, y: &[f64]) -> Result<SlicePolytope> {
        if let Some(k) = self.grid.index_of(y) {
            return Ok(self.slice_at(k).clone());
        }
        Ok(SlicePolytope::new(self.n, self.rows_at(y)?))
    }

    /// The slice at grid point `index`.
    pub fn slice_at(&self, index: usize) -> &SlicePolytope {
        &self.slices()[index]
    }

    /// Slices at every grid point, computed once.
    pub fn slices(&self) -> &[SlicePolytope] {
        self.slices.get_or_init(|| {
            (0..self.grid.len())
                .map(|k| SlicePolytope::new(self.n, self.rows_with_index(self.grid.point(k), k)))
                .collect()
        })
    }

    pub fn membership(&self, x: &[f64], y: &[f64]) -> bool {
        if x.len() != self.n || !self.grid.contains(y) {
            return false;
        }
        match self.rows_at(y) {
            Ok(rows) => rows.iter().all(|r| r.slack(x) >= -MEMBERSHIP_TOL),
            Err(_) => false,
        }
    }

    /// Grid indices whose slice is nonempty: the sampled projection onto `Y`.
    pub fn project_y(&self) -> Vec<usize> {
        (0..self.grid.len()).filter(|&k| !self.slice_at(k).is_empty()).collect()
    }

    pub fn from_json(json: &SetJson) -> Result<Self> {
        if json.y_box.len() != json.m {
            return Err(invalid(format!(
                "y_box has {} axes, expected m = {}",
                json.y_box.len(),
                json.m
            )));
        }
        let y_box: Vec<(f64, f64)> = json.y_box.iter().map(|b| (b[0], b[1])).collect();
        let grid = match &json.grid {
            GridSpec::PointsPerAxis { points_per_axis } => BaseGrid::tensor(y_box, *points_per_axis)?,
            GridSpec::Points { points } => BaseGrid::from_points(y_box, points.clone())?,
        };
        let mut set = Self::new(json.n, grid, json.x_bound)?;
        for c in &json.constraints {
            let a =
                c.a.iter()
                    .map(|p| MultiPoly::from_json(json.m, p))
                    .collect::<Result<Vec<_>>>()?;
            let b = MultiPoly::from_json(json.m, &c.b)?;
            set = set.with_constraint(Constraint { a, b })?;
        }
        for (&index, rows) in &json.numeric_constraints {
            set = set.with_numeric_rows(index, rows.clone())?;
        }
        Ok(set)
    }

    pub fn to_json(&self) -> SetJson {
        let GridJson { y_box, points } = self.grid.to_json();
        SetJson {
            n: self.n,
            m: self.m(),
            x_bound: self.x_bound,
            y_box,
            grid: GridSpec::Points { points },
            constraints: self
                .constraints
                .iter()
                .map(|c| ConstraintJson {
                    a: c.a.iter().map(MultiPoly::to_json).collect(),
                    b: c.b.to_json(),
                })
                .collect(),
            numeric_constraints: self.numeric.clone(),
        }
    }
}

fn default_x_bound() -> f64 {
    DEFAULT_X_BOUND
}

/// Wire form of a set definition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SetJson {
    pub n: usize,
    pub m: usize,
    #[serde(default = "default_x_bound")]
    pub x_bound: f64,
    pub y_box: Vec<[f64; 2]>,
    pub grid: GridSpec,
    #[serde(default)]
    pub constraints: Vec<ConstraintJson>,
    #[serde(default)]
    pub numeric_constraints: BTreeMap<usize, Vec<Halfspace>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    PointsPerAxis { points_per_axis: usize },
    Points { points: Vec<Vec<f64>> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstraintJson {
    pub a: Vec<PolyJson>,
    pub b: PolyJson,
}
