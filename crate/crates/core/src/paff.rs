//! Partially affine functions: polynomial ones, grid-sampled continuous
//! ones, coefficient recovery and uniform approximation.
//!
//! On a slice with nonempty interior an affine function is determined by
//! its values at `n + 1` affinely independent points. Recovery picks those
//! points around the Chebyshev center of each slice and solves the
//! `(n + 1) x (n + 1)` system `M(y) c(y) = F(y)` whose rows are `[1, s_k]`.
//! Approximation replaces every coefficient function by its tensor-product
//! Bernstein polynomial over the parameter box.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{PartiallyConvexSet, SlicePolytope};
use crate::grid::{dist2, BaseGrid, GridJson};
use crate::lp::dot;
use crate::poly::{MultiPoly, PolyJson};

/// Minimum inscribed radius for a slice to count as full-dimensional.
pub const INTERIOR_EPS: f64 = 1e-7;

const DET_EPS: f64 = 1e-12;
const RESIDUAL_TOL: f64 = 1e-8;

/// `p(x, y) = c_0(y) + sum_i c_i(y) x_i` with polynomial coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct PAffPolynomial {
    n: usize,
    m: usize,
    coeffs: Vec<MultiPoly>,
}

impl PAffPolynomial {
    /// `coeffs[0]` is the constant term, `coeffs[i]` multiplies `x_i`.
    pub fn new(n: usize, m: usize, coeffs: Vec<MultiPoly>) -> Result<Self> {
        if coeffs.len() != n + 1 {
            return Err(invalid(format!(
                "expected {} coefficients, got {}",
                n + 1,
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|c| c.num_vars() != m) {
            return Err(invalid(format!("coefficients must be polynomials in {m} variables")));
        }
        Ok(Self { n, m, coeffs })
    }

    pub fn constant(n: usize, m: usize, value: f64) -> Self {
        let mut coeffs = vec![MultiPoly::zero(m); n + 1];
        coeffs[0] = MultiPoly::constant(m, value);
        Self { n, m, coeffs }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn coeffs(&self) -> &[MultiPoly] {
        &self.coeffs
    }

    /// `(c_0(y), ..., c_n(y))`.
    pub fn coefficient_values(&self, y: &[f64]) -> Vec<f64> {
        self.coeffs.iter().map(|c| c.eval(y)).collect()
    }

    pub fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        eval_paff(self, x, y)
    }

    pub fn from_json(json: &PaffJson) -> Result<Self> {
        let coeffs = json
            .coeffs
            .iter()
            .map(|p| MultiPoly::from_json(json.m, p))
            .collect::<Result<Vec<_>>>()?;
        Self::new(json.n, json.m, coeffs)
    }

    pub fn to_json(&self) -> PaffJson {
        PaffJson {
            n: self.n,
            m: self.m,
            coeffs: self.coeffs.iter().map(MultiPoly::to_json).collect(),
        }
    }
}

/// `c_0(y) + sum_i c_i(y) x_i`.
pub fn eval_paff(p: &PAffPolynomial, x: &[f64], y: &[f64]) -> f64 {
    let c = p.coefficient_values(y);
    c[0] + dot(&c[1..], x)
}

/// A continuous partially affine function sampled as coefficient vectors on
/// a grid. Entries are `None` at grid points outside the projection.
#[derive(Clone, Debug, PartialEq)]
pub struct CAffFunction {
    n: usize,
    grid: BaseGrid,
    values: Vec<Option<Vec<f64>>>,
}

impl CAffFunction {
    pub fn new(n: usize, grid: BaseGrid, values: Vec<Option<Vec<f64>>>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(invalid(format!(
                "{} coefficient vectors for {} grid points",
                values.len(),
                grid.len()
            )));
        }
        for v in values.iter().flatten() {
            if v.len() != n + 1 || v.iter().any(|c| !c.is_finite()) {
                return Err(invalid(format!("malformed coefficient vector {v:?}")));
            }
        }
        Ok(Self { n, grid, values })
    }

    /// Samples a polynomial at the grid points of `set` with nonempty slice.
    pub fn from_paff(set: &PartiallyConvexSet, p: &PAffPolynomial) -> Self {
        let values = set
            .slices()
            .iter()
            .zip(set.grid().points())
            .map(|(s, y)| (!s.is_empty()).then(|| p.coefficient_values(y)))
            .collect();
        Self {
            n: set.n(),
            grid: set.grid().clone(),
            values,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn grid(&self) -> &BaseGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Option<Vec<f64>>] {
        &self.values
    }

    pub fn eval_at(&self, index: usize, x: &[f64]) -> Option<f64> {
        self.values[index].as_ref().map(|c| c[0] + dot(&c[1..], x))
    }

    /// Largest difference quotient `|c(y) - c(y')|_inf / |y - y'|` over
    /// neighbouring grid points: a grid-level continuity modulus.
    pub fn modulus(&self) -> f64 {
        self.grid
            .neighbour_pairs()
            .into_iter()
            .filter_map(|(i, j)| {
                let (a, b) = (self.values[i].as_ref()?, self.values[j].as_ref()?);
                let diff = a.iter().zip(b).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
                Some(diff / dist2(self.grid.point(i), self.grid.point(j)).sqrt())
            })
            .fold(0.0, f64::max)
    }

    pub fn from_json(json: &CaffJson) -> Result<Self> {
        Self::new(json.n, BaseGrid::from_json(&json.grid_ref)?, json.values.clone())
    }

    pub fn to_json(&self) -> CaffJson {
        CaffJson {
            n: self.n,
            grid_ref: self.grid.to_json(),
            values: self.values.clone(),
        }
    }
}

/// How the `n + 1` interior interpolation points are chosen in each slice.
/// With Chebyshev center `x_c` and radius `r`:
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum InteriorSelection {
    /// `x_c` and `x_c + (r / 2) e_i`.
    #[default]
    Axis,
    /// `b = x_c - (r / 4) 1 / sqrt(n)` and `b - (r / 2) e_i`.
    Reflected,
}

impl InteriorSelection {
    pub fn points(self, center: &[f64], radius: f64) -> Vec<Vec<f64>> {
        let n = center.len();
        let base: Vec<f64> = match self {
            InteriorSelection::Axis => center.to_vec(),
            InteriorSelection::Reflected => {
                let shift = radius / 4.0 / (n as f64).sqrt();
                center.iter().map(|c| c - shift).collect()
            }
        };
        let step = match self {
            InteriorSelection::Axis => radius / 2.0,
            InteriorSelection::Reflected => -radius / 2.0,
        };
        let mut pts = vec![base.clone()];
        for i in 0..n {
            let mut p = base.clone();
            p[i] += step;
            pts.push(p);
        }
        pts
    }
}

/// Solves for the coefficient vector of `f(., y)` on one slice.
pub fn recover_at<F>(slice: &SlicePolytope, y: &[f64], f: &F, selection: InteriorSelection) -> Result<Vec<f64>>
where
    F: Fn(&[f64], &[f64]) -> f64,
{
    let n = slice.n();
    let radius = slice.chebyshev_radius().unwrap_or(0.0);
    if radius < INTERIOR_EPS {
        return Err(Error::DegenerateSlice { y: y.to_vec(), radius });
    }
    let center = slice.chebyshev_center().expect("nonempty slice has a center");
    let pts = selection.points(center, radius);
    let mat = DMatrix::from_fn(n + 1, n + 1, |i, j| if j == 0 { 1.0 } else { pts[i][j - 1] });
    let rhs = DVector::from_iterator(n + 1, pts.iter().map(|s| f(s, y)));
    let lu = mat.clone().lu();
    let det = lu.determinant();
    if det.abs() < DET_EPS {
        return Err(Error::SingularSystem { y: y.to_vec(), det });
    }
    let c = lu
        .solve(&rhs)
        .ok_or_else(|| Error::SingularSystem { y: y.to_vec(), det })?;
    let residual = (&mat * &c - &rhs).amax();
    if residual > RESIDUAL_TOL * (1.0 + rhs.amax()) {
        return Err(Error::SingularSystem { y: y.to_vec(), det });
    }
    Ok(c.iter().copied().collect())
}

/// Recovers the coefficient functions of a partially affine `f` at every
/// grid point of `set` with nonempty slice.
pub fn recover_coefficients<F>(set: &PartiallyConvexSet, f: F, selection: InteriorSelection) -> Result<CAffFunction>
where
    F: Fn(&[f64], &[f64]) -> f64,
{
    let grid = set.grid();
    let mut values = Vec::with_capacity(grid.len());
    for (k, slice) in set.slices().iter().enumerate() {
        if slice.is_empty() {
            values.push(None);
        } else {
            values.push(Some(recover_at(slice, grid.point(k), &f, selection)?));
        }
    }
    CAffFunction::new(set.n(), grid.clone(), values)
}

/// Piecewise multilinear interpolation of grid samples.
struct Interpolant<'a> {
    axes: &'a [Vec<f64>],
    samples: Vec<f64>,
}

impl Interpolant<'_> {
    fn eval(&self, y: &[f64]) -> f64 {
        let m = self.axes.len();
        let mut cell = Vec::with_capacity(m);
        for (axis, &v) in self.axes.iter().zip(y) {
            if axis.len() == 1 {
                cell.push((0, 0.0));
                continue;
            }
            let i = axis.partition_point(|&a| a <= v).clamp(1, axis.len() - 1) - 1;
            let w = ((v - axis[i]) / (axis[i + 1] - axis[i])).clamp(0.0, 1.0);
            cell.push((i, w));
        }
        let mut total = 0.0;
        for corner in 0..(1usize << m) {
            let mut weight = 1.0;
            let mut flat = 0;
            for (a, &(i, w)) in cell.iter().enumerate() {
                let up = (corner >> a) & 1 == 1 && self.axes[a].len() > 1;
                weight *= if up {
                    w
                } else if self.axes[a].len() > 1 {
                    1.0 - w
                } else {
                    1.0
                };
                if (corner >> a) & 1 == 1 && self.axes[a].len() == 1 {
                    weight = 0.0;
                }
                flat = flat * self.axes[a].len() + i + usize::from(up);
            }
            if weight != 0.0 {
                total += weight * self.samples[flat];
            }
        }
        total
    }
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * f64::from(n - i) / f64::from(i + 1))
}

/// Bernstein basis polynomials of one axis, expressed in the monomial basis
/// of `y`.
fn axis_basis(m: usize, axis: usize, lo: f64, hi: f64, degree: u32) -> Vec<MultiPoly> {
    if hi == lo {
        return vec![MultiPoly::constant(m, 1.0)];
    }
    let w = hi - lo;
    let t = &MultiPoly::var(m, axis).scale(1.0 / w) - &MultiPoly::constant(m, lo / w);
    let one_minus_t = &MultiPoly::constant(m, 1.0) - &t;
    let pow = |p: &MultiPoly, e: u32| (0..e).fold(MultiPoly::constant(m, 1.0), |acc, _| &acc * p);
    (0..=degree)
        .map(|k| (&pow(&t, k) * &pow(&one_minus_t, degree - k)).scale(binomial(degree, k)))
        .collect()
}

/// Tensor-product Bernstein approximation of every coefficient function.
/// Coefficients are sampled at the Bernstein nodes through multilinear
/// interpolation of the grid values, which is exact at grid points.
pub fn approx_bernstein(c: &CAffFunction, degree: u32) -> Result<PAffPolynomial> {
    let grid = c.grid();
    if !grid.is_full_tensor() {
        return Err(Error::GridNotTensor);
    }
    let tensor = grid.tensor_index().expect("full tensor grid");
    let m = grid.m();
    let n = c.n();
    let axes = &tensor.axes;
    let total: usize = axes.iter().map(Vec::len).product();
    let mut samples = vec![vec![0.0; total]; n + 1];
    for (k, v) in c.values().iter().enumerate() {
        let v = v
            .as_ref()
            .ok_or_else(|| invalid("Bernstein approximation needs coefficients at every grid point"))?;
        let mut flat = 0;
        for (axis, &i) in axes.iter().zip(tensor.multi_index(k)) {
            flat = flat * axis.len() + i;
        }
        for (s, &val) in samples.iter_mut().zip(v) {
            s[flat] = val;
        }
    }
    let interpolants: Vec<Interpolant> = samples.into_iter().map(|s| Interpolant { axes, samples: s }).collect();

    let bases: Vec<Vec<MultiPoly>> = grid
        .y_box()
        .iter()
        .enumerate()
        .map(|(a, &(lo, hi))| axis_basis(m, a, lo, hi, degree))
        .collect();
    let mut coeffs = vec![MultiPoly::zero(m); n + 1];
    let mut multi = vec![0usize; m];
    loop {
        let node: Vec<f64> = multi
            .iter()
            .zip(grid.y_box())
            .zip(&bases)
            .map(|((&k, &(lo, hi)), b)| {
                if b.len() == 1 {
                    lo
                } else {
                    lo + (hi - lo) * k as f64 / f64::from(degree)
                }
            })
            .collect();
        let basis = multi
            .iter()
            .zip(&bases)
            .fold(MultiPoly::constant(m, 1.0), |acc, (&k, b)| &acc * &b[k]);
        for (coef, interp) in coeffs.iter_mut().zip(&interpolants) {
            let value = interp.eval(&node);
            if value != 0.0 {
                *coef = &*coef + &basis.scale(value);
            }
        }
        // advance the multi-index over {0..=degree}^m (size 1 on degenerate axes)
        let mut axis = m;
        loop {
            if axis == 0 {
                return PAffPolynomial::new(n, m, coeffs);
            }
            axis -= 1;
            multi[axis] += 1;
            if multi[axis] < bases[axis].len() {
                break;
            }
            multi[axis] = 0;
        }
    }
}

/// `max |f - p|` over the sampled set. For each grid point the difference is
/// affine in `x`, so its maximum modulus over the slice is attained at a
/// vertex and computed exactly with two linear programs.
pub fn sup_distance(set: &PartiallyConvexSet, f: &CAffFunction, p: &PAffPolynomial) -> f64 {
    let mut worst: f64 = 0.0;
    for (k, values) in f.values().iter().enumerate() {
        let Some(cf) = values else { continue };
        let y = f.grid().point(k);
        let owned;
        let slice = match set.grid().index_of(y) {
            Some(i) => set.slice_at(i),
            None => match set.slice(y) {
                Ok(s) => {
                    owned = s;
                    &owned
                }
                Err(_) => continue,
            },
        };
        let cp = p.coefficient_values(y);
        let diff: Vec<f64> = cf.iter().zip(&cp).map(|(a, b)| a - b).collect();
        if let (Some(hi), Some((lo, _))) = (
            slice.max_affine(&diff[1..], diff[0]),
            slice.min_affine(&diff[1..], diff[0]),
        ) {
            worst = worst.max(hi.abs()).max(lo.abs());
        }
    }
    worst
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PaffJson {
    pub n: usize,
    pub m: usize,
    pub coeffs: Vec<PolyJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaffJson {
    pub n: usize,
    pub grid_ref: GridJson,
    pub values: Vec<Option<Vec<f64>>>,
}
