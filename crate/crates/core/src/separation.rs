//! Separating a point from a compact partially convex set.
//!
//! Two constructions are provided:
//!
//! * [`separate_polynomial`] returns a partially affine polynomial
//!   `p(x, y) = <v, x> + c + M |y - y_z|^2` (or `-1 + M |y - y_z|^2` when
//!   the slice at `y_z` is empty) that is nonnegative on the set and negative
//!   at the point.
//! * [`separate_continuous`] returns `f(x, y) = <v, x> + c + mu(y)` where
//!   `mu(y) = max(0, -m(y))` and `m` is the minimum of `<v, x> + c` over the
//!   slice. When `y_z` is not in the projection it falls back to the
//!   distance-squared separator `|y - y_z|^2 - d^2 / 2`.
//!
//! Boundedness matters. The set `{x >= -exp(y^2)}` is closed and partially
//! convex, yet no partially affine polynomial separates `(-2, 0)` from it:
//! the coefficient of `x` must be a nonnegative, nonzero polynomial `v`, and
//! the constant term would have to dominate `v(y) exp(y^2)`. Any bounded
//! truncation is separable:
//!
//! ```
//! use parconv::geometry::PartiallyConvexSet;
//! use parconv::grid::BaseGrid;
//! use parconv::lp::Halfspace;
//! use parconv::separation::{separate_polynomial, validate_certificate, Branch};
//!
//! let grid = BaseGrid::tensor(vec![(-2.0, 2.0)], 21).unwrap();
//! let floors: Vec<f64> = grid.points().iter().map(|y| (y[0] * y[0]).exp()).collect();
//! let mut set = PartiallyConvexSet::new(1, grid, 100.0).unwrap();
//! for (k, f) in floors.into_iter().enumerate() {
//!     set = set.with_numeric_rows(k, vec![Halfspace::new(vec![-1.0], f)]).unwrap();
//! }
//! let cert = separate_polynomial(&set, &[-2.0], &[0.0]).unwrap();
//! assert_eq!(cert.branch, Branch::SliceNonempty);
//! assert!(validate_certificate(&set, &cert, &[-2.0], &[0.0], 1e-7).pass);
//! ```

use std::borrow::Cow;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{PartiallyConvexSet, SlicePolytope};
use crate::grid::dist2;
use crate::lp::{self, dot, Halfspace, LinearProgram, LpResult};

/// Fraction of the separation gap placed on the slice side: the slice sees
/// `<v, x> + c >= delta = 0.2 * gap` and the point sees `-0.8 * gap`.
pub const SLICE_MARGIN_FRACTION: f64 = 0.2;

/// Largest multiplier tried by the doubling search.
pub const MAX_MULTIPLIER: f64 = 1e12;

/// Tolerance used internally when validating freshly built certificates.
pub const DEFAULT_TOL: f64 = 1e-7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    SliceNonempty,
    SliceEmpty,
}

/// The polynomial `<v, x> + c + big_m * |y - y_z|^2`. For the empty-slice
/// branch `v = 0`, `c = -1` and `gamma` is the squared distance from `y_z`
/// to the sampled projection.
#[derive(Clone, Debug, PartialEq)]
pub struct SeparationCertificate {
    pub branch: Branch,
    pub v: Vec<f64>,
    pub c: f64,
    pub big_m: f64,
    pub y_z: Vec<f64>,
    pub delta: f64,
    pub gamma: Option<f64>,
}

impl SeparationCertificate {
    pub fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        dot(&self.v, x) + self.c + self.big_m * dist2(y, &self.y_z)
    }

    /// Exact minimum over a slice at parameter `y`; the certificate is
    /// affine in `x` once `y` is fixed.
    pub fn min_over_slice(&self, slice: &SlicePolytope, y: &[f64]) -> Option<f64> {
        slice
            .min_affine(&self.v, self.c)
            .map(|(val, _)| val + self.big_m * dist2(y, &self.y_z))
    }

    /// The same certificate with a different multiplier.
    pub fn with_multiplier(&self, big_m: f64) -> Self {
        Self { big_m, ..self.clone() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    /// Minimum over the sampled set; `None` when the set has no samples.
    #[serde(rename = "min_on_K")]
    pub min_on_k: Option<f64>,
    /// Parameter value at which the minimum is attained.
    #[serde(skip)]
    pub argmin_y: Option<Vec<f64>>,
    pub value_at_z: f64,
    pub tol: f64,
    #[serde(skip)]
    pub pass: bool,
}

/// Grid slices plus the slice at `y_z` when it is an in-box off-grid point.
fn sample_slices<'a>(set: &'a PartiallyConvexSet, y_z: &[f64]) -> Vec<(Cow<'a, [f64]>, Cow<'a, SlicePolytope>)> {
    let grid = set.grid();
    let mut out: Vec<(Cow<[f64]>, Cow<SlicePolytope>)> = (0..grid.len())
        .filter(|&k| !set.slice_at(k).is_empty())
        .map(|k| (Cow::Borrowed(grid.point(k)), Cow::Borrowed(set.slice_at(k))))
        .collect();
    if grid.contains(y_z) && grid.index_of(y_z).is_none() {
        if let Ok(s) = set.slice(y_z) {
            if !s.is_empty() {
                out.push((Cow::Owned(y_z.to_vec()), Cow::Owned(s)));
            }
        }
    }
    out
}

fn check_point(set: &PartiallyConvexSet, x_z: &[f64], y_z: &[f64]) -> Result<()> {
    if x_z.len() != set.n() || y_z.len() != set.m() {
        return Err(invalid(format!(
            "point has dimensions ({}, {}), set has ({}, {})",
            x_z.len(),
            y_z.len(),
            set.n(),
            set.m()
        )));
    }
    if set.membership(x_z, y_z) {
        return Err(Error::PointInsideSet {
            x: x_z.to_vec(),
            y: y_z.to_vec(),
        });
    }
    Ok(())
}

/// Slice at `y_z` when `y_z` lies in the box and the slice is nonempty.
fn nonempty_slice_at(set: &PartiallyConvexSet, y_z: &[f64]) -> Option<SlicePolytope> {
    if !set.grid().contains(y_z) {
        return None;
    }
    set.slice(y_z).ok().filter(|s| !s.is_empty())
}

/// Max-margin separation of `x_z` from a nonempty polytope `{A x <= b}`
/// with `|v|_inf <= 1`: maximize `lambda·(A x_z - b)` over `lambda >= 0`,
/// `-1 <= A^T lambda <= 1`, then `v = -A^T lambda`. Returns `(v, c, delta)`.
fn slice_separator(slice: &SlicePolytope, x_z: &[f64]) -> Option<(Vec<f64>, f64, f64)> {
    let n = slice.n();
    let rows = slice.rows();
    let r = rows.len();
    let objective: Vec<f64> = rows.iter().map(|h| -(dot(&h.a, x_z) - h.b)).collect();
    let mut lp_rows = Vec::with_capacity(2 * n + r);
    for j in 0..n {
        let col: Vec<f64> = rows.iter().map(|h| h.a[j]).collect();
        lp_rows.push(Halfspace::new(col.clone(), 1.0));
        lp_rows.push(Halfspace::new(col.iter().map(|v| -v).collect(), 1.0));
    }
    for i in 0..r {
        let mut a = vec![0.0; r];
        a[i] = -1.0;
        lp_rows.push(Halfspace::new(a, 0.0));
    }
    let LpResult::Optimal(sol) = lp::solve(&LinearProgram::new(objective, lp_rows)) else {
        return None;
    };
    let v: Vec<f64> = (0..n)
        .map(|j| -rows.iter().zip(&sol.point).map(|(h, l)| h.a[j] * l).sum::<f64>())
        .collect();
    let (slice_min, _) = slice.min_affine(&v, 0.0)?;
    let gap = slice_min - dot(&v, x_z);
    if gap <= 1e-12 {
        return None;
    }
    let delta = SLICE_MARGIN_FRACTION * gap;
    Some((v, delta - slice_min, delta))
}

/// Partially affine polynomial separating `(x_z, y_z)` from the set.
pub fn separate_polynomial(set: &PartiallyConvexSet, x_z: &[f64], y_z: &[f64]) -> Result<SeparationCertificate> {
    check_point(set, x_z, y_z)?;
    let Some(slice_z) = nonempty_slice_at(set, y_z) else {
        return Ok(empty_branch(set, y_z));
    };
    let (v, c, delta) = slice_separator(&slice_z, x_z).ok_or_else(|| Error::PointInsideSet {
        x: x_z.to_vec(),
        y: y_z.to_vec(),
    })?;

    let mut worst_ratio = f64::NEG_INFINITY;
    for (y, slice) in sample_slices(set, y_z) {
        let d2 = dist2(&y, y_z);
        if d2 == 0.0 {
            continue;
        }
        if let Some((val, _)) = slice.min_affine(&v, c) {
            worst_ratio = worst_ratio.max(-val / d2);
        }
    }
    let mut cert = SeparationCertificate {
        branch: Branch::SliceNonempty,
        v,
        c,
        big_m: (2.0 * worst_ratio).max(0.0),
        y_z: y_z.to_vec(),
        delta,
        gamma: None,
    };
    loop {
        let report = validate_certificate(set, &cert, x_z, y_z, DEFAULT_TOL);
        if report.pass {
            return Ok(cert);
        }
        let next = if cert.big_m == 0.0 { 1.0 } else { 2.0 * cert.big_m };
        if next > MAX_MULTIPLIER {
            return Err(Error::BigMSearchFailed {
                max_m: MAX_MULTIPLIER,
                y: report.argmin_y.unwrap_or_default(),
                value: report.min_on_k.unwrap_or(f64::NAN),
            });
        }
        cert.big_m = next;
    }
}

fn empty_branch(set: &PartiallyConvexSet, y_z: &[f64]) -> SeparationCertificate {
    let gamma = set
        .project_y()
        .into_iter()
        .map(|k| dist2(set.grid().point(k), y_z))
        .fold(f64::INFINITY, f64::min);
    let big_m = if gamma.is_finite() { 1.0 / gamma } else { 0.0 };
    SeparationCertificate {
        branch: Branch::SliceEmpty,
        v: vec![0.0; set.n()],
        c: -1.0,
        big_m,
        y_z: y_z.to_vec(),
        delta: 0.0,
        gamma: Some(gamma),
    }
}

/// Checks a certificate: exact slice minima over every sampled slice and
/// the value at the point.
pub fn validate_certificate(
    set: &PartiallyConvexSet,
    cert: &SeparationCertificate,
    x_z: &[f64],
    y_z: &[f64],
    tol: f64,
) -> ValidationReport {
    let mut min: Option<(f64, Vec<f64>)> = None;
    for (y, slice) in sample_slices(set, y_z) {
        if let Some(val) = cert.min_over_slice(&slice, &y) {
            if min.as_ref().is_none_or(|(m, _)| val < *m) {
                min = Some((val, y.to_vec()));
            }
        }
    }
    let value_at_z = cert.eval(x_z, y_z);
    let pass = min.as_ref().is_none_or(|(m, _)| *m >= -tol) && value_at_z < 0.0;
    let (min_on_k, argmin_y) = match min {
        Some((m, y)) => (Some(m), Some(y)),
        None => (None, None),
    };
    ValidationReport {
        min_on_k,
        argmin_y,
        value_at_z,
        tol,
        pass,
    }
}

/// `m(y) = min over the slice of <v, x> + c` at every grid point; `None`
/// where the slice is empty.
pub fn min_value_function(set: &PartiallyConvexSet, v: &[f64], c: f64) -> Vec<Option<f64>> {
    set.slices()
        .iter()
        .map(|s| s.min_affine(v, c).map(|(val, _)| val))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SeparatorCase {
    /// `y_z` is outside the projection: `f = |y - y_z|^2 - d^2 / 2`.
    DistanceSquared,
    /// `y_z` is in the projection: `f = <v, x> + c + mu(y)`.
    Corrected,
}

/// Continuous partially affine separator stored on the grid:
/// `f(x, y_k) = <v, x> + c + mu[k]` and `f(x_z, y_z) = <v, x_z> + c + mu_at_z`.
#[derive(Clone, Debug, PartialEq)]
pub struct ContinuousSeparator {
    pub case: SeparatorCase,
    pub v: Vec<f64>,
    pub c: f64,
    pub delta: f64,
    pub y_z: Vec<f64>,
    /// Per-grid-point correction, `None` where the slice is empty.
    pub mu: Vec<Option<f64>>,
    pub mu_at_z: f64,
    /// Distance from `y_z` to the projection (distance-squared case only).
    pub distance: Option<f64>,
}

impl ContinuousSeparator {
    pub fn eval_at(&self, index: usize, x: &[f64]) -> Option<f64> {
        self.mu[index].map(|mu| dot(&self.v, x) + self.c + mu)
    }

    pub fn value_at_z(&self, x_z: &[f64]) -> f64 {
        dot(&self.v, x_z) + self.c + self.mu_at_z
    }

    pub fn validate(&self, set: &PartiallyConvexSet, x_z: &[f64], tol: f64) -> ValidationReport {
        let mut min: Option<(f64, Vec<f64>)> = None;
        let mut consider = |val: f64, y: &[f64]| {
            if min.as_ref().is_none_or(|(m, _)| val < *m) {
                min = Some((val, y.to_vec()));
            }
        };
        for (k, slice) in set.slices().iter().enumerate() {
            if let (Some(mu), Some((val, _))) = (self.mu[k], slice.min_affine(&self.v, self.c)) {
                consider(val + mu, set.grid().point(k));
            }
        }
        if self.case == SeparatorCase::Corrected && set.grid().index_of(&self.y_z).is_none() {
            if let Some(slice) = nonempty_slice_at(set, &self.y_z) {
                if let Some((val, _)) = slice.min_affine(&self.v, self.c) {
                    consider(val + self.mu_at_z, &self.y_z);
                }
            }
        }
        let value_at_z = self.value_at_z(x_z);
        let pass = min.as_ref().is_none_or(|(m, _)| *m >= -tol) && value_at_z < 0.0;
        let (min_on_k, argmin_y) = match min {
            Some((m, y)) => (Some(m), Some(y)),
            None => (None, None),
        };
        ValidationReport {
            min_on_k,
            argmin_y,
            value_at_z,
            tol,
            pass,
        }
    }
}

/// Continuous partially affine separator built from the minimum value
/// function and its correction term.
pub fn separate_continuous(set: &PartiallyConvexSet, x_z: &[f64], y_z: &[f64]) -> Result<ContinuousSeparator> {
    check_point(set, x_z, y_z)?;
    let grid = set.grid();
    match nonempty_slice_at(set, y_z) {
        None => {
            let d2 = set
                .project_y()
                .into_iter()
                .map(|k| dist2(grid.point(k), y_z))
                .fold(f64::INFINITY, f64::min);
            // an empty set is separated by any negative constant
            let half = if d2.is_finite() { d2 / 2.0 } else { 1.0 };
            let mu = set
                .slices()
                .iter()
                .zip(grid.points())
                .map(|(s, y)| (!s.is_empty()).then(|| dist2(y, y_z) - half))
                .collect();
            Ok(ContinuousSeparator {
                case: SeparatorCase::DistanceSquared,
                v: vec![0.0; set.n()],
                c: 0.0,
                delta: 0.0,
                y_z: y_z.to_vec(),
                mu,
                mu_at_z: -half,
                distance: d2.is_finite().then(|| d2.sqrt()),
            })
        }
        Some(slice_z) => {
            let (v, c, delta) = slice_separator(&slice_z, x_z).ok_or_else(|| Error::PointInsideSet {
                x: x_z.to_vec(),
                y: y_z.to_vec(),
            })?;
            let at_z = grid.index_of(y_z);
            let mu = min_value_function(set, &v, c)
                .into_iter()
                .enumerate()
                .map(|(k, m)| m.map(|m| if Some(k) == at_z { 0.0 } else { (-m).max(0.0) }))
                .collect();
            Ok(ContinuousSeparator {
                case: SeparatorCase::Corrected,
                v,
                c,
                delta,
                y_z: y_z.to_vec(),
                mu,
                mu_at_z: 0.0,
                distance: None,
            })
        }
    }
}

/// Wire form of a polynomial certificate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateJson {
    pub branch: Branch,
    pub v: Vec<f64>,
    pub c: f64,
    #[serde(rename = "M")]
    pub big_m: f64,
    pub y_z: Vec<f64>,
    pub delta: f64,
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_z: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub validation: Option<ValidationReport>,
}

impl CertificateJson {
    pub fn new(cert: &SeparationCertificate, x_z: Option<&[f64]>, validation: Option<ValidationReport>) -> Self {
        Self {
            branch: cert.branch,
            v: cert.v.clone(),
            c: cert.c,
            big_m: cert.big_m,
            y_z: cert.y_z.clone(),
            delta: cert.delta,
            gamma: cert.gamma.filter(|g| g.is_finite()),
            x_z: x_z.map(<[f64]>::to_vec),
            validation,
        }
    }

    pub fn certificate(&self) -> SeparationCertificate {
        SeparationCertificate {
            branch: self.branch,
            v: self.v.clone(),
            c: self.c,
            big_m: self.big_m,
            y_z: self.y_z.clone(),
            delta: self.delta,
            gamma: self.gamma,
        }
    }
}

/// Wire form of a continuous separator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContinuousSeparatorJson {
    pub case: SeparatorCase,
    pub v: Vec<f64>,
    pub c: f64,
    pub delta: f64,
    pub y_z: Vec<f64>,
    pub mu: Vec<Option<f64>>,
    pub mu_at_z: f64,
    pub distance: Option<f64>,
    pub validation: ValidationReport,
}

impl ContinuousSeparatorJson {
    pub fn new(sep: &ContinuousSeparator, validation: ValidationReport) -> Self {
        Self {
            case: sep.case,
            v: sep.v.clone(),
            c: sep.c,
            delta: sep.delta,
            y_z: sep.y_z.clone(),
            mu: sep.mu.clone(),
            mu_at_z: sep.mu_at_z,
            distance: sep.distance,
            validation,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{fig1, unit_box, DEFAULT_RESOLUTION};

    #[test]
    fn unit_box_side_point() {
        let set = unit_box(1, 1, 11);
        let cert = separate_polynomial(&set, &[2.0], &[0.0]).unwrap();
        assert_eq!(cert.branch, Branch::SliceNonempty);
        assert!((cert.v[0] + 1.0).abs() < 1e-12);
        assert!((cert.c - 1.2).abs() < 1e-12);
        assert!((cert.delta - 0.2).abs() < 1e-12);
        assert_eq!(cert.big_m, 0.0);
        let report = validate_certificate(&set, &cert, &[2.0], &[0.0], 1e-7);
        assert!(report.pass);
        assert!((report.min_on_k.unwrap() - 0.2).abs() < 1e-12);
        assert!((report.value_at_z + 0.8).abs() < 1e-12);
    }

    #[test]
    fn fig1_point_above_the_set() {
        let set = fig1(DEFAULT_RESOLUTION);
        let cert = separate_polynomial(&set, &[0.0], &[2.0]).unwrap();
        assert_eq!(cert.branch, Branch::SliceEmpty);
        assert!((cert.gamma.unwrap() - 1.0).abs() < 1e-12);
        assert!((cert.big_m - 1.0).abs() < 1e-12);
        let report = validate_certificate(&set, &cert, &[0.0], &[2.0], 1e-7);
        assert!(report.pass);
        assert!(report.min_on_k.unwrap().abs() < 1e-12);
        assert_eq!(report.value_at_z, -1.0);
    }

    #[test]
    fn interior_point_is_rejected() {
        let set = unit_box(1, 1, 11);
        assert!(matches!(
            separate_polynomial(&set, &[0.0], &[0.5]),
            Err(Error::PointInsideSet { .. })
        ));
        assert!(matches!(
            separate_continuous(&set, &[0.0], &[0.5]),
            Err(Error::PointInsideSet { .. })
        ));
    }

    #[test]
    fn zero_multiplier_fails_on_empty_branch() {
        let set = unit_box(1, 1, 11);
        let cert = separate_polynomial(&set, &[0.0], &[2.0]).unwrap().with_multiplier(0.0);
        let report = validate_certificate(&set, &cert, &[0.0], &[2.0], 1e-7);
        assert!(!report.pass);
        assert_eq!(report.min_on_k, Some(-1.0));
    }

    #[test]
    fn min_value_function_examples() {
        let b = unit_box(1, 1, 5);
        assert!(min_value_function(&b, &[1.0], 2.0)
            .iter()
            .all(|m| (m.unwrap() - 1.0).abs() < 1e-12));
        assert!(min_value_function(&b, &[0.0], 0.0).iter().all(|m| *m == Some(0.0)));
        let f = fig1(DEFAULT_RESOLUTION);
        let mid = f.grid().index_of(&[0.0]).unwrap();
        let m = min_value_function(&f, &[1.0], 0.0)[mid].unwrap();
        assert!((m + std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn continuous_distance_case() {
        let set = fig1(DEFAULT_RESOLUTION);
        let sep = separate_continuous(&set, &[0.0], &[2.0]).unwrap();
        assert_eq!(sep.case, SeparatorCase::DistanceSquared);
        assert!((sep.distance.unwrap() - 1.0).abs() < 1e-12);
        assert!((sep.value_at_z(&[0.0]) + 0.5).abs() < 1e-12);
        assert!(sep.validate(&set, &[0.0], 1e-7).pass);
    }

    #[test]
    fn continuous_correction_is_active_where_minimum_is_negative() {
        let set = fig1(DEFAULT_RESOLUTION);
        let sep = separate_continuous(&set, &[0.9], &[0.0]).unwrap();
        assert_eq!(sep.case, SeparatorCase::Corrected);
        let m = min_value_function(&set, &sep.v, sep.c);
        let mut active = 0;
        for (mu, m) in sep.mu.iter().zip(&m) {
            let (mu, m) = (mu.unwrap(), m.unwrap());
            assert_eq!(mu > 0.0, m < 0.0);
            assert!(m + mu >= -1e-12);
            active += usize::from(mu > 0.0);
        }
        assert!(active > 0);
        assert!(sep.value_at_z(&[0.9]) < 0.0);
        assert!(sep.validate(&set, &[0.9], 1e-7).pass);
    }

    #[test]
    fn continuous_without_correction() {
        let set = unit_box(1, 1, 11);
        let sep = separate_continuous(&set, &[2.0], &[0.5]).unwrap();
        assert!((sep.v[0] + 1.0).abs() < 1e-12);
        assert!(sep.mu.iter().all(|m| *m == Some(0.0)));
        assert!(sep.validate(&set, &[2.0], 1e-7).pass);
    }
}
