//! Grid-level checks for regular partially convex sets: every slice has
//! nonempty interior and the slice map is lower hemicontinuous.
//!
//! Hemicontinuity is tested through one-sided Hausdorff distances in the
//! max-norm between neighbouring slices, compared against `tol_rate` times
//! the parameter distance. A single large jump may be a resolution artefact,
//! so a point only fails in a direction when the excess persists along the
//! whole approach sequence in that direction.
//!
//! ```
//! use parconv::geometry::{fig1, m_set, DEFAULT_RESOLUTION};
//! use parconv::regularity::{check_regular, Verdict, DEFAULT_TOL_RATE};
//!
//! assert_eq!(check_regular(&fig1(DEFAULT_RESOLUTION), DEFAULT_TOL_RATE).verdict, Verdict::Regular);
//! assert_eq!(check_regular(&m_set(DEFAULT_RESOLUTION), DEFAULT_TOL_RATE).verdict, Verdict::NotRegular);
//! ```

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::geometry::{PartiallyConvexSet, SlicePolytope};
use crate::grid::{dist2, BaseGrid};
use crate::lp::{solve, Halfspace, LinearProgram};

pub const DEFAULT_TOL_RATE: f64 = 10.0;
pub const INTERIOR_EPS: f64 = crate::paff::INTERIOR_EPS;
/// Absolute slack added to every rate bound.
pub const ABS_TOL: f64 = 1e-7;
/// Number of grid points in each approach sequence on tensor grids.
pub const APPROACH_DEPTH: usize = 2;

/// `min_{w in K} |x - w|_inf`, or `None` when `K` is empty.
pub fn distance_inf(x: &[f64], poly: &SlicePolytope) -> Option<f64> {
    if poly.is_empty() {
        return None;
    }
    let n = x.len();
    let mut rows: Vec<Halfspace> = poly
        .rows()
        .iter()
        .map(|h| {
            let mut a = h.a.clone();
            a.push(0.0);
            Halfspace::new(a, h.b)
        })
        .collect();
    for i in 0..n {
        for sign in [1.0, -1.0] {
            let mut a = vec![0.0; n + 1];
            a[i] = sign;
            a[n] = -1.0;
            rows.push(Halfspace::new(a, sign * x[i]));
        }
    }
    let mut objective = vec![0.0; n + 1];
    objective[n] = 1.0;
    solve(&LinearProgram::new(objective, rows))
        .into_optimal()
        .map(|s| s.value.max(0.0))
}

/// One-sided Hausdorff distance `sup_{x in from} dist_inf(x, to)` with the
/// vertex attaining it. The sup of a convex function over a polytope is
/// attained at a vertex. Infinite when `to` is empty and `from` is not.
pub fn hausdorff_one_sided(from: &SlicePolytope, to: &SlicePolytope) -> (f64, Option<Vec<f64>>) {
    let mut best = (0.0, None);
    for v in from.vertices() {
        let d = distance_inf(&v, to).unwrap_or(f64::INFINITY);
        if best.1.is_none() || d >= best.0 {
            best = (d, Some(v));
        }
    }
    best
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InteriorReport {
    /// Chebyshev radius per grid point, `None` for empty slices.
    pub radii: Vec<Option<f64>>,
    /// Empty slices lie outside the projection and count as ok.
    pub ok: Vec<bool>,
    pub all_ok: bool,
    pub eps_int: f64,
    pub min_radius: Option<f64>,
    pub argmin_y: Option<Vec<f64>>,
}

pub fn check_interior(set: &PartiallyConvexSet) -> InteriorReport {
    let radii: Vec<Option<f64>> = set.slices().iter().map(SlicePolytope::chebyshev_radius).collect();
    let ok: Vec<bool> = radii.iter().map(|r| r.is_none_or(|r| r >= INTERIOR_EPS)).collect();
    let mut min: Option<(f64, usize)> = None;
    for (k, r) in radii.iter().enumerate() {
        if let Some(r) = *r {
            if min.is_none_or(|(best, _)| r < best) {
                min = Some((r, k));
            }
        }
    }
    InteriorReport {
        all_ok: ok.iter().all(|&b| b),
        radii,
        ok,
        eps_int: INTERIOR_EPS,
        min_radius: min.map(|(r, _)| r),
        argmin_y: min.map(|(_, k)| set.grid().point(k).to_vec()),
    }
}

/// An offending pair: a point `x` of `K_y` (or of `K_{y'}` for the upper
/// check) at max-norm distance `distance` from the other slice.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub y: Vec<f64>,
    pub y_prime: Vec<f64>,
    pub x: Vec<f64>,
    pub distance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HemicontinuityReport {
    pub ok: bool,
    pub tol_rate: f64,
    /// Largest observed `distance / |y - y'|` over all checked pairs.
    pub max_rate: f64,
    pub witness: Option<Witness>,
}

/// Rate test shared by slice and cone checks. `excess(k, j)` is the
/// one-sided distance attached to grid point `k` approached from `j`, with an
/// optional witness point. Inactive grid points are skipped and truncate
/// approach sequences. With `persistent` a failure must hold along a whole
/// approach sequence; otherwise any single pair fails.
/// Excess distance and the point attaining it.
type Excess = (f64, Option<Vec<f64>>);

pub(crate) fn rate_check<F>(
    grid: &BaseGrid,
    active: &[bool],
    tol_rate: f64,
    persistent: bool,
    mut excess: F,
) -> HemicontinuityReport
where
    F: FnMut(usize, usize) -> (f64, Option<Vec<f64>>),
{
    let min_len = if persistent && grid.tensor_index().is_some() {
        APPROACH_DEPTH
    } else {
        1
    };
    let depth = if persistent { APPROACH_DEPTH } else { 1 };
    let mut max_rate: f64 = 0.0;
    let mut witness: Option<Witness> = None;
    for k in 0..grid.len() {
        if !active[k] {
            continue;
        }
        for seq in grid.approach_sequences(k, depth) {
            let seq: Vec<usize> = seq.into_iter().take_while(|&j| active[j]).collect();
            let mut first: Option<Witness> = None;
            let mut fails = seq.len() >= min_len;
            for &j in &seq {
                let (d, x) = excess(k, j);
                let gap = dist2(grid.point(k), grid.point(j)).sqrt();
                max_rate = max_rate.max(d / gap);
                if d > tol_rate * gap + ABS_TOL {
                    if first.is_none() {
                        first = Some(Witness {
                            y: grid.point(k).to_vec(),
                            y_prime: grid.point(j).to_vec(),
                            x: x.unwrap_or_default(),
                            distance: d,
                        });
                    }
                } else {
                    fails = false;
                }
            }
            if fails {
                if let Some(w) = first {
                    if witness.as_ref().is_none_or(|old| w.distance > old.distance) {
                        witness = Some(w);
                    }
                }
            }
        }
    }
    HemicontinuityReport {
        ok: witness.is_none(),
        tol_rate,
        max_rate,
        witness,
    }
}

fn check_side(set: &PartiallyConvexSet, tol_rate: f64, upper: bool) -> HemicontinuityReport {
    let active: Vec<bool> = set.slices().iter().map(|s| !s.is_empty()).collect();
    let mut cache: HashMap<(usize, usize), Excess> = HashMap::new();
    rate_check(set.grid(), &active, tol_rate, true, |k, j| {
        let (from, to) = if upper { (j, k) } else { (k, j) };
        cache
            .entry((from, to))
            .or_insert_with(|| hausdorff_one_sided(set.slice_at(from), set.slice_at(to)))
            .clone()
    })
}

/// Lower hemicontinuity surrogate: points of `K_y` stay close to `K_{y'}`.
pub fn check_lhc(set: &PartiallyConvexSet, tol_rate: f64) -> HemicontinuityReport {
    check_side(set, tol_rate, false)
}

/// Upper hemicontinuity surrogate for bounded slices: points of `K_{y'}`
/// stay close to `K_y`.
pub fn check_uhc_bounded(set: &PartiallyConvexSet, tol_rate: f64) -> HemicontinuityReport {
    check_side(set, tol_rate, true)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Regular,
    NotRegular,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegularityReport {
    pub interior: InteriorReport,
    pub lhc: HemicontinuityReport,
    pub uhc: HemicontinuityReport,
    pub verdict: Verdict,
    /// Set when the verdict is not regular.
    pub reason: Option<String>,
    pub tol_rate: f64,
    pub eps_int: f64,
    pub abs_tol: f64,
}

/// Interior and lower hemicontinuity decide the verdict. A lower check that
/// passes at `tol_rate` but fails at `tol_rate / 2` is inconclusive.
pub fn check_regular(set: &PartiallyConvexSet, tol_rate: f64) -> RegularityReport {
    let interior = check_interior(set);
    let lhc = check_lhc(set, tol_rate);
    let uhc = check_uhc_bounded(set, tol_rate);
    let (verdict, reason) = if !interior.all_ok {
        let y = interior
            .ok
            .iter()
            .position(|&b| !b)
            .map(|k| set.grid().point(k).to_vec());
        (
            Verdict::NotRegular,
            Some(format!("slice with empty interior at y = {:?}", y.unwrap_or_default())),
        )
    } else if !lhc.ok {
        (
            Verdict::NotRegular,
            Some("slice map is not lower hemicontinuous".to_string()),
        )
    } else if !check_lhc(set, tol_rate / 2.0).ok {
        (
            Verdict::Inconclusive,
            Some("lower hemicontinuity holds only near the rate tolerance".to_string()),
        )
    } else {
        (Verdict::Regular, None)
    };
    RegularityReport {
        interior,
        lhc,
        uhc,
        verdict,
        reason,
        tol_rate,
        eps_int: INTERIOR_EPS,
        abs_tol: ABS_TOL,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{fig1, l_set, m_set, triangle, unit_box, Constraint, DEFAULT_RESOLUTION};
    use crate::grid::BaseGrid;
    use crate::poly::MultiPoly;
    use proptest::prelude::*;

    #[test]
    fn distance_to_interval() {
        let k = SlicePolytope::new(1, vec![Halfspace::new(vec![1.0], 1.0), Halfspace::new(vec![-1.0], 1.0)]);
        assert!((distance_inf(&[2.0], &k).unwrap() - 1.0).abs() < 1e-12);
        assert!(distance_inf(&[0.3], &k).unwrap().abs() < 1e-12);
        let empty = SlicePolytope::new(
            1,
            vec![Halfspace::new(vec![1.0], -1.0), Halfspace::new(vec![-1.0], -1.0)],
        );
        assert!(distance_inf(&[0.0], &empty).is_none());
    }

    #[test]
    fn interior_radii() {
        let r = check_interior(&fig1(DEFAULT_RESOLUTION));
        assert!(r.all_ok);
        assert!((r.min_radius.unwrap() - 0.5f64.sqrt()).abs() < 1e-9);
        assert_eq!(r.argmin_y.unwrap(), vec![0.0]);

        let t = check_interior(&triangle(DEFAULT_RESOLUTION));
        assert!(!t.ok[0] && t.radii[0].unwrap() < 1e-9);

        let l = check_interior(&l_set(DEFAULT_RESOLUTION));
        assert!(l.all_ok);
        assert!(l.radii.iter().all(|r| (r.unwrap() - 0.8).abs() < 1e-9));
    }

    #[test]
    fn m_set_lhc_witness() {
        let set = m_set(DEFAULT_RESOLUTION);
        let h = 1.0 / (DEFAULT_RESOLUTION - 1) as f64;
        let lhc = check_lhc(&set, DEFAULT_TOL_RATE);
        assert!(!lhc.ok);
        let w = lhc.witness.unwrap();
        assert_eq!(w.y, vec![0.0]);
        assert!((w.y_prime[0] - h).abs() < 1e-12);
        assert!((w.x[0].abs() - 2.0).abs() < 1e-9);
        assert!((w.distance - 1.0).abs() < 1e-9);
        assert!(check_uhc_bounded(&set, DEFAULT_TOL_RATE).ok);
    }

    #[test]
    fn verdicts() {
        assert_eq!(
            check_regular(&fig1(DEFAULT_RESOLUTION), DEFAULT_TOL_RATE).verdict,
            Verdict::Regular
        );
        assert_eq!(
            check_regular(&l_set(DEFAULT_RESOLUTION), DEFAULT_TOL_RATE).verdict,
            Verdict::Regular
        );
        let t = check_regular(&triangle(DEFAULT_RESOLUTION), DEFAULT_TOL_RATE);
        assert_eq!(t.verdict, Verdict::NotRegular);
        assert!(t.reason.unwrap().contains("interior"));
        assert_eq!(
            check_regular(&m_set(DEFAULT_RESOLUTION), DEFAULT_TOL_RATE).verdict,
            Verdict::NotRegular
        );
        let f = check_regular(&fig1(DEFAULT_RESOLUTION), DEFAULT_TOL_RATE);
        assert!(f.uhc.ok && f.lhc.ok);
    }

    #[test]
    fn verdict_stable_under_refinement() {
        let r = DEFAULT_RESOLUTION;
        for (a, b) in [
            (fig1(r), fig1(2 * r - 1)),
            (triangle(r), triangle(2 * r - 1)),
            (l_set(r), l_set(2 * r - 1)),
            (m_set(r), m_set(2 * r - 1)),
        ] {
            assert_eq!(
                check_regular(&a, DEFAULT_TOL_RATE).verdict,
                check_regular(&b, DEFAULT_TOL_RATE).verdict
            );
        }
    }

    #[test]
    fn steep_but_continuous_is_inconclusive() {
        // |x| <= 1 + 7y moves at rate 7: inside tol_rate 10, outside 5
        let grid = BaseGrid::tensor(vec![(0.0, 1.0)], 21).unwrap();
        let b = &MultiPoly::constant(1, 1.0) + &MultiPoly::var(1, 0).scale(7.0);
        let set = PartiallyConvexSet::new(1, grid, 100.0)
            .and_then(|s| {
                s.with_constraint(Constraint {
                    a: vec![MultiPoly::constant(1, 1.0)],
                    b: b.clone(),
                })
            })
            .and_then(|s| {
                s.with_constraint(Constraint {
                    a: vec![MultiPoly::constant(1, -1.0)],
                    b,
                })
            })
            .unwrap();
        assert_eq!(check_regular(&set, DEFAULT_TOL_RATE).verdict, Verdict::Inconclusive);
    }

    #[test]
    fn scattered_grid_pairs() {
        let points = vec![vec![0.0], vec![0.3], vec![0.5], vec![1.0]];
        let grid = BaseGrid::from_points(vec![(0.0, 1.0)], points).unwrap();
        let set = PartiallyConvexSet::new(1, grid, 10.0).unwrap();
        assert!(check_lhc(&set, 0.0).ok);
    }

    proptest! {
        #[test]
        fn constant_slices_pass_at_zero_rate(n in 1usize..3, m in 1usize..3, res in 2usize..6) {
            let set = unit_box(n, m, res);
            prop_assert!(check_interior(&set).all_ok);
            prop_assert!(check_lhc(&set, 0.0).ok);
            prop_assert!(check_uhc_bounded(&set, 0.0).ok);
        }
    }
}
