use nalgebra::{DMatrix, DVector};

use crate::lp::{self, Halfspace};

const FEAS_TOL: f64 = 1e-9;

/// A slice `K_y` as an H-polytope `{x : a_i·x <= b_i}` together with its
/// inscribed-ball certificate.
#[derive(Clone, Debug, PartialEq)]
pub struct SlicePolytope {
    n: usize,
    rows: Vec<Halfspace>,
    is_empty: bool,
    chebyshev_center: Option<Vec<f64>>,
    chebyshev_radius: Option<f64>,
}

impl SlicePolytope {
    pub fn new(n: usize, rows: Vec<Halfspace>) -> Self {
        assert!(rows.iter().all(|r| r.a.len() == n), "row dimension mismatch");
        let (is_empty, chebyshev_center, chebyshev_radius) = match lp::chebyshev_rows(n, &rows) {
            Some((c, r)) => (false, Some(c), Some(r)),
            None => (true, None, None),
        };
        Self {
            n,
            rows,
            is_empty,
            chebyshev_center,
            chebyshev_radius,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> &[Halfspace] {
        &self.rows
    }

    pub fn is_empty(&self) -> bool {
        self.is_empty
    }

    pub fn chebyshev_center(&self) -> Option<&[f64]> {
        self.chebyshev_center.as_deref()
    }

    pub fn chebyshev_radius(&self) -> Option<f64> {
        self.chebyshev_radius
    }

    /// Whether every row holds at `x` up to `tol`.
    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        self.rows.iter().all(|r| r.slack(x) >= -tol)
    }

    /// `min v·x + c` over the slice, with a minimizer; `None` when empty.
    pub fn min_affine(&self, v: &[f64], c: f64) -> Option<(f64, Vec<f64>)> {
        if self.is_empty {
            return None;
        }
        lp::minimize_over(self.n, &self.rows, v).map(|s| (s.value + c, s.point))
    }

    /// `max v·x + c` over the slice; `None` when empty.
    pub fn max_affine(&self, v: &[f64], c: f64) -> Option<f64> {
        let neg: Vec<f64> = v.iter().map(|x| -x).collect();
        self.min_affine(&neg, -c).map(|(val, _)| -val)
    }

    /// Vertices by brute-force intersection of `n`-subsets of rows, sorted
    /// lexicographically. Suitable for the small `n` and row counts used here.
    pub fn vertices(&self) -> Vec<Vec<f64>> {
        if self.is_empty {
            return Vec::new();
        }
        let n = self.n;
        let active: Vec<&Halfspace> = self.rows.iter().filter(|r| r.normal_norm() > 0.0).collect();
        let mut out: Vec<Vec<f64>> = Vec::new();
        for subset in Combinations::new(active.len(), n) {
            let a = DMatrix::from_fn(n, n, |i, j| active[subset[i]].a[j]);
            let b = DVector::from_fn(n, |i, _| active[subset[i]].b);
            let lu = a.lu();
            if lu.determinant().abs() < 1e-12 {
                continue;
            }
            let Some(x) = lu.solve(&b) else { continue };
            let x: Vec<f64> = x.iter().copied().collect();
            if !self.rows.iter().all(|r| r.slack(&x) >= -FEAS_TOL * (1.0 + r.b.abs())) {
                continue;
            }
            if !out.iter().any(|v| v.iter().zip(&x).all(|(p, q)| (p - q).abs() <= 1e-9)) {
                out.push(x);
            }
        }
        out.sort_by(|p, q| {
            p.iter()
                .zip(q)
                .map(|(a, b)| a.total_cmp(b))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        out
    }
}

/// Lexicographic `k`-subsets of `0..n`.
pub(crate) struct Combinations {
    n: usize,
    current: Option<Vec<usize>>,
}

impl Combinations {
    pub(crate) fn new(n: usize, k: usize) -> Self {
        let current = if k <= n { Some((0..k).collect()) } else { None };
        Self { n, current }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.clone()?;
        let k = out.len();
        let mut next = out.clone();
        let mut i = k;
        loop {
            if i == 0 {
                self.current = None;
                break;
            }
            i -= 1;
            if next[i] < self.n - k + i {
                next[i] += 1;
                for j in i + 1..k {
                    next[j] = next[j - 1] + 1;
                }
                self.current = Some(next);
                break;
            }
        }
        Some(out)
    }
}
