//! Dense two-phase simplex for small linear programs.
//!
//! Problems are stated as `minimize c·x subject to a_i·x <= b_i` with free
//! variables. Free variables are split into positive and negative parts and
//! each row receives a slack; rows with negative right-hand side get an
//! artificial variable for phase one. Pivoting follows Bland's rule, which
//! makes the result a deterministic function of the input.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::SlicePolytope;

/// Pivot and feasibility tolerance.
pub const PIVOT_TOL: f64 = 1e-9;

const MAX_PIVOTS: usize = 200_000;

/// Closed half-space `a·x <= b`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Halfspace {
    pub a: Vec<f64>,
    pub b: f64,
}

impl Halfspace {
    pub fn new(a: Vec<f64>, b: f64) -> Self {
        Self { a, b }
    }

    /// `b - a·x`, nonnegative exactly when `x` satisfies the row.
    pub fn slack(&self, x: &[f64]) -> f64 {
        self.b - dot(&self.a, x)
    }

    pub fn normal_norm(&self) -> f64 {
        self.a.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub rows: Vec<Halfspace>,
}

impl LinearProgram {
    pub fn new(objective: Vec<f64>, rows: Vec<Halfspace>) -> Self {
        debug_assert!(rows.iter().all(|r| r.a.len() == objective.len()));
        Self { objective, rows }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Optimal point with a dual certificate: `duals >= 0` and
/// `sum_i duals[i] * a_i = -objective`, so `-b·duals` is a lower bound that
/// matches `value` at optimality.
#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub value: f64,
    pub point: Vec<f64>,
    pub duals: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpResult {
    Optimal(LpSolution),
    Infeasible,
    Unbounded,
}

impl LpResult {
    pub fn status(&self) -> LpStatus {
        match self {
            LpResult::Optimal(_) => LpStatus::Optimal,
            LpResult::Infeasible => LpStatus::Infeasible,
            LpResult::Unbounded => LpStatus::Unbounded,
        }
    }

    pub fn optimal(&self) -> Option<&LpSolution> {
        match self {
            LpResult::Optimal(s) => Some(s),
            _ => None,
        }
    }

    pub fn into_optimal(self) -> Option<LpSolution> {
        match self {
            LpResult::Optimal(s) => Some(s),
            _ => None,
        }
    }
}

struct Tableau {
    cols: usize,
    data: Vec<f64>,
    rhs: Vec<f64>,
    basis: Vec<usize>,
    reduced: Vec<f64>,
    value: f64,
}

impl Tableau {
    fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    fn num_rows(&self) -> usize {
        self.rhs.len()
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let cols = self.cols;
        let p = self.at(r, c);
        for v in &mut self.data[r * cols..(r + 1) * cols] {
            *v /= p;
        }
        self.rhs[r] /= p;
        let pivot_row: Vec<f64> = self.row(r).to_vec();
        let pivot_rhs = self.rhs[r];
        for i in 0..self.num_rows() {
            if i == r {
                continue;
            }
            let f = self.at(i, c);
            if f == 0.0 {
                continue;
            }
            let row = &mut self.data[i * cols..(i + 1) * cols];
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
            row[c] = 0.0;
            self.rhs[i] -= f * pivot_rhs;
            if self.rhs[i] < 0.0 && self.rhs[i] > -PIVOT_TOL {
                self.rhs[i] = 0.0;
            }
        }
        let f = self.reduced[c];
        if f != 0.0 {
            for (v, pv) in self.reduced.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
            self.reduced[c] = 0.0;
            self.value += f * pivot_rhs;
        }
        self.basis[r] = c;
    }

    /// Loads the cost vector and prices out the current basis.
    fn set_costs(&mut self, costs: &[f64]) {
        self.reduced = costs.to_vec();
        self.value = 0.0;
        for i in 0..self.num_rows() {
            let cb = costs[self.basis[i]];
            if cb != 0.0 {
                let cols = self.cols;
                for (v, a) in self.reduced.iter_mut().zip(&self.data[i * cols..(i + 1) * cols]) {
                    *v -= cb * a;
                }
                self.value += cb * self.rhs[i];
            }
        }
    }

    /// Runs Bland-rule pivots over the columns in `allowed`. Returns false
    /// when the problem is unbounded in the current phase.
    fn optimize(&mut self, allowed: usize) -> bool {
        for _ in 0..MAX_PIVOTS {
            let Some(c) = (0..allowed).find(|&j| self.reduced[j] < -PIVOT_TOL) else {
                return true;
            };
            let mut best: Option<(f64, usize, usize)> = None;
            for i in 0..self.num_rows() {
                let a = self.at(i, c);
                if a > PIVOT_TOL {
                    let ratio = self.rhs[i] / a;
                    let better = match best {
                        None => true,
                        Some((r, _, b)) => {
                            ratio < r - PIVOT_TOL * (1.0 + r.abs())
                                || (ratio <= r + PIVOT_TOL * (1.0 + r.abs()) && self.basis[i] < b)
                        }
                    };
                    if better {
                        best = Some((ratio, i, self.basis[i]));
                    }
                }
            }
            match best {
                Some((_, r, _)) => self.pivot(r, c),
                None => return false,
            }
        }
        panic!("simplex exceeded {MAX_PIVOTS} pivots; Bland's rule should terminate");
    }

    fn remove_row(&mut self, r: usize) {
        let cols = self.cols;
        self.data.drain(r * cols..(r + 1) * cols);
        self.rhs.remove(r);
        self.basis.remove(r);
    }
}

/// Solves `min c·x s.t. a_i·x <= b_i` over free `x`.
pub fn solve(lp: &LinearProgram) -> LpResult {
    let n = lp.num_vars();
    let m = lp.rows.len();
    let negative: Vec<usize> = (0..m).filter(|&i| lp.rows[i].b < 0.0).collect();
    let k = negative.len();
    let slack0 = 2 * n;
    let art0 = 2 * n + m;
    let cols = art0 + k;

    let mut data = vec![0.0; m * cols];
    let mut rhs = vec![0.0; m];
    let mut basis = vec![0; m];
    let mut art_index = 0;
    for (i, row) in lp.rows.iter().enumerate() {
        let sign = if row.b < 0.0 { -1.0 } else { 1.0 };
        let line = &mut data[i * cols..(i + 1) * cols];
        for j in 0..n {
            line[j] = sign * row.a[j];
            line[n + j] = -sign * row.a[j];
        }
        line[slack0 + i] = sign;
        rhs[i] = sign * row.b;
        if sign < 0.0 {
            line[art0 + art_index] = 1.0;
            basis[i] = art0 + art_index;
            art_index += 1;
        } else {
            basis[i] = slack0 + i;
        }
    }
    let mut t = Tableau {
        cols,
        data,
        rhs,
        basis,
        reduced: vec![0.0; cols],
        value: 0.0,
    };

    if k > 0 {
        let mut costs = vec![0.0; cols];
        for c in &mut costs[art0..] {
            *c = 1.0;
        }
        t.set_costs(&costs);
        t.optimize(cols);
        let scale = 1.0 + lp.rows.iter().map(|r| r.b.abs()).fold(0.0, f64::max);
        if t.value > PIVOT_TOL * scale {
            return LpResult::Infeasible;
        }
        // drive artificials out of the basis; drop rows that are redundant
        let mut i = 0;
        while i < t.num_rows() {
            if t.basis[i] >= art0 {
                match (0..art0).find(|&j| t.at(i, j).abs() > PIVOT_TOL) {
                    Some(j) => {
                        t.pivot(i, j);
                        i += 1;
                    }
                    None => t.remove_row(i),
                }
            } else {
                i += 1;
            }
        }
    }

    let mut costs = vec![0.0; cols];
    for j in 0..n {
        costs[j] = lp.objective[j];
        costs[n + j] = -lp.objective[j];
    }
    t.set_costs(&costs);
    if !t.optimize(art0) {
        return LpResult::Unbounded;
    }

    let mut values = vec![0.0; art0];
    for (i, &b) in t.basis.iter().enumerate() {
        if b < art0 {
            values[b] = t.rhs[i];
        }
    }
    let point: Vec<f64> = (0..n).map(|j| values[j] - values[n + j]).collect();
    let value = dot(&lp.objective, &point);
    let duals = (0..m).map(|i| t.reduced[slack0 + i]).collect();
    LpResult::Optimal(LpSolution { value, point, duals })
}

/// Minimizer of `direction·x` over `{x : rows}`; `None` when infeasible.
pub(crate) fn minimize_over(n: usize, rows: &[Halfspace], direction: &[f64]) -> Option<LpSolution> {
    debug_assert_eq!(direction.len(), n);
    match solve(&LinearProgram::new(direction.to_vec(), rows.to_vec())) {
        LpResult::Optimal(s) => Some(s),
        LpResult::Infeasible => None,
        LpResult::Unbounded => Some(LpSolution {
            value: f64::NEG_INFINITY,
            point: vec![0.0; n],
            duals: Vec::new(),
        }),
    }
}

/// Largest inscribed ball of `{x : rows}`; `None` when the rows are infeasible.
pub(crate) fn chebyshev_rows(n: usize, rows: &[Halfspace]) -> Option<(Vec<f64>, f64)> {
    let mut lp_rows: Vec<Halfspace> = rows
        .iter()
        .map(|h| {
            let mut a = h.a.clone();
            a.push(h.normal_norm());
            Halfspace::new(a, h.b)
        })
        .collect();
    let mut nonneg = vec![0.0; n + 1];
    nonneg[n] = -1.0;
    lp_rows.push(Halfspace::new(nonneg, 0.0));
    let mut objective = vec![0.0; n + 1];
    objective[n] = -1.0;
    match solve(&LinearProgram::new(objective, lp_rows)) {
        LpResult::Optimal(s) => {
            let radius = s.point[n].max(0.0);
            Some((s.point[..n].to_vec(), radius))
        }
        LpResult::Infeasible => None,
        LpResult::Unbounded => Some((vec![0.0; n], f64::INFINITY)),
    }
}

/// Inscribed-ball certificate of a polytope.
#[derive(Clone, Debug, PartialEq)]
pub enum Chebyshev {
    Ball { center: Vec<f64>, radius: f64 },
    Empty,
}

/// Chebyshev center and radius of a slice polytope.
pub fn chebyshev(poly: &SlicePolytope) -> Chebyshev {
    match chebyshev_rows(poly.n(), poly.rows()) {
        Some((center, radius)) => Chebyshev::Ball { center, radius },
        None => Chebyshev::Empty,
    }
}

/// Support function `max d·x` over a nonempty polytope.
pub fn support(poly: &SlicePolytope, direction: &[f64]) -> Result<f64> {
    let neg: Vec<f64> = direction.iter().map(|v| -v).collect();
    minimize_over(poly.n(), poly.rows(), &neg)
        .map(|s| -s.value)
        .ok_or(Error::EmptyPolytope)
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
