//! Finite-rank free order unit modules over a parameter grid and the
//! duality with partially convex sets.
//!
//! An element of the module is a coefficient vector `(c_0, ..., c_n)` per
//! grid point, read as the affine function `c_0 + sum c_i x_i` on the
//! corresponding slice. The fiber cone at `y` holds the coefficient vectors
//! of affine functions that are nonnegative on `K_y`, and the order unit is
//! the constant function `(1, 0, ..., 0)`. Going back, the state space of a
//! fiber is the set of `x` on which every generator is nonnegative, which
//! recovers the slice.
//!
//! ```
//! use parconv::duality::{module_from_set, roundtrip_distance, ModuleElement};
//! use parconv::geometry::fig1;
//!
//! let set = fig1(21);
//! let module = module_from_set(&set).unwrap();
//! let e1 = ModuleElement::basis(1, 1);
//! assert!((module.global_norm(&e1).unwrap().value - 1.0).abs() < 1e-9);
//! assert!(roundtrip_distance(&set).unwrap() < 1e-9);
//! ```

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{Combinations, PartiallyConvexSet, SlicePolytope, DEFAULT_X_BOUND};
use crate::grid::{BaseGrid, GridJson};
use crate::lp::{dot, solve, support, Halfspace, LinearProgram, LpResult};
use crate::poly::MultiPoly;
use crate::regularity::{check_regular, rate_check, HemicontinuityReport, Verdict, DEFAULT_TOL_RATE};

/// Largest `n` handled by cone dualization.
pub const MAX_DIM: usize = 3;
/// Step used to probe that the unit is interior to a fiber cone.
pub const UNIT_PROBE: f64 = 1e-6;
/// Tolerance of cone membership tests.
pub const CONE_TOL: f64 = 1e-8;

const DEDUP_TOL: f64 = 1e-9;

fn lex_cmp(p: &[f64], q: &[f64]) -> std::cmp::Ordering {
    p.iter()
        .zip(q)
        .map(|(a, b)| a.total_cmp(b))
        .find(|o| o.is_ne())
        .unwrap_or(std::cmp::Ordering::Equal)
}

/// Finitely generated cone in coefficient space `R^{n+1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct FiberCone {
    n: usize,
    generators: Vec<Vec<f64>>,
}

impl FiberCone {
    pub fn new(n: usize, generators: Vec<Vec<f64>>) -> Result<Self> {
        if generators
            .iter()
            .any(|g| g.len() != n + 1 || g.iter().any(|v| !v.is_finite()))
        {
            return Err(invalid(format!(
                "fiber generators must be finite vectors of length {}",
                n + 1
            )));
        }
        Ok(Self { n, generators })
    }

    /// Cone of affine functions nonnegative on a nonempty polytope: the dual
    /// of the lifted vertices `(1, v)`. Extreme rays are the sign-corrected
    /// null vectors of `n`-subsets of lifted vertices, normalised to unit
    /// length and sorted.
    pub fn from_slice(slice: &SlicePolytope) -> Result<Self> {
        let n = slice.n();
        if n > MAX_DIM {
            return Err(Error::DimensionTooLarge { n, max: MAX_DIM });
        }
        let lifted: Vec<Vec<f64>> = slice
            .vertices()
            .into_iter()
            .map(|v| std::iter::once(1.0).chain(v).collect())
            .collect();
        if lifted.is_empty() {
            return Err(Error::EmptyPolytope);
        }
        let mut gens: Vec<Vec<f64>> = Vec::new();
        for subset in Combinations::new(lifted.len(), n) {
            let Some(ray) = null_vector(&subset.iter().map(|&i| lifted[i].as_slice()).collect::<Vec<_>>(), n) else {
                continue;
            };
            for sign in [1.0, -1.0] {
                let r: Vec<f64> = ray.iter().map(|v| sign * v).collect();
                if lifted.iter().all(|p| dot(p, &r) >= -DEDUP_TOL) {
                    if !gens
                        .iter()
                        .any(|g| g.iter().zip(&r).all(|(a, b)| (a - b).abs() <= DEDUP_TOL))
                    {
                        gens.push(r);
                    }
                    break;
                }
            }
        }
        gens.sort_by(|p, q| lex_cmp(p, q));
        Self::new(n, gens)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn generators(&self) -> &[Vec<f64>] {
        &self.generators
    }

    /// The order unit `(1, 0, ..., 0)`.
    pub fn unit(&self) -> Vec<f64> {
        let mut u = vec![0.0; self.n + 1];
        u[0] = 1.0;
        u
    }

    /// `min |c - G mu|_inf` over `mu >= 0`.
    pub fn distance(&self, c: &[f64]) -> f64 {
        let k = self.generators.len();
        let dim = self.n + 1;
        let mut rows = Vec::with_capacity(2 * dim + k);
        for i in 0..dim {
            for sign in [1.0, -1.0] {
                let mut a: Vec<f64> = self.generators.iter().map(|g| -sign * g[i]).collect();
                a.push(-1.0);
                rows.push(Halfspace::new(a, -sign * c[i]));
            }
        }
        for j in 0..k {
            let mut a = vec![0.0; k + 1];
            a[j] = -1.0;
            rows.push(Halfspace::new(a, 0.0));
        }
        let mut objective = vec![0.0; k + 1];
        objective[k] = 1.0;
        match solve(&LinearProgram::new(objective, rows)) {
            LpResult::Optimal(s) => s.value.max(0.0),
            _ => f64::INFINITY,
        }
    }

    pub fn contains(&self, c: &[f64], tol: f64) -> bool {
        self.distance(c) <= tol
    }

    /// No two generators cancel.
    pub fn is_pointed(&self) -> bool {
        !self.generators.iter().enumerate().any(|(i, g)| {
            self.generators[i + 1..]
                .iter()
                .any(|h| g.iter().zip(h).all(|(a, b)| (a + b).abs() <= DEDUP_TOL))
        })
    }

    /// `u +- eps e_i` lie in the cone for every coordinate `i`.
    pub fn unit_is_interior(&self, eps: f64) -> bool {
        let u = self.unit();
        (0..=self.n).all(|i| {
            [1.0, -1.0].iter().all(|s| {
                let mut c = u.clone();
                c[i] += s * eps;
                self.contains(&c, CONE_TOL * eps)
            })
        })
    }

    /// Order-unit norm `min { l : l u +- c in cone }`. `index` only labels
    /// errors.
    pub fn norm(&self, c: &[f64], index: usize) -> Result<f64> {
        if !self.is_pointed() {
            return Err(Error::ConeNotPointed { index });
        }
        let k = self.generators.len();
        let dim = self.n + 1;
        // variables: lambda, mu_plus (k), mu_minus (k)
        let nv = 1 + 2 * k;
        let mut rows = Vec::new();
        for (block, sign) in [(1usize, -1.0), (1 + k, 1.0)] {
            for i in 0..dim {
                // lambda u_i + sign c_i - sum mu_j g_j[i] = 0
                let mut a = vec![0.0; nv];
                a[0] = if i == 0 { 1.0 } else { 0.0 };
                for (j, g) in self.generators.iter().enumerate() {
                    a[block + j] = -g[i];
                }
                let rhs = -sign * c[i];
                rows.push(Halfspace::new(a.clone(), rhs));
                rows.push(Halfspace::new(a.iter().map(|v| -v).collect(), -rhs));
            }
        }
        for j in 1..nv {
            let mut a = vec![0.0; nv];
            a[j] = -1.0;
            rows.push(Halfspace::new(a, 0.0));
        }
        let mut objective = vec![0.0; nv];
        objective[0] = 1.0;
        match solve(&LinearProgram::new(objective, rows)) {
            LpResult::Optimal(s) => Ok(s.value),
            LpResult::Infeasible => Err(Error::UnitNotInterior { index }),
            LpResult::Unbounded => Err(Error::ConeNotPointed { index }),
        }
    }

    /// `{x : g_0 + sum g_i x_i >= 0 for all generators} ∩ [-R, R]^n`.
    pub fn state_slice(&self, x_bound: f64) -> SlicePolytope {
        let n = self.n;
        let mut rows: Vec<Halfspace> = self
            .generators
            .iter()
            .map(|g| Halfspace::new(g[1..].iter().map(|v| -v).collect(), g[0]))
            .collect();
        for j in 0..n {
            for s in [1.0, -1.0] {
                let mut a = vec![0.0; n];
                a[j] = s;
                rows.push(Halfspace::new(a, x_bound));
            }
        }
        SlicePolytope::new(n, rows)
    }
}

/// Null vector of `n` row vectors in `R^{n+1}` by signed cofactors; `None`
/// when the rows are dependent.
fn null_vector(rows: &[&[f64]], n: usize) -> Option<Vec<f64>> {
    if n == 0 {
        return Some(vec![1.0]);
    }
    let mut r: Vec<f64> = (0..=n)
        .map(|skip| {
            let minor = DMatrix::from_fn(n, n, |i, j| rows[i][if j < skip { j } else { j + 1 }]);
            let sign = if skip % 2 == 0 { 1.0 } else { -1.0 };
            sign * minor.determinant()
        })
        .collect();
    let norm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm < 1e-12 {
        return None;
    }
    r.iter_mut().for_each(|v| *v /= norm);
    Some(r)
}

/// One coefficient of a module element.
#[derive(Clone, Debug, PartialEq)]
pub enum Coefficient {
    /// One value per module grid point.
    Sampled(Vec<f64>),
    Poly(MultiPoly),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModuleElement {
    coeffs: Vec<Coefficient>,
}

impl ModuleElement {
    pub fn new(coeffs: Vec<Coefficient>) -> Result<Self> {
        for c in &coeffs {
            if let Coefficient::Sampled(v) = c {
                if v.iter().any(|x| !x.is_finite()) {
                    return Err(invalid("module element coefficients must be finite"));
                }
            }
        }
        Ok(Self { coeffs })
    }

    /// Constant coefficient vector.
    pub fn constant(c: &[f64], m: usize) -> Self {
        Self {
            coeffs: c
                .iter()
                .map(|&v| Coefficient::Poly(MultiPoly::constant(m, v)))
                .collect(),
        }
    }

    /// The order unit `u = e_0`.
    pub fn unit(n: usize) -> Self {
        Self::basis(n, 0)
    }

    /// `e_i` with constant coefficients; `m` is inferred as 1, use
    /// [`ModuleElement::constant`] for other parameter dimensions.
    pub fn basis(n: usize, i: usize) -> Self {
        let mut c = vec![0.0; n + 1];
        c[i] = 1.0;
        Self::constant(&c, 1)
    }

    pub fn from_polys(polys: Vec<MultiPoly>) -> Self {
        Self {
            coeffs: polys.into_iter().map(Coefficient::Poly).collect(),
        }
    }

    pub fn coeffs(&self) -> &[Coefficient] {
        &self.coeffs
    }

    /// Coefficient vector at grid point `index` with coordinates `y`.
    pub fn at(&self, index: usize, y: &[f64]) -> Vec<f64> {
        self.coeffs
            .iter()
            .map(|c| match c {
                Coefficient::Sampled(v) => v[index],
                Coefficient::Poly(p) if p.num_vars() == y.len() => p.eval(y),
                Coefficient::Poly(p) => p.eval(&vec![0.0; p.num_vars()]),
            })
            .collect()
    }
}

/// Global norm with its per-grid-point profile.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormProfile {
    pub value: f64,
    pub argmax_y: Vec<f64>,
    pub profile: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FreeOrderUnitModule {
    n: usize,
    m: usize,
    grid: BaseGrid,
    fibers: Vec<FiberCone>,
    x_bound: f64,
}

impl FreeOrderUnitModule {
    pub fn new(grid: BaseGrid, fibers: Vec<FiberCone>, x_bound: f64) -> Result<Self> {
        let n = fibers
            .first()
            .map(FiberCone::n)
            .ok_or_else(|| invalid("module needs at least one fiber"))?;
        if fibers.len() != grid.len() {
            return Err(invalid(format!(
                "{} fibers for {} grid points",
                fibers.len(),
                grid.len()
            )));
        }
        if fibers.iter().any(|f| f.n() != n) {
            return Err(invalid("all fibers must have the same rank"));
        }
        if n > MAX_DIM {
            return Err(Error::DimensionTooLarge { n, max: MAX_DIM });
        }
        Ok(Self {
            n,
            m: grid.m(),
            grid,
            fibers,
            x_bound,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn grid(&self) -> &BaseGrid {
        &self.grid
    }

    pub fn fibers(&self) -> &[FiberCone] {
        &self.fibers
    }

    pub fn x_bound(&self) -> f64 {
        self.x_bound
    }

    fn element_at(&self, a: &ModuleElement, index: usize) -> Result<Vec<f64>> {
        if a.coeffs().len() != self.n + 1 {
            return Err(invalid(format!(
                "element has {} coefficients, module rank is {}",
                a.coeffs().len(),
                self.n + 1
            )));
        }
        if a.coeffs()
            .iter()
            .any(|c| matches!(c, Coefficient::Sampled(v) if v.len() != self.grid.len()))
        {
            return Err(invalid("sampled coefficients must match the module grid"));
        }
        if a.coeffs()
            .iter()
            .any(|c| matches!(c, Coefficient::Poly(p) if p.num_vars() != self.m && p.degree() > 0))
        {
            return Err(invalid(format!(
                "polynomial coefficients must be in {} variables",
                self.m
            )));
        }
        Ok(a.at(index, self.grid.point(index)))
    }

    pub fn fiber_norm(&self, a: &ModuleElement, index: usize) -> Result<f64> {
        self.fibers[index].norm(&self.element_at(a, index)?, index)
    }

    pub fn global_norm(&self, a: &ModuleElement) -> Result<NormProfile> {
        let profile = (0..self.grid.len())
            .map(|k| self.fiber_norm(a, k))
            .collect::<Result<Vec<_>>>()?;
        let (k, value) =
            profile.iter().copied().enumerate().fold(
                (0, f64::NEG_INFINITY),
                |best, (k, v)| if v > best.1 { (k, v) } else { best },
            );
        Ok(NormProfile {
            value,
            argmax_y: self.grid.point(k).to_vec(),
            profile,
        })
    }

    pub fn is_positive_at(&self, a: &ModuleElement, index: usize) -> Result<bool> {
        Ok(self.fibers[index].contains(&self.element_at(a, index)?, CONE_TOL))
    }

    pub fn is_positive(&self, a: &ModuleElement) -> Result<bool> {
        for k in 0..self.grid.len() {
            if !self.is_positive_at(a, k)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn state_space_slice(&self, index: usize) -> SlicePolytope {
        self.fibers[index].state_slice(self.x_bound)
    }

    /// State space as a set with numeric rows per grid point.
    pub fn state_space(&self) -> Result<PartiallyConvexSet> {
        let mut set = PartiallyConvexSet::new(self.n, self.grid.clone(), self.x_bound)?;
        for k in 0..self.grid.len() {
            let rows = self.state_space_slice(k).rows()[..self.fibers[k].generators().len()].to_vec();
            let rows = if rows.is_empty() {
                vec![Halfspace::new(vec![0.0; self.n], 0.0)]
            } else {
                rows
            };
            set = set.with_numeric_rows(k, rows)?;
        }
        Ok(set)
    }

    pub fn from_json(json: &ModuleJson) -> Result<Self> {
        let grid = BaseGrid::from_json(&json.grid)?;
        if grid.m() != json.m {
            return Err(invalid("grid dimension does not match m"));
        }
        let fibers = json
            .fibers
            .iter()
            .map(|f| FiberCone::new(json.n, f.generators.clone()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(grid, fibers, json.x_bound)
    }

    pub fn to_json(&self) -> ModuleJson {
        ModuleJson {
            n: self.n,
            m: self.m,
            grid: self.grid.to_json(),
            fibers: self
                .fibers
                .iter()
                .map(|f| FiberJson {
                    generators: f.generators.clone(),
                })
                .collect(),
            x_bound: self.x_bound,
        }
    }
}

/// Module of a regular set: one fiber per grid point of the projection.
pub fn module_from_set(set: &PartiallyConvexSet) -> Result<FreeOrderUnitModule> {
    if set.n() > MAX_DIM {
        return Err(Error::DimensionTooLarge {
            n: set.n(),
            max: MAX_DIM,
        });
    }
    let report = check_regular(set, DEFAULT_TOL_RATE);
    if report.verdict != Verdict::Regular {
        let reason = report.reason.unwrap_or_else(|| format!("{:?}", report.verdict));
        return Err(Error::NotRegular { reason });
    }
    let projected = set.project_y();
    let grid = set.grid().subgrid(&projected)?;
    let fibers = projected
        .iter()
        .map(|&k| FiberCone::from_slice(set.slice_at(k)))
        .collect::<Result<Vec<_>>>()?;
    FreeOrderUnitModule::new(grid, fibers, set.x_bound())
}

/// Axis and normalised diagonal directions.
fn probe_directions(n: usize) -> Vec<Vec<f64>> {
    let mut dirs = Vec::new();
    for j in 0..n {
        for s in [1.0, -1.0] {
            let mut d = vec![0.0; n];
            d[j] = s;
            dirs.push(d);
        }
    }
    let scale = 1.0 / (n as f64).sqrt();
    for mask in 0..(1usize << n) {
        dirs.push(
            (0..n)
                .map(|j| if mask >> j & 1 == 1 { -scale } else { scale })
                .collect(),
        );
    }
    dirs
}

/// Largest support-function gap between two slices over the probe
/// directions; zero when both are empty, infinite when exactly one is.
pub fn support_gap(a: &SlicePolytope, b: &SlicePolytope) -> f64 {
    match (a.is_empty(), b.is_empty()) {
        (true, true) => return 0.0,
        (false, false) => {}
        _ => return f64::INFINITY,
    }
    probe_directions(a.n())
        .iter()
        .map(|d| match (support(a, d), support(b, d)) {
            (Ok(p), Ok(q)) => (p - q).abs(),
            _ => f64::INFINITY,
        })
        .fold(0.0, f64::max)
}

/// Set -> module -> state space, compared slice by slice.
pub fn roundtrip_distance(set: &PartiallyConvexSet) -> Result<f64> {
    let module = module_from_set(set)?;
    let projected = set.project_y();
    Ok(projected
        .iter()
        .enumerate()
        .map(|(i, &k)| support_gap(set.slice_at(k), &module.state_space_slice(i)))
        .fold(0.0, f64::max))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AxiomOptions {
    pub tol_rate: f64,
    /// Random unit coefficient vectors per fiber for the norm constants.
    pub samples: usize,
    pub seed: u64,
}

impl Default for AxiomOptions {
    fn default() -> Self {
        Self {
            tol_rate: DEFAULT_TOL_RATE,
            samples: 200,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxiomReport {
    pub unit_interior: Vec<bool>,
    pub unit_interior_ok: bool,
    pub pointed: Vec<bool>,
    pub pointed_ok: bool,
    /// Generators of `C_y` stay close to `C_{y'}`.
    pub cone_lhc: HemicontinuityReport,
    /// Generators of `C_{y'}` stay close to `C_y`.
    pub cone_uhc: HemicontinuityReport,
    /// Pairwise variant of the upper check without persistence.
    pub closed: HemicontinuityReport,
    /// Estimated `m, M` with `m |c|_2 <= |c|_y <= M |c|_2`.
    pub norm_lower: f64,
    pub norm_upper: f64,
    pub norm_equivalence_ok: bool,
    pub pass: bool,
}

fn random_unit<R: Rng>(rng: &mut R, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-3 && norm <= 1.0 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

pub fn check_module_axioms(module: &FreeOrderUnitModule, opts: AxiomOptions) -> AxiomReport {
    let fibers = module.fibers();
    let unit_interior: Vec<bool> = fibers.iter().map(|f| f.unit_is_interior(UNIT_PROBE)).collect();
    let pointed: Vec<bool> = fibers.iter().map(FiberCone::is_pointed).collect();
    let active = vec![true; fibers.len()];
    let grid = module.grid();
    let gen_distance = |from: usize, to: usize| {
        let mut best: (f64, Option<Vec<f64>>) = (0.0, None);
        for g in fibers[from].generators() {
            let d = fibers[to].distance(g);
            if best.1.is_none() || d > best.0 {
                best = (d, Some(g.clone()));
            }
        }
        best
    };
    let cone_lhc = rate_check(grid, &active, opts.tol_rate, true, &gen_distance);
    let cone_uhc = rate_check(grid, &active, opts.tol_rate, true, |k, j| gen_distance(j, k));
    let closed = rate_check(grid, &active, opts.tol_rate, false, |k, j| gen_distance(j, k));

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let (mut lower, mut upper) = (f64::INFINITY, 0.0f64);
    let mut norms_ok = true;
    for (k, f) in fibers.iter().enumerate() {
        for _ in 0..opts.samples {
            let c = random_unit(&mut rng, module.n() + 1);
            match f.norm(&c, k) {
                Ok(v) => {
                    lower = lower.min(v);
                    upper = upper.max(v);
                }
                Err(_) => {
                    norms_ok = false;
                    upper = f64::INFINITY;
                }
            }
        }
    }
    let norm_equivalence_ok = norms_ok && lower > 0.0 && upper.is_finite();
    let unit_interior_ok = unit_interior.iter().all(|&b| b);
    let pointed_ok = pointed.iter().all(|&b| b);
    let pass = unit_interior_ok && pointed_ok && cone_lhc.ok && cone_uhc.ok && closed.ok && norm_equivalence_ok;
    AxiomReport {
        unit_interior,
        unit_interior_ok,
        pointed,
        pointed_ok,
        cone_lhc,
        cone_uhc,
        closed,
        norm_lower: lower,
        norm_upper: upper,
        norm_equivalence_ok,
        pass,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiberJson {
    pub generators: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModuleJson {
    pub n: usize,
    pub m: usize,
    pub grid: GridJson,
    pub fibers: Vec<FiberJson>,
    #[serde(default = "default_x_bound")]
    pub x_bound: f64,
}

fn default_x_bound() -> f64 {
    DEFAULT_X_BOUND
}
