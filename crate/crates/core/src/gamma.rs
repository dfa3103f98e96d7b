//! Matrix evaluation of partially affine polynomials with one parameter and
//! the compression identity for isometries whose range reduces `Y`.
//!
//! A polynomial `c_0(y) + sum c_i(y) x_i` is evaluated on a tuple of real
//! symmetric matrices `(X_1, ..., X_n, Y)` as
//! `c_0(Y) + sum (c_i(Y) X_i + X_i c_i(Y)) / 2`. When the range of `V`
//! reduces `Y`, the projection `V V^T` commutes with every `c_i(Y)` and
//! compressing by `V` commutes with evaluation.

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::paff::PAffPolynomial;
use crate::poly::MultiPoly;

pub const SYMMETRY_TOL: f64 = 1e-12;
pub const ISOMETRY_TOL: f64 = 1e-10;
pub const PAIR_TOL: f64 = 1e-9;

fn asymmetry(a: &DMatrix<f64>) -> f64 {
    (a - a.transpose()).amax()
}

fn symmetrize(a: DMatrix<f64>) -> DMatrix<f64> {
    (&a + a.transpose()) * 0.5
}

/// `(X_1, ..., X_n, Y)`, all symmetric of a common size.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixTuple {
    xs: Vec<DMatrix<f64>>,
    y: DMatrix<f64>,
}

impl MatrixTuple {
    pub fn new(xs: Vec<DMatrix<f64>>, y: DMatrix<f64>) -> Result<Self> {
        let k = y.nrows();
        for a in xs.iter().chain(std::iter::once(&y)) {
            if a.nrows() != k || a.ncols() != k {
                return Err(invalid("matrix tuple entries must be square of a common size"));
            }
            if asymmetry(a) > SYMMETRY_TOL {
                return Err(invalid("matrix tuple entries must be symmetric"));
            }
        }
        Ok(Self { xs, y })
    }

    pub fn size(&self) -> usize {
        self.y.nrows()
    }

    pub fn xs(&self) -> &[DMatrix<f64>] {
        &self.xs
    }

    pub fn y(&self) -> &DMatrix<f64> {
        &self.y
    }

    /// `V^T (X, Y) V`.
    pub fn compress(&self, v: &Isometry) -> MatrixTuple {
        let vt = v.v.transpose();
        let c = |a: &DMatrix<f64>| symmetrize(&vt * a * &v.v);
        MatrixTuple {
            xs: self.xs.iter().map(c).collect(),
            y: c(&self.y),
        }
    }

    /// Block-diagonal direct sum.
    pub fn direct_sum(&self, other: &MatrixTuple) -> Result<MatrixTuple> {
        if self.xs.len() != other.xs.len() {
            return Err(invalid("direct sum needs tuples of the same length"));
        }
        let xs = self.xs.iter().zip(&other.xs).map(|(a, b)| block_diag(a, b)).collect();
        Ok(MatrixTuple {
            xs,
            y: block_diag(&self.y, &other.y),
        })
    }

    /// `U^T (X, Y) U`.
    pub fn conjugate(&self, u: &DMatrix<f64>) -> MatrixTuple {
        let ut = u.transpose();
        let c = |a: &DMatrix<f64>| symmetrize(&ut * a * u);
        MatrixTuple {
            xs: self.xs.iter().map(c).collect(),
            y: c(&self.y),
        }
    }
}

pub fn block_diag(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let (p, q) = (a.nrows(), b.nrows());
    let mut out = DMatrix::zeros(p + q, p + q);
    out.view_mut((0, 0), (p, p)).copy_from(a);
    out.view_mut((p, p), (q, q)).copy_from(b);
    out
}

/// `k x r` matrix with orthonormal columns.
#[derive(Clone, Debug, PartialEq)]
pub struct Isometry {
    v: DMatrix<f64>,
}

impl Isometry {
    pub fn new(v: DMatrix<f64>) -> Result<Self> {
        let r = v.ncols();
        let residual = (v.transpose() * &v - DMatrix::identity(r, r)).amax();
        if residual > ISOMETRY_TOL {
            return Err(Error::NotIsometry { residual });
        }
        Ok(Self { v })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.v
    }

    /// Orthogonal projection `V V^T` onto the range.
    pub fn projector(&self) -> DMatrix<f64> {
        &self.v * self.v.transpose()
    }
}

/// Residuals `(|(I - P) Y P|_F, |V^T Y^2 V - (V^T Y V)^2|_F)` with `P = V V^T`.
pub fn y2_pair_residuals(t: &MatrixTuple, v: &Isometry) -> (f64, f64) {
    let k = t.size();
    let p = v.projector();
    let reducing = ((DMatrix::identity(k, k) - &p) * t.y() * &p).norm();
    let vt = v.matrix().transpose();
    let cy = &vt * t.y() * v.matrix();
    let squares = (&vt * t.y() * t.y() * v.matrix() - &cy * &cy).norm();
    (reducing, squares)
}

/// The range of `V` reduces `Y`, so compressions respect `y` and `y^2`.
pub fn is_y2_pair(t: &MatrixTuple, v: &Isometry) -> Result<bool> {
    if v.matrix().nrows() != t.size() {
        return Err(invalid("isometry and tuple sizes differ"));
    }
    let (reducing, squares) = y2_pair_residuals(t, v);
    let scale = 1.0 + t.y().norm().powi(2);
    Ok(reducing <= PAIR_TOL && squares <= PAIR_TOL * scale)
}

/// `p(Y)` for a polynomial in one variable, by Horner's rule.
pub fn poly_at_matrix(p: &MultiPoly, y: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let coeffs = p
        .univariate_coefficients()
        .ok_or_else(|| invalid("matrix evaluation needs polynomials in one variable"))?;
    let k = y.nrows();
    let mut acc = DMatrix::zeros(k, k);
    for c in coeffs.iter().rev() {
        acc = &acc * y + DMatrix::identity(k, k) * *c;
    }
    Ok(acc)
}

/// `c_0(Y) + sum (c_i(Y) X_i + X_i c_i(Y)) / 2`.
pub fn eval_paff_matrix(p: &PAffPolynomial, t: &MatrixTuple) -> Result<DMatrix<f64>> {
    if p.m() != 1 {
        return Err(invalid("matrix evaluation is defined for one parameter"));
    }
    if p.n() != t.xs().len() {
        return Err(invalid(format!(
            "polynomial has {} x-variables, tuple has {}",
            p.n(),
            t.xs().len()
        )));
    }
    let mut out = poly_at_matrix(&p.coeffs()[0], t.y())?;
    for (c, x) in p.coeffs()[1..].iter().zip(t.xs()) {
        let cy = poly_at_matrix(c, t.y())?;
        out += (&cy * x + x * &cy) * 0.5;
    }
    Ok(symmetrize(out))
}

/// `|V^T p(X, Y) V - p(V^T (X, Y) V)|_F`.
pub fn check_compression(p: &PAffPolynomial, t: &MatrixTuple, v: &Isometry) -> Result<f64> {
    let full = eval_paff_matrix(p, t)?;
    let lhs = v.matrix().transpose() * full * v.matrix();
    let rhs = eval_paff_matrix(p, &t.compress(v))?;
    Ok((lhs - rhs).norm())
}

pub fn random_symmetric<R: Rng>(rng: &mut R, k: usize) -> DMatrix<f64> {
    symmetrize(DMatrix::from_fn(k, k, |_, _| rng.gen_range(-1.0..1.0)))
}

pub fn random_orthogonal<R: Rng>(rng: &mut R, k: usize) -> DMatrix<f64> {
    loop {
        let a = DMatrix::from_fn(k, k, |_, _| rng.gen_range(-1.0f64..1.0));
        let qr = a.qr();
        if qr.r().diagonal().iter().all(|d| d.abs() > 1e-3) {
            return qr.q();
        }
    }
}

/// Random `Y = Q D Q^T` of size `k` with the span of the first `r`
/// eigenvectors as a reducing range.
pub fn reducing_pair<R: Rng>(rng: &mut R, k: usize, r: usize) -> (DMatrix<f64>, Isometry) {
    let q = random_orthogonal(rng, k);
    let d = DMatrix::from_diagonal(&nalgebra::DVector::from_fn(k, |_, _| rng.gen_range(-2.0..2.0)));
    let y = symmetrize(&q * d * q.transpose());
    let v = Isometry::new(q.columns(0, r).into_owned()).expect("orthonormal columns");
    (y, v)
}

/// Random isometry whose range is generically not invariant under anything.
pub fn random_isometry<R: Rng>(rng: &mut R, k: usize, r: usize) -> Isometry {
    Isometry::new(random_orthogonal(rng, k).columns(0, r).into_owned()).expect("orthonormal columns")
}

/// Worst residuals over a batch of random trials.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaReport {
    pub trials: usize,
    /// Compression residual for reducing pairs; should vanish.
    pub reducing_max: f64,
    /// Compression of `y x_1` by generic isometries; should not vanish.
    pub generic_min: f64,
    pub direct_sum_max: f64,
    pub covariance_max: f64,
    pub pass: bool,
}

/// Random partially affine polynomial in one parameter of degree <= 3.
pub fn random_paff<R: Rng>(rng: &mut R, n: usize) -> PAffPolynomial {
    let coeffs = (0..=n)
        .map(|_| {
            let terms: Vec<(Vec<u32>, f64)> = (0..=3).map(|e| (vec![e], rng.gen_range(-1.0..1.0))).collect();
            MultiPoly::from_terms(1, terms).expect("valid terms")
        })
        .collect();
    PAffPolynomial::new(n, 1, coeffs).expect("valid polynomial")
}

/// Reducing-pair compression, generic non-reducing compression, direct-sum
/// convexity and orthogonal covariance checks over random draws.
pub fn run_trials<R: Rng>(rng: &mut R, trials: usize) -> GammaReport {
    let (n, k, r) = (2, 4, 2);
    let mut report = GammaReport {
        trials,
        reducing_max: 0.0,
        generic_min: f64::INFINITY,
        direct_sum_max: 0.0,
        covariance_max: 0.0,
        pass: false,
    };
    let y_x1 = PAffPolynomial::new(1, 1, vec![MultiPoly::zero(1), MultiPoly::var(1, 0)]).expect("valid polynomial");
    for _ in 0..trials {
        let p = random_paff(rng, n);
        let xs: Vec<DMatrix<f64>> = (0..n).map(|_| random_symmetric(rng, k)).collect();
        let (y, v) = reducing_pair(rng, k, r);
        let t = MatrixTuple::new(xs.clone(), y.clone()).expect("symmetric tuple");
        report.reducing_max = report
            .reducing_max
            .max(check_compression(&p, &t, &v).expect("matching sizes"));

        let single = MatrixTuple::new(vec![xs[0].clone()], random_symmetric(rng, k)).expect("symmetric tuple");
        let g = random_isometry(rng, k, r);
        report.generic_min = report
            .generic_min
            .min(check_compression(&y_x1, &single, &g).expect("matching sizes"));

        let s: f64 = rng.gen_range(0.0..=1.0);
        let x2: Vec<DMatrix<f64>> = (0..n).map(|_| random_symmetric(rng, k)).collect();
        let t2 = MatrixTuple::new(x2.clone(), y.clone()).expect("symmetric tuple");
        let mixed_xs = xs.iter().zip(&x2).map(|(a, b)| a * s + b * (1.0 - s)).collect();
        let mixed = MatrixTuple::new(mixed_xs, y.clone()).expect("symmetric tuple");
        let lhs = eval_paff_matrix(&p, &mixed).expect("matching sizes");
        let rhs = eval_paff_matrix(&p, &t).expect("matching sizes") * s
            + eval_paff_matrix(&p, &t2).expect("matching sizes") * (1.0 - s);
        report.direct_sum_max = report.direct_sum_max.max((lhs - rhs).norm());

        let u = random_orthogonal(rng, k);
        let lhs = eval_paff_matrix(&p, &t.conjugate(&u)).expect("matching sizes");
        let rhs = u.transpose() * eval_paff_matrix(&p, &t).expect("matching sizes") * &u;
        report.covariance_max = report.covariance_max.max((lhs - rhs).norm());
    }
    report.pass = report.reducing_max <= PAIR_TOL
        && report.direct_sum_max <= PAIR_TOL
        && report.covariance_max <= PAIR_TOL
        && (trials == 0 || report.generic_min > 1e-6);
    report
}
