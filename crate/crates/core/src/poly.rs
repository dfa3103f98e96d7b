//! Sparse multivariate polynomials in the parameter variables `y`.

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// One monomial `coef * y^exp` on the wire.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub exp: Vec<u32>,
    pub coef: f64,
}

/// Wire form of a polynomial: `{"terms": [{"exp": [...], "coef": r}, ...]}`.
/// The number of variables is supplied by the enclosing document.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PolyJson {
    pub terms: Vec<Term>,
}

/// A real polynomial in `num_vars` variables stored as a map from exponent
/// vector to coefficient. Exponent vectors are unique and have length
/// `num_vars`; zero coefficients are dropped.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiPoly {
    num_vars: usize,
    terms: BTreeMap<Vec<u32>, f64>,
}

impl MultiPoly {
    pub fn zero(num_vars: usize) -> Self {
        Self {
            num_vars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(num_vars: usize, value: f64) -> Self {
        let mut p = Self::zero(num_vars);
        p.push(vec![0; num_vars], value);
        p
    }

    /// The coordinate polynomial `y_index`.
    pub fn var(num_vars: usize, index: usize) -> Self {
        assert!(index < num_vars, "variable index {index} out of range");
        let mut exp = vec![0; num_vars];
        exp[index] = 1;
        let mut p = Self::zero(num_vars);
        p.push(exp, 1.0);
        p
    }

    /// Builds a polynomial from `(exponent, coefficient)` pairs, summing
    /// repeated exponents.
    pub fn from_terms<I>(num_vars: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u32>, f64)>,
    {
        let mut p = Self::zero(num_vars);
        for (exp, coef) in terms {
            if exp.len() != num_vars {
                return Err(invalid(format!(
                    "exponent vector {exp:?} has length {}, expected {num_vars}",
                    exp.len()
                )));
            }
            if !coef.is_finite() {
                return Err(invalid(format!("non-finite coefficient {coef}")));
            }
            p.push(exp, coef);
        }
        Ok(p)
    }

    pub fn from_json(num_vars: usize, json: &PolyJson) -> Result<Self> {
        Self::from_terms(num_vars, json.terms.iter().map(|t| (t.exp.clone(), t.coef)))
    }

    pub fn to_json(&self) -> PolyJson {
        PolyJson {
            terms: self
                .terms
                .iter()
                .map(|(exp, &coef)| Term { exp: exp.clone(), coef })
                .collect(),
        }
    }

    fn push(&mut self, exp: Vec<u32>, coef: f64) {
        let entry = self.terms.entry(exp).or_insert(0.0);
        *entry += coef;
        if *entry == 0.0 {
            // keep the map free of explicit zeros so equality is structural
            self.terms.retain(|_, c| *c != 0.0);
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32], f64)> {
        self.terms.iter().map(|(e, &c)| (e.as_slice(), c))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; zero for the zero polynomial.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    /// Dense coefficients `[a0, a1, ..., ad]` of a one-variable polynomial,
    /// used when the polynomial is evaluated at a matrix.
    pub fn univariate_coefficients(&self) -> Option<Vec<f64>> {
        if self.num_vars != 1 {
            return None;
        }
        let deg = self.degree() as usize;
        let mut out = vec![0.0; deg + 1];
        for (exp, coef) in self.terms() {
            out[exp[0] as usize] += coef;
        }
        Some(out)
    }

    pub fn eval(&self, y: &[f64]) -> f64 {
        debug_assert_eq!(y.len(), self.num_vars);
        self.terms
            .iter()
            .map(|(exp, &coef)| exp.iter().zip(y).fold(coef, |acc, (&e, &yi)| acc * yi.powi(e as i32)))
            .sum()
    }

    pub fn scale(&self, factor: f64) -> Self {
        let mut out = Self::zero(self.num_vars);
        for (exp, &coef) in &self.terms {
            out.push(exp.clone(), coef * factor);
        }
        out
    }

    fn check_vars(&self, other: &Self) {
        assert_eq!(
            self.num_vars, other.num_vars,
            "polynomials over different numbers of variables"
        );
    }
}

impl Add for &MultiPoly {
    type Output = MultiPoly;

    fn add(self, rhs: &MultiPoly) -> MultiPoly {
        self.check_vars(rhs);
        let mut out = self.clone();
        for (exp, &coef) in &rhs.terms {
            out.push(exp.clone(), coef);
        }
        out
    }
}

impl Sub for &MultiPoly {
    type Output = MultiPoly;

    fn sub(self, rhs: &MultiPoly) -> MultiPoly {
        self + &(-rhs)
    }
}

impl Neg for &MultiPoly {
    type Output = MultiPoly;

    fn neg(self) -> MultiPoly {
        self.scale(-1.0)
    }
}

impl Mul for &MultiPoly {
    type Output = MultiPoly;

    #[allow(clippy::suspicious_arithmetic_impl)]
    fn mul(self, rhs: &MultiPoly) -> MultiPoly {
        self.check_vars(rhs);
        let mut out = MultiPoly::zero(self.num_vars);
        for (ea, &ca) in &self.terms {
            for (eb, &cb) in &rhs.terms {
                let exp = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.push(exp, ca * cb);
            }
        }
        out
    }
}
