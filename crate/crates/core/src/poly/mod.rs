//! Sparse multivariate polynomials with complex coefficients.
//!
//! A [`Polynomial`] is a map from exponent vectors to nonzero coefficients.
//! Keys are kept in a `BTreeMap` so iteration (and therefore summation and
//! printing) happens in one fixed order.

mod eval;
mod line;
mod monomial;
mod parse;

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use eval::{EvalBuffers, SystemEvaluator};
pub use line::{expand_affine_substitution, LineFamily, LineFamilyError, TARGET_SEPARATION};
pub use monomial::{IntMatrix, MonomialMapError};
pub use parse::{
    format_polynomial, parse_polynomial, parse_polynomial_report, ParseError, ParseErrorKind, ParseReport,
};

/// Coefficients below this magnitude are dropped after like terms are combined.
pub const ZERO_COEFFICIENT_TOL: f64 = 1e-14;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolyError {
    #[error("dimension mismatch: expected {expected} coordinates, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("polynomial lives in {got} variables but the system has {expected}")]
    VariableCount { expected: usize, got: usize },
    #[error("invalid variable name {0:?}")]
    InvalidName(String),
    #[error("duplicate variable name {0:?}")]
    DuplicateName(String),
}

/// Exponent vector of a monomial.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ExponentVector(Vec<u32>);

impl ExponentVector {
    pub fn new(entries: Vec<u32>) -> Self {
        Self(entries)
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0; n])
    }

    pub fn unit(n: usize, i: usize) -> Self {
        let mut e = vec![0; n];
        e[i] = 1;
        Self(e)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Total degree `|α|`.
    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn to_i64(&self) -> Vec<i64> {
        self.0.iter().map(|&e| e as i64).collect()
    }

    fn plus(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

impl std::ops::Index<usize> for ExponentVector {
    type Output = u32;
    fn index(&self, i: usize) -> &u32 {
        &self.0[i]
    }
}

impl From<Vec<u32>> for ExponentVector {
    fn from(v: Vec<u32>) -> Self {
        Self(v)
    }
}

/// Sparse polynomial in `nvars` variables. No stored coefficient is zero.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    nvars: usize,
    terms: BTreeMap<ExponentVector, Complex64>,
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Self {
        Self { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: Complex64) -> Self {
        Self::monomial(nvars, ExponentVector::zeros(nvars), c)
    }

    pub fn variable(nvars: usize, i: usize) -> Self {
        Self::monomial(nvars, ExponentVector::unit(nvars, i), Complex64::new(1.0, 0.0))
    }

    pub fn monomial(nvars: usize, exponent: ExponentVector, c: Complex64) -> Self {
        assert_eq!(exponent.len(), nvars, "exponent length must equal the variable count");
        let mut terms = BTreeMap::new();
        if c != Complex64::new(0.0, 0.0) {
            terms.insert(exponent, c);
        }
        Self { nvars, terms }
    }

    /// Builds a polynomial from (exponent, coefficient) pairs, combining like
    /// terms and discarding exact zeros.
    pub fn from_terms<I>(nvars: usize, terms: I) -> Self
    where
        I: IntoIterator<Item = (ExponentVector, Complex64)>,
    {
        let mut out = Self::zero(nvars);
        for (e, c) in terms {
            out.add_term(e, c);
        }
        out
    }

    fn add_term(&mut self, e: ExponentVector, c: Complex64) {
        assert_eq!(e.len(), self.nvars, "exponent length must equal the variable count");
        let zero = Complex64::new(0.0, 0.0);
        if c == zero {
            return;
        }
        match self.terms.entry(e) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if *o.get() == zero {
                    o.remove();
                }
            }
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&ExponentVector, &Complex64)> + ExactSizeIterator {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, e: &ExponentVector) -> Complex64 {
        self.terms.get(e).copied().unwrap_or_default()
    }

    /// Total degree; zero for the zero polynomial.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(ExponentVector::degree).max().unwrap_or(0)
    }

    pub fn is_homogeneous(&self) -> bool {
        let d = self.degree();
        self.terms.keys().all(|e| e.degree() == d)
    }

    pub fn support(&self) -> BTreeSet<ExponentVector> {
        self.terms.keys().cloned().collect()
    }

    /// Drops coefficients with magnitude below `tol`, returning what was removed.
    pub fn prune(&mut self, tol: f64) -> Vec<(ExponentVector, Complex64)> {
        let small: Vec<_> = self.terms.iter().filter(|(_, c)| c.norm() < tol).map(|(e, c)| (e.clone(), *c)).collect();
        for (e, _) in &small {
            self.terms.remove(e);
        }
        small
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self::from_terms(self.nvars, self.terms.iter().map(|(e, v)| (e.clone(), v * c)))
    }

    pub fn pow(&self, mut k: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::constant(self.nvars, Complex64::new(1.0, 0.0));
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Evaluates with Neumaier-compensated summation in key order.
    pub fn evaluate(&self, point: &[Complex64]) -> Result<Complex64, PolyError> {
        if point.len() != self.nvars {
            return Err(PolyError::DimensionMismatch { expected: self.nvars, got: point.len() });
        }
        let mut sum = CompensatedSum::default();
        for (e, c) in &self.terms {
            let mut m = *c;
            for (x, &k) in point.iter().zip(e.as_slice()) {
                if k > 0 {
                    m *= x.powu(k);
                }
            }
            sum.add(m);
        }
        Ok(sum.value())
    }

    pub fn derivative(&self, var: usize) -> Self {
        let terms = self.terms.iter().filter(|(e, _)| e[var] > 0).map(|(e, c)| {
            let mut d = e.0.clone();
            let k = d[var];
            d[var] -= 1;
            (ExponentVector(d), c * k as f64)
        });
        Self::from_terms(self.nvars, terms)
    }

    /// Homogenizes with a new last variable: `x^α ↦ x^α h^{d-|α|}`.
    pub fn homogenize(&self) -> Self {
        let d = self.degree();
        let terms = self.terms.iter().map(|(e, c)| {
            let mut v = e.0.clone();
            v.push(d - e.degree());
            (ExponentVector(v), *c)
        });
        Self::from_terms(self.nvars + 1, terms)
    }

    /// Re-embeds into a larger variable set; `positions[i]` is the new index of variable `i`.
    pub fn embed(&self, nvars: usize, positions: &[usize]) -> Self {
        let terms = self.terms.iter().map(|(e, c)| {
            let mut v = vec![0; nvars];
            for (i, &p) in positions.iter().enumerate() {
                v[p] = e[i];
            }
            (ExponentVector(v), *c)
        });
        Self::from_terms(nvars, terms)
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = (1..=self.nvars).map(|i| format!("x{i}")).collect();
        f.write_str(&format_polynomial(self, &names))
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        assert_eq!(self.nvars, rhs.nvars);
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), *c);
        }
        out
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        assert_eq!(self.nvars, rhs.nvars);
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), -*c);
        }
        out
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        assert_eq!(self.nvars, rhs.nvars);
        let mut out = Polynomial::zero(self.nvars);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &rhs.terms {
                out.add_term(e1.plus(e2), c1 * c2);
            }
        }
        out
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Polynomial {
            type Output = Polynomial;
            fn $m(self, rhs: Polynomial) -> Polynomial {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

/// Neumaier summation over complex numbers, applied per component.
#[derive(Default, Clone, Copy)]
pub(crate) struct CompensatedSum {
    re: f64,
    re_c: f64,
    im: f64,
    im_c: f64,
}

impl CompensatedSum {
    pub(crate) fn add(&mut self, z: Complex64) {
        neumaier(&mut self.re, &mut self.re_c, z.re);
        neumaier(&mut self.im, &mut self.im_c, z.im);
    }

    pub(crate) fn value(&self) -> Complex64 {
        Complex64::new(self.re + self.re_c, self.im + self.im_c)
    }
}

fn neumaier(sum: &mut f64, c: &mut f64, x: f64) {
    let t = *sum + x;
    if sum.abs() >= x.abs() {
        *c += (*sum - t) + x;
    } else {
        *c += (x - t) + *sum;
    }
    *sum = t;
}

/// An ordered list of polynomials over named variables.
#[derive(Clone, Debug, PartialEq)]
pub struct PolySystem {
    nvars: usize,
    polys: Vec<Polynomial>,
    variable_names: Vec<String>,
}

pub(crate) fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl PolySystem {
    pub fn new(variable_names: Vec<String>, polys: Vec<Polynomial>) -> Result<Self, PolyError> {
        let mut seen = BTreeSet::new();
        for name in &variable_names {
            if !is_identifier(name) {
                return Err(PolyError::InvalidName(name.clone()));
            }
            if !seen.insert(name.as_str()) {
                return Err(PolyError::DuplicateName(name.clone()));
            }
        }
        let nvars = variable_names.len();
        for p in &polys {
            if p.nvars() != nvars {
                return Err(PolyError::VariableCount { expected: nvars, got: p.nvars() });
            }
        }
        Ok(Self { nvars, polys, variable_names })
    }

    /// Parses each equation over the given variable names.
    pub fn parse<S: AsRef<str>>(variable_names: &[&str], equations: &[S]) -> Result<Self, ParseError> {
        let names: Vec<String> = variable_names.iter().map(|s| s.to_string()).collect();
        let polys = equations.iter().map(|eq| parse_polynomial(eq.as_ref(), &names)).collect::<Result<Vec<_>, _>>()?;
        Self::new(names, polys).map_err(|e| ParseError::new(ParseErrorKind::Syntax(e.to_string()), 0))
    }

    /// Uses default names `x1..xn`.
    pub fn from_polys(polys: Vec<Polynomial>) -> Self {
        let n = polys.first().map(Polynomial::nvars).unwrap_or(0);
        let names = (1..=n).map(|i| format!("x{i}")).collect();
        Self::new(names, polys).expect("generated names are valid")
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn len(&self) -> usize {
        self.polys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.polys.is_empty()
    }

    pub fn polys(&self) -> &[Polynomial] {
        &self.polys
    }

    pub fn variable_names(&self) -> &[String] {
        &self.variable_names
    }

    pub fn is_square(&self) -> bool {
        self.polys.len() == self.nvars
    }

    pub fn degrees(&self) -> Vec<u32> {
        self.polys.iter().map(Polynomial::degree).collect()
    }

    pub fn evaluate(&self, point: &[Complex64]) -> Result<Vec<Complex64>, PolyError> {
        self.polys.iter().map(|p| p.evaluate(point)).collect()
    }

    /// Entry `(i, j)` is `∂ polys[i] / ∂ x_j`.
    pub fn jacobian(&self) -> Vec<Vec<Polynomial>> {
        self.polys.iter().map(|p| (0..self.nvars).map(|j| p.derivative(j)).collect()).collect()
    }

    pub fn with_polys(&self, polys: Vec<Polynomial>) -> Result<Self, PolyError> {
        Self::new(self.variable_names.clone(), polys)
    }

    pub fn equation_strings(&self) -> Vec<String> {
        self.polys.iter().map(|p| format_polynomial(p, &self.variable_names)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn xyt() -> Vec<String> {
        vec!["x".into(), "y".into(), "t".into()]
    }

    #[test]
    fn example_generator_support() {
        let f = parse_polynomial("x*y*t-(x-y-t)^2+3*x+t", &xyt()).unwrap();
        let got: BTreeSet<Vec<u32>> = f.support().into_iter().map(|e| e.0).collect();
        let want: BTreeSet<Vec<u32>> =
            [[1, 1, 1], [2, 0, 0], [0, 2, 0], [0, 0, 2], [1, 1, 0], [1, 0, 1], [0, 1, 1], [1, 0, 0], [0, 0, 1]]
                .iter()
                .map(|v| v.to_vec())
                .collect();
        assert_eq!(got, want);
        assert_eq!(f.degree(), 3);
    }

    #[test]
    fn evaluation_examples() {
        let names = vec!["x".to_string(), "y".to_string()];
        let f = parse_polynomial("x^2+y+1", &names).unwrap();
        assert_eq!(f.evaluate(&[c(1.0), c(2.0)]).unwrap(), c(4.0));
        assert_eq!(f.evaluate(&[c(0.0), c(0.0)]).unwrap(), c(1.0));
        assert!(matches!(f.evaluate(&[c(1.0)]), Err(PolyError::DimensionMismatch { .. })));

        let g = parse_polynomial("x*y*t-(x-y-t)^2+3*x+t", &xyt()).unwrap();
        assert_eq!(g.evaluate(&[c(1.0), c(1.0), c(1.0)]).unwrap(), c(4.0));
        let h = parse_polynomial("x*y", &names).unwrap();
        assert_eq!(h.evaluate(&[c(0.0), c(0.0)]).unwrap(), c(0.0));
    }

    #[test]
    fn homogenize_examples() {
        let names = vec!["x".to_string(), "y".to_string()];
        let f = parse_polynomial("x^2+y+1", &names).unwrap();
        let h = f.homogenize();
        let hn = vec!["x".to_string(), "y".to_string(), "h".to_string()];
        assert_eq!(h, parse_polynomial("x^2 + y*h + h^2", &hn).unwrap());

        let g = parse_polynomial("x^2+x*y", &names).unwrap();
        assert!(g.homogenize().terms().all(|(e, _)| e[2] == 0));

        let ex = parse_polynomial("x*y*t-(x-y-t)^2+3*x+t", &xyt()).unwrap();
        assert!(ex.homogenize().terms().all(|(e, _)| e.degree() == 3));
    }

    #[test]
    fn jacobian_examples() {
        let s = PolySystem::parse(&["x"], &["x^2-1"]).unwrap();
        let j = s.jacobian();
        assert_eq!(j[0][0], parse_polynomial("2*x", &["x".to_string()]).unwrap());

        let ex = PolySystem::parse(&["x", "y", "t"], &["x*y*t-(x-y-t)^2+3*x+t", "x+y^2+t^2"]).unwrap();
        let j = ex.jacobian();
        assert_eq!(j.len(), 2);
        assert_eq!(j[0].len(), 3);
        assert_eq!(j[1][0], Polynomial::constant(3, c(1.0)));
    }

    #[test]
    fn system_rejects_bad_names() {
        assert!(matches!(PolySystem::new(vec!["x".into(), "x".into()], vec![]), Err(PolyError::DuplicateName(_))));
        assert!(matches!(PolySystem::new(vec!["".into()], vec![]), Err(PolyError::InvalidName(_))));
        assert!(matches!(PolySystem::new(vec!["2a".into()], vec![]), Err(PolyError::InvalidName(_))));
    }

    #[test]
    fn arithmetic_drops_cancelled_terms() {
        let names = vec!["x".to_string(), "y".to_string()];
        let f = parse_polynomial("x+y", &names).unwrap();
        let g = parse_polynomial("x-y", &names).unwrap();
        assert_eq!(&(&f * &g) - &parse_polynomial("x^2-y^2", &names).unwrap(), Polynomial::zero(2));
        assert_eq!((&f - &f).num_terms(), 0);
        assert_eq!(f.pow(3), &(&f * &f) * &f);
    }
}
