//! The line family `ℓ_{(t,i)}(s) = t^{ω_i}(a_i s − b_i)` and substitution of
//! affine parametrized lines into polynomials.

use num_complex::Complex64;
use num_traits::ToPrimitive;
use thiserror::Error;

use super::{ExponentVector, PolyError, Polynomial};
use crate::Rational;

/// Minimum pairwise distance between targets `b_i / a_i`.
pub const TARGET_SEPARATION: f64 = 0.5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LineFamilyError {
    #[error("ω, a and b must have equal length (got {0}, {1}, {2})")]
    Length(usize, usize, usize),
    #[error("a_{0} is zero")]
    ZeroA(usize),
    #[error("b_{0} is zero")]
    ZeroB(usize),
    #[error("targets {i} and {j} are {dist:.3} apart, below the required {TARGET_SEPARATION}")]
    TargetsTooClose { i: usize, j: usize, dist: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct LineFamily {
    omega: Vec<Rational>,
    a: Vec<Complex64>,
    b: Vec<Complex64>,
}

impl LineFamily {
    pub fn new(omega: Vec<Rational>, a: Vec<Complex64>, b: Vec<Complex64>) -> Result<Self, LineFamilyError> {
        if omega.len() != a.len() || a.len() != b.len() {
            return Err(LineFamilyError::Length(omega.len(), a.len(), b.len()));
        }
        let zero = Complex64::new(0.0, 0.0);
        if let Some(i) = a.iter().position(|&v| v == zero) {
            return Err(LineFamilyError::ZeroA(i));
        }
        if let Some(i) = b.iter().position(|&v| v == zero) {
            return Err(LineFamilyError::ZeroB(i));
        }
        let family = Self { omega, a, b };
        let g = family.targets();
        for i in 0..g.len() {
            for j in i + 1..g.len() {
                let dist = (g[i] - g[j]).norm();
                if dist < TARGET_SEPARATION {
                    return Err(LineFamilyError::TargetsTooClose { i, j, dist });
                }
            }
        }
        Ok(family)
    }

    /// Builds the family whose targets are `gamma`, i.e. `b_i = γ_i a_i`.
    pub fn with_targets(omega: Vec<Rational>, a: Vec<Complex64>, gamma: &[Complex64]) -> Result<Self, LineFamilyError> {
        let b = a.iter().zip(gamma).map(|(ai, gi)| ai * gi).collect();
        Self::new(omega, a, b)
    }

    pub fn dim(&self) -> usize {
        self.omega.len()
    }

    pub fn omega(&self) -> &[Rational] {
        &self.omega
    }

    pub fn a(&self) -> &[Complex64] {
        &self.a
    }

    pub fn b(&self) -> &[Complex64] {
        &self.b
    }

    /// `γ_i = b_i / a_i`.
    pub fn targets(&self) -> Vec<Complex64> {
        self.a.iter().zip(&self.b).map(|(a, b)| b / a).collect()
    }

    /// Same `a`, `b` with a new direction.
    pub fn with_omega(&self, omega: Vec<Rational>) -> Self {
        assert_eq!(omega.len(), self.dim());
        Self { omega, ..self.clone() }
    }

    /// `t^{ω_i}` computed as `exp(ω_i ln t)`.
    pub fn t_powers(&self, t: f64) -> Vec<f64> {
        let lt = t.ln();
        self.omega.iter().map(|w| (w.to_f64().unwrap_or(0.0) * lt).exp()).collect()
    }

    /// The point `ℓ_t(s)`.
    pub fn point(&self, t: f64, s: Complex64) -> Vec<Complex64> {
        self.t_powers(t).iter().zip(self.a.iter().zip(&self.b)).map(|(tw, (a, b))| (a * s - b) * tw).collect()
    }

    /// `f(ℓ_t(s))` as a univariate polynomial in `s`.
    pub fn restrict(&self, f: &Polynomial, t: f64) -> Result<Polynomial, PolyError> {
        if f.nvars() != self.dim() {
            return Err(PolyError::DimensionMismatch { expected: self.dim(), got: f.nvars() });
        }
        assert!(t > 0.0, "t must be positive");
        let lines: Vec<(Complex64, Complex64)> =
            self.t_powers(t).iter().zip(self.a.iter().zip(&self.b)).map(|(tw, (a, b))| (a * tw, -b * tw)).collect();
        Ok(expand_affine_substitution(f, &lines))
    }
}

/// Substitutes `x_i = p_i s + q_i` for `lines[i] = (p_i, q_i)`, returning a
/// univariate polynomial in `s`.
pub fn expand_affine_substitution(f: &Polynomial, lines: &[(Complex64, Complex64)]) -> Polynomial {
    assert_eq!(f.nvars(), lines.len());
    let n = lines.len();
    let mut max_exp = vec![0u32; n];
    for (e, _) in f.terms() {
        for j in 0..n {
            max_exp[j] = max_exp[j].max(e[j]);
        }
    }
    // powers[j][k] holds the dense coefficients of (p_j s + q_j)^k.
    let powers: Vec<Vec<Vec<Complex64>>> = (0..n)
        .map(|j| {
            let mut out = vec![vec![Complex64::new(1.0, 0.0)]];
            for k in 1..=max_exp[j] as usize {
                let prev = &out[k - 1];
                let mut next = vec![Complex64::default(); prev.len() + 1];
                for (d, c) in prev.iter().enumerate() {
                    next[d] += c * lines[j].1;
                    next[d + 1] += c * lines[j].0;
                }
                out.push(next);
            }
            out
        })
        .collect();
    let mut acc = vec![Complex64::default(); f.degree() as usize + 1];
    for (e, c) in f.terms() {
        let mut prod = vec![*c];
        for j in 0..n {
            if e[j] > 0 {
                prod = dense_mul(&prod, &powers[j][e[j] as usize]);
            }
        }
        for (d, v) in prod.into_iter().enumerate() {
            acc[d] += v;
        }
    }
    Polynomial::from_terms(1, acc.into_iter().enumerate().map(|(d, c)| (ExponentVector::new(vec![d as u32]), c)))
}

fn dense_mul(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::default(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}
