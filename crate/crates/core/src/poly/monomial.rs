//! Integer matrices acting on exponents as monomial maps
//! `x_i ↦ Π_j x_j^{A_ij}`.

use rand::Rng;
use thiserror::Error;

use super::{ExponentVector, Polynomial};
use crate::Rational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MonomialMapError {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix has determinant {0}, expected ±1")]
    NotUnimodular(i128),
    #[error("matrix entry ({0},{1}) is negative")]
    NegativeEntry(usize, usize),
    #[error("matrix is {matrix}x{matrix} but the polynomial has {nvars} variables")]
    DimensionMismatch { matrix: usize, nvars: usize },
}

/// Dense square integer matrix, row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    n: usize,
    data: Vec<i64>,
}

impl IntMatrix {
    pub fn identity(n: usize) -> Self {
        let mut data = vec![0; n * n];
        for i in 0..n {
            data[i * n + i] = 1;
        }
        Self { n, data }
    }

    pub fn from_rows(rows: Vec<Vec<i64>>) -> Result<Self, MonomialMapError> {
        let n = rows.len();
        if let Some(r) = rows.iter().find(|r| r.len() != n) {
            return Err(MonomialMapError::NotSquare { rows: n, cols: r.len() });
        }
        Ok(Self { n, data: rows.into_iter().flatten().collect() })
    }

    /// Product of the given factors, left to right.
    pub fn product(n: usize, factors: &[IntMatrix]) -> Self {
        factors.iter().fold(Self::identity(n), |acc, f| acc.mul(f))
    }

    /// Identity plus `value` at `(row, col)`, with `row != col`.
    pub fn elementary(n: usize, row: usize, col: usize, value: i64) -> Self {
        assert_ne!(row, col);
        let mut m = Self::identity(n);
        m.data[row * n + col] = value;
        m
    }

    /// Product `L U` of random unit lower and upper triangular matrices with
    /// off-diagonal entries in {0, 1}. The result has determinant 1 and
    /// nonnegative entries, so exponents stay small.
    pub fn random_unimodular<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut acc = Self::identity(n);
        for k in 0..2 {
            let mut t = Self::identity(n);
            for i in 0..n {
                for j in 0..n {
                    let upper = k == 1;
                    if (upper && j > i) || (!upper && j < i) {
                        t.data[i * n + j] = rng.gen_range(0..=1);
                    }
                }
            }
            acc = acc.mul(&t);
        }
        acc
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.data[i * self.n + j]
    }

    pub fn rows(&self) -> Vec<Vec<i64>> {
        self.data.chunks(self.n.max(1)).take(self.n).map(<[i64]>::to_vec).collect()
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut data = vec![0; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a != 0 {
                    for j in 0..n {
                        data[i * n + j] += a * other.data[k * n + j];
                    }
                }
            }
        }
        Self { n, data }
    }

    /// Exact determinant by fraction-free elimination.
    pub fn determinant(&self) -> i128 {
        let n = self.n;
        let mut m: Vec<i128> = self.data.iter().map(|&v| v as i128).collect();
        let mut sign = 1;
        let mut prev = 1i128;
        for k in 0..n {
            let Some(p) = (k..n).find(|&r| m[r * n + k] != 0) else {
                return 0;
            };
            if p != k {
                for j in 0..n {
                    m.swap(p * n + j, k * n + j);
                }
                sign = -sign;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    m[i * n + j] = (m[i * n + j] * m[k * n + k] - m[i * n + k] * m[k * n + j]) / prev;
                }
                m[i * n + k] = 0;
            }
            prev = m[k * n + k];
        }
        if n == 0 {
            1
        } else {
            sign * m[n * n - 1]
        }
    }

    /// Checks unimodularity and nonnegativity.
    pub fn validate(&self) -> Result<(), MonomialMapError> {
        for i in 0..self.n {
            for j in 0..self.n {
                if self.get(i, j) < 0 {
                    return Err(MonomialMapError::NegativeEntry(i, j));
                }
            }
        }
        match self.determinant() {
            1 | -1 => Ok(()),
            d => Err(MonomialMapError::NotUnimodular(d)),
        }
    }

    /// Exact integer inverse of a unimodular matrix.
    pub fn inverse(&self) -> Result<Self, MonomialMapError> {
        let det = self.determinant();
        if det.abs() != 1 {
            return Err(MonomialMapError::NotUnimodular(det));
        }
        let n = self.n;
        let mut a: Vec<Rational> = self.data.iter().map(|&v| Rational::from_integer(v)).collect();
        let mut inv: Vec<Rational> = Self::identity(n).data.iter().map(|&v| Rational::from_integer(v)).collect();
        for k in 0..n {
            let p = (k..n).find(|&r| a[r * n + k] != Rational::from_integer(0)).expect("nonsingular");
            for j in 0..n {
                a.swap(p * n + j, k * n + j);
                inv.swap(p * n + j, k * n + j);
            }
            let piv = a[k * n + k];
            for j in 0..n {
                a[k * n + j] /= piv;
                inv[k * n + j] /= piv;
            }
            for i in 0..n {
                if i != k {
                    let f = a[i * n + k];
                    if f != Rational::from_integer(0) {
                        for j in 0..n {
                            let (akj, ikj) = (a[k * n + j], inv[k * n + j]);
                            a[i * n + j] -= f * akj;
                            inv[i * n + j] -= f * ikj;
                        }
                    }
                }
            }
        }
        let data = inv
            .iter()
            .map(|v| {
                debug_assert!(v.is_integer());
                v.to_integer()
            })
            .collect();
        Ok(Self { n, data })
    }

    /// `α ↦ Aᵀα`.
    pub fn map_exponent(&self, e: &ExponentVector) -> ExponentVector {
        let n = self.n;
        ExponentVector::new((0..n).map(|j| (0..n).map(|i| self.get(i, j) as u32 * e[i]).sum()).collect())
    }

    /// Applies the monomial map to every term of `f`.
    pub fn apply(&self, f: &Polynomial) -> Result<Polynomial, MonomialMapError> {
        if f.nvars() != self.n {
            return Err(MonomialMapError::DimensionMismatch { matrix: self.n, nvars: f.nvars() });
        }
        self.validate()?;
        Ok(Polynomial::from_terms(self.n, f.terms().map(|(e, c)| (self.map_exponent(e), *c))))
    }

    /// `A ω` over the rationals.
    pub fn mul_vector(&self, omega: &[Rational]) -> Vec<Rational> {
        assert_eq!(omega.len(), self.n);
        (0..self.n)
            .map(|i| (0..self.n).fold(Rational::from_integer(0), |acc, j| acc + omega[j] * self.get(i, j)))
            .collect()
    }

    /// `A^{-1} ω`, the direction that pairs with mapped exponents the way `ω`
    /// pairs with the originals.
    pub fn transform_direction(&self, omega: &[Rational]) -> Result<Vec<Rational>, MonomialMapError> {
        Ok(self.inverse()?.mul_vector(omega))
    }
}
