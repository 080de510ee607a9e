//! Dense complex linear algebra and seeded randomness.

use std::f64::consts::PI;
use std::ops::{Index, IndexMut};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Relative pivot threshold below which LU reports a singular matrix.
pub const PIVOT_TOL: f64 = 1e-13;
/// Relative singular value threshold for numerical rank.
pub const RANK_TOL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix is singular to working precision")]
    Singular,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("non-finite entry in input")]
    NonFinite,
    #[error("a slice with {k} rows in {n} dimensions needs 0 < k <= n")]
    SliceShape { n: usize, k: usize },
}

/// Row-major dense complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Complex64::default(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<Complex64>) -> Self {
        assert_eq!(data.len(), rows * cols, "data length");
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Self {
        let cols = rows.first().map(Vec::len).unwrap_or(0);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        Self { rows: rows.len(), cols, data: rows.concat() }
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [Complex64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<Complex64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows).map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum()).collect()
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows).map(|i| self.row(i).iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Stacks `other` below `self`.
    pub fn vstack(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.cols);
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Self { rows: self.rows + other.rows, cols: self.cols, data }
    }

    fn to_nalgebra(&self) -> DMatrix<Complex64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

pub fn norm_inf(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn norm2(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn all_finite(v: &[Complex64]) -> bool {
    v.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Solves `A x = rhs` by LU with partial pivoting.
pub fn lu_solve(a: &ComplexMatrix, rhs: &[Complex64]) -> Result<Vec<Complex64>, LinalgError> {
    let n = a.rows;
    if a.cols != n || rhs.len() != n {
        return Err(LinalgError::Dimension(format!(
            "{}x{} system with {} right-hand entries",
            a.rows,
            a.cols,
            rhs.len()
        )));
    }
    if !a.is_finite() || !all_finite(rhs) {
        return Err(LinalgError::NonFinite);
    }
    let threshold = PIVOT_TOL * a.norm_inf();
    let mut m = a.data.clone();
    let mut x = rhs.to_vec();
    for k in 0..n {
        let (p, pmax) =
            (k..n)
                .map(|r| (r, m[r * n + k].norm()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pmax <= threshold || pmax == 0.0 {
            return Err(LinalgError::Singular);
        }
        if p != k {
            for j in 0..n {
                m.swap(p * n + j, k * n + j);
            }
            x.swap(p, k);
        }
        let inv = m[k * n + k].inv();
        for i in k + 1..n {
            let f = m[i * n + k] * inv;
            if f != Complex64::default() {
                for j in k + 1..n {
                    let mkj = m[k * n + j];
                    m[i * n + j] -= f * mkj;
                }
                let xk = x[k];
                x[i] -= f * xk;
            }
        }
    }
    for k in (0..n).rev() {
        let mut s = x[k];
        for j in k + 1..n {
            s -= m[k * n + j] * x[j];
        }
        x[k] = s / m[k * n + k];
    }
    Ok(x)
}

/// Least-squares solution of `A x ≈ rhs` via QR (rows ≥ cols).
pub fn qr_solve(a: &ComplexMatrix, rhs: &[Complex64]) -> Result<Vec<Complex64>, LinalgError> {
    if a.rows < a.cols || rhs.len() != a.rows {
        return Err(LinalgError::Dimension(format!(
            "{}x{} least squares with {} right-hand entries",
            a.rows,
            a.cols,
            rhs.len()
        )));
    }
    if !a.is_finite() || !all_finite(rhs) {
        return Err(LinalgError::NonFinite);
    }
    let qr = a.to_nalgebra().qr();
    let r = qr.r();
    let scale = r.diagonal().iter().map(|z| z.norm()).fold(0.0, f64::max);
    if r.diagonal().iter().any(|z| z.norm() <= PIVOT_TOL * scale) || scale == 0.0 {
        return Err(LinalgError::Singular);
    }
    let qtb = qr.q().adjoint() * nalgebra::DVector::from_column_slice(rhs);
    let sol = r.solve_upper_triangular(&qtb).ok_or(LinalgError::Singular)?;
    Ok(sol.iter().copied().collect())
}

/// LU first, QR when LU reports a singular pivot.
pub fn solve(a: &ComplexMatrix, rhs: &[Complex64]) -> Result<Vec<Complex64>, LinalgError> {
    match lu_solve(a, rhs) {
        Err(LinalgError::Singular) => qr_solve(a, rhs),
        other => other,
    }
}

pub fn singular_values(a: &ComplexMatrix) -> Vec<f64> {
    if a.rows == 0 || a.cols == 0 {
        return Vec::new();
    }
    let mut sv: Vec<f64> = a.to_nalgebra().singular_values().iter().copied().collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    sv
}

/// Number of singular values above `RANK_TOL · σ_max`.
pub fn numerical_rank(a: &ComplexMatrix) -> usize {
    let sv = singular_values(a);
    let Some(&smax) = sv.first() else { return 0 };
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > RANK_TOL * smax).count()
}

/// Roots of `Σ c_k s^k` (coefficients in increasing degree) as eigenvalues of
/// the companion matrix. Leading zero coefficients are ignored.
pub fn univariate_roots(coeffs: &[Complex64]) -> Vec<Complex64> {
    let Some(top) = coeffs.iter().rposition(|c| *c != Complex64::default()) else {
        return Vec::new();
    };
    if top == 0 {
        return Vec::new();
    }
    let lead = coeffs[top];
    let companion = DMatrix::from_fn(top, top, |i, j| {
        if j == top - 1 {
            -coeffs[i] / lead
        } else if i == j + 1 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::default()
        }
    });
    companion.schur().eigenvalues().map(|e| e.iter().copied().collect()).unwrap_or_default()
}

/// Affine linear equations `C [x; 1] = 0` with `C` of shape k×(n+1).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "Vec<Vec<[f64; 2]>>", try_from = "Vec<Vec<[f64; 2]>>")]
pub struct LinearSlice {
    coeffs: ComplexMatrix,
}

impl LinearSlice {
    pub fn new(coeffs: ComplexMatrix) -> Result<Self, LinalgError> {
        let (k, n) = (coeffs.rows, coeffs.cols.saturating_sub(1));
        if k == 0 || k > n {
            return Err(LinalgError::SliceShape { n, k });
        }
        let mut linear = ComplexMatrix::zeros(k, n);
        for i in 0..k {
            linear.row_mut(i).copy_from_slice(&coeffs.row(i)[..n]);
        }
        if numerical_rank(&linear) < k {
            return Err(LinalgError::Singular);
        }
        Ok(Self { coeffs })
    }

    /// Number of equations.
    pub fn codim(&self) -> usize {
        self.coeffs.rows
    }

    /// Ambient dimension.
    pub fn ambient(&self) -> usize {
        self.coeffs.cols - 1
    }

    pub fn coeffs(&self) -> &ComplexMatrix {
        &self.coeffs
    }

    pub fn evaluate(&self, x: &[Complex64]) -> Vec<Complex64> {
        let n = self.ambient();
        assert_eq!(x.len(), n);
        (0..self.codim())
            .map(|i| {
                let r = self.coeffs.row(i);
                r[..n].iter().zip(x).map(|(a, b)| a * b).sum::<Complex64>() + r[n]
            })
            .collect()
    }
}

impl From<LinearSlice> for Vec<Vec<[f64; 2]>> {
    fn from(s: LinearSlice) -> Self {
        s.coeffs.to_rows().into_iter().map(|r| r.into_iter().map(|z| [z.re, z.im]).collect()).collect()
    }
}

impl TryFrom<Vec<Vec<[f64; 2]>>> for LinearSlice {
    type Error = LinalgError;
    fn try_from(rows: Vec<Vec<[f64; 2]>>) -> Result<Self, LinalgError> {
        let rows: Vec<Vec<Complex64>> =
            rows.into_iter().map(|r| r.into_iter().map(|[re, im]| Complex64::new(re, im)).collect()).collect();
        if rows.windows(2).any(|w| w[0].len() != w[1].len()) {
            return Err(LinalgError::Dimension("ragged slice rows".into()));
        }
        Self::new(ComplexMatrix::from_rows(&rows))
    }
}

/// ChaCha8 generator for `seed`, on an independent `stream`.
pub fn seeded_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn random_unit_complex<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::from_polar(1.0, rng.gen_range(0.0..2.0 * PI))
}

/// Unit complex number whose argument stays at least 0.1 rad from 0 and π.
pub fn random_gamma<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let theta = rng.gen_range(0.1..PI - 0.1);
    let theta = if rng.gen_bool(0.5) { theta } else { -theta };
    Complex64::from_polar(1.0, theta)
}

/// Unit-circle direction times a magnitude in [0.5, 1.5].
pub fn random_complex<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    random_unit_complex(rng) * rng.gen_range(0.5..1.5)
}

pub fn random_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<Complex64> {
    (0..n).map(|_| random_complex(rng)).collect()
}

pub fn random_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    ComplexMatrix::from_row_major(rows, cols, random_vector(rows * cols, rng))
}

/// `k` random affine equations in `n` unknowns.
pub fn random_slice<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Result<LinearSlice, LinalgError> {
    if k == 0 || k > n {
        return Err(LinalgError::SliceShape { n, k });
    }
    loop {
        if let Ok(s) = LinearSlice::new(random_matrix(k, n + 1, rng)) {
            return Ok(s);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn solves_small_systems() {
        let rhs = vec![c(1.0), Complex64::new(2.0, -1.0)];
        assert_eq!(lu_solve(&ComplexMatrix::identity(2), &rhs).unwrap(), rhs);
        let a = ComplexMatrix::from_rows(&[vec![c(2.0), c(0.0)], vec![c(0.0), c(4.0)]]);
        assert_eq!(lu_solve(&a, &[c(2.0), c(8.0)]).unwrap(), vec![c(1.0), c(2.0)]);
    }

    #[test]
    fn random_residual() {
        let mut rng = seeded_rng(1, 0);
        let a = random_matrix(5, 5, &mut rng);
        let b = random_vector(5, &mut rng);
        let x = lu_solve(&a, &b).unwrap();
        let r: Vec<Complex64> = a.mul_vec(&x).iter().zip(&b).map(|(p, q)| p - q).collect();
        assert!(norm_inf(&r) <= 1e-10 * (1.0 + norm_inf(&b)));
    }

    #[test]
    fn singular_detection_and_fallback() {
        let a = ComplexMatrix::from_rows(&[vec![c(1.0), c(2.0)], vec![c(2.0), c(4.0)]]);
        assert_eq!(lu_solve(&a, &[c(1.0), c(2.0)]), Err(LinalgError::Singular));
        assert_eq!(numerical_rank(&a), 1);
        let tall = ComplexMatrix::from_rows(&[vec![c(1.0)], vec![c(1.0)]]);
        let x = qr_solve(&tall, &[c(1.0), c(3.0)]).unwrap();
        assert!((x[0] - c(2.0)).norm() < 1e-12);
    }

    #[test]
    fn randomness_contracts() {
        let s1 = random_slice(3, 1, &mut seeded_rng(5, 2)).unwrap();
        let s2 = random_slice(3, 1, &mut seeded_rng(5, 2)).unwrap();
        assert_eq!(s1, s2);
        assert_eq!(s1.coeffs().ncols(), 4);
        assert_ne!(s1, random_slice(3, 1, &mut seeded_rng(5, 3)).unwrap());
        assert!(random_slice(2, 3, &mut seeded_rng(0, 0)).is_err());
        let mut rng = seeded_rng(9, 0);
        for _ in 0..1000 {
            assert!((random_unit_complex(&mut rng).norm() - 1.0).abs() < 1e-15);
            let g = random_gamma(&mut rng);
            assert!((g.norm() - 1.0).abs() < 1e-15);
            let arg = g.arg().abs();
            assert!((0.1 - 1e-12..=PI - 0.1 + 1e-12).contains(&arg));
        }
    }

    #[test]
    fn slice_json_round_trip() {
        let s = random_slice(4, 2, &mut seeded_rng(3, 0)).unwrap();
        let text = serde_json::to_string(&s).unwrap();
        let back: LinearSlice = serde_json::from_str(&text).unwrap();
        assert_eq!(s, back);
    }

    #[test]
    fn companion_roots() {
        // (s - 1)(s + 2)(s - i) = s^3 + (1 - i) s^2 + (-2 - i) s + 2i
        let coeffs = [Complex64::new(0.0, 2.0), Complex64::new(-2.0, -1.0), Complex64::new(1.0, -1.0), c(1.0), c(0.0)];
        let mut roots = univariate_roots(&coeffs);
        roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        let expected = [c(-2.0), Complex64::new(0.0, 1.0), c(1.0)];
        for (r, e) in roots.iter().zip(&expected) {
            assert!((r - e).norm() < 1e-12, "{r} vs {e}");
        }
        assert!(univariate_roots(&[c(3.0)]).is_empty());
    }
}
