//! Convergence-rate quantities for paths converging to a facial root.

use num_complex::Complex64;
use thiserror::Error;

use super::{newton_polytope, pairing, PolytopeError};
use crate::numerics::univariate_roots;
use crate::poly::{expand_affine_substitution, ExponentVector, LineFamily, Polynomial};
use crate::Rational;

/// Roots closer than this (relative) are treated as one multiple root.
const ROOT_CLUSTER_TOL: f64 = 1e-3;

#[derive(Debug, Error, PartialEq)]
pub enum DiagnosticError {
    #[error(transparent)]
    Polytope(#[from] PolytopeError),
    #[error("the direction exposes every term, so no term lies off the face")]
    NoComplement,
    #[error("line family has dimension {found}, polynomial has {expected} variables")]
    Dimension { found: usize, expected: usize },
    #[error("the facial form vanishes identically on the line")]
    DegenerateFace,
    #[error("{0} is not a root of the facial form on the line")]
    NotFacialRoot(Complex64),
    #[error("multiplicity {0} is outside 1..=deg f")]
    Multiplicity(usize),
    #[error("t must be positive, got {0}")]
    BadParameter(f64),
}

/// `d_ω = min { h(ω) − ⟨ω, α⟩ : α off the face exposed by ω }`.
pub fn d_omega(f: &Polynomial, omega: &[Rational]) -> Result<Rational, DiagnosticError> {
    let p = newton_polytope(f)?;
    let h = p.support_function(omega);
    p.points()
        .iter()
        .map(|a| h - pairing(a, omega))
        .filter(|gap| *gap > Rational::from_integer(0))
        .min()
        .ok_or(DiagnosticError::NoComplement)
}

/// The facial form `g_ω = f_ω / x^m` restricted to the line `a s − b`.
#[derive(Clone, Debug, PartialEq)]
pub struct FacialRoots {
    /// Leading coefficient `k` of `g_ω(a s − b)` in `s`.
    pub k: Complex64,
    /// Distinct roots with multiplicities.
    pub roots: Vec<(Complex64, usize)>,
    /// Common monomial factor `m` of the face.
    pub m: Vec<u32>,
}

pub fn facial_roots(f: &Polynomial, omega: &[Rational], line: &LineFamily) -> Result<FacialRoots, DiagnosticError> {
    let n = f.nvars();
    if line.dim() != n {
        return Err(DiagnosticError::Dimension { found: line.dim(), expected: n });
    }
    let face = newton_polytope(f)?.exposed_face(omega);
    let m: Vec<u32> = (0..n).map(|j| face.points().iter().map(|p| p[j]).min().unwrap_or(0) as u32).collect();
    let g = Polynomial::from_terms(
        n,
        f.terms().filter(|(e, _)| face.points().contains(&e.to_i64())).map(|(e, c)| {
            let shifted: Vec<u32> = e.as_slice().iter().zip(&m).map(|(x, y)| x - y).collect();
            (ExponentVector::new(shifted), *c)
        }),
    );
    let lines: Vec<(Complex64, Complex64)> = line.a().iter().zip(line.b()).map(|(a, b)| (*a, -b)).collect();
    let u = expand_affine_substitution(&g, &lines);
    let coeffs: Vec<Complex64> = (0..=u.degree()).map(|k| u.coefficient(&ExponentVector::new(vec![k]))).collect();
    let top = coeffs.iter().rposition(|c| c.norm() > 0.0).ok_or(DiagnosticError::DegenerateFace)?;
    let mut roots: Vec<(Complex64, usize)> = Vec::new();
    let mut members: Vec<Vec<Complex64>> = Vec::new();
    for z in univariate_roots(&coeffs[..=top]) {
        match roots.iter().position(|(c, _)| (z - c).norm() < ROOT_CLUSTER_TOL * (1.0 + c.norm())) {
            Some(i) => {
                members[i].push(z);
                let mean = members[i].iter().sum::<Complex64>() / members[i].len() as f64;
                roots[i] = (mean, members[i].len());
            }
            None => {
                roots.push((z, 1));
                members.push(vec![z]);
            }
        }
    }
    Ok(FacialRoots { k: coeffs[top], roots, m })
}

/// Constants entering the convergence bound for one facial root.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundConstants {
    /// The facial root, refined to the cluster mean.
    pub tau: Complex64,
    pub d_omega: f64,
    /// Largest coefficient modulus over the leading coefficient `|k|`.
    pub c: f64,
    /// Number of exponents off the exposed face.
    pub complement: usize,
    pub a_min: f64,
    pub a_max: f64,
    /// Radius of the ball around `τ` that a converging path enters.
    pub gamma: f64,
    pub big_gamma: f64,
    pub degree: u32,
}

impl BoundConstants {
    pub fn new(f: &Polynomial, omega: &[Rational], line: &LineFamily, tau: Complex64) -> Result<Self, DiagnosticError> {
        let d_w = d_omega(f, omega)?;
        let facial = facial_roots(f, omega, line)?;
        let own = facial
            .roots
            .iter()
            .position(|(r, _)| (r - tau).norm() < ROOT_CLUSTER_TOL * (1.0 + r.norm()))
            .ok_or(DiagnosticError::NotFacialRoot(tau))?;
        let tau = facial.roots[own].0;
        let p = newton_polytope(f)?;
        let h = p.support_function(omega);
        let complement = p.points().iter().filter(|a| pairing(a, omega) < h).count();
        let c_max = f.terms().map(|(_, c)| c.norm()).fold(0.0, f64::max);
        let a_min = line.a().iter().map(|a| a.norm()).fold(1.0, f64::min);
        let a_max = line.a().iter().map(|a| a.norm()).fold(1.0, f64::max);
        let targets = line.targets();
        let others = facial.roots.iter().enumerate().filter(|&(i, _)| i != own).map(|(_, r)| r.0);
        let gamma = targets.iter().copied().chain(others).map(|r| 0.5 * (tau - r).norm()).fold(a_min, f64::min);
        let big_gamma = targets.iter().map(|r| (tau - r).norm()).fold(2.0 / a_max, f64::max);
        Ok(Self {
            tau,
            d_omega: *d_w.numer() as f64 / *d_w.denom() as f64,
            c: c_max / facial.k.norm(),
            complement,
            a_min,
            a_max,
            gamma,
            big_gamma,
            degree: f.degree(),
        })
    }

    /// `t^{−d_ω} C |ℱᶜ| (a_max / a_min · (1 + Γ/γ))^d`.
    pub fn bound(&self, t: f64) -> f64 {
        let ratio = self.a_max / self.a_min * (1.0 + self.big_gamma / self.gamma);
        t.powf(-self.d_omega) * self.c * self.complement as f64 * ratio.powi(self.degree as i32)
    }
}

/// Right-hand side of the convergence bound for a path converging to the
/// facial root `τ` with `β` paths, evaluated at `t`.
pub fn convergence_bound(
    f: &Polynomial,
    omega: &[Rational],
    line: &LineFamily,
    tau: Complex64,
    beta: usize,
    t: f64,
) -> Result<f64, DiagnosticError> {
    if !(t > 0.0) {
        return Err(DiagnosticError::BadParameter(t));
    }
    if beta == 0 || beta > f.degree() as usize {
        return Err(DiagnosticError::Multiplicity(beta));
    }
    Ok(BoundConstants::new(f, omega, line, tau)?.bound(t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse_polynomial;
    use crate::polytope::to_rational;

    fn poly(text: &str) -> Polynomial {
        parse_polynomial(text, &["x".to_string(), "y".to_string()]).unwrap()
    }

    fn line() -> LineFamily {
        let a = vec![Complex64::new(0.6, 0.8), Complex64::new(-0.28, 0.96)];
        LineFamily::with_targets(to_rational(&[-1, 0]), a, &[Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)])
            .unwrap()
    }

    #[test]
    fn d_omega_examples() {
        assert_eq!(d_omega(&poly("x^2+y+1"), &to_rational(&[-1, 0])).unwrap(), Rational::from_integer(2));
        assert_eq!(d_omega(&poly("3*x*y"), &to_rational(&[1, 0])), Err(DiagnosticError::NoComplement));
        assert_eq!(d_omega(&poly("x+y"), &to_rational(&[0, 0])), Err(DiagnosticError::NoComplement));
    }

    #[test]
    fn facial_form_of_parabola() {
        // Face {1, y}: g = y + 1 on the line gives a_1 s − b_1 + 1, root (b_1 − 1)/a_1.
        let l = line();
        let fr = facial_roots(&poly("x^2+y+1"), &to_rational(&[-1, 0]), &l).unwrap();
        assert_eq!(fr.m, vec![0, 0]);
        assert_eq!(fr.roots.len(), 1);
        let expected = (l.b()[1] - 1.0) / l.a()[1];
        assert!((fr.roots[0].0 - expected).norm() < 1e-12);
        assert!((fr.k - l.a()[1]).norm() < 1e-12);
    }

    #[test]
    fn repeated_facial_root_is_clustered() {
        // Face of (x − 2)^2 + y along (0, −1) is (x − 2)^2.
        let l = line();
        let fr = facial_roots(&poly("x^2-4*x+4+y"), &to_rational(&[0, -1]), &l).unwrap();
        assert_eq!(fr.roots.len(), 1);
        assert_eq!(fr.roots[0].1, 2);
        let expected = (l.b()[0] + 2.0) / l.a()[0];
        assert!((fr.roots[0].0 - expected).norm() < 1e-6);
    }

    #[test]
    fn bound_decreases_in_t() {
        let f = poly("x^2+y+1");
        let w = to_rational(&[-1, 0]);
        let l = line();
        let tau = facial_roots(&f, &w, &l).unwrap().roots[0].0;
        let b10 = convergence_bound(&f, &w, &l, tau, 1, 10.0).unwrap();
        let b100 = convergence_bound(&f, &w, &l, tau, 1, 100.0).unwrap();
        assert!(b100 < b10 && b100 > 0.0);
        assert!((b10 / b100 - 100.0).abs() < 1e-9);
        let off = tau + Complex64::new(0.5, 0.0);
        assert_eq!(convergence_bound(&f, &w, &l, off, 1, 10.0), Err(DiagnosticError::NotFacialRoot(off)));
        assert!(convergence_bound(&f, &w, &l, tau, 1, 0.0).is_err());
    }
}
