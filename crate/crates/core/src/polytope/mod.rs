//! Exact lattice polytopes: support functions, exposed faces, the symbolic
//! oracle on homogenized Newton polytopes, and reconstruction of vertex sets
//! from oracle answers.

mod diagnostics;
mod hull;
mod reconstruct;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::oracle::OracleOutcome;
use crate::poly::Polynomial;
use crate::Rational;

pub use diagnostics::{convergence_bound, d_omega, facial_roots, BoundConstants, DiagnosticError, FacialRoots};
pub use hull::{AffineSpan, Facet, Hull};
pub use reconstruct::{
    reconstruct_polytope, LogEntry, ReconstructError, ReconstructSettings, Reconstruction, Response,
};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PolytopeError {
    #[error("a polytope needs at least one point")]
    Empty,
    #[error("point {index} has {found} coordinates, expected {expected}")]
    Dimension { index: usize, found: usize, expected: usize },
}

/// A finite generating set of integer points. Points are kept sorted and
/// distinct; they need not be vertices.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<i64>>", into = "Vec<Vec<i64>>")]
pub struct LatticePolytope {
    points: Vec<Vec<i64>>,
}

impl TryFrom<Vec<Vec<i64>>> for LatticePolytope {
    type Error = PolytopeError;

    fn try_from(points: Vec<Vec<i64>>) -> Result<Self, Self::Error> {
        Self::new(points)
    }
}

impl From<LatticePolytope> for Vec<Vec<i64>> {
    fn from(p: LatticePolytope) -> Self {
        p.points
    }
}

fn pairing(x: &[i64], omega: &[Rational]) -> Rational {
    x.iter().zip(omega).map(|(&xi, w)| w * xi).sum()
}

impl LatticePolytope {
    pub fn new(mut points: Vec<Vec<i64>>) -> Result<Self, PolytopeError> {
        let expected = points.first().ok_or(PolytopeError::Empty)?.len();
        if let Some((index, p)) = points.iter().enumerate().find(|(_, p)| p.len() != expected) {
            return Err(PolytopeError::Dimension { index, found: p.len(), expected });
        }
        points.sort();
        points.dedup();
        Ok(Self { points })
    }

    pub fn ambient_dim(&self) -> usize {
        self.points[0].len()
    }

    pub fn points(&self) -> &[Vec<i64>] {
        &self.points
    }

    /// `h_P(ω) = max ⟨x, ω⟩`.
    ///
    /// # Panics
    /// If `omega` has the wrong length.
    pub fn support_function(&self, omega: &[Rational]) -> Rational {
        assert_eq!(omega.len(), self.ambient_dim(), "direction length");
        self.points.iter().map(|p| pairing(p, omega)).max().unwrap_or_default()
    }

    /// The generating points attaining `h_P(ω)`.
    pub fn exposed_face(&self, omega: &[Rational]) -> LatticePolytope {
        let h = self.support_function(omega);
        let points = self.points.iter().filter(|p| pairing(p, omega) == h).cloned().collect();
        Self { points }
    }

    pub fn hull(&self) -> Hull {
        Hull::new(&self.points)
    }

    pub fn dim(&self) -> usize {
        hull::AffineSpan::of(&self.points).dim()
    }

    pub fn vertices(&self) -> Vec<Vec<i64>> {
        self.hull().vertices()
    }

    pub fn contains(&self, x: &[i64]) -> bool {
        self.hull().contains(x)
    }

    pub fn lattice_point_count(&self) -> usize {
        self.hull().lattice_point_count()
    }
}

/// Exponents of the terms of `f`.
pub fn newton_polytope(f: &Polynomial) -> Result<LatticePolytope, PolytopeError> {
    LatticePolytope::new(f.terms().map(|(e, _)| e.to_i64()).collect())
}

/// Exponents padded with `d − |α|`, where `d` is the degree of `f`.
pub fn homogenized_polytope(f: &Polynomial) -> Result<LatticePolytope, PolytopeError> {
    let d = f.degree() as i64;
    LatticePolytope::new(
        f.terms()
            .map(|(e, _)| {
                let mut p = e.to_i64();
                p.push(d - e.degree() as i64);
                p
            })
            .collect(),
    )
}

/// Exact answer of the oracle on the homogenized Newton polytope.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "tag", rename_all = "camelCase")]
pub enum SymbolicAnswer {
    Eep,
    /// The exposed vertex `(α, d − |α|)`.
    Vertex {
        point: Vec<i64>,
    },
    /// Coordinate-wise minimum of a positive-dimensional exposed face.
    #[serde(rename_all = "camelCase")]
    FaceMin {
        m: Vec<i64>,
        m_inf: i64,
        face_dim: usize,
    },
}

impl SymbolicAnswer {
    pub fn vertex(&self) -> Option<&[i64]> {
        match self {
            Self::Vertex { point } => Some(point),
            _ => None,
        }
    }

    /// Whether a numerical answer reports the same vertex, face minimum or EEP.
    pub fn agrees_with(&self, outcome: &OracleOutcome) -> bool {
        match (self, outcome) {
            (Self::Eep, OracleOutcome::Eep) => true,
            (Self::Vertex { point }, OracleOutcome::Counts { .. }) => outcome.vertex_point().as_ref() == Some(point),
            (Self::FaceMin { m, m_inf, .. }, OracleOutcome::Counts { beta, beta_inf, other, vertex: false }) => {
                *other > 0
                    && *beta_inf as i64 == *m_inf
                    && beta.len() == m.len()
                    && beta.iter().zip(m).all(|(b, v)| *b as i64 == *v)
            }
            _ => false,
        }
    }
}

/// Answers the oracle query for `(ω, 0)` on the homogenized Newton polytope of `f`.
pub fn symbolic_oracle(f: &Polynomial, omega: &[Rational]) -> Result<SymbolicAnswer, PolytopeError> {
    let p = homogenized_polytope(f)?;
    let n = f.nvars();
    if omega.len() != n {
        return Err(PolytopeError::Dimension { index: 0, found: omega.len(), expected: n });
    }
    let mut lifted = omega.to_vec();
    lifted.push(Rational::from_integer(0));
    let face = p.exposed_face(&lifted);
    if face.points().len() == p.points().len() {
        return Ok(SymbolicAnswer::Eep);
    }
    if let [v] = face.points() {
        return Ok(SymbolicAnswer::Vertex { point: v.clone() });
    }
    let min = (0..=n).map(|j| face.points().iter().map(|q| q[j]).min().unwrap_or(0)).collect::<Vec<_>>();
    Ok(SymbolicAnswer::FaceMin { m: min[..n].to_vec(), m_inf: min[n], face_dim: face.dim() })
}

/// Whether the maximum of `⟨ω, α⟩` over the support of `f` is attained at least twice.
pub fn tropical_of_hypersurface(f: &Polynomial, omega: &[Rational]) -> bool {
    match newton_polytope(f) {
        Ok(p) => p.exposed_face(omega).points().len() >= 2,
        Err(_) => false,
    }
}

/// Integer vector as exact rationals.
pub fn to_rational(v: &[i64]) -> Vec<Rational> {
    v.iter().map(|&x| Rational::from_integer(x)).collect()
}
