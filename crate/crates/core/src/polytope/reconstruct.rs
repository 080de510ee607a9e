//! Vertex sets of homogenized Newton polytopes recovered from oracle answers.
//!
//! Points live in `ℤ^{n+1}` on the hyperplane `|x| = d`. A functional `W` on
//! that hyperplane acts like the query direction `ω_i = W_i − W_{n+1}`, so
//! facet normals of the current hull translate directly into oracle queries.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::hull::{dot, Hull};
use super::{to_rational, LatticePolytope, SymbolicAnswer};
use crate::oracle::{primitive_direction, OracleOutcome};
use crate::Rational;

/// What reconstruction needs from one oracle query.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "tag", rename_all = "camelCase")]
pub enum Response {
    /// The homogenized vertex exposed by the query.
    Vertex {
        point: Vec<i64>,
    },
    /// A positive-dimensional face short of the whole polytope.
    Face,
    Eep,
    Inconclusive {
        reason: String,
    },
}

impl From<&OracleOutcome> for Response {
    fn from(o: &OracleOutcome) -> Self {
        match o {
            OracleOutcome::Counts { .. } => match o.vertex_point() {
                Some(point) => Self::Vertex { point },
                None => Self::Face,
            },
            OracleOutcome::Eep => Self::Eep,
            OracleOutcome::Inconclusive { reason } => Self::Inconclusive { reason: reason.clone() },
        }
    }
}

impl From<&SymbolicAnswer> for Response {
    fn from(a: &SymbolicAnswer) -> Self {
        match a {
            SymbolicAnswer::Vertex { point } => Self::Vertex { point: point.clone() },
            SymbolicAnswer::FaceMin { .. } => Self::Face,
            SymbolicAnswer::Eep => Self::Eep,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LogEntry {
    #[serde(with = "crate::rational_strings")]
    pub omega: Vec<Rational>,
    pub response: Response,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct ReconstructSettings {
    /// Perturbed retries per direction that does not expose a vertex.
    pub retries: usize,
    pub max_queries: usize,
}

impl Default for ReconstructSettings {
    fn default() -> Self {
        Self { retries: 5, max_queries: 4000 }
    }
}

#[derive(Debug, Error)]
pub enum ReconstructError {
    #[error("oracle failed at direction {omega:?}: {message}")]
    Oracle { omega: Vec<Rational>, message: String },
    #[error("no vertex exposed near direction {omega:?} after {attempts} attempts; last response {last:?}")]
    NoVertex { omega: Vec<i64>, attempts: usize, last: Response },
    #[error("vertex {point:?} has {found} coordinates, expected {expected}")]
    Dimension { point: Vec<i64>, found: usize, expected: usize },
    #[error("vertex {point:?} is off the hyperplane |x| = {degree}")]
    OffHyperplane { point: Vec<i64>, degree: i64 },
    #[error("inconsistent oracle: {point:?} exceeds the maximum {bound} certified for direction {omega:?}")]
    InconsistentOracle { omega: Vec<i64>, point: Vec<i64>, bound: i64 },
    #[error("query budget of {0} exhausted")]
    Budget(usize),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Reconstruction {
    pub polytope: LatticePolytope,
    pub log: Vec<LogEntry>,
}

/// Largest entry of a perturbation vector.
const PERTURBATION: i64 = 3;

fn is_prime(p: i64) -> bool {
    p >= 2 && (2..).take_while(|k| k * k <= p).all(|k| p % k != 0)
}

/// Primes exceeding `bound`, in increasing order.
fn primes_above(bound: i64) -> impl Iterator<Item = i64> {
    (bound + 1..).filter(|&p| is_prime(p))
}

fn pairing(omega: &[i64], x: &[i64]) -> i128 {
    dot(omega, &x[..omega.len()])
}

struct Reconstructor<'a, F> {
    oracle: F,
    n: usize,
    degree: i64,
    settings: &'a ReconstructSettings,
    log: Vec<LogEntry>,
    /// Exposed vertex for each primitive direction already resolved.
    answers: BTreeMap<Vec<i64>, Vec<i64>>,
    perturbations: u64,
}

impl<F> Reconstructor<'_, F>
where
    F: FnMut(&[Rational]) -> Result<Response, String>,
{
    fn ask(&mut self, omega: &[i64]) -> Result<Response, ReconstructError> {
        if self.log.len() >= self.settings.max_queries {
            return Err(ReconstructError::Budget(self.settings.max_queries));
        }
        let q = to_rational(omega);
        let response = (self.oracle)(&q).map_err(|message| ReconstructError::Oracle { omega: q.clone(), message })?;
        self.log.push(LogEntry { omega: q, response: response.clone() });
        Ok(response)
    }

    fn check_point(&self, point: &[i64]) -> Result<(), ReconstructError> {
        if point.len() != self.n + 1 {
            return Err(ReconstructError::Dimension {
                point: point.to_vec(),
                found: point.len(),
                expected: self.n + 1,
            });
        }
        if point.iter().sum::<i64>() != self.degree || point.iter().any(|&v| v < 0) {
            return Err(ReconstructError::OffHyperplane { point: point.to_vec(), degree: self.degree });
        }
        Ok(())
    }

    /// Perturbation vector in `[-R, R]^n` with `R = PERTURBATION`, varying with each use.
    fn perturbation(&mut self) -> Vec<i64> {
        self.perturbations += 1;
        let mut state = self.perturbations.wrapping_mul(0x9E37_79B9_7F4A_7C15);
        (0..self.n)
            .map(|_| {
                state ^= state >> 31;
                state = state.wrapping_mul(0xBF58_476D_1CE4_E5B9);
                ((state >> 33) % (2 * PERTURBATION as u64 + 1)) as i64 - PERTURBATION
            })
            .collect()
    }

    /// A vertex of the face exposed by `omega`. Directions that do not expose
    /// a vertex are replaced by `p ω + r` with `r ∈ [-R, R]^n` and a prime
    /// `p > 2dR`, which exposes a vertex of the same face whenever it exposes one.
    fn vertex_for(&mut self, omega: &[i64]) -> Result<Vec<i64>, ReconstructError> {
        let omega = primitive_direction(&to_rational(omega));
        if let Some(v) = self.answers.get(&omega) {
            return Ok(v.clone());
        }
        let mut query = omega.clone();
        let mut primes = primes_above(2 * self.degree * PERTURBATION);
        let mut last = Response::Eep;
        for _ in 0..=self.settings.retries {
            match self.ask(&query)? {
                Response::Vertex { point } => {
                    self.check_point(&point)?;
                    self.answers.insert(omega, point.clone());
                    return Ok(point);
                }
                other => last = other,
            }
            let p = primes.next().unwrap_or(i64::MAX);
            let r = self.perturbation();
            query = omega.iter().zip(&r).map(|(w, s)| p * w + s).collect();
        }
        Err(ReconstructError::NoVertex { omega, attempts: self.settings.retries + 1, last })
    }

    /// Every resolved direction must remain maximized by its answer.
    fn check_consistency(&self, points: &[Vec<i64>]) -> Result<(), ReconstructError> {
        for (omega, v) in &self.answers {
            let bound = pairing(omega, v);
            if let Some(x) = points.iter().find(|x| pairing(omega, x) > bound) {
                return Err(ReconstructError::InconsistentOracle {
                    omega: omega.clone(),
                    point: x.clone(),
                    bound: bound as i64,
                });
            }
        }
        Ok(())
    }

    fn run(mut self) -> Result<Reconstruction, ReconstructError> {
        let n = self.n;
        let mut probes: Vec<Vec<i64>> = Vec::new();
        for i in 0..n {
            for s in [1, -1] {
                let mut e = vec![0; n];
                e[i] = s;
                probes.push(e);
            }
        }
        probes.push(vec![1; n]);
        probes.push(vec![-1; n]);
        let mut points: Vec<Vec<i64>> = Vec::new();
        for w in &probes {
            let v = self.vertex_for(w)?;
            if !points.contains(&v) {
                points.push(v);
            }
        }
        loop {
            self.check_consistency(&points)?;
            let hull = Hull::new(&points);
            let mut functionals: Vec<(Vec<i64>, i128)> = Vec::new();
            for (c, e) in hull.span().equations() {
                functionals.push((c.clone(), *e as i128));
                functionals.push((c.iter().map(|v| -v).collect(), -(*e as i128)));
            }
            for f in hull.facets() {
                functionals.push((f.normal.clone(), f.offset as i128));
            }
            let mut added = false;
            for (w, offset) in functionals {
                let omega: Vec<i64> = w[..n].iter().map(|x| x - w[n]).collect();
                if omega.iter().all(|&x| x == 0) {
                    continue;
                }
                let v = self.vertex_for(&omega)?;
                let value = dot(&w, &v);
                if value > offset {
                    if !points.contains(&v) {
                        points.push(v);
                        added = true;
                    }
                } else if value < offset {
                    let omega = primitive_direction(&to_rational(&omega));
                    let top = points.iter().max_by_key(|x| dot(&w, x)).cloned().unwrap_or_default();
                    let bound = pairing(&omega, &v) as i64;
                    return Err(ReconstructError::InconsistentOracle { omega, point: top, bound });
                }
            }
            if !added {
                self.check_consistency(&points)?;
                let vertices = hull.vertices();
                let polytope = LatticePolytope::new(vertices).expect("a hull has vertices");
                return Ok(Reconstruction { polytope, log: self.log });
            }
        }
    }
}

/// Recovers the vertex set of a homogenized Newton polytope in `ℤ^{n+1}` of
/// degree `degree` from an oracle mapping directions `ω ∈ ℚ^n` to answers.
///
/// Span equations are certified by querying both signs, facets by querying
/// their outer normals; the loop ends when no query finds a point beyond the
/// current hull.
pub fn reconstruct_polytope<F>(
    oracle: F,
    n: usize,
    degree: u32,
    settings: &ReconstructSettings,
) -> Result<Reconstruction, ReconstructError>
where
    F: FnMut(&[Rational]) -> Result<Response, String>,
{
    Reconstructor {
        oracle,
        n,
        degree: degree as i64,
        settings,
        log: Vec::new(),
        answers: BTreeMap::new(),
        perturbations: 0,
    }
    .run()
}
