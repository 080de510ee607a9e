//! Membership of a direction in the tropical variety of an ideal, decided by
//! querying the oracle on every coordinate projection that is a hypersurface.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::numerics::seeded_rng;
use crate::oracle::{build_oracle, OracleError, OracleOutcome, OracleSettings, PathTrace, TargetChoice};
use crate::poly::{IntMatrix, MonomialMapError, PolyError, PolySystem};
use crate::tracker::TrackSettings;
use crate::witness::{largest_image, witness_for_hypersurface, witness_for_projection, WitnessError};
use crate::Rational;

const DIMENSION_STREAM: u64 = 1;
const MAP_STREAM: u64 = 2;
const PROJECTION_STREAM: u64 = 1000;

#[derive(Debug, Error)]
pub enum TropicalError {
    #[error("direction has {found} entries, expected {expected}")]
    Direction { found: usize, expected: usize },
    #[error("the variety has dimension {dim} in {ambient} variables; membership needs 0 < dim < {ambient}")]
    Dimension { dim: usize, ambient: usize },
    #[error("no coordinate projection of the variety is a hypersurface")]
    NoHypersurface,
    #[error(transparent)]
    MonomialMap(#[from] MonomialMapError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Witness(#[from] WitnessError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

/// Optional monomial change of coordinates applied before projecting.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub enum MonomialMap {
    #[default]
    None,
    Random,
    Given(IntMatrix),
}

#[derive(Clone, Debug, PartialEq)]
pub struct MembershipSettings {
    pub oracle: OracleSettings,
    pub track: TrackSettings,
    /// Oracle rebuilds per projection before a query counts as inconclusive.
    pub attempts: usize,
}

impl Default for MembershipSettings {
    fn default() -> Self {
        Self { oracle: OracleSettings::default(), track: TrackSettings::default(), attempts: 3 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ProjectionAnswer {
    pub kept: Vec<usize>,
    #[serde(with = "crate::rational_strings")]
    pub projected_direction: Vec<Rational>,
    pub degree: usize,
    pub outcome: OracleOutcome,
    pub steps: usize,
    pub attempts: usize,
    #[serde(skip)]
    pub traces: Vec<PathTrace>,
}

impl ProjectionAnswer {
    /// Whether the query exposed a positive-dimensional face.
    pub fn positive_dimensional(&self) -> Option<bool> {
        match &self.outcome {
            OracleOutcome::Counts { other, .. } => Some(*other > 0),
            OracleOutcome::Eep => Some(true),
            OracleOutcome::Inconclusive { .. } => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SkippedProjection {
    pub kept: Vec<usize>,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct FailedProjection {
    pub kept: Vec<usize>,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MembershipReport {
    #[serde(with = "crate::rational_strings")]
    pub omega: Vec<Rational>,
    pub transformed: bool,
    pub matrix: Vec<Vec<i64>>,
    #[serde(with = "crate::rational_strings")]
    pub transformed_omega: Vec<Rational>,
    pub dimension: usize,
    pub per_projection: Vec<ProjectionAnswer>,
    pub skipped: Vec<SkippedProjection>,
    /// `None` when some projection was inconclusive.
    pub verdict: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inconclusive: Option<FailedProjection>,
    pub seed: u64,
}

/// Subsets of `0..n` of size `k` in lexicographic order.
pub fn coordinate_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if k <= n {
        go(0, n, k, &mut Vec::with_capacity(k), &mut out);
    }
    out
}

enum Job {
    Answered(ProjectionAnswer),
    Skipped(SkippedProjection),
    Failed(FailedProjection),
}

/// Decides whether `omega` lies in the tropical variety of `V(system)` by
/// querying every coordinate projection whose image is a hypersurface.
pub fn tropical_membership(
    system: &PolySystem,
    omega: &[Rational],
    settings: &MembershipSettings,
    map: &MonomialMap,
    seed: u64,
) -> Result<MembershipReport, TropicalError> {
    let n = system.nvars();
    if omega.len() != n {
        return Err(TropicalError::Direction { found: omega.len(), expected: n });
    }
    let matrix = match map {
        MonomialMap::None => None,
        MonomialMap::Random => Some(IntMatrix::random_unimodular(n, &mut seeded_rng(seed, MAP_STREAM))),
        MonomialMap::Given(a) => Some(a.clone()),
    };
    let (system, direction) = match &matrix {
        Some(a) => {
            let polys = system.polys().iter().map(|f| a.apply(f)).collect::<Result<Vec<_>, _>>()?;
            (system.with_polys(polys)?, a.transform_direction(omega)?)
        }
        None => (system.clone(), omega.to_vec()),
    };
    let single = system.len() == 1 && system.polys()[0].degree() > 0;
    let dim = if single {
        n - 1
    } else {
        let all: Vec<usize> = (0..n).collect();
        let (dims, _) = largest_image(&system, &all, &settings.track, &mut seeded_rng(seed, DIMENSION_STREAM))?;
        dims.dim_x
    };
    if dim == 0 || dim >= n {
        return Err(TropicalError::Dimension { dim, ambient: n });
    }
    let subsets = coordinate_subsets(n, dim + 1);
    let jobs: Vec<Job> = subsets
        .par_iter()
        .enumerate()
        .map(|(i, kept)| run_projection(&system, kept, &direction, settings, single, seed, i as u64))
        .collect();

    let mut report = MembershipReport {
        omega: omega.to_vec(),
        transformed: matrix.is_some(),
        matrix: matrix.unwrap_or_else(|| IntMatrix::identity(n)).rows(),
        transformed_omega: direction,
        dimension: dim,
        per_projection: Vec::new(),
        skipped: Vec::new(),
        verdict: None,
        inconclusive: None,
        seed,
    };
    for job in jobs {
        match job {
            Job::Answered(a) => {
                if report.inconclusive.is_none() {
                    if let OracleOutcome::Inconclusive { reason } = &a.outcome {
                        report.inconclusive = Some(FailedProjection { kept: a.kept.clone(), reason: reason.clone() });
                    }
                }
                report.per_projection.push(a);
            }
            Job::Skipped(s) => report.skipped.push(s),
            Job::Failed(f) => {
                if report.inconclusive.is_none() {
                    report.inconclusive = Some(f);
                }
            }
        }
    }
    if report.per_projection.is_empty() && report.inconclusive.is_none() {
        return Err(TropicalError::NoHypersurface);
    }
    if report.inconclusive.is_none() {
        report.verdict = Some(report.per_projection.iter().all(|a| a.positive_dimensional() == Some(true)));
    }
    Ok(report)
}

fn run_projection(
    system: &PolySystem,
    kept: &[usize],
    direction: &[Rational],
    settings: &MembershipSettings,
    single: bool,
    seed: u64,
    index: u64,
) -> Job {
    let mut rng = seeded_rng(seed, PROJECTION_STREAM + index);
    let drop: Vec<usize> = (0..system.nvars()).filter(|i| !kept.contains(i)).collect();
    let witness = if single && drop.is_empty() {
        witness_for_hypersurface(&system.polys()[0], system.variable_names().to_vec(), &mut rng)
    } else {
        witness_for_projection(system, &drop, &settings.track, &mut rng)
    };
    let failed = |reason: String| Job::Failed(FailedProjection { kept: kept.to_vec(), reason });
    let witness = match witness {
        Ok(w) => w,
        Err(WitnessError::Dimension { found, .. }) => {
            return Job::Skipped(SkippedProjection {
                kept: kept.to_vec(),
                reason: format!("image has dimension {found}"),
            })
        }
        Err(e) => return failed(e.to_string()),
    };
    let projected: Vec<Rational> = kept.iter().map(|&k| direction[k]).collect();
    let mut last = String::new();
    for attempt in 1..=settings.attempts.max(1) {
        let answer = build_oracle(&witness, &TargetChoice::Default, &settings.track, &mut rng)
            .and_then(|ctx| ctx.query(&projected, &settings.oracle));
        match answer {
            Ok(ans) => {
                let done = ans.outcome.is_decisive() || attempt == settings.attempts.max(1);
                if done {
                    return Job::Answered(ProjectionAnswer {
                        kept: kept.to_vec(),
                        projected_direction: projected,
                        degree: witness.degree(),
                        outcome: ans.outcome,
                        steps: ans.steps,
                        attempts: attempt,
                        traces: ans.traces,
                    });
                }
            }
            Err(e) => last = e.to_string(),
        }
    }
    failed(last)
}
