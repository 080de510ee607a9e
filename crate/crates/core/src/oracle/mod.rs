//! The homotopy-continuation oracle: for a direction `ω`, tracks the witness
//! points of a hypersurface along `ℓ_t(s) = t^ω(a s − b)` as `t → ∞` and counts
//! where they end up.
//!
//! Paths converging to target `γ_i = b_i / a_i` contribute to `β_i`, diverging
//! paths to `β_∞`, and paths converging elsewhere to `other`. When no path
//! moves the restriction is independent of `t` and the answer is
//! [`OracleOutcome::Eep`].

mod export;
mod system;

use std::f64::consts::PI;

use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::{random_unit_complex, ComplexMatrix, LinalgError, LinearSlice};
use crate::poly::{LineFamily, LineFamilyError};
use crate::tracker::{track_path, TrackSettings};
use crate::witness::{move_slice, WitnessError, WitnessSet, RESLICE_RETRIES};
use crate::Rational;

pub use export::{svg_frames, trace_document, TraceDocument};
use system::{Chart, OracleHomotopy, OracleSystem};

/// Total displacement over the first `min_tracks` steps below which a path is frozen.
pub const FROZEN_TOL: f64 = 1e-8;
/// Modulus beyond which a fast-moving path counts as diverging.
pub const DIVERGENCE_MODULUS: f64 = 1e6;
/// Shortest chunk, as a fraction of one oracle step, before a path is given up.
pub const MIN_CHUNK: f64 = 1.0 / 4096.0;
/// Distance to a target below which a path is held fixed; closer approach is
/// below double precision resolution.
pub const AT_TARGET: f64 = 1e-12;
/// Tolerance for start points lying on the first line of the family.
pub const START_TOL: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error(transparent)]
    Witness(#[from] WitnessError),
    #[error(transparent)]
    LineFamily(#[from] LineFamilyError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("invalid oracle settings: {0}")]
    Settings(String),
    #[error("direction has {found} entries, expected {expected}")]
    Dimension { found: usize, expected: usize },
    #[error("could not move the witness set onto the first line: {0}")]
    StartPoints(String),
}

/// Decision thresholds of the oracle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct OracleSettings {
    /// Decisions require the step derivative below `10^-c` (or above `10^c`).
    pub certainty: f64,
    /// Radius of the target discs.
    pub epsilon: f64,
    /// Steps taken before any decision.
    pub min_tracks: usize,
    /// Steps after which an undecided path makes the answer inconclusive.
    pub max_tracks: usize,
    /// Ratio `t_{k+1} / t_k`.
    pub step_resolution: f64,
}

impl Default for OracleSettings {
    fn default() -> Self {
        Self { certainty: 3.0, epsilon: 0.05, min_tracks: 5, max_tracks: 400, step_resolution: 1.2 }
    }
}

impl OracleSettings {
    pub fn validate(&self, targets: &[Complex64]) -> Result<(), OracleError> {
        let bad = |m: &str| Err(OracleError::Settings(m.into()));
        if !(self.certainty > 0.0 && self.certainty.is_finite()) {
            return bad("certainty must be positive");
        }
        if !(self.step_resolution > 1.0 && self.step_resolution.is_finite()) {
            return bad("step resolution must exceed 1");
        }
        if self.min_tracks < 2 || self.max_tracks <= self.min_tracks {
            return bad("need 2 <= min tracks < max tracks");
        }
        let sep = min_separation(targets);
        if !(self.epsilon > 0.0 && 2.0 * self.epsilon < sep) {
            return Err(OracleError::Settings(format!(
                "epsilon {} must be positive and below half the target separation {sep:.3}",
                self.epsilon
            )));
        }
        Ok(())
    }
}

fn min_separation(targets: &[Complex64]) -> f64 {
    let mut sep = f64::INFINITY;
    for i in 0..targets.len() {
        for j in i + 1..targets.len() {
            sep = sep.min((targets[i] - targets[j]).norm());
        }
    }
    sep
}

/// How the line family's `a` and `b` are chosen.
#[derive(Clone, Debug, PartialEq)]
pub enum TargetChoice {
    /// Targets at the `n`-th roots of unity and random unit `a`.
    Default,
    /// The given targets and random unit `a`.
    Targets(Vec<Complex64>),
    /// Fully specified `a` and `b`.
    Explicit { a: Vec<Complex64>, b: Vec<Complex64> },
}

/// `n`-th roots of unity `exp(2πi k / n)`.
pub fn default_targets(n: usize) -> Vec<Complex64> {
    (0..n).map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / n as f64)).collect()
}

/// Where a tracked path ended up.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum PathVerdict {
    ToTarget { index: usize },
    ToOther { point: Complex64 },
    Diverged,
    Frozen,
    Undecided { reason: String },
}

/// One observation of a path: `log t`, the parameter `s`, and the step derivative.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TraceSample {
    pub log_t: f64,
    pub s: Complex64,
    pub derivative: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PathTrace {
    pub index: usize,
    pub samples: Vec<TraceSample>,
    pub verdict: PathVerdict,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "tag", rename_all = "lowercase")]
pub enum OracleOutcome {
    Counts {
        beta: Vec<usize>,
        #[serde(rename = "betaInf")]
        beta_inf: usize,
        other: usize,
        vertex: bool,
    },
    Eep,
    Inconclusive {
        reason: String,
    },
}

impl OracleOutcome {
    pub fn is_decisive(&self) -> bool {
        !matches!(self, Self::Inconclusive { .. })
    }

    /// The homogenized lattice point `(β, β_∞)` of a vertex answer.
    pub fn vertex_point(&self) -> Option<Vec<i64>> {
        match self {
            Self::Counts { beta, beta_inf, vertex: true, .. } => {
                Some(beta.iter().chain(std::iter::once(beta_inf)).map(|&v| v as i64).collect())
            }
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleAnswer {
    pub outcome: OracleOutcome,
    pub traces: Vec<PathTrace>,
    /// Largest number of oracle steps taken by any path.
    pub steps: usize,
    /// The direction as queried.
    pub omega: Vec<Rational>,
}

/// Everything needed to answer queries for one witness set and line family.
#[derive(Clone, Debug)]
pub struct OracleContext {
    witness: WitnessSet,
    system: OracleSystem,
    a: Vec<Complex64>,
    b: Vec<Complex64>,
    starts: Vec<Vec<Complex64>>,
    track: TrackSettings,
}

/// Moves the witness set onto the line `a s − b` and records the start points.
pub fn build_oracle<R: Rng + ?Sized>(
    witness: &WitnessSet,
    choice: &TargetChoice,
    track: &TrackSettings,
    rng: &mut R,
) -> Result<OracleContext, OracleError> {
    let n = witness.image_dim();
    let (a, b) = match choice {
        TargetChoice::Default => family_with_targets(&default_targets(n), rng),
        TargetChoice::Targets(g) => family_with_targets(g, rng),
        TargetChoice::Explicit { a, b } => (a.clone(), b.clone()),
    };
    let family = LineFamily::new(vec![Rational::zero(); n], a, b)?;
    if family.dim() != n {
        return Err(OracleError::Dimension { found: family.dim(), expected: n });
    }
    let (a, b) = (family.a().to_vec(), family.b().to_vec());
    let slice = first_line(&a, &b)?;
    let mut last = None;
    let mut moved = None;
    for _ in 0..RESLICE_RETRIES {
        match move_slice(witness, &slice, track, rng) {
            Ok(w) => {
                moved = Some(w);
                break;
            }
            Err(e) => last = Some(e),
        }
    }
    let moved = moved.ok_or_else(|| OracleError::StartPoints(last.map(|e| e.to_string()).unwrap_or_default()))?;
    let kept = moved.projection().to_vec();
    let dropped: Vec<usize> = (0..moved.system().nvars()).filter(|i| !kept.contains(i)).collect();
    let norm: f64 = a.iter().map(|v| v.norm_sqr()).sum();
    let mut starts = Vec::with_capacity(moved.degree());
    for p in moved.points() {
        let y = moved.project(p);
        let s = a.iter().zip(&y).zip(&b).map(|((ai, yi), bi)| ai.conj() * (yi + bi)).sum::<Complex64>() / norm;
        let scale = 1.0 + y.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let off = a.iter().zip(&b).zip(&y).map(|((ai, bi), yi)| (ai * s - bi - yi).norm()).fold(0.0, f64::max);
        if off > START_TOL * scale {
            return Err(OracleError::StartPoints(format!("witness point is {off:.2e} off the first line")));
        }
        let mut x = vec![s];
        x.extend(dropped.iter().map(|&j| p[j]));
        starts.push(x);
    }
    let system = OracleSystem::new(moved.system(), &kept, &dropped);
    let mut oracle_track = track.clone();
    oracle_track.divergence_threshold = f64::INFINITY;
    oracle_track.max_step = 1.0;
    oracle_track.initial_step = 0.25;
    Ok(OracleContext { witness: moved, system, a, b, starts, track: oracle_track })
}

fn family_with_targets<R: Rng + ?Sized>(gamma: &[Complex64], rng: &mut R) -> (Vec<Complex64>, Vec<Complex64>) {
    let a: Vec<Complex64> = gamma.iter().map(|_| random_unit_complex(rng)).collect();
    let b = a.iter().zip(gamma).map(|(ai, gi)| ai * gi).collect();
    (a, b)
}

/// Rows `a_1(y_i + b_i) − a_i(y_1 + b_1)` cutting out the line `y = a s − b`.
fn first_line(a: &[Complex64], b: &[Complex64]) -> Result<LinearSlice, LinalgError> {
    let n = a.len();
    let mut coeffs = ComplexMatrix::zeros(n - 1, n + 1);
    for i in 1..n {
        let row = coeffs.row_mut(i - 1);
        row[0] = -a[i];
        row[i] = a[0];
        row[n] = a[0] * b[i] - a[i] * b[0];
    }
    LinearSlice::new(coeffs)
}

/// `ω` scaled to a primitive integer vector.
pub fn primitive_direction(omega: &[Rational]) -> Vec<i64> {
    let lcm = omega.iter().fold(1i64, |acc, w| acc.lcm(w.denom()));
    let ints: Vec<i64> = omega.iter().map(|w| (w * lcm).to_integer()).collect();
    let g = ints.iter().fold(0i64, |acc, v| acc.gcd(v));
    if g == 0 {
        ints
    } else {
        ints.iter().map(|v| v / g).collect()
    }
}

struct PathRun {
    trace: PathTrace,
    displacement: f64,
    steps: usize,
}

impl OracleContext {
    pub fn witness(&self) -> &WitnessSet {
        &self.witness
    }

    pub fn degree(&self) -> usize {
        self.starts.len()
    }

    pub fn dim(&self) -> usize {
        self.a.len()
    }

    pub fn a(&self) -> &[Complex64] {
        &self.a
    }

    pub fn b(&self) -> &[Complex64] {
        &self.b
    }

    pub fn targets(&self) -> Vec<Complex64> {
        self.a.iter().zip(&self.b).map(|(a, b)| b / a).collect()
    }

    /// Parameters `s` of the witness points on the first line.
    pub fn start_parameters(&self) -> Vec<Complex64> {
        self.starts.iter().map(|x| x[0]).collect()
    }

    /// Answers one query. Paths are tracked in parallel; the result does not
    /// depend on scheduling.
    pub fn query(&self, omega: &[Rational], settings: &OracleSettings) -> Result<OracleAnswer, OracleError> {
        let n = self.dim();
        if omega.len() != n {
            return Err(OracleError::Dimension { found: omega.len(), expected: n });
        }
        let targets = self.targets();
        settings.validate(&targets)?;
        let prim = primitive_direction(omega);
        let d = self.degree().max(1) as i64;
        let eff: Vec<f64> = prim.iter().map(|&p| (p * d) as f64).collect();
        // log t of the original direction per unit of u.
        let lambda = omega
            .iter()
            .zip(&eff)
            .find(|(w, _)| !w.is_zero())
            .map(|(w, e)| e / w.to_f64().unwrap_or(1.0))
            .unwrap_or(1.0);
        let weights = self.system.weights(&eff);
        let runs: Vec<PathRun> = (0..self.degree())
            .into_par_iter()
            .map(|i| self.run_path(i, &weights, lambda, &targets, settings))
            .collect();
        let steps = runs.iter().map(|r| r.steps).max().unwrap_or(0);
        let mut traces: Vec<PathTrace> = runs.iter().map(|r| r.trace.clone()).collect();
        let outcome = if let Some(reason) = traces.iter().find_map(|t| match &t.verdict {
            PathVerdict::Undecided { reason } => Some(format!("path {}: {reason}", t.index)),
            _ => None,
        }) {
            OracleOutcome::Inconclusive { reason }
        } else if runs.iter().all(|r| r.displacement < FROZEN_TOL) {
            for t in &mut traces {
                t.verdict = PathVerdict::Frozen;
            }
            OracleOutcome::Eep
        } else {
            let mut beta = vec![0; n];
            let (mut beta_inf, mut other) = (0, 0);
            for t in &traces {
                match t.verdict {
                    PathVerdict::ToTarget { index } => beta[index] += 1,
                    PathVerdict::Diverged => beta_inf += 1,
                    _ => other += 1,
                }
            }
            OracleOutcome::Counts { beta, beta_inf, other, vertex: other == 0 }
        };
        Ok(OracleAnswer { outcome, traces, steps, omega: omega.to_vec() })
    }

    fn run_path(
        &self,
        index: usize,
        weights: &[Vec<f64>],
        lambda: f64,
        targets: &[Complex64],
        settings: &OracleSettings,
    ) -> PathRun {
        let du = settings.step_resolution.ln();
        let conv_tol = 10f64.powf(-settings.certainty);
        let div_tol = 10f64.powf(settings.certainty);
        let radius = 0.25 * min_separation(targets).min(4.0);
        let mut s = self.starts[index][0];
        let mut z: Vec<Complex64> = self.starts[index][1..].to_vec();
        let mut log_scale = vec![0.0; z.len()];
        let mut chunk = du;
        let mut samples = vec![TraceSample { log_t: 0.0, s, derivative: 0.0 }];
        let (mut conv, mut div, mut displacement) = (0, 0, 0.0);
        let mut verdict = None;
        let mut steps = 0;
        for k in 1..=settings.max_tracks {
            steps = k;
            let s_prev = s;
            let failure = self.advance(
                &mut s,
                &mut z,
                &mut log_scale,
                &mut chunk,
                (weights, radius),
                ((k - 1) as f64 * du, k as f64 * du),
            );
            if let Some(reason) = failure {
                // A path that already met a decision rule keeps that verdict when
                // the numerics give out. Paths escaping fast enough to overflow
                // the tracker count as diverged after one divergent step.
                verdict = Some(if conv >= 2 {
                    self.classify(s_prev, targets, settings.epsilon)
                } else if div >= 1 {
                    PathVerdict::Diverged
                } else {
                    PathVerdict::Undecided { reason: format!("tracking failed at step {k} ({reason})") }
                });
                break;
            }
            let ds = (s - s_prev).norm();
            let deriv = ds / du;
            if k <= settings.min_tracks {
                displacement += ds;
            }
            samples.push(TraceSample { log_t: lambda * k as f64 * du, s, derivative: deriv });
            conv = if deriv < conv_tol { conv + 1 } else { 0 };
            div = if s.norm() > DIVERGENCE_MODULUS && deriv > div_tol { div + 1 } else { 0 };
            if k < settings.min_tracks {
                continue;
            }
            if conv >= 2 {
                verdict = Some(self.classify(s, targets, settings.epsilon));
                break;
            }
            if div >= 2 {
                verdict = Some(PathVerdict::Diverged);
                break;
            }
        }
        let verdict = verdict.unwrap_or_else(|| PathVerdict::Undecided {
            reason: format!("no decision after {} steps", settings.max_tracks),
        });
        PathRun { trace: PathTrace { index, samples, verdict }, displacement, steps }
    }

    /// Tracks one oracle step `[u0, u1]` in chunks, re-centring the chart and
    /// rescaling the dropped coordinates between chunks. Returns a failure
    /// description if the chunk length collapses. A path resting on a target
    /// is left in place.
    fn advance(
        &self,
        s: &mut Complex64,
        z: &mut [Complex64],
        log_scale: &mut [f64],
        chunk: &mut f64,
        (weights, radius): (&[Vec<f64>], f64),
        (u0, u1): (f64, f64),
    ) -> Option<String> {
        let full = u1 - u0;
        let mut u = u0;
        while u < u1 {
            if self.a.iter().zip(&self.b).any(|(a, b)| (*s - b / a).norm() < AT_TARGET) {
                return None;
            }
            let len = chunk.min(u1 - u);
            for (zj, ls) in z.iter_mut().zip(log_scale.iter_mut()) {
                let m = zj.norm();
                if m.is_finite() && m > 0.0 && !(0.5..=2.0).contains(&m) {
                    *ls += m.ln();
                    *zj /= m;
                }
            }
            let chart = Chart::around(*s, &self.a, &self.b, radius);
            let h = OracleHomotopy { system: &self.system, weights, chart: &chart, log_scale, u0: u, u1: u + len };
            let mut x = vec![chart.to_local(*s)];
            x.extend_from_slice(z);
            let r = track_path(&h, &x, &self.track);
            if !r.is_success() {
                *chunk = len / 4.0;
                if *chunk < full * MIN_CHUNK {
                    return Some(format!(
                        "{:?} near u = {:.3}, residual {:.1e}",
                        r.status, r.final_tau, r.final_residual
                    ));
                }
                continue;
            }
            // The endpoint is only accurate relative to the chart scale, so a
            // chunk that moves far in chart units or closes in on a target
            // is redone in shorter pieces.
            let moved_far = x.iter().zip(&r.endpoint).any(|(a, b)| {
                let ratio = b.norm() / a.norm();
                a.norm() > 0.0 && !(0.25..=4.0).contains(&ratio)
            });
            let end = chart.to_global(r.endpoint[0]);
            let approach = self
                .a
                .iter()
                .zip(&self.b)
                .map(|(a, b)| (end - b / a).norm() / (*s - b / a).norm())
                .fold(f64::INFINITY, f64::min);
            if (moved_far || approach < 0.25) && len > full * MIN_CHUNK {
                *chunk = len / 2.0;
                continue;
            }
            *s = end;
            z.copy_from_slice(&r.endpoint[1..]);
            u += len;
            if *chunk < full {
                *chunk = (*chunk * 2.0).min(full);
            }
        }
        None
    }

    fn classify(&self, s: Complex64, targets: &[Complex64], epsilon: f64) -> PathVerdict {
        match targets.iter().position(|g| (s - g).norm() < epsilon) {
            Some(i) => PathVerdict::ToTarget { index: i },
            None => PathVerdict::ToOther { point: s },
        }
    }
}

/// Convenience wrapper: build a context with the default targets and answer one query.
pub fn query_oracle<R: Rng + ?Sized>(
    witness: &WitnessSet,
    omega: &[Rational],
    settings: &OracleSettings,
    track: &TrackSettings,
    rng: &mut R,
) -> Result<OracleAnswer, OracleError> {
    build_oracle(witness, &TargetChoice::Default, track, rng)?.query(omega, settings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::seeded_rng;
    use crate::poly::{parse_polynomial, PolySystem};
    use crate::witness::{witness_for_hypersurface, witness_for_projection};

    fn r(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| Rational::from_integer(x)).collect()
    }

    fn hypersurface(text: &str, seed: u64) -> OracleContext {
        let names = vec!["x".to_string(), "y".to_string()];
        let f = parse_polynomial(text, &names).unwrap();
        let mut rng = seeded_rng(seed, 0);
        let w = witness_for_hypersurface(&f, names, &mut rng).unwrap();
        build_oracle(&w, &TargetChoice::Default, &TrackSettings::default(), &mut rng).unwrap()
    }

    fn counts(ans: &OracleAnswer) -> (Vec<usize>, usize, usize) {
        match &ans.outcome {
            OracleOutcome::Counts { beta, beta_inf, other, .. } => (beta.clone(), *beta_inf, *other),
            o => panic!("expected counts, got {o:?}"),
        }
    }

    #[test]
    fn primitive_directions() {
        let w = vec![Rational::new(3, 2), Rational::new(-3, 4)];
        assert_eq!(primitive_direction(&w), vec![2, -1]);
        assert_eq!(primitive_direction(&r(&[0, 0])), vec![0, 0]);
        assert_eq!(primitive_direction(&r(&[6, 4])), vec![3, 2]);
    }

    #[test]
    fn parabola_directions() {
        let ctx = hypersurface("x^2+y+1", 3);
        let s = OracleSettings::default();
        assert_eq!(counts(&ctx.query(&r(&[-1, 0]), &s).unwrap()), (vec![0, 0], 1, 1));
        assert_eq!(counts(&ctx.query(&r(&[1, 0]), &s).unwrap()), (vec![2, 0], 0, 0));
    }

    #[test]
    fn homogeneous_quadric_is_eep_along_diagonal() {
        let ctx = hypersurface("x^2+y^2", 5);
        let ans = ctx.query(&r(&[1, 1]), &OracleSettings::default()).unwrap();
        assert_eq!(ans.outcome, OracleOutcome::Eep);
        assert!(ans.traces.iter().all(|t| t.verdict == PathVerdict::Frozen));
    }

    #[test]
    fn zero_direction_is_eep() {
        let ctx = hypersurface("x^3+x*y+2*y^2+1", 9);
        assert_eq!(ctx.query(&r(&[0, 0]), &OracleSettings::default()).unwrap().outcome, OracleOutcome::Eep);
    }

    #[test]
    fn example_one_vertex() {
        let s = PolySystem::parse(&["x", "y", "t"], &["x*y*t-(x-y-t)^2+3*x+t", "x+y^2+t^2"]).unwrap();
        let mut rng = seeded_rng(1, 0);
        let w = witness_for_projection(&s, &[2], &TrackSettings::default(), &mut rng).unwrap();
        let ctx = build_oracle(&w, &TargetChoice::Default, &TrackSettings::default(), &mut rng).unwrap();
        let ans = ctx.query(&r(&[3, 2]), &OracleSettings::default()).unwrap();
        assert_eq!(counts(&ans), (vec![2, 4], 0, 0));
        assert_eq!(ans.outcome.vertex_point(), Some(vec![2, 4, 0]));
    }

    #[test]
    fn settings_validation() {
        let g = default_targets(2);
        assert!(OracleSettings::default().validate(&g).is_ok());
        let bad = OracleSettings { epsilon: 1.5, ..Default::default() };
        assert!(bad.validate(&g).is_err());
        let bad = OracleSettings { step_resolution: 1.0, ..Default::default() };
        assert!(bad.validate(&g).is_err());
        let bad = OracleSettings { min_tracks: 10, max_tracks: 10, ..Default::default() };
        assert!(bad.validate(&g).is_err());
    }
}
