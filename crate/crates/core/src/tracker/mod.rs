//! Predictor–corrector path tracking.
//!
//! A [`Homotopy`] is a square system `H(x, τ)` with a real parameter that runs
//! from `parameter_path().0` to `parameter_path().1`. The tracker works in the
//! normalized coordinate `σ ∈ [0, 1]`, predicts with RK4 on the Davidenko
//! equation `J dx/dσ = −∂H/∂σ`, and corrects with Newton's method.

mod homotopies;
mod total_degree;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::{norm2, norm_inf, singular_values, solve, ComplexMatrix, LinalgError};
use crate::poly::SystemEvaluator;

pub use homotopies::{LinearHomotopy, OffsetHomotopy, SliceHomotopy};
pub use total_degree::{
    cluster_points, solve_total_degree, total_degree_start, Cluster, TotalDegreeResult, CLUSTER_TOL,
};

/// Relative residual treated as exact: below this, Newton updates are noise.
pub const NOISE_FLOOR: f64 = 1e-13;
/// Newton iterations that fail to halve the update are rejected.
pub const MAX_CONTRACTION: f64 = 0.5;
/// During tracking, both the predictor error estimate and the first Newton
/// update may be at most this fraction of the predicted move.
pub const TRUST_RATIO: f64 = 0.25;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TrackSettings {
    pub initial_step: f64,
    pub min_step: f64,
    pub max_newton_iters: usize,
    pub newton_tol: f64,
    pub step_expansion: f64,
    pub step_contraction: f64,
    pub max_steps: usize,
    /// Upper bound on a step in the normalized parameter.
    pub max_step: f64,
    /// Paths whose sup norm exceeds this are reported as diverged.
    pub divergence_threshold: f64,
}

impl Default for TrackSettings {
    fn default() -> Self {
        Self {
            initial_step: 0.05,
            min_step: 1e-7,
            max_newton_iters: 5,
            newton_tol: 1e-9,
            step_expansion: 1.5,
            step_contraction: 0.5,
            max_steps: 20_000,
            max_step: 0.1,
            divergence_threshold: 1e6,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SettingsError {
    #[error("need 0 < min_step <= initial_step <= max_step")]
    Steps,
    #[error("newton_tol must be positive")]
    Tolerance,
    #[error("need step_expansion > 1 and 0 < step_contraction < 1")]
    Adaptation,
}

impl TrackSettings {
    pub fn validate(&self) -> Result<(), SettingsError> {
        if !(self.min_step > 0.0 && self.min_step <= self.initial_step && self.initial_step <= self.max_step) {
            return Err(SettingsError::Steps);
        }
        if !(self.newton_tol > 0.0) {
            return Err(SettingsError::Tolerance);
        }
        if !(self.step_expansion > 1.0 && self.step_contraction > 0.0 && self.step_contraction < 1.0) {
            return Err(SettingsError::Adaptation);
        }
        Ok(())
    }
}

/// Values and derivatives of a homotopy at one point.
#[derive(Clone, Debug)]
pub struct HomotopyEval {
    pub values: Vec<Complex64>,
    pub jacobian: ComplexMatrix,
    pub dtau: Vec<Complex64>,
    /// Per equation, the sum of absolute term values.
    pub scales: Vec<f64>,
}

impl HomotopyEval {
    pub fn new(n: usize) -> Self {
        Self {
            values: vec![Complex64::default(); n],
            jacobian: ComplexMatrix::zeros(n, n),
            dtau: vec![Complex64::default(); n],
            scales: vec![0.0; n],
        }
    }

    /// `max_i |H_i| / max(1, scale_i)`.
    pub fn relative_residual(&self) -> f64 {
        self.values.iter().zip(&self.scales).map(|(v, s)| v.norm() / s.max(1.0)).fold(0.0, f64::max)
    }
}

pub trait Homotopy: Sync {
    fn dim(&self) -> usize;
    fn evaluate(&self, x: &[Complex64], tau: f64, out: &mut HomotopyEval);
    /// Start and end values of the parameter.
    fn parameter_path(&self) -> (f64, f64);
}

/// A fixed square system seen as a homotopy that does not move.
impl Homotopy for SystemEvaluator {
    fn dim(&self) -> usize {
        self.nvars()
    }

    fn evaluate(&self, x: &[Complex64], _tau: f64, out: &mut HomotopyEval) {
        let mut buf = self.buffers();
        SystemEvaluator::evaluate(self, x, &mut buf);
        out.values.copy_from_slice(&buf.values);
        out.jacobian = ComplexMatrix::from_row_major(self.neqs(), self.nvars(), buf.jacobian);
        out.dtau.iter_mut().for_each(|v| *v = Complex64::default());
        out.scales.copy_from_slice(&buf.scales);
    }

    fn parameter_path(&self) -> (f64, f64) {
        (0.0, 0.0)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CorrectorError {
    #[error("singular Jacobian")]
    Singular,
    #[error("Newton iteration is not contracting")]
    NotContracting,
    #[error("Newton did not converge within the iteration limit")]
    MaxIterations,
    #[error("non-finite value encountered")]
    NonFinite,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NewtonOutcome {
    pub point: Vec<Complex64>,
    /// Relative residual at the last evaluated iterate.
    pub residual: f64,
    pub iterations: usize,
}

/// Solves `J Δ = −H` after scaling each row to unit max-norm.
fn newton_update(eval: &HomotopyEval) -> Result<Vec<Complex64>, CorrectorError> {
    let mut jac = eval.jacobian.clone();
    let mut rhs: Vec<Complex64> = eval.values.iter().map(|v| -v).collect();
    for i in 0..jac.nrows() {
        let s = norm_inf(jac.row(i));
        if s > 0.0 {
            jac.row_mut(i).iter_mut().for_each(|v| *v /= s);
            rhs[i] /= s;
        }
    }
    solve(&jac, &rhs).map_err(|e| match e {
        LinalgError::NonFinite => CorrectorError::NonFinite,
        _ => CorrectorError::Singular,
    })
}

const REFINE_ITERS: usize = 20;

/// Relative rounding level assumed for residuals when bounding how far
/// rounding can move a solution.
const ROUNDING_LEVEL: f64 = 10.0 * NOISE_FLOOR;

/// Radius within which rounding in the evaluation moves the solution:
/// [`ROUNDING_LEVEL`]` / σ_min(D⁻¹ J)` with `D` the row scales.
fn noise_radius(eval: &HomotopyEval) -> f64 {
    let mut jac = eval.jacobian.clone();
    for (i, s) in eval.scales.iter().enumerate() {
        let s = s.max(1.0);
        jac.row_mut(i).iter_mut().for_each(|v| *v /= s);
    }
    match singular_values(&jac).last() {
        Some(&smin) if smin > 0.0 => ROUNDING_LEVEL / smin,
        _ => f64::INFINITY,
    }
}

/// Newton's method on `H(·, τ)`.
///
/// Converges when the relative residual reaches [`NOISE_FLOOR`] or the update
/// satisfies `‖Δ‖ ≤ tol (1 + ‖x‖)` plus the rounding radius of the solution.
pub fn newton_correct<H: Homotopy + ?Sized>(
    h: &H,
    x0: &[Complex64],
    tau: f64,
    tol: f64,
    max_iters: usize,
) -> Result<NewtonOutcome, CorrectorError> {
    newton_bounded(h, x0, tau, tol, max_iters, f64::INFINITY)
}

fn newton_bounded<H: Homotopy + ?Sized>(
    h: &H,
    x0: &[Complex64],
    tau: f64,
    tol: f64,
    max_iters: usize,
    first_bound: f64,
) -> Result<NewtonOutcome, CorrectorError> {
    let mut eval = HomotopyEval::new(h.dim());
    let mut x = x0.to_vec();
    let mut prev = f64::INFINITY;
    for it in 0..=max_iters {
        h.evaluate(&x, tau, &mut eval);
        let residual = eval.relative_residual();
        if !residual.is_finite() {
            return Err(CorrectorError::NonFinite);
        }
        if residual <= NOISE_FLOOR {
            return Ok(NewtonOutcome { point: x, residual, iterations: it });
        }
        if it == max_iters {
            break;
        }
        let delta = newton_update(&eval)?;
        let nd = norm2(&delta);
        let noise = noise_radius(&eval);
        if (it == 0 && nd > first_bound) || (it > 0 && nd > MAX_CONTRACTION * prev && nd > noise) {
            return Err(CorrectorError::NotContracting);
        }
        prev = nd;
        x.iter_mut().zip(&delta).for_each(|(a, d)| *a += d);
        if nd <= tol * (1.0 + norm2(&x)) + noise {
            return Ok(NewtonOutcome { point: x, residual, iterations: it + 1 });
        }
    }
    Err(CorrectorError::MaxIterations)
}

/// Newton-refines `x` to a regular solution of `H(·, τ)`, or gives up.
///
/// Accepts only points with residual within `tol` whose rounding radius is
/// below `√tol (1 + ‖x‖)`.
pub fn refine_regular<H: Homotopy + ?Sized>(h: &H, x: &[Complex64], tau: f64, tol: f64) -> Option<Vec<Complex64>> {
    let out = newton_correct(h, x, tau, tol * 1e-3, REFINE_ITERS).ok()?;
    let mut eval = HomotopyEval::new(h.dim());
    h.evaluate(&out.point, tau, &mut eval);
    let regular = noise_radius(&eval) <= tol.sqrt() * (1.0 + norm2(&out.point));
    (regular && eval.relative_residual() <= tol).then_some(out.point)
}

/// Relative residual of `H(x, τ)`.
pub fn residual_at<H: Homotopy + ?Sized>(h: &H, x: &[Complex64], tau: f64) -> f64 {
    let mut eval = HomotopyEval::new(h.dim());
    h.evaluate(x, tau, &mut eval);
    eval.relative_residual()
}

/// `dx/dσ` at `(x, σ)`.
fn tangent<H: Homotopy + ?Sized>(
    h: &H,
    x: &[Complex64],
    sigma: f64,
    eval: &mut HomotopyEval,
) -> Result<Vec<Complex64>, CorrectorError> {
    let (t0, t1) = h.parameter_path();
    h.evaluate(x, t0 + sigma * (t1 - t0), eval);
    let span = t1 - t0;
    let rhs: Vec<Complex64> = eval.dtau.iter().map(|v| -v * span).collect();
    if !eval.jacobian.is_finite() {
        return Err(CorrectorError::NonFinite);
    }
    solve(&eval.jacobian, &rhs).map_err(|_| CorrectorError::Singular)
}

fn axpy(x: &[Complex64], a: f64, v: &[Complex64]) -> Vec<Complex64> {
    x.iter().zip(v).map(|(p, q)| p + q * a).collect()
}

/// One RK4 step of length `step` from `(x, σ)`; `k1` is the tangent at `x`.
pub fn predictor_step<H: Homotopy + ?Sized>(
    h: &H,
    x: &[Complex64],
    sigma: f64,
    step: f64,
    k1: &[Complex64],
) -> Result<Vec<Complex64>, CorrectorError> {
    rk4_with_estimate(h, x, sigma, step, k1).map(|(p, _)| p)
}

/// RK4 prediction together with its distance from the embedded midpoint
/// (second order) prediction.
fn rk4_with_estimate<H: Homotopy + ?Sized>(
    h: &H,
    x: &[Complex64],
    sigma: f64,
    step: f64,
    k1: &[Complex64],
) -> Result<(Vec<Complex64>, f64), CorrectorError> {
    if step == 0.0 {
        return Ok((x.to_vec(), 0.0));
    }
    let mut eval = HomotopyEval::new(h.dim());
    let k2 = tangent(h, &axpy(x, step / 2.0, k1), sigma + step / 2.0, &mut eval)?;
    let k3 = tangent(h, &axpy(x, step / 2.0, &k2), sigma + step / 2.0, &mut eval)?;
    let k4 = tangent(h, &axpy(x, step, &k3), sigma + step, &mut eval)?;
    let p: Vec<Complex64> =
        (0..x.len()).map(|i| x[i] + (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (step / 6.0)).collect();
    let mid = axpy(x, step, &k2);
    let diff: Vec<Complex64> = p.iter().zip(&mid).map(|(a, b)| a - b).collect();
    Ok((p, norm2(&diff)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum PathStatus {
    Success,
    Diverged,
    Failed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PathResult {
    pub status: PathStatus,
    pub endpoint: Vec<Complex64>,
    /// Accepted steps.
    pub steps: usize,
    pub final_residual: f64,
    /// Parameter value reached.
    pub final_tau: f64,
    /// Last attempted step length in σ.
    pub last_step: f64,
}

impl PathResult {
    pub fn is_success(&self) -> bool {
        self.status == PathStatus::Success
    }
}

/// Tracks one path from `start` (a solution at the start parameter).
pub fn track_path<H: Homotopy + ?Sized>(h: &H, start: &[Complex64], settings: &TrackSettings) -> PathResult {
    let (t0, t1) = h.parameter_path();
    let tau = |sigma: f64| t0 + sigma * (t1 - t0);
    let mut eval = HomotopyEval::new(h.dim());
    let mut x = start.to_vec();
    let mut sigma = 0.0;
    let mut step = settings.initial_step.min(settings.max_step);
    let mut streak = 0;
    let mut accepted = 0;
    let mut attempts = 0;
    let mut allow_jump = true;
    let mut last_step = 0.0;

    let status = loop {
        if sigma >= 1.0 {
            break PathStatus::Success;
        }
        if attempts >= settings.max_steps {
            break PathStatus::Failed;
        }
        attempts += 1;
        let remaining = 1.0 - sigma;
        let Ok(k1) = tangent(h, &x, sigma, &mut eval) else {
            break PathStatus::Failed;
        };
        let noise = noise_radius(&eval);
        let jump = allow_jump && norm2(&k1) <= 1e-14 * (1.0 + norm2(&x));
        let h_step = if jump { remaining } else { step.min(remaining) };
        last_step = h_step;
        let target = if h_step >= remaining { 1.0 } else { sigma + h_step };
        let corrected = rk4_with_estimate(h, &x, sigma, target - sigma, &k1).and_then(|(p, err)| {
            let moved: Vec<Complex64> = p.iter().zip(&x).map(|(a, b)| a - b).collect();
            let bound = TRUST_RATIO * norm2(&moved) + settings.newton_tol * (1.0 + norm2(&x)) + noise;
            if err > bound {
                return Err(CorrectorError::NotContracting);
            }
            newton_bounded(h, &p, tau(target), settings.newton_tol, settings.max_newton_iters, bound)
        });
        match corrected {
            Ok(out) => {
                x = out.point;
                sigma = target;
                accepted += 1;
                allow_jump = true;
                if !jump {
                    streak += 1;
                    if streak >= 3 {
                        step = (step * settings.step_expansion).min(settings.max_step);
                        streak = 0;
                    }
                }
                if norm_inf(&x) > settings.divergence_threshold {
                    break PathStatus::Diverged;
                }
            }
            Err(_) if jump => allow_jump = false,
            Err(_) => {
                step = h_step * settings.step_contraction;
                streak = 0;
                if step < settings.min_step {
                    break PathStatus::Failed;
                }
            }
        }
    };

    let mut final_residual = residual_at(h, &x, tau(sigma));
    let mut status = status;
    if status == PathStatus::Success {
        if let Ok(out) = newton_correct(h, &x, t1, settings.newton_tol * 1e-3, 3) {
            x = out.point;
        }
        final_residual = residual_at(h, &x, t1);
        if !(final_residual <= settings.newton_tol) {
            status = PathStatus::Failed;
        }
    }
    PathResult { status, endpoint: x, steps: accepted, final_residual, final_tau: tau(sigma), last_step }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::PolySystem;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn newton_examples() {
        let s = PolySystem::parse(&["x"], &["x^2-4"]).unwrap();
        let ev = SystemEvaluator::new(&s);
        let out = newton_correct(&ev, &[c(2.1)], 0.0, 1e-12, 4).unwrap();
        assert!((out.point[0] - c(2.0)).norm() < 1e-12);
        assert!(out.iterations <= 4);
        let exact = newton_correct(&ev, &[c(2.0)], 0.0, 1e-12, 4).unwrap();
        assert_eq!(exact.iterations, 0);
        assert!(exact.residual <= 1e-12);
    }

    #[test]
    fn zero_predictor_step() {
        let s = PolySystem::parse(&["x"], &["x^2-4"]).unwrap();
        let ev = SystemEvaluator::new(&s);
        let x = [c(1.5)];
        assert_eq!(predictor_step(&ev, &x, 0.0, 0.0, &[c(0.3)]).unwrap(), x.to_vec());
    }

    #[test]
    fn validates_settings() {
        assert!(TrackSettings::default().validate().is_ok());
        let bad = TrackSettings { min_step: 1.0, ..Default::default() };
        assert_eq!(bad.validate(), Err(SettingsError::Steps));
    }
}
