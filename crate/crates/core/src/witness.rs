//! Witness sets for hypersurfaces and for closures of coordinate projections.
//!
//! A witness set for `Y = closure(π(X))` keeps preimages in `X` of the points
//! of `Y ∩ L`, where `L` is a generic line in the image space. When the fibers
//! of `π` are positive dimensional, generic hyperplanes are appended to the
//! system so that the projection becomes finite.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::{
    lu_solve, norm_inf, numerical_rank, random_complex, random_gamma, random_slice, random_vector, univariate_roots,
    ComplexMatrix, LinalgError, LinearSlice,
};
use crate::poly::{ExponentVector, PolyError, PolySystem, Polynomial, SystemEvaluator};
use crate::tracker::{
    cluster_points, solve_total_degree, track_path, OffsetHomotopy, PathResult, PathStatus, SliceHomotopy,
    TrackSettings, CLUSTER_TOL,
};

/// Residual tolerance for accepting a point on the variety.
pub const MEMBERSHIP_TOL: f64 = 1e-8;
/// Failed paths that stop within this fraction of the end are treated as
/// heading to singular or infinite endpoints rather than lost.
pub const END_ZONE: f64 = 1e-3;
/// Reslice rounds after the first attempt.
pub const RESLICE_RETRIES: usize = 3;
const SAMPLE_ATTEMPTS: usize = 5;
/// Sample points used to find the component with the largest image.
const DIMENSION_SAMPLES: usize = 4;
/// Total-degree solves per slice; endpoints are merged until a pass adds nothing.
const SOLVE_PASSES: usize = 2;
/// Independent slices solved per projection; the largest witness set wins.
const SLICE_VOTES: usize = 2;

#[derive(Debug, Error)]
pub enum WitnessError {
    #[error("the image has dimension {found} in {ambient} kept coordinates, so it is not a hypersurface")]
    Dimension { found: usize, ambient: usize },
    #[error("{lost} of {total} paths were lost after {rounds} attempts")]
    Tracking { lost: usize, total: usize, rounds: usize },
    #[error("found {found} distinct points, expected {expected}; the polynomial may not be reduced")]
    UnderCount { found: usize, expected: usize },
    #[error("the polynomial is constant")]
    Constant,
    #[error("invalid projection: {0}")]
    Projection(String),
    #[error("could not find a regular point on the variety")]
    SamplePoint,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// Numerical dimension data of a projection.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DimensionReport {
    pub ambient: usize,
    pub dim_x: usize,
    pub fiber_dim: usize,
    pub dim_image: usize,
}

#[derive(Clone, Debug)]
pub struct WitnessSet {
    system: PolySystem,
    projection: Vec<usize>,
    slice: LinearSlice,
    points: Vec<Vec<Complex64>>,
    seed: Option<u64>,
}

/// JSON form of a [`WitnessSet`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessDocument {
    pub variables: Vec<String>,
    pub equations: Vec<String>,
    pub projection: Vec<usize>,
    pub slice: LinearSlice,
    pub points: Vec<Vec<Complex64>>,
    pub degree: usize,
    pub seed: Option<u64>,
}

impl WitnessSet {
    /// Assembles a witness set, checking shapes and the membership invariants.
    pub fn new(
        system: PolySystem,
        projection: Vec<usize>,
        slice: LinearSlice,
        points: Vec<Vec<Complex64>>,
    ) -> Result<Self, WitnessError> {
        let n = projection.len();
        if n == 0 || projection.iter().any(|&i| i >= system.nvars()) {
            return Err(WitnessError::Projection("kept coordinates out of range".into()));
        }
        if slice.ambient() != n || slice.codim() != n - 1 {
            return Err(WitnessError::Projection("slice does not define a line in the image".into()));
        }
        if system.len() + n - 1 != system.nvars() {
            return Err(WitnessError::Projection("system plus slice is not square".into()));
        }
        Ok(Self { system, projection, slice, points, seed: None })
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// Equations of `X` together with any appended hyperplanes.
    pub fn system(&self) -> &PolySystem {
        &self.system
    }

    /// Kept coordinate indices.
    pub fn projection(&self) -> &[usize] {
        &self.projection
    }

    pub fn slice(&self) -> &LinearSlice {
        &self.slice
    }

    pub fn points(&self) -> &[Vec<Complex64>] {
        &self.points
    }

    pub fn degree(&self) -> usize {
        self.points.len()
    }

    /// Dimension of the image space.
    pub fn image_dim(&self) -> usize {
        self.projection.len()
    }

    pub fn project(&self, x: &[Complex64]) -> Vec<Complex64> {
        self.projection.iter().map(|&i| x[i]).collect()
    }

    pub fn projected_points(&self) -> Vec<Vec<Complex64>> {
        self.points.iter().map(|p| self.project(p)).collect()
    }

    /// Largest relative residual of the system and of the slice over all points.
    pub fn max_residual(&self) -> f64 {
        let ev = SystemEvaluator::new(&self.system);
        self.points
            .iter()
            .map(|p| {
                let sys = relative_residual(&ev, p);
                let sl = self.slice.evaluate(&self.project(p)).iter().map(|v| v.norm()).fold(0.0, f64::max);
                sys.max(sl)
            })
            .fold(0.0, f64::max)
    }

    /// Square polynomial system whose solutions are the witness points.
    pub fn sliced_system(&self) -> PolySystem {
        sliced_system(&self.system, &self.projection, &self.slice)
    }

    pub fn to_document(&self) -> WitnessDocument {
        WitnessDocument {
            variables: self.system.variable_names().to_vec(),
            equations: self.system.equation_strings(),
            projection: self.projection.clone(),
            slice: self.slice.clone(),
            points: self.points.clone(),
            degree: self.degree(),
            seed: self.seed,
        }
    }

    pub fn from_document(doc: &WitnessDocument) -> Result<Self, WitnessError> {
        let names: Vec<&str> = doc.variables.iter().map(String::as_str).collect();
        let system = PolySystem::parse(&names, &doc.equations)
            .map_err(|e| WitnessError::Projection(format!("bad equation in witness document: {e}")))?;
        let mut w = Self::new(system, doc.projection.clone(), doc.slice.clone(), doc.points.clone())?;
        w.seed = doc.seed;
        Ok(w)
    }
}

fn relative_residual(ev: &SystemEvaluator, x: &[Complex64]) -> f64 {
    let mut buf = ev.buffers();
    ev.evaluate(x, &mut buf);
    buf.values.iter().zip(&buf.scales).map(|(v, s)| v.norm() / s.max(1.0)).fold(0.0, f64::max)
}

/// `Σ_j c_j x_{positions[j]} + c_last` as a polynomial in `nvars` variables.
pub fn affine_polynomial(nvars: usize, coeffs: &[Complex64], positions: &[usize]) -> Polynomial {
    assert_eq!(coeffs.len(), positions.len() + 1);
    let mut terms: Vec<(ExponentVector, Complex64)> =
        positions.iter().zip(coeffs).map(|(&p, &c)| (ExponentVector::unit(nvars, p), c)).collect();
    terms.push((ExponentVector::zeros(nvars), coeffs[positions.len()]));
    Polynomial::from_terms(nvars, terms)
}

fn sliced_system(system: &PolySystem, coords: &[usize], slice: &LinearSlice) -> PolySystem {
    let n = system.nvars();
    let mut polys = system.polys().to_vec();
    for i in 0..slice.codim() {
        polys.push(affine_polynomial(n, slice.coeffs().row(i), coords));
    }
    system.with_polys(polys).expect("same variables")
}

/// `k` random linear combinations of the equations.
fn random_combinations<R: Rng + ?Sized>(system: &PolySystem, k: usize, rng: &mut R) -> Vec<Polynomial> {
    (0..k)
        .map(|_| {
            system.polys().iter().fold(Polynomial::zero(system.nvars()), |acc, p| &acc + &p.scale(random_complex(rng)))
        })
        .collect()
}

fn random_hyperplanes<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Vec<Polynomial> {
    let all: Vec<usize> = (0..n).collect();
    (0..k).map(|_| affine_polynomial(n, &random_vector(n + 1, rng), &all)).collect()
}

fn jacobian_at(ev: &SystemEvaluator, x: &[Complex64]) -> ComplexMatrix {
    let mut buf = ev.buffers();
    ev.evaluate(x, &mut buf);
    ComplexMatrix::from_row_major(ev.neqs(), ev.nvars(), buf.jacobian)
}

/// Finds a regular point of `V(system)` and the codimension there.
///
/// Tries codimensions from the largest possible down; for each, squares the
/// system with random combinations, adds random hyperplanes through a random
/// point `x₀`, and tracks `F(x) − τ F(x₀)` to `τ = 0`.
pub fn sample_point<R: Rng + ?Sized>(
    system: &PolySystem,
    settings: &TrackSettings,
    rng: &mut R,
) -> Result<(Vec<Complex64>, usize), WitnessError> {
    let n = system.nvars();
    let r = system.len();
    let full = SystemEvaluator::new(system);
    let all: Vec<usize> = (0..n).collect();
    for _ in 0..SAMPLE_ATTEMPTS {
        for c in (1..=r.min(n)).rev() {
            let mut polys = if r > c { random_combinations(system, c, rng) } else { system.polys().to_vec() };
            let x0 = random_vector(n, rng);
            for _ in 0..n - c {
                let mut coeffs = random_vector(n, rng);
                let offset: Complex64 = coeffs.iter().zip(&x0).map(|(a, b)| a * b).sum();
                coeffs.push(-offset);
                polys.push(affine_polynomial(n, &coeffs, &all));
            }
            let square = system.with_polys(polys)?;
            let h = OffsetHomotopy::new(&square, &x0);
            let res = track_path(&h, &x0, settings);
            if res.status != PathStatus::Success || relative_residual(&full, &res.endpoint) > MEMBERSHIP_TOL {
                continue;
            }
            if numerical_rank(&jacobian_at(&full, &res.endpoint)) == c {
                return Ok((res.endpoint, c));
            }
        }
    }
    Err(WitnessError::SamplePoint)
}

/// Dimensions of `X`, of the generic fiber of `π`, and of the image.
pub fn projection_dimensions(system: &PolySystem, point: &[Complex64], kept: &[usize]) -> DimensionReport {
    let n = system.nvars();
    let jac = jacobian_at(&SystemEvaluator::new(system), point);
    let dim_x = n - numerical_rank(&jac);
    let mut e = ComplexMatrix::zeros(kept.len(), n);
    for (row, &k) in kept.iter().enumerate() {
        e[(row, k)] = Complex64::new(1.0, 0.0);
    }
    let fiber_dim = n - numerical_rank(&jac.vstack(&e));
    DimensionReport { ambient: n, dim_x, fiber_dim, dim_image: dim_x - fiber_dim }
}

/// Projection dimensions on the component of `X` with the largest image,
/// judged from several sample points, with the codimension at that sample.
pub fn largest_image<R: Rng + ?Sized>(
    system: &PolySystem,
    kept: &[usize],
    settings: &TrackSettings,
    rng: &mut R,
) -> Result<(DimensionReport, usize), WitnessError> {
    let mut best: Option<(DimensionReport, usize)> = None;
    for _ in 0..DIMENSION_SAMPLES {
        let (point, codim) = sample_point(system, settings, rng)?;
        let dims = projection_dimensions(system, &point, kept);
        if best.as_ref().is_none_or(|(b, _)| (dims.dim_image, dims.dim_x) > (b.dim_image, b.dim_x)) {
            best = Some((dims, codim));
        }
    }
    best.ok_or(WitnessError::SamplePoint)
}

fn kept_coordinates(nvars: usize, drop: &[usize]) -> Result<Vec<usize>, WitnessError> {
    if let Some(&bad) = drop.iter().find(|&&d| d >= nvars) {
        return Err(WitnessError::Projection(format!("coordinate {bad} out of range")));
    }
    let kept: Vec<usize> = (0..nvars).filter(|i| !drop.contains(i)).collect();
    if kept.len() < 2 {
        return Err(WitnessError::Projection("need at least two kept coordinates".into()));
    }
    Ok(kept)
}

fn lost_paths(paths: &[PathResult]) -> usize {
    paths.iter().filter(|p| p.status == PathStatus::Failed && p.final_tau.abs() > END_ZONE).count()
}

/// Witness set for the closure of the projection of `V(system)` that forgets
/// the coordinates in `drop`.
pub fn witness_for_projection<R: Rng + ?Sized>(
    system: &PolySystem,
    drop: &[usize],
    settings: &TrackSettings,
    rng: &mut R,
) -> Result<WitnessSet, WitnessError> {
    let n = system.nvars();
    let kept = kept_coordinates(n, drop)?;
    let (dims, codim) = largest_image(system, &kept, settings, rng)?;
    if dims.dim_image + 1 != kept.len() {
        return Err(WitnessError::Dimension { found: dims.dim_image, ambient: kept.len() });
    }
    let full = SystemEvaluator::new(system);
    let mut last_lost = 0;
    let mut total = 0;
    let mut best: Option<WitnessSet> = None;
    let mut solved = 0;
    for _ in 0..=RESLICE_RETRIES {
        let mut polys =
            if system.len() > codim { random_combinations(system, codim, rng) } else { system.polys().to_vec() };
        polys.extend(random_hyperplanes(n, dims.fiber_dim, rng));
        let base = system.with_polys(polys)?;
        let slice = random_slice(kept.len(), kept.len() - 1, rng)?;
        let square = sliced_system(&base, &kept, &slice);
        let Some(points) = solve_slice(&square, &full, &kept, settings, rng, &mut last_lost, &mut total) else {
            continue;
        };
        let w = WitnessSet::new(base, kept.clone(), slice, points)?;
        if best.as_ref().is_none_or(|b| w.degree() > b.degree()) {
            best = Some(w);
        }
        solved += 1;
        if solved == SLICE_VOTES {
            break;
        }
    }
    best.ok_or(WitnessError::Tracking { lost: last_lost, total, rounds: RESLICE_RETRIES + 1 })
}

/// Endpoints of `square` on the variety, merged over solve passes, or `None`
/// when a pass loses paths.
fn solve_slice<R: Rng + ?Sized>(
    square: &PolySystem,
    full: &SystemEvaluator,
    kept: &[usize],
    settings: &TrackSettings,
    rng: &mut R,
    last_lost: &mut usize,
    total: &mut usize,
) -> Option<Vec<Vec<Complex64>>> {
    let mut points: Vec<Vec<Complex64>> = Vec::new();
    for _ in 0..SOLVE_PASSES {
        let res = solve_total_degree(square, settings, rng);
        *total = res.paths.len();
        *last_lost = lost_paths(&res.paths);
        if *last_lost > 0 {
            return None;
        }
        let before = points.len();
        let accepted = res
            .paths
            .iter()
            .filter(|p| p.is_success() && relative_residual(full, &p.endpoint) <= MEMBERSHIP_TOL)
            .map(|p| p.endpoint.clone());
        for p in accepted {
            let known = points.iter().any(|o| {
                let diff: Vec<Complex64> = kept.iter().map(|&k| o[k] - p[k]).collect();
                norm_inf(&diff) <= CLUSTER_TOL
            });
            if !known {
                points.push(p);
            }
        }
        if points.len() == before {
            break;
        }
    }
    Some(points)
}

/// A point and direction spanning the line cut out by an (n−1)×(n+1) slice.
pub fn slice_line<R: Rng + ?Sized>(
    slice: &LinearSlice,
    rng: &mut R,
) -> Result<(Vec<Complex64>, Vec<Complex64>), WitnessError> {
    let n = slice.ambient();
    let k = slice.codim();
    assert_eq!(k + 1, n, "slice must cut out a line");
    let mut a = ComplexMatrix::zeros(n, n);
    let mut rhs_p = vec![Complex64::default(); n];
    for i in 0..k {
        a.row_mut(i).copy_from_slice(&slice.coeffs().row(i)[..n]);
        rhs_p[i] = -slice.coeffs()[(i, n)];
    }
    a.row_mut(k).copy_from_slice(&random_vector(n, rng));
    let p = lu_solve(&a, &rhs_p)?;
    let mut rhs_v = vec![Complex64::default(); n];
    rhs_v[k] = Complex64::new(1.0, 0.0);
    let v = lu_solve(&a, &rhs_v)?;
    Ok((p, v))
}

/// Witness set of `V(f)` on a random line.
pub fn witness_for_hypersurface<R: Rng + ?Sized>(
    f: &Polynomial,
    variable_names: Vec<String>,
    rng: &mut R,
) -> Result<WitnessSet, WitnessError> {
    let n = f.nvars();
    let d = f.degree() as usize;
    if d == 0 {
        return Err(WitnessError::Constant);
    }
    let system = PolySystem::new(variable_names, vec![f.clone()])?;
    let kept: Vec<usize> = (0..n).collect();
    let mut best = 0;
    for _ in 0..=RESLICE_RETRIES {
        let slice = random_slice(n, n - 1, rng)?;
        let (p, v) = slice_line(&slice, rng)?;
        let lines: Vec<(Complex64, Complex64)> = v.iter().zip(&p).map(|(a, b)| (*a, *b)).collect();
        let g = crate::poly::expand_affine_substitution(f, &lines);
        if g.degree() as usize != d {
            continue;
        }
        let coeffs: Vec<Complex64> = (0..=d as u32).map(|k| g.coefficient(&ExponentVector::new(vec![k]))).collect();
        let roots: Vec<Complex64> = univariate_roots(&coeffs).into_iter().map(|z| polish_root(&coeffs, z)).collect();
        let distinct = cluster_points(roots.iter().enumerate().map(|(i, z)| (i, std::slice::from_ref(z))));
        let roots: Vec<Vec<Complex64>> = distinct.iter().map(|c| vec![roots[c.paths[0]]]).collect();
        best = best.max(roots.len());
        if roots.len() == d {
            let points = roots.iter().map(|s| p.iter().zip(&v).map(|(pi, vi)| pi + vi * s[0]).collect()).collect();
            return WitnessSet::new(system, kept, slice, points);
        }
    }
    Err(WitnessError::UnderCount { found: best, expected: d })
}

/// A few Newton steps on a dense univariate polynomial.
fn polish_root(coeffs: &[Complex64], mut z: Complex64) -> Complex64 {
    for _ in 0..3 {
        let (mut p, mut dp) = (Complex64::default(), Complex64::default());
        for c in coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        if dp.norm() == 0.0 || !(p / dp).is_finite() {
            break;
        }
        z -= p / dp;
    }
    z
}

/// Moves a witness set to a new slice by a parameter homotopy.
pub fn move_slice<R: Rng + ?Sized>(
    w: &WitnessSet,
    new_slice: &LinearSlice,
    settings: &TrackSettings,
    rng: &mut R,
) -> Result<WitnessSet, WitnessError> {
    if new_slice.ambient() != w.image_dim() || new_slice.codim() != w.slice.codim() {
        return Err(WitnessError::Projection("new slice has the wrong shape".into()));
    }
    if new_slice == &w.slice {
        return Ok(w.clone());
    }
    let h = SliceHomotopy::new(
        &w.system,
        w.projection.clone(),
        w.slice.coeffs().clone(),
        new_slice.coeffs().clone(),
        random_gamma(rng),
    );
    use rayon::prelude::*;
    let results: Vec<PathResult> = w.points.par_iter().map(|p| track_path(&h, p, settings)).collect();
    let lost = results.iter().filter(|r| !r.is_success()).count();
    if lost > 0 {
        return Err(WitnessError::Tracking { lost, total: results.len(), rounds: 1 });
    }
    let points: Vec<Vec<Complex64>> = results.into_iter().map(|r| r.endpoint).collect();
    let projected: Vec<Vec<Complex64>> = points.iter().map(|p| w.project(p)).collect();
    let distinct = cluster_points(projected.iter().enumerate().map(|(i, p)| (i, p.as_slice()))).len();
    if distinct < points.len() {
        return Err(WitnessError::Tracking { lost: points.len() - distinct, total: points.len(), rounds: 1 });
    }
    let mut out = WitnessSet::new(w.system.clone(), w.projection.clone(), new_slice.clone(), points)?;
    out.seed = w.seed;
    Ok(out)
}
