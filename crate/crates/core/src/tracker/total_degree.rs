use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    newton_correct, refine_regular, residual_at, track_path, LinearHomotopy, PathResult, PathStatus, TrackSettings,
};
use crate::numerics::{norm_inf, random_complex, random_gamma};
use crate::poly::{ExponentVector, PolySystem, Polynomial, SystemEvaluator};

/// Paths failing with `τ` below this are Newton-refined at `τ = 0`.
pub const END_ZONE: f64 = 1e-3;

/// Endpoints closer than this (sup norm) are merged.
pub const CLUSTER_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    pub point: Vec<Complex64>,
    pub multiplicity: usize,
    pub paths: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct TotalDegreeResult {
    pub paths: Vec<PathResult>,
    /// Distinct successful endpoints in order of first appearance.
    pub solutions: Vec<Cluster>,
}

impl TotalDegreeResult {
    pub fn distinct_points(&self) -> Vec<Vec<Complex64>> {
        self.solutions.iter().map(|c| c.point.clone()).collect()
    }
}

/// Groups points greedily: each joins the first cluster within [`CLUSTER_TOL`].
pub fn cluster_points<'a, I>(points: I) -> Vec<Cluster>
where
    I: IntoIterator<Item = (usize, &'a [Complex64])>,
{
    let mut clusters: Vec<Cluster> = Vec::new();
    for (idx, p) in points {
        let found = clusters.iter_mut().find(|c| {
            let diff: Vec<Complex64> = c.point.iter().zip(p).map(|(a, b)| a - b).collect();
            norm_inf(&diff) <= CLUSTER_TOL
        });
        match found {
            Some(c) => {
                c.multiplicity += 1;
                c.paths.push(idx);
            }
            None => clusters.push(Cluster { point: p.to_vec(), multiplicity: 1, paths: vec![idx] }),
        }
    }
    clusters
}

/// The start system `x_i^{d_i} − r_i` and all of its solutions, in
/// mixed-radix order.
pub fn total_degree_start<R: Rng + ?Sized>(degrees: &[u32], rng: &mut R) -> (PolySystem, Vec<Vec<Complex64>>) {
    let n = degrees.len();
    let r: Vec<Complex64> = (0..n).map(|_| random_complex(rng)).collect();
    let polys = (0..n)
        .map(|i| {
            let mut e = vec![0; n];
            e[i] = degrees[i];
            Polynomial::from_terms(
                n,
                [(ExponentVector::new(e), Complex64::new(1.0, 0.0)), (ExponentVector::zeros(n), -r[i])],
            )
        })
        .collect();
    let roots: Vec<Vec<Complex64>> = (0..n)
        .map(|i| {
            let d = degrees[i] as f64;
            let base = r[i].powf(1.0 / d);
            (0..degrees[i]).map(|k| base * Complex64::from_polar(1.0, 2.0 * PI * k as f64 / d)).collect()
        })
        .collect();
    let total: usize = degrees.iter().map(|&d| d as usize).product();
    let starts = (0..total)
        .map(|mut idx| {
            (0..n)
                .map(|i| {
                    let d = degrees[i] as usize;
                    let v = roots[i][idx % d];
                    idx /= d;
                    v
                })
                .collect()
        })
        .collect();
    (PolySystem::from_polys(polys), starts)
}

/// Tracks all Bézout paths of a square system from a total-degree start system.
///
/// Paths are tracked in homogeneous coordinates on a random affine chart, so
/// paths going to infinity stay bounded. Endpoints whose homogenizing
/// coordinate is below `1 / divergence_threshold` of the rest are reported
/// as diverged; all others are returned in affine coordinates.
///
/// Panics if the system is not square or has a constant equation.
pub fn solve_total_degree<R: Rng + ?Sized>(
    system: &PolySystem,
    settings: &TrackSettings,
    rng: &mut R,
) -> TotalDegreeResult {
    assert!(system.is_square(), "total-degree solving needs a square system");
    let degrees = system.degrees();
    assert!(degrees.iter().all(|&d| d >= 1), "every equation must have degree at least 1");
    let n = system.nvars();
    let (start, starts) = total_degree_start(&degrees, rng);
    let gamma = random_gamma(rng);
    let chart: Vec<Complex64> = (0..=n).map(|_| random_complex(rng)).collect();
    let mut chart_terms: Vec<(ExponentVector, Complex64)> =
        chart.iter().enumerate().map(|(j, c)| (ExponentVector::unit(n + 1, j), *c)).collect();
    chart_terms.push((ExponentVector::zeros(n + 1), Complex64::new(-1.0, 0.0)));
    let chart_poly = Polynomial::from_terms(n + 1, chart_terms);
    let projective = |s: &PolySystem| {
        let mut polys: Vec<Polynomial> = s.polys().iter().map(Polynomial::homogenize).collect();
        polys.push(chart_poly.clone());
        PolySystem::from_polys(polys)
    };
    let h = LinearHomotopy::new(&projective(system), &projective(&start), gamma);
    let mut inner = settings.clone();
    inner.divergence_threshold = f64::INFINITY;
    let affine = SystemEvaluator::new(system);
    let paths: Vec<PathResult> = starts
        .par_iter()
        .map(|x| {
            let mut lifted = x.clone();
            lifted.push(Complex64::new(1.0, 0.0));
            let scale: Complex64 = chart.iter().zip(&lifted).map(|(c, v)| c * v).sum();
            lifted.iter_mut().for_each(|v| *v /= scale);
            let res = track_path(&h, &lifted, &inner);
            to_affine(res, &affine, settings)
        })
        .collect();
    let solutions = cluster_points(
        paths.iter().enumerate().filter(|(_, p)| p.is_success()).map(|(i, p)| (i, p.endpoint.as_slice())),
    );
    TotalDegreeResult { paths, solutions }
}

fn to_affine(mut res: PathResult, affine: &SystemEvaluator, settings: &TrackSettings) -> PathResult {
    let w = res.endpoint.pop().unwrap_or_default();
    let size = norm_inf(&res.endpoint);
    let at_infinity = !(w.norm() * settings.divergence_threshold > size);
    if !at_infinity {
        res.endpoint.iter_mut().for_each(|v| *v /= w);
    }
    if res.status == PathStatus::Failed && !at_infinity && res.final_tau <= END_ZONE {
        if let Some(x) = refine_regular(affine, &res.endpoint, 0.0, settings.newton_tol) {
            res.final_residual = residual_at(affine, &x, 0.0);
            res.endpoint = x;
            res.status = PathStatus::Success;
        }
        return res;
    }
    if res.status != PathStatus::Success {
        return res;
    }
    if at_infinity {
        res.status = PathStatus::Diverged;
        return res;
    }
    if let Ok(out) = newton_correct(affine, &res.endpoint, 0.0, settings.newton_tol * 1e-3, 3) {
        res.endpoint = out.point;
    }
    res.final_residual = residual_at(affine, &res.endpoint, 0.0);
    if !(res.final_residual <= settings.newton_tol) {
        res.status = PathStatus::Failed;
    }
    res
}
