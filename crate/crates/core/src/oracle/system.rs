//! The system tracked by the oracle.
//!
//! Unknowns are `(ŝ, ẑ)`: the kept coordinates are eliminated through
//! `y_i = e^{u ω_i}(a_i s − b_i)` with `u = log t`, the parameter is written
//! `s = σ ŝ` and each dropped coordinate `z_j = S_j ẑ_j`, with scales `σ` and
//! `S_j` fixed for the duration of one step. Every equation is divided by its largest term weight, so magnitudes
//! stay bounded however large `t` becomes.

use num_complex::Complex64;

use crate::poly::{CompensatedSum, PolySystem};
use crate::tracker::{Homotopy, HomotopyEval};

#[derive(Clone, Debug)]
struct OracleTerm {
    coeff: Complex64,
    y: Vec<(usize, u32)>,
    z: Vec<(usize, u32)>,
}

#[derive(Clone, Debug)]
pub(crate) struct OracleSystem {
    kept: usize,
    dropped: usize,
    eqs: Vec<Vec<OracleTerm>>,
    max_y: Vec<u32>,
    max_z: Vec<u32>,
}

impl OracleSystem {
    pub(crate) fn new(system: &PolySystem, kept: &[usize], dropped: &[usize]) -> Self {
        let mut max_y = vec![0; kept.len()];
        let mut max_z = vec![0; dropped.len()];
        let eqs = system
            .polys()
            .iter()
            .map(|p| {
                p.terms()
                    .map(|(e, c)| {
                        let y: Vec<(usize, u32)> =
                            kept.iter().enumerate().filter(|(_, &k)| e[k] > 0).map(|(i, &k)| (i, e[k])).collect();
                        let z: Vec<(usize, u32)> =
                            dropped.iter().enumerate().filter(|(_, &k)| e[k] > 0).map(|(j, &k)| (j, e[k])).collect();
                        for &(i, k) in &y {
                            max_y[i] = max_y[i].max(k);
                        }
                        for &(j, k) in &z {
                            max_z[j] = max_z[j].max(k);
                        }
                        OracleTerm { coeff: *c, y, z }
                    })
                    .collect()
            })
            .collect();
        Self { kept: kept.len(), dropped: dropped.len(), eqs, max_y, max_z }
    }

    pub(crate) fn unknowns(&self) -> usize {
        1 + self.dropped
    }

    /// `⟨ω, α_y⟩` for every term.
    pub(crate) fn weights(&self, omega: &[f64]) -> Vec<Vec<f64>> {
        assert_eq!(omega.len(), self.kept);
        self.eqs
            .iter()
            .map(|terms| terms.iter().map(|t| t.y.iter().map(|&(i, k)| omega[i] * k as f64).sum()).collect())
            .collect()
    }
}

/// Local coordinate for `s`, with `a_i s − b_i = μ_i (p_i v + q_i)`.
///
/// Near a target `γ_i` the chart is centred there, so the vanishing factor
/// `a_i s − b_i` is carried by `μ_i` instead of cancelling in floating point.
#[derive(Clone, Debug)]
pub(crate) struct Chart {
    pub c0: Complex64,
    pub c1: Complex64,
    log_mu: Vec<f64>,
    p: Vec<Complex64>,
    q: Vec<Complex64>,
}

impl Chart {
    /// Chart with `v = 1` at the current `s`; centred at a target when `s` is
    /// within `radius` of it.
    pub(crate) fn around(s: Complex64, a: &[Complex64], b: &[Complex64], radius: f64) -> Self {
        let near = (0..a.len())
            .map(|i| (i, (s - b[i] / a[i]).norm()))
            .filter(|&(_, d)| d < radius && d > 0.0)
            .min_by(|x, y| x.1.total_cmp(&y.1));
        match near {
            Some((i, _)) => {
                let c0 = b[i] / a[i];
                let c1 = s - c0;
                let mut log_mu = vec![0.0; a.len()];
                let mut p: Vec<Complex64> = a.iter().map(|aj| aj * c1).collect();
                let mut q: Vec<Complex64> = a.iter().zip(b).map(|(aj, bj)| aj * c0 - bj).collect();
                let mu = p[i].norm();
                log_mu[i] = mu.ln();
                p[i] /= mu;
                q[i] = Complex64::default();
                Self { c0, c1, log_mu, p, q }
            }
            None => {
                let sigma = s.norm().max(1.0);
                Self {
                    c0: Complex64::default(),
                    c1: Complex64::new(sigma, 0.0),
                    log_mu: vec![sigma.ln(); a.len()],
                    p: a.to_vec(),
                    q: b.iter().map(|bj| -bj / sigma).collect(),
                }
            }
        }
    }

    pub(crate) fn to_local(&self, s: Complex64) -> Complex64 {
        (s - self.c0) / self.c1
    }

    pub(crate) fn to_global(&self, v: Complex64) -> Complex64 {
        self.c0 + self.c1 * v
    }
}

/// One chunk from `u0` to `u1` with a fixed chart and scales `log S`.
pub(crate) struct OracleHomotopy<'a> {
    pub system: &'a OracleSystem,
    pub weights: &'a [Vec<f64>],
    pub chart: &'a Chart,
    pub log_scale: &'a [f64],
    pub u0: f64,
    pub u1: f64,
}

fn power_table(base: Complex64, max: u32) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(max as usize + 1);
    out.push(Complex64::new(1.0, 0.0));
    for k in 1..=max as usize {
        out.push(out[k - 1] * base);
    }
    out
}

impl Homotopy for OracleHomotopy<'_> {
    fn dim(&self) -> usize {
        self.system.unknowns()
    }

    fn evaluate(&self, x: &[Complex64], u: f64, out: &mut HomotopyEval) {
        let sys = self.system;
        let dim = self.dim();
        let v = x[0];
        let chart = self.chart;
        let lin: Vec<Complex64> = chart.p.iter().zip(&chart.q).map(|(p, q)| p * v + q).collect();
        let lin_pow: Vec<Vec<Complex64>> = lin.iter().zip(&sys.max_y).map(|(l, &m)| power_table(*l, m)).collect();
        let z_pow: Vec<Vec<Complex64>> = (0..sys.dropped).map(|j| power_table(x[1 + j], sys.max_z[j])).collect();
        let mut jac = vec![Complex64::default(); dim * dim];
        let mut factors: Vec<(usize, Complex64, Complex64)> = Vec::new();
        for (e, terms) in sys.eqs.iter().enumerate() {
            let w = &self.weights[e];
            let exps: Vec<f64> = terms
                .iter()
                .zip(w)
                .map(|(t, wd)| {
                    u * wd
                        + t.y.iter().map(|&(i, k)| chart.log_mu[i] * k as f64).sum::<f64>()
                        + t.z.iter().map(|&(j, k)| self.log_scale[j] * k as f64).sum::<f64>()
                })
                .collect();
            let (imax, emax) =
                exps.iter()
                    .enumerate()
                    .fold((0, f64::NEG_INFINITY), |best, (i, &v)| if v > best.1 { (i, v) } else { best });
            let wmax = w.get(imax).copied().unwrap_or(0.0);
            let mut value = CompensatedSum::default();
            let mut dtau = Complex64::default();
            let mut scale = 0.0;
            let row = &mut jac[e * dim..(e + 1) * dim];
            for (t, term) in terms.iter().enumerate() {
                let weight = (exps[t] - emax).exp();
                if weight == 0.0 {
                    continue;
                }
                let cw = term.coeff * weight;
                // (column, factor value, derivative of factor w.r.t. that column)
                factors.clear();
                for &(i, k) in &term.y {
                    factors.push((0, lin_pow[i][k as usize], chart.p[i] * k as f64 * lin_pow[i][k as usize - 1]));
                }
                for &(j, k) in &term.z {
                    factors.push((1 + j, z_pow[j][k as usize], k as f64 * z_pow[j][k as usize - 1]));
                }
                let mono: Complex64 = factors.iter().map(|f| f.1).product();
                let v = cw * mono;
                value.add(v);
                scale += v.norm();
                dtau += v * (w[t] - wmax);
                for (idx, &(col, _, df)) in factors.iter().enumerate() {
                    let mut d = cw * df;
                    for (other, f) in factors.iter().enumerate() {
                        if other != idx {
                            d *= f.1;
                        }
                    }
                    row[col] += d;
                }
            }
            out.values[e] = value.value();
            out.dtau[e] = dtau;
            out.scales[e] = scale;
        }
        out.jacobian = crate::numerics::ComplexMatrix::from_row_major(dim, dim, jac);
    }

    fn parameter_path(&self) -> (f64, f64) {
        (self.u0, self.u1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::SystemEvaluator;

    /// Evaluation at u with log S = 0 must match direct substitution up to a
    /// positive per-equation normalization factor.
    fn check_chart(centre: Complex64, radius: f64) {
        let s = PolySystem::parse(&["x", "y", "t"], &["x*y*t-(x-y-t)^2+3*x+t", "x+y^2+t^2"]).unwrap();
        let sys = OracleSystem::new(&s, &[0, 1], &[2]);
        let omega = [3.0, 2.0];
        let weights = sys.weights(&omega);
        let a = [Complex64::new(0.6, 0.8), Complex64::new(-0.28, 0.96)];
        let b = [a[0], -a[1]];
        let chart = Chart::around(centre, &a, &b, radius);
        let h = OracleHomotopy { system: &sys, weights: &weights, chart: &chart, log_scale: &[0.0], u0: 0.0, u1: 1.0 };
        let u = 0.3;
        let x = [Complex64::new(0.2, -0.4), Complex64::new(1.1, 0.3)];
        let mut out = HomotopyEval::new(2);
        h.evaluate(&x, u, &mut out);
        let sv = chart.to_global(x[0]);
        let y: Vec<Complex64> = (0..2).map(|i| (a[i] * sv - b[i]) * (u * omega[i]).exp()).collect();
        let direct = SystemEvaluator::new(&s).values(&[y[0], y[1], x[1]]);
        for e in 0..2 {
            let ratio = direct[e] / out.values[e];
            // The normalization divides by exp(u * max weight), a positive real.
            assert!(ratio.im.abs() < 1e-10 * ratio.norm());
            assert!(ratio.re > 0.0);
        }
        // Finite-difference check of the u-derivative and the Jacobian.
        let hstep = 1e-6;
        let mut plus = HomotopyEval::new(2);
        h.evaluate(&x, u + hstep, &mut plus);
        for e in 0..2 {
            let fd = (plus.values[e] - out.values[e]) / hstep;
            assert!((fd - out.dtau[e]).norm() < 1e-4 * (1.0 + fd.norm()));
        }
        for col in 0..2 {
            let mut xp = x;
            xp[col] += hstep;
            h.evaluate(&xp, u, &mut plus);
            for e in 0..2 {
                let fd = (plus.values[e] - out.values[e]) / hstep;
                assert!((fd - out.jacobian[(e, col)]).norm() < 1e-4 * (1.0 + fd.norm()));
            }
        }
    }

    #[test]
    fn far_chart_matches_direct_substitution() {
        check_chart(Complex64::new(5.0, 1.0), 0.1);
    }

    #[test]
    fn target_chart_matches_direct_substitution() {
        // b_1 / a_1 = -1 is the nearby target.
        check_chart(Complex64::new(-1.01, 0.02), 0.1);
    }
}
