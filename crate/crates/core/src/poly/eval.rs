//! Flattened evaluation of a polynomial system together with its Jacobian.

use num_complex::Complex64;

use super::{CompensatedSum, PolySystem, Polynomial};

#[derive(Clone, Debug)]
struct Term {
    coeff: Complex64,
    /// (variable, exponent) pairs with exponent ≥ 1.
    factors: Vec<(usize, u32)>,
}

/// A [`PolySystem`] compiled into term lists for repeated evaluation.
#[derive(Clone, Debug)]
pub struct SystemEvaluator {
    nvars: usize,
    max_exp: Vec<u32>,
    polys: Vec<Vec<Term>>,
}

/// Output of [`SystemEvaluator::evaluate`]. The Jacobian is row-major.
#[derive(Clone, Debug, Default)]
pub struct EvalBuffers {
    pub values: Vec<Complex64>,
    pub jacobian: Vec<Complex64>,
    /// Per equation, the sum of absolute term values at the point.
    pub scales: Vec<f64>,
    powers: Vec<Vec<Complex64>>,
}

impl SystemEvaluator {
    pub fn new(system: &PolySystem) -> Self {
        Self::from_polys(system.nvars(), system.polys())
    }

    pub fn from_polys(nvars: usize, polys: &[Polynomial]) -> Self {
        let mut max_exp = vec![0; nvars];
        let polys = polys
            .iter()
            .map(|p| {
                assert_eq!(p.nvars(), nvars);
                p.terms()
                    .map(|(e, c)| {
                        let factors: Vec<(usize, u32)> =
                            e.as_slice().iter().enumerate().filter(|(_, &k)| k > 0).map(|(j, &k)| (j, k)).collect();
                        for &(j, k) in &factors {
                            max_exp[j] = max_exp[j].max(k);
                        }
                        Term { coeff: *c, factors }
                    })
                    .collect()
            })
            .collect();
        Self { nvars, max_exp, polys }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn neqs(&self) -> usize {
        self.polys.len()
    }

    pub fn buffers(&self) -> EvalBuffers {
        EvalBuffers {
            values: vec![Complex64::default(); self.neqs()],
            jacobian: vec![Complex64::default(); self.neqs() * self.nvars],
            scales: vec![0.0; self.neqs()],
            powers: self.max_exp.iter().map(|&k| vec![Complex64::default(); k as usize + 1]).collect(),
        }
    }

    /// Values only.
    pub fn values(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut buf = self.buffers();
        self.evaluate(x, &mut buf);
        buf.values
    }

    pub fn evaluate(&self, x: &[Complex64], buf: &mut EvalBuffers) {
        assert_eq!(x.len(), self.nvars, "point dimension");
        let n = self.nvars;
        for (j, pw) in buf.powers.iter_mut().enumerate() {
            pw[0] = Complex64::new(1.0, 0.0);
            for k in 1..pw.len() {
                pw[k] = pw[k - 1] * x[j];
            }
        }
        buf.jacobian.iter_mut().for_each(|v| *v = Complex64::default());
        for (i, terms) in self.polys.iter().enumerate() {
            let mut sum = CompensatedSum::default();
            let mut scale = 0.0;
            let row = &mut buf.jacobian[i * n..(i + 1) * n];
            for term in terms {
                let mut m = term.coeff;
                for &(j, k) in &term.factors {
                    m *= buf.powers[j][k as usize];
                }
                sum.add(m);
                scale += m.norm();
                for (idx, &(j, k)) in term.factors.iter().enumerate() {
                    let mut d = term.coeff * k as f64 * buf.powers[j][k as usize - 1];
                    for (other, &(l, kl)) in term.factors.iter().enumerate() {
                        if other != idx {
                            d *= buf.powers[l][kl as usize];
                        }
                    }
                    row[j] += d;
                }
            }
            buf.values[i] = sum.value();
            buf.scales[i] = scale;
        }
    }
}
