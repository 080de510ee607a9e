use num_complex::Complex64;

use super::{Homotopy, HomotopyEval};
use crate::numerics::ComplexMatrix;
use crate::poly::{EvalBuffers, PolySystem, SystemEvaluator};

fn eval_into(ev: &SystemEvaluator, x: &[Complex64]) -> EvalBuffers {
    let mut buf = ev.buffers();
    ev.evaluate(x, &mut buf);
    buf
}

/// `H(x, τ) = (1 − τ) F(x) + γ τ G(x)` for `τ` from 1 to 0.
#[derive(Clone, Debug)]
pub struct LinearHomotopy {
    target: SystemEvaluator,
    start: SystemEvaluator,
    gamma: Complex64,
}

impl LinearHomotopy {
    pub fn new(target: &PolySystem, start: &PolySystem, gamma: Complex64) -> Self {
        assert!(target.is_square() && start.is_square(), "homotopy systems must be square");
        assert_eq!(target.nvars(), start.nvars(), "start and target shapes differ");
        Self { target: SystemEvaluator::new(target), start: SystemEvaluator::new(start), gamma }
    }
}

impl Homotopy for LinearHomotopy {
    fn dim(&self) -> usize {
        self.target.nvars()
    }

    fn evaluate(&self, x: &[Complex64], tau: f64, out: &mut HomotopyEval) {
        let f = eval_into(&self.target, x);
        let g = eval_into(&self.start, x);
        let a = Complex64::new(1.0 - tau, 0.0);
        let b = self.gamma * tau;
        for i in 0..self.dim() {
            out.values[i] = a * f.values[i] + b * g.values[i];
            out.dtau[i] = self.gamma * g.values[i] - f.values[i];
            out.scales[i] = a.norm() * f.scales[i] + b.norm() * g.scales[i];
        }
        let data = f.jacobian.iter().zip(&g.jacobian).map(|(p, q)| a * p + b * q).collect();
        out.jacobian = ComplexMatrix::from_row_major(self.dim(), self.dim(), data);
    }

    fn parameter_path(&self) -> (f64, f64) {
        (1.0, 0.0)
    }
}

/// `H(x, τ) = F(x) − τ F(x₀)` for `τ` from 1 to 0, which starts at `x₀`.
#[derive(Clone, Debug)]
pub struct OffsetHomotopy {
    system: SystemEvaluator,
    offset: Vec<Complex64>,
}

impl OffsetHomotopy {
    pub fn new(system: &PolySystem, x0: &[Complex64]) -> Self {
        assert!(system.is_square(), "homotopy systems must be square");
        let system = SystemEvaluator::new(system);
        let offset = system.values(x0);
        Self { system, offset }
    }
}

impl Homotopy for OffsetHomotopy {
    fn dim(&self) -> usize {
        self.system.nvars()
    }

    fn evaluate(&self, x: &[Complex64], tau: f64, out: &mut HomotopyEval) {
        let f = eval_into(&self.system, x);
        for i in 0..self.dim() {
            out.values[i] = f.values[i] - self.offset[i] * tau;
            out.dtau[i] = -self.offset[i];
            out.scales[i] = f.scales[i] + self.offset[i].norm() * tau.abs();
        }
        out.jacobian = ComplexMatrix::from_row_major(self.dim(), self.dim(), f.jacobian);
    }

    fn parameter_path(&self) -> (f64, f64) {
        (1.0, 0.0)
    }
}

/// A fixed system completed by affine equations on selected coordinates whose
/// coefficients move as `R(τ) = τ γ R_old + (1 − τ) R_new`, `τ` from 1 to 0.
#[derive(Clone, Debug)]
pub struct SliceHomotopy {
    fixed: SystemEvaluator,
    coords: Vec<usize>,
    old: ComplexMatrix,
    new: ComplexMatrix,
    gamma: Complex64,
}

impl SliceHomotopy {
    /// `old` and `new` are k×(coords.len()+1) with the constant term last.
    pub fn new(
        fixed: &PolySystem,
        coords: Vec<usize>,
        old: ComplexMatrix,
        new: ComplexMatrix,
        gamma: Complex64,
    ) -> Self {
        assert_eq!(old.nrows(), new.nrows());
        assert_eq!(old.ncols(), coords.len() + 1);
        assert_eq!(new.ncols(), coords.len() + 1);
        assert_eq!(fixed.len() + old.nrows(), fixed.nvars(), "sliced system must be square");
        Self { fixed: SystemEvaluator::new(fixed), coords, old, new, gamma }
    }
}

impl Homotopy for SliceHomotopy {
    fn dim(&self) -> usize {
        self.fixed.nvars()
    }

    fn evaluate(&self, x: &[Complex64], tau: f64, out: &mut HomotopyEval) {
        let n = self.dim();
        let m = self.fixed.neqs();
        let f = eval_into(&self.fixed, x);
        let mut jac = f.jacobian;
        jac.resize(n * n, Complex64::default());
        out.values[..m].copy_from_slice(&f.values);
        out.scales[..m].copy_from_slice(&f.scales);
        out.dtau[..m].iter_mut().for_each(|v| *v = Complex64::default());
        let k = self.coords.len();
        let wo = self.gamma * tau;
        let wn = Complex64::new(1.0 - tau, 0.0);
        for r in 0..self.old.nrows() {
            let (ro, rn) = (self.old.row(r), self.new.row(r));
            let mut value = ro[k] * wo + rn[k] * wn;
            let mut d = ro[k] * self.gamma - rn[k];
            let mut scale = value.norm();
            for (j, &col) in self.coords.iter().enumerate() {
                let coef = ro[j] * wo + rn[j] * wn;
                let term = coef * x[col];
                value += term;
                scale += term.norm();
                d += (ro[j] * self.gamma - rn[j]) * x[col];
                jac[(m + r) * n + col] = coef;
            }
            out.values[m + r] = value;
            out.dtau[m + r] = d;
            out.scales[m + r] = scale;
        }
        out.jacobian = ComplexMatrix::from_row_major(n, n, jac);
    }

    fn parameter_path(&self) -> (f64, f64) {
        (1.0, 0.0)
    }
}
