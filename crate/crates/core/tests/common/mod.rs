#![allow(dead_code)]

use newtonscope::numerics::{random_complex, seeded_rng};
use newtonscope::oracle::{build_oracle, OracleOutcome, OracleSettings, TargetChoice};
use newtonscope::poly::{ExponentVector, Polynomial};
use newtonscope::polytope::symbolic_oracle;
use newtonscope::tracker::TrackSettings;
use newtonscope::witness::witness_for_hypersurface;
use newtonscope::Rational;
use rand::Rng;

pub fn names(n: usize) -> Vec<String> {
    ["x", "y", "z", "w"][..n].iter().map(|s| s.to_string()).collect()
}

/// Random sparse polynomial with at least two terms, no monomial factor and
/// total degree at most `max_deg`.
pub fn random_sparse<R: Rng>(n: usize, max_deg: u32, max_terms: usize, rng: &mut R) -> Polynomial {
    loop {
        let k = rng.gen_range(2..=max_terms);
        let terms: Vec<(ExponentVector, _)> = (0..k)
            .map(|_| {
                let d = rng.gen_range(0..=max_deg);
                let mut e = vec![0u32; n];
                for _ in 0..d {
                    e[rng.gen_range(0..n)] += 1;
                }
                (ExponentVector::new(e), random_complex(rng))
            })
            .collect();
        let f = Polynomial::from_terms(n, terms);
        let content: Vec<u32> = (0..n).map(|j| f.terms().map(|(e, _)| e.as_slice()[j]).min().unwrap_or(0)).collect();
        let g = Polynomial::from_terms(
            n,
            f.terms().map(|(e, c)| {
                (ExponentVector::new(e.as_slice().iter().zip(&content).map(|(a, b)| a - b).collect()), *c)
            }),
        );
        if g.num_terms() >= 2 && g.degree() >= 1 {
            return g;
        }
    }
}

pub fn random_direction<R: Rng>(n: usize, range: i64, rng: &mut R) -> Vec<Rational> {
    (0..n).map(|_| Rational::from_integer(rng.gen_range(-range..=range))).collect()
}

pub fn ints(v: &[i64]) -> Vec<Rational> {
    v.iter().map(|&x| Rational::from_integer(x)).collect()
}

/// Numerical answer for `f` at `omega` with a fresh witness set and line family.
pub fn numeric_answer(f: &Polynomial, omega: &[Rational], seed: u64, stream: u64) -> Option<OracleOutcome> {
    let mut rng = seeded_rng(seed, stream);
    let w = witness_for_hypersurface(f, names(f.nvars()), &mut rng).ok()?;
    let ctx = build_oracle(&w, &TargetChoice::Default, &TrackSettings::default(), &mut rng).ok()?;
    ctx.query(omega, &OracleSettings::default()).ok().map(|a| a.outcome)
}

/// Agreement with the exact oracle, retrying once with a fresh line family.
/// Returns `(agreed first time, agreed after retry)`.
pub fn agrees_with_retry(f: &Polynomial, omega: &[Rational], seed: u64) -> (bool, bool) {
    let exact = symbolic_oracle(f, omega).unwrap();
    let first = numeric_answer(f, omega, seed, 0).is_some_and(|o| exact.agrees_with(&o));
    if first {
        return (true, true);
    }
    let second = numeric_answer(f, omega, seed, 1).is_some_and(|o| exact.agrees_with(&o));
    (false, second)
}
