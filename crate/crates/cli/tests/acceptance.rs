//! Acceptance criteria, one PASS/FAIL line each. The stretch criterion runs
//! only with `--ignored` or `--include-ignored`.

use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use newtonscope::numerics::{random_complex, seeded_rng};
use newtonscope::oracle::{build_oracle, OracleSettings, PathVerdict, TargetChoice};
use newtonscope::poly::{ExponentVector, LineFamily, Polynomial};
use newtonscope::polytope::{
    facial_roots, homogenized_polytope, reconstruct_polytope, symbolic_oracle, BoundConstants, ReconstructSettings,
    Response,
};
use newtonscope::tracker::TrackSettings;
use newtonscope::witness::witness_for_hypersurface;
use newtonscope::Rational;
use num_complex::Complex64;
use rand::Rng;
use serde_json::Value;

const SIGNS: [[i64; 3]; 8] =
    [[1, 1, 1], [1, 1, -1], [1, -1, 1], [1, -1, -1], [-1, 1, 1], [-1, 1, -1], [-1, -1, 1], [-1, -1, -1]];

type Criterion = (usize, &'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

/// Runs the binary; returns exit code and parsed stdout.
fn newtonscope(args: &[&str]) -> (i32, Option<Value>) {
    let out = Command::new(env!("CARGO_BIN_EXE_newtonscope"))
        .args(args)
        .env_remove("NEWTONSCOPE_SEED")
        .output()
        .expect("binary runs");
    (out.status.code().unwrap_or(-1), serde_json::from_slice(&out.stdout).ok())
}

fn names(n: usize) -> Vec<String> {
    ["x", "y", "z"][..n].iter().map(|s| s.to_string()).collect()
}

fn ints(v: &[i64]) -> Vec<Rational> {
    v.iter().map(|&x| Rational::from_integer(x)).collect()
}

/// Sparse polynomial in `n` variables, total degree at most `max_deg`, between
/// two and `max_terms` terms, with no monomial factor.
fn random_sparse<R: Rng>(n: usize, max_deg: u32, max_terms: usize, rng: &mut R) -> Polynomial {
    loop {
        let k = rng.gen_range(2..=max_terms);
        let terms: Vec<(ExponentVector, Complex64)> = (0..k)
            .map(|_| {
                let mut e = vec![0u32; n];
                for _ in 0..rng.gen_range(0..=max_deg) {
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

fn numeric_response(f: &Polynomial, omega: &[Rational], seed: u64, stream: u64) -> Option<Response> {
    let mut rng = seeded_rng(seed, stream);
    let w = witness_for_hypersurface(f, names(f.nvars()), &mut rng).ok()?;
    let ctx = build_oracle(&w, &TargetChoice::Default, &TrackSettings::default(), &mut rng).ok()?;
    ctx.query(omega, &OracleSettings::default()).ok().map(|a| Response::from(&a.outcome))
}

fn criterion_1() -> Outcome {
    let file = fixture("projected_sextic.sys");
    let (mut decisive, mut correct, mut slowest) = (0, 0, Duration::ZERO);
    for seed in 0..20 {
        let start = Instant::now();
        let (code, json) =
            newtonscope(&["oracle", file.to_str().unwrap(), "--omega", "3,2", "--seed", &seed.to_string()]);
        slowest = slowest.max(start.elapsed());
        let Some(v) = json else { continue };
        if code == 0 {
            decisive += 1;
        }
        if v["beta"] == serde_json::json!([2, 4]) && v["betaInf"] == 0 && v["vertex"] == true {
            correct += 1;
        }
    }
    Outcome {
        pass: decisive >= 19 && correct == decisive && slowest < Duration::from_secs(10),
        detail: format!(
            "{decisive}/20 decisive, {correct} equal to (2,4,0), slowest run {:.2}s",
            slowest.as_secs_f64()
        ),
    }
}

fn criterion_2() -> Outcome {
    let map = fixture("xyz.map");
    let mapped_i = [false, true, true, false, true, false, false, true];
    let mapped_j = [true, false, false, true, false, true, true, false];
    let mut plain = 0;
    let mut mapped = 0;
    let mut misses = Vec::new();
    for (file, want) in [("ideal_i.sys", mapped_i), ("ideal_j.sys", mapped_j)] {
        let path = fixture(file);
        for (w, expect) in SIGNS.iter().zip(want) {
            let omega = w.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",");
            let (_, v) = newtonscope(&["tropical", path.to_str().unwrap(), "--omega", &omega]);
            if v.as_ref().is_some_and(|v| v["verdict"] == true) {
                plain += 1;
            } else {
                misses.push(format!("{file} {omega}"));
            }
            let (_, v) = newtonscope(&[
                "tropical",
                path.to_str().unwrap(),
                "--omega",
                &omega,
                "--monomial-map",
                map.to_str().unwrap(),
            ]);
            if v.as_ref().is_some_and(|v| v["verdict"] == expect) {
                mapped += 1;
            } else {
                misses.push(format!("{file} {omega} mapped"));
            }
        }
    }
    Outcome {
        pass: plain == 16 && mapped == 16,
        detail: format!("unmapped {plain}/16 true, mapped {mapped}/16 as expected {misses:?}"),
    }
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let mut rng = seeded_rng(3, 0);
    let (mut queries, mut first, mut unresolved) = (0usize, 0usize, 0usize);
    for case in 0..100u64 {
        let n = 2 + rng.gen_range(0..2);
        let f = random_sparse(n, 6, 8, &mut rng);
        for _ in 0..10 {
            let omega: Vec<Rational> = (0..n).map(|_| Rational::from_integer(rng.gen_range(-5..=5))).collect();
            let exact = Response::from(&symbolic_oracle(&f, &omega).unwrap());
            queries += 1;
            if numeric_response(&f, &omega, case, 0).as_ref() == Some(&exact) {
                first += 1;
            } else if numeric_response(&f, &omega, case, 1).as_ref() != Some(&exact) {
                unresolved += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    Outcome {
        pass: first * 100 >= 99 * queries && unresolved == 0 && elapsed < Duration::from_secs(300),
        detail: format!(
            "{first}/{queries} agree first time, {unresolved} unresolved after retry, {:.1}s",
            elapsed.as_secs_f64()
        ),
    }
}

/// Planar polynomial whose face under `ω = (−1, 0)` is a univariate `g(y)`
/// and whose other terms carry `x^j` with `j ≥ gap`. Odd cases swap the
/// variables.
fn bound_case<R: Rng>(k: usize, rng: &mut R) -> (Polynomial, Vec<Rational>, f64) {
    let gap = 1 + (k % 3) as u32;
    let face_roots = 1 + (k / 3) % 3;
    let double = k % 5 == 4;
    let mut g = Polynomial::constant(2, random_complex(rng));
    let y = Polynomial::variable(2, 1);
    let mut roots: Vec<Complex64> = (0..face_roots).map(|_| random_complex(rng) + Complex64::new(0.5, 0.0)).collect();
    if double {
        roots.push(roots[0]);
    }
    for r in roots {
        g = &g * &(&y - &Polynomial::constant(2, r));
    }
    let mut terms: Vec<(ExponentVector, Complex64)> = g.terms().map(|(e, c)| (e.clone(), *c)).collect();
    terms.push((ExponentVector::new(vec![gap, rng.gen_range(0..=1)]), random_complex(rng)));
    for _ in 0..rng.gen_range(0..=2) {
        let j = gap + rng.gen_range(0..=1);
        terms.push((ExponentVector::new(vec![j, rng.gen_range(0..=2)]), random_complex(rng)));
    }
    let swap = k % 2 == 1;
    let f = Polynomial::from_terms(
        2,
        terms.into_iter().map(|(e, c)| {
            let e = e.as_slice();
            (ExponentVector::new(if swap { vec![e[1], e[0]] } else { e.to_vec() }), c)
        }),
    );
    let omega = if swap { ints(&[0, -1]) } else { ints(&[-1, 0]) };
    (f, omega, gap as f64)
}

/// Distances below this, relative to `1 + |τ|`, are rounding error in the
/// tracked parameter. Near a root of multiplicity `β` the floor is its `β`-th root.
const NOISE_FLOOR: f64 = 1e-10;

fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Checks every off-target path of one case: the bound after capture and the
/// decay slope. Returns the number of paths checked.
fn check_bound_case(k: usize) -> Result<usize, String> {
    let mut rng = seeded_rng(400 + k as u64, 0);
    let (f, omega, d_omega) = bound_case(k, &mut rng);
    let w = witness_for_hypersurface(&f, names(2), &mut rng).map_err(|e| e.to_string())?;
    let ctx =
        build_oracle(&w, &TargetChoice::Default, &TrackSettings::default(), &mut rng).map_err(|e| e.to_string())?;
    let settings = OracleSettings { certainty: 7.0, max_tracks: 4000, ..OracleSettings::default() };
    let answer = ctx.query(&omega, &settings).map_err(|e| e.to_string())?;
    let line = LineFamily::new(omega.clone(), ctx.a().to_vec(), ctx.b().to_vec()).map_err(|e| e.to_string())?;
    let facial = facial_roots(&f, &omega, &line).map_err(|e| e.to_string())?;
    let mut checked = 0;
    for trace in &answer.traces {
        let PathVerdict::ToOther { point } = trace.verdict else { continue };
        let consts = BoundConstants::new(&f, &omega, &line, point).map_err(|e| format!("path {}: {e}", trace.index))?;
        let beta = facial.roots.iter().find(|(r, _)| (r - consts.tau).norm() < 1e-9).map_or(1, |r| r.1);
        let dist: Vec<(f64, f64)> = trace.samples.iter().map(|s| (s.log_t, (s.s - consts.tau).norm())).collect();
        let capture = dist.iter().rposition(|&(_, r)| r >= consts.gamma).map_or(0, |i| i + 1);
        let floor = NOISE_FLOOR.powf(1.0 / beta as f64) * (1.0 + consts.tau.norm());
        let tail: Vec<(f64, f64)> = dist[capture..].iter().copied().filter(|&(_, r)| r > floor).collect();
        if let Some(&(log_t, r)) = tail.iter().find(|&&(log_t, r)| consts.bound(log_t.exp()) < r.powi(beta as i32)) {
            return Err(format!(
                "case {k} path {}: bound {:.3e} < {:.3e} at log t = {log_t:.2}",
                trace.index,
                consts.bound(log_t.exp()),
                r.powi(beta as i32)
            ));
        }
        let fit: Vec<(f64, f64)> = tail.iter().map(|&(t, r)| (t, r.ln())).collect();
        if fit.len() < 5 {
            return Err(format!("case {k} path {}: only {} samples after capture", trace.index, fit.len()));
        }
        let slope = least_squares_slope(&fit);
        let expected = -d_omega / beta as f64;
        if (slope - expected).abs() > 0.25 * expected.abs() {
            return Err(format!("case {k} path {}: slope {slope:.3}, expected {expected:.3}", trace.index));
        }
        checked += 1;
    }
    if checked == 0 {
        return Err(format!("case {k}: no path converged off target ({:?})", answer.outcome));
    }
    Ok(checked)
}

fn criterion_4() -> Outcome {
    let mut paths = 0;
    let mut failures = Vec::new();
    for k in 0..20 {
        match check_bound_case(k) {
            Ok(p) => paths += p,
            Err(e) => failures.push(e),
        }
    }
    Outcome {
        pass: failures.is_empty(),
        detail: format!("{}/20 cases, {paths} off-target paths checked {failures:?}", 20 - failures.len()),
    }
}

fn criterion_5() -> Outcome {
    let mut rng = seeded_rng(5, 0);
    let mut matched = 0;
    let mut misses = Vec::new();
    for case in 0..20u64 {
        let n = 2 + (case % 2) as usize;
        let f = random_sparse(n, 5, 6, &mut rng);
        let exact = homogenized_polytope(&f).unwrap().vertices();
        let mut crng = seeded_rng(case, 7);
        let result = witness_for_hypersurface(&f, names(n), &mut crng)
            .map_err(|e| e.to_string())
            .and_then(|w| {
                build_oracle(&w, &TargetChoice::Default, &TrackSettings::default(), &mut crng)
                    .map_err(|e| e.to_string())
            })
            .and_then(|ctx| {
                let oracle = |w: &[Rational]| {
                    ctx.query(w, &OracleSettings::default())
                        .map(|a| Response::from(&a.outcome))
                        .map_err(|e| e.to_string())
                };
                reconstruct_polytope(oracle, n, f.degree(), &ReconstructSettings::default()).map_err(|e| e.to_string())
            });
        match result {
            Ok(r) if r.polytope.points() == exact.as_slice() => matched += 1,
            Ok(r) => misses.push(format!("case {case}: got {:?}, want {exact:?}", r.polytope.points())),
            Err(e) => misses.push(format!("case {case}: {e}")),
        }
    }
    let numeric = newtonscope(&["polytope", fixture("projected_sextic.sys").to_str().unwrap()]).1;
    let symbolic = newtonscope(&["polytope", fixture("sextic_resultant.sys").to_str().unwrap(), "--symbolic"]).1;
    let sextic = match (&numeric, &symbolic) {
        (Some(a), Some(b)) => a["vertices"] == b["vertices"] && a["vertices"].is_array(),
        _ => false,
    };
    Outcome {
        pass: matched == 20 && sextic,
        detail: format!(
            "{matched}/20 random polytopes exact, sextic {} {misses:?}",
            if sextic { "matches the resultant hull" } else { "differs from the resultant hull" }
        ),
    }
}

fn criterion_6() -> Outcome {
    // Twelve 4×4 minors of a 4×7 matrix: the square system after slicing has
    // total degree 4^11 even after eliminating the fibre, far beyond a
    // total-degree start system.
    Outcome {
        pass: false,
        detail: "not attainable: the projected witness set needs a 4^11-path total-degree solve".into(),
    }
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    if args.iter().any(|a| a == "--list") {
        for i in 1..=7 {
            println!("criterion_{i}: test");
        }
        return;
    }
    let stretch = args.iter().any(|a| a == "--ignored" || a == "--include-ignored");
    let only_stretch = args.iter().any(|a| a == "--ignored");
    let gating: [Criterion; 5] = [
        (1, "single-direction oracle on the sextic", criterion_1),
        (2, "tropical membership with and without the xyz map", criterion_2),
        (3, "numeric versus exact oracle on random polynomials", criterion_3),
        (4, "convergence bound and decay rate", criterion_4),
        (5, "polytope reconstruction round trip", criterion_5),
    ];
    let mut failed = 0;
    if !only_stretch {
        for (i, name, run) in gating {
            let start = Instant::now();
            let o = run();
            failed += usize::from(!o.pass);
            println!(
                "criterion {i}: {} {name}: {} ({:.1}s)",
                if o.pass { "PASS" } else { "FAIL" },
                o.detail,
                start.elapsed().as_secs_f64()
            );
        }
    }
    if stretch {
        let o = criterion_6();
        failed += usize::from(!o.pass);
        println!("criterion 6: {} multiview tensor polytope: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    } else {
        println!("criterion 6: IGNORED multiview tensor polytope (stretch; run with --ignored)");
    }
    println!("criterion 7: OUT OF SCOPE degree-54 hypersurface, excluded by the criteria themselves");
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
