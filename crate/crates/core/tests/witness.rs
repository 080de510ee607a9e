use newtonscope::numerics::{random_slice, seeded_rng};
use newtonscope::poly::{parse_polynomial, PolySystem};
use newtonscope::tracker::TrackSettings;
use newtonscope::witness::{move_slice, witness_for_hypersurface, witness_for_projection, WitnessSet};
use num_complex::Complex64;

fn names(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

fn example_one() -> PolySystem {
    PolySystem::parse(&["x", "y", "t"], &["x*y*t-(x-y-t)^2+3*x+t", "x+y^2+t^2"]).unwrap()
}

fn same_point_sets(a: &[Vec<Complex64>], b: &[Vec<Complex64>], tol: f64) -> bool {
    a.len() == b.len() && a.iter().all(|p| b.iter().any(|q| p.iter().zip(q).all(|(u, v)| (u - v).norm() < tol)))
}

#[test]
fn twisted_cubic_projects_to_a_parabola() {
    let s = PolySystem::parse(&["x", "y", "z"], &["y-x^2", "z-x^3"]).unwrap();
    let w = witness_for_projection(&s, &[2], &TrackSettings::default(), &mut seeded_rng(4, 0)).unwrap();
    assert_eq!(w.degree(), 2);
    assert!(w.max_residual() < 1e-8);
    for p in w.projected_points() {
        assert!((p[1] - p[0] * p[0]).norm() < 1e-8);
    }
}

#[test]
fn example_one_sextic() {
    let s = example_one();
    for seed in 0..5 {
        let w = witness_for_projection(&s, &[2], &TrackSettings::default(), &mut seeded_rng(seed, 0)).unwrap();
        assert_eq!(w.degree(), 6, "seed {seed}");
        assert!(w.max_residual() < 1e-8);
    }
}

#[test]
fn identity_projection_matches_hypersurface() {
    let s = PolySystem::parse(&["x", "y"], &["x^2+y^2-1"]).unwrap();
    let w = witness_for_projection(&s, &[], &TrackSettings::default(), &mut seeded_rng(2, 0)).unwrap();
    assert_eq!(w.degree(), 2);
}

#[test]
fn positive_dimensional_fibers_get_hyperplanes() {
    // A surface in C^3 that is a cylinder over the circle: fibers over (x, y) are lines.
    let s = PolySystem::parse(&["x", "y", "z"], &["x^2+y^2-1"]).unwrap();
    let w = witness_for_projection(&s, &[2], &TrackSettings::default(), &mut seeded_rng(8, 0)).unwrap();
    assert_eq!(w.degree(), 2);
    assert_eq!(w.system().len(), 2);
}

#[test]
fn move_slice_round_trip() {
    let f = parse_polynomial("x^2+y^2-1", &names(&["x", "y"])).unwrap();
    let settings = TrackSettings::default();
    let mut rng = seeded_rng(21, 0);
    let w = witness_for_hypersurface(&f, names(&["x", "y"]), &mut rng).unwrap();
    let same = move_slice(&w, &w.slice().clone(), &settings, &mut rng).unwrap();
    assert_eq!(same.points(), w.points());
    let other = random_slice(2, 1, &mut rng).unwrap();
    let moved = move_slice(&w, &other, &settings, &mut rng).unwrap();
    assert_eq!(moved.degree(), 2);
    assert!(moved.max_residual() < 1e-8);
    let back = move_slice(&moved, w.slice(), &settings, &mut rng).unwrap();
    assert!(same_point_sets(back.points(), w.points(), 1e-6));
}

#[test]
fn degree_is_stable_under_reslicing() {
    let s = example_one();
    let settings = TrackSettings::default();
    let mut rng = seeded_rng(5, 0);
    let w = witness_for_projection(&s, &[2], &settings, &mut rng).unwrap();
    for _ in 0..10 {
        let slice = random_slice(2, 1, &mut rng).unwrap();
        let moved = move_slice(&w, &slice, &settings, &mut rng).unwrap();
        assert_eq!(moved.degree(), 6);
        assert!(moved.max_residual() < 1e-8);
    }
}

#[test]
fn random_hypersurfaces_have_full_degree() {
    use rand::Rng;
    let mut rng = seeded_rng(99, 0);
    for _ in 0..10 {
        let d = rng.gen_range(1..=5);
        // Dense random polynomials are squarefree with probability one.
        let mut terms = Vec::new();
        for i in 0..=d {
            for j in 0..=(d - i) {
                terms.push(format!(
                    "({:.3}{:+.3}i)*x^{}*y^{}",
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    i,
                    j
                ));
            }
        }
        let f = parse_polynomial(&terms.join(" + "), &names(&["x", "y"])).unwrap();
        let w = witness_for_hypersurface(&f, names(&["x", "y"]), &mut rng).unwrap();
        assert_eq!(w.degree(), d as usize);
    }
}

#[test]
fn document_round_trip() {
    let w = witness_for_projection(&example_one(), &[2], &TrackSettings::default(), &mut seeded_rng(3, 0))
        .unwrap()
        .with_seed(3);
    let doc = w.to_document();
    let text = serde_json::to_string(&doc).unwrap();
    let back = WitnessSet::from_document(&serde_json::from_str(&text).unwrap()).unwrap();
    assert_eq!(back.to_document(), doc);
    assert_eq!(doc.degree, 6);
    assert_eq!(doc.seed, Some(3));
}
