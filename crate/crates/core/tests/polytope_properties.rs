use newtonscope::poly::{ExponentVector, Polynomial};
use newtonscope::polytope::{
    homogenized_polytope, newton_polytope, reconstruct_polytope, symbolic_oracle, tropical_of_hypersurface,
    LatticePolytope, ReconstructSettings, Response, SymbolicAnswer,
};
use newtonscope::Rational;
use num_complex::Complex64;
use proptest::prelude::*;

/// Sparse polynomials with at least two terms and no monomial factor.
fn polynomial(n: usize, max_deg: u32, max_terms: usize) -> impl Strategy<Value = Polynomial> {
    let term = (prop::collection::vec(0..=max_deg, n), 1i32..=9);
    prop::collection::vec(term, 2..=max_terms).prop_filter_map("needs two terms", move |terms| {
        let f = Polynomial::from_terms(
            n,
            terms.into_iter().map(|(e, c)| (ExponentVector::new(e), Complex64::new(c as f64, 0.0))),
        );
        let content: Vec<u32> = (0..n).map(|j| f.terms().map(|(e, _)| e.as_slice()[j]).min().unwrap_or(0)).collect();
        let g = Polynomial::from_terms(
            n,
            f.terms().map(|(e, c)| {
                (ExponentVector::new(e.as_slice().iter().zip(&content).map(|(a, b)| a - b).collect()), *c)
            }),
        );
        (g.num_terms() >= 2).then_some(g)
    })
}

fn direction(n: usize) -> impl Strategy<Value = Vec<Rational>> {
    prop::collection::vec((-6i64..=6, 1i64..=3), n)
        .prop_map(|v| v.into_iter().map(|(p, q)| Rational::new(p, q)).collect())
}

fn pairing(x: &[i64], w: &[Rational]) -> Rational {
    x.iter().zip(w).map(|(a, b)| b * *a).sum()
}

fn symbolic_reconstruction(f: &Polynomial) -> Vec<Vec<i64>> {
    let oracle = |w: &[Rational]| symbolic_oracle(f, w).map(|a| Response::from(&a)).map_err(|e| e.to_string());
    let mut v = reconstruct_polytope(oracle, f.nvars(), f.degree(), &ReconstructSettings::default())
        .unwrap()
        .polytope
        .points()
        .to_vec();
    v.sort();
    v
}

/// Vertices of a planar point set by the monotone chain, without collinear points.
fn planar_hull(points: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let mut p: Vec<(i64, i64)> = points.iter().map(|q| (q[0], q[1])).collect();
    p.sort_unstable();
    p.dedup();
    if p.len() < 3 {
        return p.iter().map(|&(a, b)| vec![a, b]).collect();
    }
    let cross = |o: (i64, i64), a: (i64, i64), b: (i64, i64)| (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0);
    let mut hull: Vec<(i64, i64)> = Vec::new();
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &(i64, i64)>> =
            if pass == 0 { Box::new(p.iter()) } else { Box::new(p.iter().rev()) };
        for &q in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], q) <= 0 {
                hull.pop();
            }
            hull.push(q);
        }
        hull.pop();
    }
    let mut v: Vec<Vec<i64>> = hull.iter().map(|&(a, b)| vec![a, b]).collect();
    v.sort();
    v.dedup();
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn symbolic_reconstruction_finds_the_hull_vertices(f in polynomial(3, 4, 8)) {
        let exact = homogenized_polytope(&f).unwrap().vertices();
        prop_assert_eq!(symbolic_reconstruction(&f), exact);
    }

    #[test]
    fn planar_reconstruction_matches_monotone_chain(f in polynomial(2, 6, 8)) {
        let d = f.degree() as i64;
        let expected: Vec<Vec<i64>> = planar_hull(newton_polytope(&f).unwrap().points())
            .into_iter()
            .map(|v| vec![v[0], v[1], d - v[0] - v[1]])
            .collect();
        let mut expected = expected;
        expected.sort();
        prop_assert_eq!(symbolic_reconstruction(&f), expected);
    }

    #[test]
    fn support_function_is_attained_at_a_reconstructed_vertex(f in polynomial(3, 4, 8), w in direction(4)) {
        let p = homogenized_polytope(&f).unwrap();
        let best = symbolic_reconstruction(&f).iter().map(|v| pairing(v, &w)).max().unwrap();
        prop_assert_eq!(p.support_function(&w), best);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn exposed_faces_attain_the_support_function(f in polynomial(3, 5, 8), w in direction(3)) {
        let p = newton_polytope(&f).unwrap();
        let face = p.exposed_face(&w);
        let h = p.support_function(&w);
        prop_assert!(!face.points().is_empty());
        for x in face.points() {
            prop_assert!(p.points().contains(x));
            prop_assert_eq!(pairing(x, &w), h);
        }
        for x in p.points().iter().filter(|x| !face.points().contains(x)) {
            prop_assert!(pairing(x, &w) < h);
        }
    }

    #[test]
    fn hypersurface_tropicalization_matches_the_symbolic_oracle(f in polynomial(3, 5, 8), w in direction(3)) {
        let expected = match symbolic_oracle(&f, &w).unwrap() {
            SymbolicAnswer::FaceMin { .. } => true,
            SymbolicAnswer::Eep => f.num_terms() >= 2,
            SymbolicAnswer::Vertex { .. } => false,
        };
        prop_assert_eq!(tropical_of_hypersurface(&f, &w), expected);
    }

    #[test]
    fn zero_direction_exposes_everything(f in polynomial(3, 5, 8)) {
        prop_assert_eq!(symbolic_oracle(&f, &[Rational::from_integer(0); 3]).unwrap(), SymbolicAnswer::Eep);
    }

    #[test]
    fn all_ones_is_eep_exactly_for_homogeneous_polynomials(f in polynomial(2, 4, 6)) {
        let answer = symbolic_oracle(&f, &[Rational::from_integer(1); 2]).unwrap();
        prop_assert_eq!(answer == SymbolicAnswer::Eep, f.is_homogeneous());
    }
}

#[test]
fn vertices_of_a_square_with_interior_points() {
    let p = LatticePolytope::new(vec![vec![0, 0], vec![2, 0], vec![0, 2], vec![2, 2], vec![1, 1], vec![1, 0]]).unwrap();
    assert_eq!(p.vertices(), vec![vec![0, 0], vec![0, 2], vec![2, 0], vec![2, 2]]);
    assert_eq!(p.lattice_point_count(), 9);
    assert_eq!(planar_hull(p.points()), p.vertices());
}
