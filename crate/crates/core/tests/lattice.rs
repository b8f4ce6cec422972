use harmonic_lattice::lattice::{
    discrete_laplacian, edge_gradient, lp_norm, reduce, unwrap, wrap, BoxDomain, EdgeSetKind,
    GridDomain, GridFunction, LatticeFunction, OrientedEdge, PNorm,
};
use proptest::prelude::*;

fn grid(d: usize, n: usize, seed: u64) -> GridFunction {
    let domain = GridDomain::Cube { d, n };
    GridFunction::from_fn(domain, |x| {
        let s: i64 = x.iter().enumerate().map(|(i, c)| (i as i64 + 3) * c * c).sum();
        ((s as f64) * 0.37 + seed as f64).sin()
    })
}

#[test]
fn boundary_count_matches_closed_form() {
    for d in 2..=4 {
        for n in 2..=10 {
            let domain = BoxDomain::new(d, n).unwrap();
            let expected = (n + 1).pow(d as u32) - (n - 1).pow(d as u32);
            assert_eq!(domain.boundary_vertices().len(), expected, "d={d} N={n}");
        }
    }
}

#[test]
fn edge_sets_are_disjoint_subsets_of_full() {
    for (d, n) in [(2, 2), (2, 5), (3, 3), (4, 2)] {
        let domain = BoxDomain::new(d, n).unwrap();
        let tan = domain.edges(EdgeSetKind::Tangential);
        let nor = domain.edges(EdgeSetKind::Normal);
        let full = domain.edges(EdgeSetKind::Full);
        assert!(tan.iter().all(|e| !nor.contains(e)));
        assert!(tan.iter().chain(&nor).all(|e| full.contains(e)));
        for e in &full {
            let dist: i64 = e.head.iter().zip(&e.tail).map(|(a, b)| (a - b).abs()).sum();
            assert_eq!(dist, 1);
        }
    }
}

#[test]
fn edges_reject_non_neighbours() {
    assert!(OrientedEdge::new(vec![0, 0], vec![1, 1]).is_err());
    assert!(OrientedEdge::new(vec![0, 0], vec![0, 0]).is_err());
    assert!(OrientedEdge::new(vec![0, 0], vec![0, -1]).is_ok());
}

#[test]
fn box_evaluation_outside_is_an_error() {
    let u = grid(2, 4, 0);
    assert!(u.value(&[5, 0]).is_err());
    assert!(u.value(&[-1, 2]).is_err());
    let t = GridFunction::from_fn(GridDomain::Torus { d: 1, l: 4 }, |x| x[0] as f64);
    assert_eq!(t.value(&[9]).unwrap(), t.value(&[1]).unwrap());
}

#[test]
fn laplacian_is_edge_divergence() {
    let u = grid(3, 4, 1);
    let domain = BoxDomain::new(3, 4).unwrap();
    for x in domain.interior_vertices() {
        let div: f64 = domain
            .neighbours(&x)
            .into_iter()
            .map(|y| edge_gradient(&u, &OrientedEdge::new(x.clone(), y).unwrap()).unwrap())
            .sum();
        assert!((div - discrete_laplacian(&u, &x).unwrap()).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gradient_is_antisymmetric(seed in 0u64..1000, d in 2usize..4) {
        let u = grid(d, 3, seed);
        let domain = BoxDomain::new(d, 3).unwrap();
        for e in domain.full_edges() {
            let fwd = edge_gradient(&u, &e).unwrap();
            let back = edge_gradient(&u, &e.reverse()).unwrap();
            prop_assert_eq!(fwd, -back);
        }
    }

    #[test]
    fn lp_norm_triangle_and_monotone(
        a in prop::collection::vec(-10.0f64..10.0, 1..40),
        p in prop_oneof![Just(f64::INFINITY), 1.0f64..6.0],
        scale in 0.0f64..1.0,
    ) {
        let p = PNorm::new(p).unwrap();
        let b: Vec<f64> = a.iter().enumerate().map(|(i, v)| v * (i as f64).cos()).collect();
        let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        let na = lp_norm(a.iter().copied(), p);
        let nb = lp_norm(b.iter().copied(), p);
        prop_assert!(lp_norm(sum.iter().copied(), p) <= (na + nb) * (1.0 + 1e-12));
        let smaller: Vec<f64> = a.iter().map(|v| v * scale).collect();
        prop_assert!(lp_norm(smaller.iter().copied(), p) <= na * (1.0 + 1e-12));
    }

    #[test]
    fn periodic_reduction_is_consistent(x in -10_000i64..10_000, l in 1usize..64) {
        let j = wrap(x, l);
        prop_assert!(j < 2 * l);
        let r = reduce(x, l);
        prop_assert!(r > -(l as i64) && r <= l as i64);
        prop_assert_eq!(unwrap(j, l), r);
        prop_assert_eq!((x - r).rem_euclid(2 * l as i64), 0);
    }
}

#[test]
fn exponent_below_one_is_rejected() {
    assert!(PNorm::new(0.5).is_err());
    assert!(PNorm::new(f64::NAN).is_err());
    assert_eq!(PNorm::new(f64::INFINITY).unwrap(), PNorm::Infinity);
}
