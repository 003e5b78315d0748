use proptest::prelude::*;

use cliffgr::dirac;
use cliffgr::fixtures;
use cliffgr::geometry::Snapshot;
use cliffgr::stal::Multivector;

fn mv() -> impl Strategy<Value = Multivector> {
    prop::array::uniform16(-1.0f64..1.0).prop_map(Multivector::from_coeffs)
}

fn homogeneous(k: usize) -> impl Strategy<Value = Multivector> {
    mv().prop_map(move |m| m.grade(k).unwrap())
}

fn close(a: Multivector, b: Multivector, tol: f64) -> bool {
    (a - b).max_abs() <= tol
}

proptest! {
    #[test]
    fn geometric_product_is_associative(a in mv(), b in mv(), c in mv()) {
        prop_assert!(close(a.gp(&b).gp(&c), a.gp(&b.gp(&c)), 1e-12));
    }

    #[test]
    fn reverse_is_an_anti_automorphism(a in mv(), b in mv()) {
        prop_assert!(close(a.gp(&b).reverse(), b.reverse().gp(&a.reverse()), 1e-12));
    }

    #[test]
    fn lowering_is_an_automorphism(a in mv(), b in mv()) {
        prop_assert!(close(a.gp(&b).lower(), a.lower().gp(&b.lower()), 1e-12));
    }

    #[test]
    fn hodge_round_trips(a in mv()) {
        prop_assert!(close(a.hodge().hodge_inv(), a, 1e-14));
    }

    #[test]
    fn wedge_of_a_vector_with_itself_vanishes(v in homogeneous(1), b in mv()) {
        prop_assert!(v.wedge(&v.wedge(&b)).max_abs() <= 1e-14);
    }

    #[test]
    fn vector_square_is_its_scalar_product(v in homogeneous(1)) {
        prop_assert!(close(v.gp(&v), Multivector::scalar(v.scalar_prod(&v)), 1e-14));
    }

    #[test]
    fn commutator_is_antisymmetric_and_satisfies_jacobi(a in mv(), b in mv(), c in mv()) {
        prop_assert!(close(a.comm(&b), -b.comm(&a), 0.0));
        let j = a.comm(&b.comm(&c)) + b.comm(&c.comm(&a)) + c.comm(&a.comm(&b));
        prop_assert!(j.max_abs() <= 1e-11);
    }

    #[test]
    fn bivectors_close_under_commutation(a in homogeneous(2), b in homogeneous(2)) {
        let c = a.comm(&b);
        prop_assert!(close(c, c.grade(2).unwrap(), 1e-14));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn dirac_operator_splits_into_d_minus_delta(
        r in 4.0f64..50.0,
        th in 0.3f64..2.8,
        p in 0usize..=4,
        seed in any::<u64>(),
    ) {
        let s = Snapshot::new(&fixtures::schwarzschild(), [0.0, r, th, 0.3], 3).unwrap();
        let f = dirac::polynomial_field(p, 3, seed);
        prop_assert!(dirac::split_residual(&s, &f).unwrap() < 1e-9);
    }

    #[test]
    fn torsion_vanishes_on_frw(t in 0.5f64..3.0, x in -1.0f64..1.0) {
        let s = Snapshot::new(&fixtures::frw(), [t, x, 0.2, -0.1], 2).unwrap();
        prop_assert!(s.torsion_scalar().unwrap() < 1e-9);
        prop_assert!(s.tetrad_residual() < 1e-12);
    }
}
