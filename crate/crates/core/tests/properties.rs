use std::sync::OnceLock;

use capsym::geometric_measure::{coarea_integral, perimeter, total_variation_graph};
use capsym::pde_sphere::{lq_norm_direct, lq_norm_via_rearrangement};
use capsym::rearrange::{decreasing_rearrangement, distribution_function, symmetrize, symmetrize_set};
use capsym::{build_icosphere, CellSet, SphereFunction, SphereMesh};
use proptest::prelude::*;

fn mesh() -> &'static SphereMesh {
    static MESH: OnceLock<SphereMesh> = OnceLock::new();
    MESH.get_or_init(|| build_icosphere(2).unwrap())
}

fn values() -> impl Strategy<Value = Vec<f64>> {
    let n = mesh().vertex_count();
    prop_oneof![
        prop::collection::vec(-10.0..10.0f64, n),
        // few distinct levels exercise tie handling
        prop::collection::vec((-3i32..=3).prop_map(f64::from), n),
    ]
}

fn func(v: Vec<f64>) -> SphereFunction<'static> {
    SphereFunction::new(mesh(), v).unwrap()
}

fn members() -> impl Strategy<Value = Vec<bool>> {
    prop::collection::vec(any::<bool>(), mesh().vertex_count())
}

fn sup_diff(a: &SphereFunction, b: &SphereFunction) -> f64 {
    a.values().iter().zip(b.values()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn translation_commutes(v in values(), c in -5.0..5.0f64) {
        let u = func(v);
        let lhs = symmetrize(&u.map(|x| x + c));
        let rhs = symmetrize(&u).map(|x| x + c);
        prop_assert!(sup_diff(&lhs, &rhs) <= 1e-13 * (u.sup_norm() + c.abs()).max(1.0));
    }

    #[test]
    fn positive_scaling_commutes(v in values(), lambda in 0.01..100.0f64) {
        let u = func(v);
        let lhs = symmetrize(&u.map(|x| lambda * x));
        let rhs = symmetrize(&u).map(|x| lambda * x);
        prop_assert!(sup_diff(&lhs, &rhs) <= 1e-13 * lambda * u.sup_norm().max(1.0));
    }

    #[test]
    fn ordering_is_preserved(v in values(), w in values()) {
        let u = func(v);
        let upper = u.zip_with(&func(w), |a, b| a + b.abs());
        let (us, vs) = (symmetrize(&u), symmetrize(&upper));
        prop_assert!(us.values().iter().zip(vs.values()).all(|(a, b)| *a <= *b + 1e-13));
    }

    #[test]
    fn l1_contraction(v in values(), w in values()) {
        let (u, v) = (func(v), func(w));
        let lhs = symmetrize(&u).zip_with(&symmetrize(&v), |a, b| a - b).l1_norm();
        let rhs = u.zip_with(&v, |a, b| a - b).l1_norm();
        prop_assert!(lhs <= rhs + 1e-12 * rhs.max(1.0));
    }

    #[test]
    fn sup_coupling(v in values(), w in values()) {
        let (u, v) = (func(v), func(w));
        let ws = symmetrize(&u.zip_with(&v, f64::max));
        let (us, vs) = (symmetrize(&u), symmetrize(&v));
        for i in 0..ws.values().len() {
            prop_assert!(ws.values()[i] >= us.values()[i].max(vs.values()[i]) - 1e-13);
        }
    }

    #[test]
    fn integral_is_preserved(v in values()) {
        let u = func(v);
        let drift = (symmetrize(&u).integral() - u.integral()).abs();
        prop_assert!(drift <= 1e-12 * u.l1_norm().max(1.0));
    }

    #[test]
    fn negated_indicator_distribution(m in members()) {
        let e = CellSet::new(mesh(), m).unwrap();
        let lhs = distribution_function(&symmetrize(&e.indicator().map(|x| -x)));
        let rhs = distribution_function(&symmetrize_set(&e).indicator().map(|x| -x));
        let cell = mesh().max_vertex_area();
        for t in [-1.5, -1.0, -0.5, 0.0, 0.5] {
            prop_assert!((lhs.mass_above(t) - rhs.mass_above(t)).abs() <= cell);
        }
    }

    #[test]
    fn rearrangement_is_equimeasurable(v in values()) {
        let u = func(v);
        let prof = decreasing_rearrangement(&u);
        let dist = distribution_function(&u);
        for &(t, mass) in dist.breakpoints() {
            let measured: f64 = prof.segments().filter(|s| s.2 > t).map(|s| s.1 - s.0).sum();
            prop_assert!((measured - mass).abs() <= 1e-12 * 4.0 * std::f64::consts::PI);
        }
        prop_assert!(prof.segments().zip(prof.segments().skip(1)).all(|(a, b)| a.2 >= b.2));
    }

    #[test]
    fn graph_coarea_is_exact(v in values()) {
        let u = func(v);
        let tv = total_variation_graph(&u);
        prop_assert!((coarea_integral(&u) - tv).abs() <= 1e-10 * tv.max(1e-300));
    }

    #[test]
    fn perimeter_complement_symmetry(m in members()) {
        let e = CellSet::new(mesh(), m).unwrap();
        prop_assert_eq!(perimeter(&e), perimeter(&e.complement()));
    }

    #[test]
    fn hardy_littlewood(v in values(), w in values()) {
        let (u, v) = (func(v), func(w));
        let direct = u.zip_with(&v, |a, b| a * b).integral();
        let bound = decreasing_rearrangement(&u).product_integral(&decreasing_rearrangement(&v));
        prop_assert!(direct <= bound + 1e-10);
    }

    #[test]
    fn lq_identity(v in values(), q in 1.1..6.0f64) {
        let u = func(v);
        let a = lq_norm_via_rearrangement(&u, q).unwrap();
        let b = lq_norm_direct(&u, q);
        prop_assert!((a - b).abs() <= 1e-10 * b.max(1e-300));
    }
}
