use num_complex::Complex64;
use pmech::bargmann::{beta_action, dynamical_group, FockVec, DEFAULT_DIM};
use pmech::grid::{GridSpec, PFunction};
use pmech::heisenberg::{inverse, multiply, GroupPoint};
use pmech::oscillator::rotate_exact;
use pmech::pdo::Pdo;
use proptest::prelude::*;

fn point() -> impl Strategy<Value = GroupPoint> {
    (-10.0..10.0f64, -10.0..10.0f64, -10.0..10.0f64).prop_map(|(s, x, y)| GroupPoint::h1(s, x, y))
}

fn close(a: &GroupPoint, b: &GroupPoint, tol: f64) -> bool {
    (a.s - b.s).abs() <= tol && a.x.iter().chain(&a.y).zip(b.x.iter().chain(&b.y)).all(|(u, v)| (u - v).abs() <= tol)
}

fn blob(spec: GridSpec, cx: f64, cy: f64) -> PFunction {
    PFunction::from_fn(spec, |s, x, y| {
        let r = (x - cx).powi(2) + 0.7 * (y - cy).powi(2) + 0.5 * s * s;
        Complex64::new((1.0 + 0.3 * x * y) * (-r).exp(), 0.2 * y * (-r).exp())
    })
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn group_law(g in point(), h in point(), k in point()) {
        let gh_k = multiply(&multiply(&g, &h).unwrap(), &k).unwrap();
        let g_hk = multiply(&g, &multiply(&h, &k).unwrap()).unwrap();
        prop_assert!(close(&gh_k, &g_hk, 1e-11));
        let e = GroupPoint::identity(1);
        prop_assert!(close(&multiply(&g, &inverse(&g)).unwrap(), &e, 1e-12));
        prop_assert!(close(&multiply(&e, &g).unwrap(), &g, 0.0));
    }

    #[test]
    fn central_part_of_commutator(g in point(), h in point()) {
        // g h g⁻¹ h⁻¹ = (ω(g, h), 0, 0)
        let c = multiply(&multiply(&g, &h).unwrap(), &multiply(&inverse(&g), &inverse(&h)).unwrap()).unwrap();
        prop_assert!((c.s - g.symplectic(&h)).abs() <= 1e-10 * (1.0 + c.s.abs()));
        prop_assert!(c.x[0].abs() <= 1e-12 && c.y[0].abs() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fock_action_is_unitary(
        s in -3.0..3.0f64, x in -1.0..1.0f64, y in -1.0..1.0f64,
        hbar in 0.1..1.0f64,
        c in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 4),
    ) {
        let mut coeffs = vec![Complex64::default(); DEFAULT_DIM];
        for (m, &(re, im)) in c.iter().enumerate() {
            coeffs[m] = Complex64::new(re, im);
        }
        let f = FockVec::new(coeffs).unwrap();
        prop_assume!(f.norm() > 0.1);
        let image = beta_action(&GroupPoint::h1(s, x, y), hbar, &f).unwrap();
        prop_assert!((image.norm() - f.norm()).abs() <= 1e-9 * f.norm());
    }

    #[test]
    fn dynamical_group_is_a_one_parameter_group(t1 in -4.0..4.0f64, t2 in -4.0..4.0f64, n in 0u32..4) {
        let f = FockVec::new((0..8).map(|m| Complex64::new(1.0 / (m + 1) as f64, m as f64 * 0.1)).collect()).unwrap();
        let a = dynamical_group(&dynamical_group(&f, t1, n), t2, n);
        let b = dynamical_group(&f, t1 + t2, n);
        let err = a.coeffs.iter().zip(&b.coeffs).map(|(u, v)| (u - v).norm()).fold(0.0, f64::max);
        prop_assert!(err <= 1e-12);
    }
}

fn monomial() -> impl Strategy<Value = Pdo> {
    (0u32..2, 0u32..2, 0u32..2, 0u32..2, 0u32..2, -2.0..2.0f64).prop_map(|(i, j, a, b, c, k)| Pdo::monomial([i, j, a, b, c], k))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn pdo_composition_matches_sequential_application(a in monomial(), b in monomial(), a2 in monomial()) {
        let spec = GridSpec::new(8.0, 8.0, 8.0, 64, 64, 64).unwrap();
        let f = blob(spec, 0.3, -0.2);
        let a = a.add(&a2);
        let sequential = a.apply(&b.apply(&f).unwrap()).unwrap();
        let composed = a.compose(&b).apply(&f).unwrap();
        let scale = sequential.l2_norm().max(f.l2_norm());
        let err = composed.sub(&sequential).unwrap().l2_norm() / scale;
        prop_assert!(err <= 1e-8, "err {err:e}");
    }

    #[test]
    fn rotations_compose(t1 in -3.5..3.5f64, t2 in -3.5..3.5f64) {
        let spec = GridSpec::new(10.0, 8.0, 8.0, 16, 64, 64).unwrap();
        let f = blob(spec, 0.8, 0.3);
        let twice = rotate_exact(&rotate_exact(&f, t1).unwrap(), t2).unwrap();
        let once = rotate_exact(&f, t1 + t2).unwrap();
        prop_assert!(twice.rel_l2(&once) <= 1e-9);
    }
}
