use num_complex::Complex64;
use proptest::prelude::*;
use zakdd_core::ambiguity::{cross_ambiguity, cross_ambiguity_over, self_ambiguity};
use zakdd_core::dd::{
    periodic_extension, periodic_twisted_conv, twisted_conv, DDTap, QuasiPeriodicGrid, SparseDDTaps, ZakParams,
};
use zakdd_core::spreading::{crystallization_check, lattice_lq, spread_pilot, ChirpSpec};

fn cplx() -> impl Strategy<Value = Complex64> {
    (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(a, b)| Complex64::new(a, b))
}

fn taps(max: usize, reach: i64) -> impl Strategy<Value = SparseDDTaps> {
    prop::collection::vec((-reach..=reach, -reach..=reach, cplx()), 1..max)
        .prop_map(|v| SparseDDTaps::accumulate(v.into_iter().map(|(k, l, g)| DDTap::new(k, l, g))))
}

fn grid(m: usize, n: usize) -> impl Strategy<Value = QuasiPeriodicGrid> {
    let p = ZakParams::new(m, n, 1e3).unwrap();
    prop::collection::vec(cplx(), m * n).prop_map(move |v| QuasiPeriodicGrid::from_values(p, v).unwrap())
}

fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn grids_are_quasi_periodic(x in grid(5, 7), k in -20i64..20, l in -20i64..20, n in -3i64..3, m in -3i64..3) {
        let phase = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * (n * l) as f64 / 7.0);
        prop_assert!((x.get(k + n * 5, l + m * 7) - phase * x.get(k, l)).norm() < 1e-12);
    }

    #[test]
    fn twisted_conv_is_associative(a in taps(5, 4), b in taps(5, 4), x in grid(5, 7)) {
        let left = twisted_conv(&a.twisted(&b, 35), &x);
        let right = twisted_conv(&a, &twisted_conv(&b, &x));
        prop_assert!(max_diff(left.values(), right.values()) < 1e-10);
    }

    #[test]
    fn twisted_conv_is_linear(h in taps(6, 6), x in grid(5, 7), y in grid(5, 7), c in cplx()) {
        let lhs = twisted_conv(&h, &(&x + &(&y * c)));
        let rhs = &twisted_conv(&h, &x) + &(&twisted_conv(&h, &y) * c);
        prop_assert!(max_diff(lhs.values(), rhs.values()) < 1e-10);
    }

    #[test]
    fn periodic_form_matches(h in taps(8, 30), x in grid(7, 11)) {
        let direct = twisted_conv(&h, &x);
        let periodic = periodic_twisted_conv(&periodic_extension(&h, 77), &x).unwrap();
        prop_assert!(max_diff(direct.values(), periodic.values()) < 1e-10);
    }

    #[test]
    fn ambiguity_is_window_invariant(a in grid(5, 7), b in grid(5, 7), k0 in -9i64..9, l0 in -9i64..9) {
        let s = cross_ambiguity(&a, &b).unwrap();
        let t = cross_ambiguity_over(&a, &b, (k0, l0)).unwrap();
        prop_assert!(max_diff(s.values(), t.values()) < 1e-10);
    }

    #[test]
    fn ambiguity_conjugate_symmetry(a in grid(5, 7), b in grid(5, 7)) {
        let ab = cross_ambiguity(&a, &b).unwrap();
        let ba = cross_ambiguity(&b, &a).unwrap();
        for k in 0..35i64 {
            for l in 0..35i64 {
                let expect = ab.get(-k, -l).conj()
                    * Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * (k * l) as f64 / 35.0);
                prop_assert!((ba.get(k, l) - expect).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn ambiguity_factorizes(g in taps(4, 5), b in grid(5, 7), c in grid(5, 7)) {
        let a = twisted_conv(&g, &b);
        let direct = cross_ambiguity(&a, &c).unwrap();
        let factored = cross_ambiguity(&b, &c).unwrap().twisted_by(&g);
        prop_assert!(max_diff(direct.values(), factored.values()) < 1e-10);
    }

    #[test]
    fn crystallized_taps_do_not_interfere(
        pts in prop::collection::btree_set((0i64..6, -4i64..4), 2..8),
    ) {
        let support: Vec<(i64, i64)> = pts.into_iter().collect();
        let lattice = lattice_lq(11, 13, 5).unwrap();
        prop_assume!(crystallization_check(&support, &lattice));
        let p = ZakParams::new(11, 13, 1e3).unwrap();
        let xs = spread_pilot(&ChirpSpec::new(5, 11, 13).unwrap(), 0, 0, p).unwrap();
        let amb = self_ambiguity(&xs);
        for a in &support {
            for b in &support {
                if a != b {
                    prop_assert!(amb.get(b.0 - a.0, b.1 - a.1).norm() < 1e-9);
                }
            }
        }
    }
}
