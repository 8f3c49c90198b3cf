//! Property tests for invariants that must hold for every input.

use ehlab::dynamics::{DynamicalSystem, Observable, OrbitValues, Point};
use ehlab::envelope::{kernel_eval, KernelKind};
use ehlab::process::{build_process, seminorm_estimate, Branch, VSchedule};
use ehlab::rates::{parseval_holder_check, prefix_abs_sums};
use ehlab::sequences::{Bound, Flags, ModulatingSequence};
use ehlab::transform::{abel_identity_residual, eht_batch, eht_trace};
use ehlab::Complex64;
use proptest::prelude::*;

fn complex_vec(len: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0).prop_map(|(re, im)| Complex64::new(re, im)), len)
}

fn sequence_from(values: Vec<Complex64>, radius: i64) -> ModulatingSequence {
    ModulatingSequence::from_values("prop", (-radius..=radius).zip(values).collect())
}

fn systems() -> impl Strategy<Value = DynamicalSystem> {
    prop_oneof![
        (0.05f64..0.95).prop_filter_map("rational angle", |t| DynamicalSystem::rotation(t).ok()),
        Just(DynamicalSystem::three_cycle()),
        Just(DynamicalSystem::torus()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn abel_residual_is_tiny(a in complex_vec(401), v in complex_vec(401), n in 2u64..=200) {
        let seq = sequence_from(a, 200);
        let orbit = OrbitValues::from_values(200, v);
        prop_assert!(abel_identity_residual(&seq, &orbit, n).unwrap() <= 1e-10);
    }

    #[test]
    fn incremental_matches_batch(a in complex_vec(301), v in complex_vec(301), n in 1u64..=150) {
        let seq = sequence_from(a, 150);
        let orbit = OrbitValues::from_values(150, v);
        let inc = eht_trace(&seq, &orbit, &[n], false).unwrap().h_values[0];
        let batch = eht_batch(&seq, &orbit, n).unwrap();
        prop_assert!((inc - batch).norm() <= 1e-11 * (1.0 + batch.norm()));
    }

    #[test]
    fn odd_symmetry_null(half_a in complex_vec(101), half_v in complex_vec(101), n in 1u64..=100) {
        let a: Vec<(i64, Complex64)> = (-100i64..=100).map(|k| (k, half_a[k.unsigned_abs() as usize])).collect();
        let seq = ModulatingSequence::from_values("sym", a);
        let orbit = OrbitValues::from_fn(100, |k| half_v[k.unsigned_abs() as usize]);
        let h = eht_trace(&seq, &orbit, &[n], false).unwrap().h_values[0];
        prop_assert_eq!(h, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn forward_backward_round_trip(sys in systems(), seed in 0u64..1000) {
        for p in sys.sample_points(64, seed) {
            let q = sys.backward(&sys.forward(&p));
            prop_assert!(sys.distance(&p, &q) <= 1e-12);
        }
    }

    #[test]
    fn rotation_eigenfunction_law(t in 0.05f64..0.95, m in -6i64..=6, x in 0.0f64..1.0) {
        if let Ok(sys) = DynamicalSystem::rotation(t) {
            let f = Observable::Character { m };
            let p = Point::Circle(x);
            let lhs = f.eval(&sys.forward(&p));
            let rhs = sys.eigenvalue(m).unwrap() * f.eval(&p);
            prop_assert!((lhs - rhs).norm() <= 1e-12);
        }
    }

    #[test]
    fn prefix_sums_nondecreasing(a in complex_vec(129)) {
        let seq = sequence_from(a, 64);
        let p = prefix_abs_sums(&seq, 64);
        prop_assert!(p.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn parseval_on_full_grid(a in complex_vec(257), n in 1u64..=128) {
        let seq = sequence_from(a, 128);
        let rep = parseval_holder_check(&seq, n, 4 * n as usize + 1).unwrap();
        prop_assert!(rep.parseval_rel_err <= 1e-10);
        prop_assert!(rep.lhs <= rep.rhs * (1.0 + 1e-12));
    }

    #[test]
    fn fejer_nonnegative(n in 0u64..500, x in 1e-6f64..(std::f64::consts::TAU - 1e-6)) {
        prop_assert!(kernel_eval(KernelKind::Fejer, n, x).unwrap() >= 0.0);
    }

    #[test]
    fn factory_process_identities_exact(sys in systems(), seed in 0u64..1000, r in 1u64..40) {
        let p = build_process(&sys, Observable::RaisedCosine, VSchedule::Factory).unwrap();
        let samples = sys.sample_points(32, seed);
        prop_assert!(p.check_structure(&samples, 16).exact());
        let idx: Vec<i64> = (-(r as i64) - 12..=r as i64 + 12).collect();
        prop_assert!(p.sandwich(r, &idx, &samples, Branch::Corrected).holds());
    }

    #[test]
    fn seminorm_homogeneous_subadditive(a in complex_vec(257), b in complex_vec(257), c in -3.0f64..3.0, alpha in 1.05f64..=2.0) {
        let schedule: Vec<u64> = (1..=7).map(|j| 1u64 << j).collect();
        let sa = sequence_from(a.clone(), 128);
        let sb = sequence_from(b.clone(), 128);
        let sc = sequence_from(a.iter().map(|x| x * c).collect(), 128);
        let (a2, b2) = (sa.clone(), sb.clone());
        let sum = ModulatingSequence::from_fn("a+b", Bound::Unbounded, Flags::default(), move |k| a2.eval(k) + b2.eval(k));
        let na = seminorm_estimate(&sa, alpha, &schedule).unwrap().limsup_proxy;
        let nb = seminorm_estimate(&sb, alpha, &schedule).unwrap().limsup_proxy;
        let nc = seminorm_estimate(&sc, alpha, &schedule).unwrap().limsup_proxy;
        let ns = seminorm_estimate(&sum, alpha, &schedule).unwrap().limsup_proxy;
        prop_assert!((nc - c.abs() * na).abs() <= 1e-10 * (1.0 + nc));
        prop_assert!(ns <= na + nb + 1e-10);
    }
}
