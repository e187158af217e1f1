use proptest::prelude::*;

use qmacro_core::branch_size::{delta_window, n_eff, n_eff_scan};
use qmacro_core::fisher::{nrf_measure, projector_variance, qfi, qfi_pure, AlgebraBasis, MaximizeOptions};
use qmacro_core::linalg::{c64, helstrom_probability, HermitianObservable};
use qmacro_core::sampling::{random_density, random_hermitian, random_pure, random_unitary, rng_for};
use qmacro_core::speed_limits::qfi_variance_gap;
use qmacro_core::superposition::{build_superposition, SpaceKind};
use qmacro_core::tolerance::Tolerances;

fn tol() -> Tolerances {
    Tolerances::default()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn n_eff_is_bounded_and_matches_scan(abs_z in 0.01f64..0.99, n in 1usize..12, u in 0.0f64..1.0) {
        let w = delta_window(abs_z, n);
        let delta = w.lower + u * (w.upper - w.lower);
        prop_assume!(delta > 0.0 && delta < 0.5);
        let k = n_eff(abs_z, delta, n).unwrap();
        prop_assert!((1..=n).contains(&k));
        prop_assert_eq!(Some(k), n_eff_scan(abs_z, delta, n));
    }

    #[test]
    fn n_eff_does_not_grow_with_delta(abs_z in 0.05f64..0.95, n in 2usize..10, a in 0.0f64..1.0, b in 0.0f64..1.0) {
        let w = delta_window(abs_z, n);
        let (lo, hi) = (a.min(b), a.max(b));
        let d1 = w.lower + lo * (w.upper - w.lower);
        let d2 = w.lower + hi * (w.upper - w.lower);
        prop_assume!(d1 > 0.0 && d2 < 0.5);
        prop_assert!(n_eff(abs_z, d2, n).unwrap() <= n_eff(abs_z, d1, n).unwrap());
    }

    #[test]
    fn overlap_modulus_ignores_a_global_phase_on_u(seed in 0u64..10_000, phase in 0.0f64..std::f64::consts::TAU, n in 1usize..6) {
        let mut rng = rng_for(seed, 0, 0);
        let phi = random_pure(3, &mut rng).unwrap();
        let u = random_unitary(3, &mut rng);
        let a = build_superposition(&phi, &u, n, SpaceKind::Fock, &tol());
        let b = build_superposition(&phi, &(&u * c64(0.0, phase).exp()), n, SpaceKind::Fock, &tol());
        if let (Ok(a), Ok(b)) = (a, b) {
            prop_assert!((a.z().norm() - b.z().norm()).abs() < 1e-12);
        }
    }

    #[test]
    fn nrf_is_phase_invariant_for_qubits(seed in 0u64..10_000, phase in 0.0f64..std::f64::consts::TAU, n in 1usize..6) {
        let mut rng = rng_for(seed, 1, 0);
        let phi = random_pure(2, &mut rng).unwrap();
        let u = random_unitary(2, &mut rng);
        let basis = AlgebraBasis::qubit_bloch();
        let opts = MaximizeOptions::default();
        let a = build_superposition(&phi, &u, n, SpaceKind::Spin, &tol()).unwrap();
        let b = build_superposition(&phi, &(&u * c64(0.0, phase).exp()), n, SpaceKind::Spin, &tol());
        prop_assume!(b.is_ok());
        let ra = nrf_measure(&a, &basis, &opts).unwrap();
        let rb = nrf_measure(&b.unwrap(), &basis, &opts).unwrap();
        prop_assert!((ra.nf_branch_mean - rb.nf_branch_mean).abs() < 1e-9);
    }

    #[test]
    fn qfi_is_at_most_four_variances(seed in 0u64..10_000, d in 2usize..5) {
        let mut rng = rng_for(seed, 2, 0);
        let rho = random_density(d, d, &mut rng, &tol()).unwrap();
        let hm = random_hermitian(d, &mut rng);
        let h = HermitianObservable::single_mode(hm.clone(), &tol()).unwrap();
        let mean = rho.expectation(&hm).re;
        let var = rho.expectation(&(&hm * &hm)).re - mean * mean;
        prop_assert!(qfi(&rho, &h, &tol()).unwrap() <= 4.0 * var + 1e-9);

        let psi = random_pure(d, &mut rng).unwrap();
        let pure = qfi(&psi.to_density(), &h, &tol()).unwrap();
        prop_assert!((pure - qfi_pure(&psi, &h).unwrap()).abs() < 1e-8 * pure.max(1.0));
    }

    #[test]
    fn qfi_variance_gap_is_nonnegative(seed in 0u64..10_000, d in 2usize..4, frac in 0.0f64..1.0) {
        let mut rng = rng_for(seed, 3, 0);
        let rho = random_density(d, d, &mut rng, &tol()).unwrap();
        let h = HermitianObservable::single_mode(random_hermitian(d, &mut rng), &tol()).unwrap();
        let f = qfi(&rho, &h, &tol()).unwrap();
        prop_assume!(f > 1e-6);
        let t = frac * std::f64::consts::PI / f.sqrt();
        prop_assert!(qfi_variance_gap(&rho, &h, t, &tol()).unwrap() >= -1e-9);
    }

    #[test]
    fn helstrom_probability_is_a_probability(seed in 0u64..10_000, d in 2usize..5) {
        let mut rng = rng_for(seed, 4, 0);
        let a = random_density(d, d, &mut rng, &tol()).unwrap();
        let b = random_density(d, 1, &mut rng, &tol()).unwrap();
        let p = helstrom_probability(&a, &b, &tol()).unwrap();
        prop_assert!((0.5 - 1e-12..=1.0 + 1e-12).contains(&p));
    }

    #[test]
    fn variance_formula_is_nonnegative(abs_z in 0.0f64..0.999, arg in 0.0f64..std::f64::consts::TAU, n in 1usize..10) {
        let z = c64(abs_z, 0.0) * c64(0.0, arg).exp();
        let v = projector_variance(z, n);
        prop_assume!(v.is_ok());
        let v = v.unwrap();
        prop_assert!(v.is_finite() && v >= -1e-9);
    }
}
