use qmacro_core::branch_size::{
    c_delta, gaussian_abs_z, gaussian_abs_z_oracle, n_eff, rdm_success_probabilities, GaussianCat,
};
use qmacro_core::fisher::{nrf_named, projector_variance, projector_variance_check, FamilyName, MaximizeOptions};
use qmacro_core::fock::FockSpace;
use qmacro_core::linalg::{c64, HermitianObservable};
use qmacro_core::speed_limits::{speed_limit_report, tau_dist};
use qmacro_core::superposition::{named_state, named_state_converged, NamedState};
use qmacro_core::tolerance::Tolerances;

fn tol() -> Tolerances {
    Tolerances::default()
}

#[test]
fn ecs_overlap_matches_coherent_state_formula() {
    for alpha in [0.3, 0.7, 1.2] {
        let (s, cert) = named_state_converged(&NamedState::Ecs { alpha, n_modes: 2 }, None, &tol()).unwrap();
        assert!(cert.unwrap().converged);
        assert!((s.z().re - (-2.0 * alpha * alpha).exp()).abs() < 1e-12);
        assert!(s.z().im.abs() < 1e-12);
    }
}

#[test]
fn ecs_size_from_reduced_states() {
    let s = named_state(&NamedState::Ecs { alpha: 0.4, n_modes: 2 }, 16, &tol()).unwrap();
    let explicit = rdm_success_probabilities(&s, &tol()).unwrap();
    let w = qmacro_core::branch_size::delta_window(s.z().norm(), 2);
    for u in [0.0, 0.3, 0.7, 0.999] {
        let delta = w.lower + u * (w.upper - w.lower);
        let brute = explicit.iter().position(|&p| p >= 1.0 - delta).map(|k| k + 1);
        assert_eq!(Some(n_eff(s.z().norm(), delta, 2).unwrap()), brute);
    }
    assert!(n_eff(s.z().norm(), 0.5 * w.lower, 2).is_err());
    let r = c_delta(&s, 0.5 * (w.lower + w.upper), &tol()).unwrap();
    assert!(r.oracle_deviation.unwrap() < 1e-12);
}

#[test]
fn gaussian_overlaps_agree_with_fock_oracle() {
    for cat in GaussianCat::ALL {
        let (zo, cert) = gaussian_abs_z_oracle(cat, 0.5, 0.2, &tol()).unwrap();
        assert!(cert.converged);
        let z = gaussian_abs_z(cat, 0.5, 0.2);
        assert!((zo / z - 1.0).abs() < 1e-8, "{cat:?}: {zo} vs {z}");
    }
}

#[test]
fn ghz_nrf_equals_mode_count() {
    for n in 1..=6 {
        let (r, _) =
            nrf_named(&NamedState::Ghz { n_modes: n }, FamilyName::QubitBloch, &MaximizeOptions::default(), &tol())
                .unwrap();
        assert!((r.nrf - n as f64).abs() < 1e-9);
    }
}

#[test]
fn variance_formula_on_named_states() {
    for spec in [
        NamedState::Ecs { alpha: 0.6, n_modes: 2 },
        NamedState::Psi2Plus { alpha: 0.3, xi: 0.2, n_modes: 2 },
        NamedState::FockGhz { n: 2, n_modes: 3 },
    ] {
        let s = named_state(&spec, 12, &Tolerances { tail: 1e-4, ..tol() }).unwrap();
        let c = projector_variance_check(&s, &tol()).unwrap();
        assert!(c.deviation_corrected < 1e-9 * c.numeric.max(1.0), "{spec:?}: {c:?}");
        assert!(c.mean.abs() < 1e-10);
    }
    // endpoints
    assert!((projector_variance(c64(0.0, 0.0), 5).unwrap() - 25.0).abs() < 1e-12);
    assert!((projector_variance(c64(1.0 - 1e-13, 0.0), 5).unwrap() - 5.0).abs() < 1e-9);
}

#[test]
fn number_operator_speed_limit_on_a_cat() {
    // (|0⟩ + |2⟩)/√2 under n̂ crosses exactly at the Fisher bound
    let f = FockSpace::new(4).unwrap();
    let mut v = qmacro_core::linalg::CVec::zeros(4);
    v[0] = c64(1.0, 0.0);
    v[2] = c64(1.0, 0.0);
    let psi = qmacro_core::linalg::PureState::normalized(v, vec![4]).unwrap();
    let h = HermitianObservable::single_mode(f.number(), &tol()).unwrap();
    let rho = psi.to_density();
    let r = speed_limit_report(&rho, &h, 0.2, &tol()).unwrap();
    assert!((r.qfi - 4.0).abs() < 1e-12);
    assert!((r.actual_crossing_time.unwrap() - r.tau_dist).abs() < 1e-8);
    let limit = tau_dist(&rho, &h, 0.0, &tol()).unwrap();
    assert!((limit - std::f64::consts::PI / 2.0).abs() < 1e-12);
}
