use proptest::prelude::*;
use wavemap_core::evolution::{evolve, make_initial_data, InitialData, SolverConfig};
use wavemap_core::norms::{
    envelope_from_data, envelope_from_profile, lebesgue_norm, lies_underneath, mixed_norm, sk_norm, time_norm,
    validate_envelope, AdmissiblePair, EnvelopeConstants, TraceComponent,
};
use wavemap_core::spectral::{project_band, spatial_gradient, DyadicRange, GridSpec};

#[test]
fn envelope_matches_physical_space_double_loop() {
    let g = GridSpec::torus(2, 32).unwrap();
    let cfg = SolverConfig::new(g, 3, 1.0, InitialData::new(0.2, 1, 8));
    let s = make_initial_data(&cfg).unwrap();
    let range = g.dyadic_range().unwrap();
    let sigma = 0.25;
    // In 2D the critical pair is Ḣ¹ × L²: ‖∇P_k f‖ + ‖P_k g‖.
    let profile: Vec<f64> = range
        .bands()
        .map(|k| {
            let pf = project_band(&s.phi, k).unwrap();
            let grad: f64 = spatial_gradient(&pf).iter().map(|d| lebesgue_norm(d, 2.0).unwrap().powi(2)).sum();
            grad.sqrt() + lebesgue_norm(&project_band(&s.phidot, k).unwrap(), 2.0).unwrap()
        })
        .collect();
    let env = envelope_from_data(&s.phi, &s.phidot, sigma, range).unwrap();
    for (i, k) in range.bands().enumerate() {
        let mut c = 0.0;
        for (j, _) in range.bands().enumerate() {
            c += 2f64.powf(-sigma * (i as f64 - j as f64).abs()) * profile[j];
        }
        let got = env.get(k).unwrap();
        assert!((got - c).abs() <= 1e-12 * c, "level {k}: {got} vs {c}");
    }
    assert!(lies_underneath(&s.phi, &s.phidot, &env).unwrap().holds);
}

#[test]
fn sigma_outside_open_interval_is_rejected() {
    let range = DyadicRange::new(-1, 3).unwrap();
    let p = vec![1.0; range.band_count()];
    assert!(envelope_from_profile(&p, 0.6, range).is_err());
    assert!(envelope_from_profile(&p, 0.0, range).is_err());
    assert!(envelope_from_profile(&p, 0.25, range).is_ok());
}

#[test]
fn mixed_norm_of_constant_in_time() {
    let g = GridSpec::torus(1, 16).unwrap();
    let cfg = SolverConfig::new(g, 2, 0.5, InitialData::new(0.0, 0, 0));
    let tr = evolve(&cfg, 1).unwrap();
    // |φ| = 1 everywhere: ‖φ‖_{L^q_t L^r_x} = T^{1/q} vol^{1/r}
    let vol = g.volume();
    let v = mixed_norm(&tr, 2.0, 4.0, TraceComponent::Position).unwrap();
    assert!((v - 0.5f64.sqrt() * vol.powf(0.25)).abs() < 1e-12);
    assert_eq!(mixed_norm(&tr, f64::INFINITY, 2.0, TraceComponent::Velocity).unwrap(), 0.0);
    assert!(time_norm(&[0.0], &[1.0], 2.0).is_err());
}

#[test]
fn sk_norm_is_monotone_in_the_pair_set() {
    let g = GridSpec::torus(5, 8).unwrap();
    let cfg = SolverConfig::new(g, 2, 0.1, InitialData::new(0.1, 0, 3));
    let tr = evolve(&cfg, 2).unwrap();
    let all = AdmissiblePair::strichartz_set(5);
    let full = sk_norm(&tr, 1, &all).unwrap();
    for p in &all {
        assert!(sk_norm(&tr, 1, std::slice::from_ref(p)).unwrap() <= full);
    }
    assert!(sk_norm(&tr, 1, &[AdmissiblePair::new(2.0, 2.0)]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn envelopes_are_locally_constant(profile in prop::collection::vec(1e-6f64..10.0, 6), sigma in 0.01f64..0.49) {
        let range = DyadicRange::new(-1, 5).unwrap();
        let env = envelope_from_profile(&profile, sigma, range).unwrap();
        let kernel_mass = 1.0 + 2.0 * 2f64.powf(-sigma) / (1.0 - 2f64.powf(-sigma));
        let v = validate_envelope(&env, EnvelopeConstants { k_env: kernel_mass, k_loc: 1.0 + 1e-12 });
        prop_assert!(v.local_ok, "{v:?}");
        prop_assert!(v.l2_ok, "{v:?}");
        for (c, p) in env.values.iter().zip(&profile) {
            prop_assert!(c >= p);
        }
    }
}
