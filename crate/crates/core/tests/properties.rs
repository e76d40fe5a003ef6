use std::f64::consts::PI;

use leggett_core::inequality::{evaluate, ghz_closed_form};
use leggett_core::max_quantum_value;
use leggett_core::nlhv::{
    check_positivity, l_coefficients, sample_malus_pair, triangle_step_slack, PROB_TOL,
};
use leggett_core::quantum::{correlation, BlochVector};
use leggett_core::settings::{
    parametrized_config, reference_settings, MeasurementConfig, SettingsParams,
};
use leggett_core::states::{arbitrary3, ghz, w3};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn direction() -> impl Strategy<Value = BlochVector> {
    (0.0..PI, 0.0..2.0 * PI).prop_map(|(p, a)| BlochVector::from_spherical(p, a))
}

fn simplex5() -> impl Strategy<Value = [f64; 5]> {
    prop::array::uniform5(0.0..1.0f64)
        .prop_filter("nonzero", |w| w.iter().sum::<f64>() > 1e-3)
        .prop_map(|w| {
            let s: f64 = w.iter().sum();
            w.map(|x| x / s)
        })
}

fn settings_params(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0..10.0f64, SettingsParams::len_for(n))
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 256, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn correlations_are_bounded(mu in simplex5(), phi in 0.0..PI, d in prop::array::uniform3(direction())) {
        let state = arbitrary3(mu, phi).unwrap();
        let e = correlation(&state, &d).unwrap().get();
        prop_assert!(e.abs() <= 1.0 + 1e-12);
    }

    #[test]
    fn flipping_one_direction_negates(xi in 0.0..PI, eta in 0.0..PI, d in prop::array::uniform3(direction()), k in 0usize..3) {
        let state = w3(xi, eta);
        let mut flipped = d;
        flipped[k] = flipped[k].flipped();
        let a = correlation(&state, &d).unwrap().get();
        let b = correlation(&state, &flipped).unwrap().get();
        prop_assert!((a + b).abs() < 1e-12);
    }

    #[test]
    fn parametrized_settings_are_feasible(theta in 0.0..PI, p in settings_params(3)) {
        let cfg = parametrized_config(3, theta, &SettingsParams::from_slice(3, &p)).unwrap();
        prop_assert!(cfg.validate().is_empty(), "{:?}", cfg.validate());
    }

    #[test]
    fn config_json_round_trip(theta in 0.0..PI, p in settings_params(4)) {
        let cfg = parametrized_config(4, theta, &SettingsParams::from_slice(4, &p)).unwrap();
        let back = MeasurementConfig::from_json(&serde_json::to_string(&cfg).unwrap()).unwrap();
        prop_assert_eq!(back, cfg);
    }

    #[test]
    fn no_state_exceeds_the_quantum_maximum(mu in simplex5(), phi in 0.0..PI, theta in 0.0..PI, p in settings_params(3)) {
        let cfg = parametrized_config(3, theta, &SettingsParams::from_slice(3, &p)).unwrap();
        let r = evaluate(&arbitrary3(mu, phi).unwrap(), &cfg).unwrap();
        prop_assert!(r.total <= ghz_closed_form(theta) + 1e-9);
        prop_assert!(r.total <= max_quantum_value() + 1e-9);
    }

    #[test]
    fn ghz_matches_closed_form(theta in 0.0..PI) {
        let r = evaluate(&ghz(3).unwrap(), &reference_settings(theta).unwrap()).unwrap();
        prop_assert!((r.total - ghz_closed_form(theta)).abs() < 1e-10);
    }

    #[test]
    fn decomposition_round_trips(w in prop::array::uniform8(0.0..1.0f64)) {
        let s: f64 = w.iter().sum();
        prop_assume!(s > 1e-6);
        let p = w.map(|x| x / s);
        let l = l_coefficients(&p).unwrap();
        prop_assert!(check_positivity(&l).iter().all(|&x| x >= -PROB_TOL));
        let back = l.probabilities();
        for (a, b) in p.iter().zip(&back) {
            prop_assert!((a - b).abs() < PROB_TOL);
        }
    }

    #[test]
    fn malus_pairs_satisfy_triangle_step(seed in any::<u64>(), u in direction(), a in direction(), ap in direction()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (l, lp) = sample_malus_pair(&mut rng, u.dot(&a), u.dot(&ap));
        prop_assert!((l.a - u.dot(&a)).abs() < 1e-12);
        prop_assert!(triangle_step_slack((l.abc, lp.abc), &u, &a, &ap) <= PROB_TOL);
    }
}
