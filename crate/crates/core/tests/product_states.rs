//! A state in which the first qubit is unentangled never violates the
//! inequality: its value is at most 2sqrt(7).

use std::f64::consts::PI;

use leggett_core::inequality::evaluate;
use leggett_core::optimizer::{maximize, MaximizeSpec, SettingsSearch, StateSearch, ThetaSearch};
use leggett_core::settings::{parametrized_config, SettingsParams};
use leggett_core::{PureState, StateFamilySpec};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn product_bound() -> f64 {
    2.0 * 7f64.sqrt()
}

fn random_amplitudes(rng: &mut impl Rng, len: usize) -> Vec<Complex64> {
    (0..len).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect()
}

#[test]
fn separable_first_qubit_stays_below_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..2000 {
        let alice = random_amplitudes(&mut rng, 2);
        let rest = random_amplitudes(&mut rng, 4);
        let amps = alice.iter().flat_map(|a| rest.iter().map(move |r| a * r)).collect();
        let state = PureState::from_unnormalized(amps).unwrap();
        let p: Vec<f64> = (0..SettingsParams::len_for(3)).map(|_| rng.random_range(-PI..PI)).collect();
        let cfg = parametrized_config(3, rng.random_range(0.0..PI), &SettingsParams::from_slice(3, &p)).unwrap();
        assert!(evaluate(&state, &cfg).unwrap().total <= product_bound() + 1e-12);
    }
}

#[test]
fn search_over_settings_reaches_bound_for_basis_state() {
    let mut amplitudes = vec![[0.0, 0.0]; 8];
    amplitudes[0] = [1.0, 0.0];
    let spec = MaximizeSpec::new(
        StateSearch::Fixed { state: StateFamilySpec::Explicit { amplitudes } },
        SettingsSearch::Free,
        ThetaSearch::Free,
        1,
    );
    let r = maximize(&spec).unwrap();
    assert!((r.best_value - product_bound()).abs() < 1e-6, "{}", r.best_value);
    assert!(r.best_value < 6.0);
}
