use eqmet_core::estimation::{estimate_from_counts, optimal_weights, WeightMode};
use eqmet_core::fisher::{enhanced_bound, parity_enhancement, qfi_mixed_es, qfi_oracle, qfi_pure};
use eqmet_core::io::{parse_state, read_counts, state_to_json, write_counts, StateInput};
use eqmet_core::measurement::{parity_collapse, sample_outcomes};
use eqmet_core::random::{random_density, random_gamma, random_mixed_es, random_pure_state, random_spectrum};
use eqmet_core::sampling::trial_rng;
use eqmet_core::states::{equatorial, mixed_es};
use eqmet_core::{generator_matrix, Measurable, PhaseEncode};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pure_qfi_matches_oracle(seed in any::<u64>()) {
        let mut rng = trial_rng(seed, 0);
        let spec = random_spectrum(&mut rng, 6);
        let psi = random_pure_state(&mut rng, &spec);
        let oracle = qfi_oracle(&psi.to_density(), &generator_matrix(&spec)).unwrap().value;
        prop_assert!((qfi_pure(&psi).value - oracle).abs() <= 1e-9 * oracle.max(1.0));
    }

    #[test]
    fn mixed_qfi_ignores_coherences(seed in any::<u64>()) {
        let mut rng = trial_rng(seed, 0);
        let spec = random_spectrum(&mut rng, 5);
        let m = random_mixed_es(&mut rng, &spec);
        let gamma = random_gamma(&mut rng, m.probabilities());
        let other = mixed_es(&spec, m.probabilities(), m.betas(), &gamma).unwrap();
        let g = generator_matrix(&spec);
        let a = qfi_oracle(&m.to_density(), &g).unwrap().value;
        let b = qfi_oracle(&other.to_density(), &g).unwrap().value;
        prop_assert!((a - b).abs() < 1e-9);
        prop_assert!((a - qfi_mixed_es(&m).value).abs() < 1e-9);
    }

    #[test]
    fn parity_measurement_never_loses_information(seed in any::<u64>()) {
        let mut rng = trial_rng(seed, 0);
        let spec = random_spectrum(&mut rng, 6);
        let rho = random_density(&mut rng, spec.dim());
        let pe = parity_enhancement(&rho, &spec).unwrap();
        prop_assert!(pe.f_bar >= pe.f_before - 1e-9);
        prop_assert!((pe.f_bar - enhanced_bound(&rho, &spec)).abs() < 1e-9);
        let c = parity_collapse(&rho, &spec).unwrap();
        prop_assert!((c.q_plus + c.q_minus + c.q_zero - 1.0).abs() < 1e-12);
    }

    #[test]
    fn encoding_commutes_with_outcome_probabilities(seed in any::<u64>(), theta in -1.0f64..1.0) {
        let mut rng = trial_rng(seed, 0);
        let spec = random_spectrum(&mut rng, 6);
        let psi = random_pure_state(&mut rng, &spec);
        let direct = psi.outcome_probs(theta);
        let encoded = psi.phase_encode(theta).outcome_probs(0.0);
        for k in 0..spec.num_sectors() {
            prop_assert!((direct.plus[k] - encoded.plus[k]).abs() < 1e-12);
            prop_assert!((direct.minus[k] - encoded.minus[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn state_files_round_trip(seed in any::<u64>()) {
        let mut rng = trial_rng(seed, 0);
        let spec = random_spectrum(&mut rng, 4);
        let inputs = [
            StateInput::Pure(random_pure_state(&mut rng, &spec)),
            StateInput::Mixed(random_mixed_es(&mut rng, &spec)),
            StateInput::Density { spectrum: spec.clone(), rho: random_density(&mut rng, spec.dim()) },
        ];
        for input in inputs {
            let back = parse_state(&state_to_json(&input).unwrap()).unwrap();
            prop_assert_eq!(back.kind(), input.kind());
            let diff = back.to_density().matrix() - input.to_density().matrix();
            prop_assert!(diff.iter().all(|z| z.norm() < 1e-15));
        }
    }

    #[test]
    fn counts_round_trip(seed in any::<u64>(), nu in 1u64..5000) {
        let mut rng = trial_rng(seed, 0);
        let spec = random_spectrum(&mut rng, 6);
        let dist = random_pure_state(&mut rng, &spec).outcome_probs(0.2);
        let counts = sample_outcomes(&dist, nu, seed);
        prop_assert_eq!(counts.total(), nu);
        let mut buf = Vec::new();
        write_counts(&mut buf, &counts).unwrap();
        prop_assert_eq!(read_counts(buf.as_slice()).unwrap(), counts);
    }
}

#[test]
fn large_samples_recover_the_phase() {
    let spec = eqmet_core::build_spectrum(&[1.0, 2.5, -1.0, -2.5, 0.0]).unwrap();
    let state = equatorial(&spec, &[0.6, 0.4], &[0.3, -0.7], &[0.0, 1.0]).unwrap();
    let theta = 0.12;
    let g = spec.g_values();
    let design = optimal_weights(&state.probabilities(), &g).unwrap();
    let nu = 1_000_000;
    let counts = sample_outcomes(&state.outcome_probs(theta), nu, 5);
    let f = qfi_pure(&state).value;
    for mode in [WeightMode::Design, WeightMode::Empirical] {
        let est = estimate_from_counts(&counts, &g, &state.betas(), &design, mode, 0.1).unwrap();
        assert!((est.theta - theta).abs() < 5.0 / (nu as f64 * f).sqrt(), "{mode:?}: {}", est.theta);
    }
}
