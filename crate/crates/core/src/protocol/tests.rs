use super::*;
use crate::qstate::ALGEBRA_TOL;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::FRAC_PI_2;

fn sf_w_layout() -> SubsystemLayout {
    SubsystemLayout::qubits([labels::SYSTEM, labels::FRIEND_MEMORY, labels::WIGNER_ENVIRONMENT])
        .unwrap()
}

fn state_from(indices: &[(usize, f64)]) -> StateVector {
    let layout = sf_w_layout();
    let mut amplitudes = vec![Complex64::new(0.0, 0.0); layout.total_dim()];
    for &(index, value) in indices {
        amplitudes[index] = Complex64::new(value, 0.0);
    }
    StateVector::from_amplitudes(&layout, amplitudes).unwrap()
}

#[test]
fn initial_state_spreads_spin_over_ready_registers() {
    let config = ProtocolConfig::new(0.25).unwrap();
    let psi0 = initial_state(&config).unwrap();
    assert_eq!(psi0.amplitudes().len(), 8);
    assert!((psi0.amplitudes()[0].re - INV_SQRT2).abs() < ALGEBRA_TOL);
    assert!((psi0.amplitudes()[4].re - INV_SQRT2).abs() < ALGEBRA_TOL);

    let full = ProtocolConfig {
        include_ancilla: true,
        include_fprime: true,
        ..config
    };
    let psi0 = initial_state(&full).unwrap();
    assert_eq!(psi0.amplitudes().len(), 32);
    assert!((psi0.amplitudes()[0].re - INV_SQRT2).abs() < ALGEBRA_TOL);
    assert!((psi0.amplitudes()[16].re - INV_SQRT2).abs() < ALGEBRA_TOL);
}

#[test]
fn config_rejects_bad_parameters() {
    assert!(matches!(
        ProtocolConfig::new(1.5),
        Err(ProtocolError::ThetaOutOfRange(_))
    ));
    assert!(matches!(
        ProtocolConfig::new(f64::NAN),
        Err(ProtocolError::ThetaOutOfRange(_))
    ));
    let skewed = ProtocolConfig {
        alpha: Complex64::new(1.0, 0.0),
        beta: Complex64::new(1.0, 0.0),
        ..ProtocolConfig::new(0.0).unwrap()
    };
    assert!(matches!(
        skewed.validate(),
        Err(ProtocolError::AmplitudesNotNormalized(_))
    ));
}

#[test]
fn measurement_unitary_copies_spin_into_memory() {
    let config = ProtocolConfig::new(0.0).unwrap();
    let psi1 = measurement_unitary().apply(&initial_state(&config).unwrap()).unwrap();
    // (|↑φ₀⟩ + |↓φ₁⟩)/√2 ⊗ |ω₀⟩: the ↓φ₁ω₀ component sits at index 6.
    let expected = state_from(&[(0, INV_SQRT2), (6, INV_SQRT2)]);
    assert!(psi1.max_deviation(&expected).unwrap() < ALGEBRA_TOL);
}

#[test]
fn steering_families_have_published_norms() {
    for theta in [0.0, 0.3, 0.5, 0.77, 1.0] {
        let s = (FRAC_PI_2 * theta).sin();
        let plus = phi_theta(theta, Sign::Plus).unwrap();
        let minus = phi_theta(theta, Sign::Minus).unwrap();
        assert!((plus.norm().powi(2) - (1.0 + s)).abs() < ALGEBRA_TOL);
        assert!((minus.norm().powi(2) - (1.0 - s)).abs() < ALGEBRA_TOL);
        let vplus = varphi_theta(theta, Sign::Plus).unwrap();
        let vminus = varphi_theta(theta, Sign::Minus).unwrap();
        assert!((vplus.norm().powi(2) - (1.0 - s)).abs() < ALGEBRA_TOL);
        assert!((vminus.norm().powi(2) - (1.0 + s)).abs() < ALGEBRA_TOL);
    }
    // Spot value frozen from an independent evaluation of 1 + sin(0.15π).
    let plus = phi_theta(0.3, Sign::Plus).unwrap();
    assert!((plus.norm().powi(2) - 1.4539904997395467).abs() < ALGEBRA_TOL);
}

#[test]
fn defining_pairs_are_orthonormal_for_every_theta() {
    for i in 0..=20 {
        let theta = i as f64 / 20.0;
        let pairs = interaction_defining_pairs(theta).unwrap();
        assert_eq!(pairs.len(), 2);
        for (input, output) in &pairs {
            assert!((input.norm() - 1.0).abs() < ALGEBRA_TOL);
            assert!((output.norm() - 1.0).abs() < ALGEBRA_TOL);
        }
        let cross_in = pairs[0].0.inner_product(&pairs[1].0).unwrap();
        let cross_out = pairs[0].1.inner_product(&pairs[1].1).unwrap();
        assert!(cross_in.norm() < ALGEBRA_TOL);
        assert!(cross_out.norm() < ALGEBRA_TOL);
    }
}

#[test]
fn interaction_is_unitary_and_reproduces_defining_pairs() {
    for theta in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let u = interaction_unitary(theta).unwrap();
        assert!(u.unitarity_deviation() < ALGEBRA_TOL);
        for (input, output) in interaction_defining_pairs(theta).unwrap() {
            let mapped = u.apply(&input).unwrap();
            assert!(mapped.max_deviation(&output).unwrap() < ALGEBRA_TOL);
        }
    }
}

#[test]
fn zero_leakage_interaction_decouples_the_environment() {
    // At θ = 0 the post-interaction global state is Φ⁺ on S⊗F with the
    // environment left in ω₀.
    let psi2 = wigner_state_after_interaction(0.0).unwrap();
    let expected = state_from(&[(0, INV_SQRT2), (6, INV_SQRT2)]);
    assert!(psi2.state().max_deviation(&expected).unwrap() < ALGEBRA_TOL);
    assert_eq!(psi2.stage(), Stage::Psi2);
    assert_eq!(psi2.observer(), Observer::Wigner);
    assert!(psi2.friend_record().is_none());
}

#[test]
fn full_leakage_interaction_copies_the_record() {
    // At θ = 1 the environment becomes a perfect copy: ↑φ₀ keeps ω₀ and
    // ↓φ₁ flips it, so Wigner's state is the three-way branch pair.
    let u = interaction_unitary(1.0).unwrap();
    let up = state_from(&[(0, 1.0)]);
    let down = state_from(&[(6, 1.0)]);
    assert!(u.apply(&up).unwrap().max_deviation(&state_from(&[(0, 1.0)])).unwrap() < ALGEBRA_TOL);
    assert!(
        u.apply(&down).unwrap().max_deviation(&state_from(&[(7, 1.0)])).unwrap() < ALGEBRA_TOL
    );
    let psi2 = wigner_state_after_interaction(1.0).unwrap();
    let expected = state_from(&[(0, INV_SQRT2), (7, INV_SQRT2)]);
    assert!(psi2.state().max_deviation(&expected).unwrap() < ALGEBRA_TOL);
}

#[test]
fn wigner_amplitude_matches_published_value_at_half_leakage() {
    let psi2 = wigner_state_after_interaction(0.5).unwrap();
    let s = (FRAC_PI_2 * 0.5).sin();
    let c = (FRAC_PI_2 * 0.5).cos();
    let expected = (1.0 + s + c) / (2.0 * std::f64::consts::SQRT_2);
    let assignment = [
        (labels::SYSTEM, 0usize),
        (labels::FRIEND_MEMORY, 0),
        (labels::WIGNER_ENVIRONMENT, 0),
    ];
    let amp = psi2.state().amplitude(&assignment).unwrap();
    assert!((amp.re - expected).abs() < ALGEBRA_TOL);
    assert!(amp.im.abs() < ALGEBRA_TOL);
    assert!((expected - 0.8535533905932737).abs() < ALGEBRA_TOL);
}

#[test]
fn friend_branch_rewrites_between_bell_and_tilted_form_at_zero_leakage() {
    // Record φ₀: (Φ⁺ω₀ + Φ⁻ω₁)/√2 equals (↑φ₀ω₊ + ↓φ₁ω₋)/√2.
    let branch0 = friend_state_after_interaction(0.0, FriendRecord::Phi0).unwrap();
    let tilted0 = state_from(&[(0, 0.5), (1, 0.5), (6, 0.5), (7, -0.5)]);
    assert!(branch0.state().max_deviation(&tilted0).unwrap() < ALGEBRA_TOL);

    // Record φ₁: the same identity with ω₊ and ω₋ exchanged.
    let branch1 = friend_state_after_interaction(0.0, FriendRecord::Phi1).unwrap();
    let tilted1 = state_from(&[(0, 0.5), (1, -0.5), (6, 0.5), (7, 0.5)]);
    assert!(branch1.state().max_deviation(&tilted1).unwrap() < ALGEBRA_TOL);
}

#[test]
fn friend_branches_stay_inside_their_record_sector() {
    // The interaction never mixes ↑φ₁ or ↓φ₀ into a collapsed branch.
    for i in 0..=20 {
        let theta = i as f64 / 20.0;
        for record in [FriendRecord::Phi0, FriendRecord::Phi1] {
            let branch = friend_state_after_interaction(theta, record).unwrap();
            for index in [2usize, 3, 4, 5] {
                assert!(
                    branch.state().amplitudes()[index].norm() < ALGEBRA_TOL,
                    "theta {theta}, record {record:?}, index {index}"
                );
            }
        }
    }
}

#[test]
fn completion_order_changes_the_unitary_but_not_the_states() {
    let theta = 0.3;
    let ascending = interaction_unitary_with_order(theta, ComplementOrder::Ascending).unwrap();
    let descending = interaction_unitary_with_order(theta, ComplementOrder::Descending).unwrap();
    let matrix_gap = ascending
        .matrix()
        .iter()
        .zip(descending.matrix())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    assert!(matrix_gap > 1e-3, "orders should disagree off the defining span");

    let config = ProtocolConfig::new(theta).unwrap();
    let psi1 = measurement_unitary().apply(&initial_state(&config).unwrap()).unwrap();
    let a = ascending.apply(&psi1).unwrap();
    let b = descending.apply(&psi1).unwrap();
    assert!(a.max_deviation(&b).unwrap() < ALGEBRA_TOL);
}

#[test]
fn swap_moves_the_record_into_the_ancilla() {
    let config = ProtocolConfig {
        include_ancilla: true,
        ..ProtocolConfig::new(0.4).unwrap()
    };
    let psi1 = measurement_unitary().apply(&initial_state(&config).unwrap()).unwrap();
    let psi2 = interaction_unitary(0.4).unwrap().apply(&psi1).unwrap();
    let before = ObserverAssignment::new(Observer::Wigner, None, psi2, Stage::Psi2).unwrap();
    let after = swap_memory(&before).unwrap();
    assert_eq!(after.stage(), Stage::Psi3);

    // Layout (S, F, W, A): the ↓φ₁ω₀ component moves from F to A.
    let moved = after
        .state()
        .amplitude(&[
            (labels::SYSTEM, 1),
            (labels::FRIEND_MEMORY, 0),
            (labels::WIGNER_ENVIRONMENT, 0),
            (labels::ANCILLA, 1),
        ])
        .unwrap();
    let original = before
        .state()
        .amplitude(&[
            (labels::SYSTEM, 1),
            (labels::FRIEND_MEMORY, 1),
            (labels::WIGNER_ENVIRONMENT, 0),
            (labels::ANCILLA, 0),
        ])
        .unwrap();
    assert!((moved - original).norm() < ALGEBRA_TOL);

    // The swap is invisible to Wigner's environment measurement.
    let basis = measurement_basis(Measurement::Mw);
    let stats_before = born_probabilities(before.state(), &basis).unwrap();
    let stats_after = born_probabilities(after.state(), &basis).unwrap();
    for (b, a) in stats_before.iter().zip(&stats_after) {
        assert!((b.1 - a.1).abs() < ALGEBRA_TOL);
    }
}

#[test]
fn swap_requires_the_ancilla_and_the_interaction_stage() {
    let psi2 = wigner_state_after_interaction(0.2).unwrap();
    assert!(matches!(
        swap_memory(&psi2),
        Err(ProtocolError::RegisterMissing(name)) if name == labels::ANCILLA
    ));

    let config = ProtocolConfig {
        include_ancilla: true,
        ..ProtocolConfig::new(0.2).unwrap()
    };
    let psi1 = measurement_unitary().apply(&initial_state(&config).unwrap()).unwrap();
    let early = ObserverAssignment::new(Observer::Wigner, None, psi1, Stage::Psi1).unwrap();
    assert!(matches!(
        swap_memory(&early),
        Err(ProtocolError::WrongStage {
            expected: Stage::Psi2,
            got: Stage::Psi1,
        })
    ));
}

#[test]
fn repeat_at_zero_leakage_builds_the_three_party_branch_state() {
    let psi4 = wigner_state_after_repeat(0.0).unwrap();
    assert_eq!(psi4.stage(), Stage::Psi4);
    let amplitudes = psi4.state().amplitudes();
    assert_eq!(amplitudes.len(), 16);
    let support: Vec<usize> = (0..amplitudes.len())
        .filter(|&i| amplitudes[i].norm() > ALGEBRA_TOL)
        .collect();
    // (S, F, W, F′) = (0,0,0,0) and (1,1,0,1): indices 0 and 13.
    assert_eq!(support, vec![0, 13]);
    for index in support {
        assert!((amplitudes[index].norm_sqr() - 0.5).abs() < ALGEBRA_TOL);
    }
}

#[test]
fn friend_repeat_state_duplicates_her_record() {
    for record in [FriendRecord::Phi0, FriendRecord::Phi1] {
        let operational = friend_state_after_repeat(record).unwrap();
        assert_eq!(operational.stage(), Stage::Psi4);
        assert_eq!(operational.friend_record(), Some(record));

        // Same product state as pushing her collapsed branch through the
        // repeat unitary by hand.
        let r = record.index();
        let branch = state_from(&[(r * 6, 1.0)]);
        let with_fp = ObserverAssignment::new(
            Observer::Friend,
            Some(record),
            branch,
            Stage::Psi1,
        )
        .unwrap()
        .with_repeat_register()
        .unwrap();
        let pushed = repeat_measurement_unitary().apply(with_fp.state()).unwrap();
        assert!(operational.state().max_deviation(&pushed).unwrap() < ALGEBRA_TOL);
    }
}

#[test]
fn collapse_follows_the_born_weights() {
    let config = ProtocolConfig::new(0.6).unwrap();
    let psi1 = measurement_unitary().apply(&initial_state(&config).unwrap()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut phi0_count = 0u32;
    for _ in 0..2000 {
        let (record, assignment) = friend_collapse(&psi1, &mut rng).unwrap();
        assert_eq!(assignment.friend_record(), Some(record));
        assert_eq!(assignment.stage(), Stage::Psi1);
        // The collapsed branch is a definite record product state.
        let expected = state_from(&[(record.index() * 6, 1.0)]);
        assert!(assignment.state().max_deviation(&expected).unwrap() < ALGEBRA_TOL);
        if record == FriendRecord::Phi0 {
            phi0_count += 1;
        }
    }
    // Fair coin, 2000 draws: 3σ is about 67.
    assert!((phi0_count as f64 - 1000.0).abs() < 100.0, "count {phi0_count}");
}

#[test]
fn collapse_is_deterministic_on_a_skewed_preparation() {
    let config = ProtocolConfig {
        alpha: Complex64::new(1.0, 0.0),
        beta: Complex64::new(0.0, 0.0),
        ..ProtocolConfig::new(0.0).unwrap()
    };
    let psi1 = measurement_unitary().apply(&initial_state(&config).unwrap()).unwrap();
    let mut rng = StdRng::seed_from_u64(11);
    for _ in 0..50 {
        let (record, _) = friend_collapse(&psi1, &mut rng).unwrap();
        assert_eq!(record, FriendRecord::Phi0);
    }
}

#[test]
fn assignment_enforces_record_ownership() {
    let state = state_from(&[(0, 1.0)]);
    assert!(matches!(
        ObserverAssignment::new(
            Observer::Wigner,
            Some(FriendRecord::Phi0),
            state.clone(),
            Stage::Psi1
        ),
        Err(ProtocolError::RecordForbidden)
    ));
    assert!(matches!(
        ObserverAssignment::new(Observer::Friend, None, state.clone(), Stage::Psi1),
        Err(ProtocolError::RecordRequired)
    ));
    // Before her measurement the friend has nothing to record yet.
    assert!(ObserverAssignment::new(Observer::Friend, None, state, Stage::Psi0).is_ok());
}

#[test]
fn published_predictions_match_frozen_values_at_half_leakage() {
    let wigner_mw = predict(
        Observer::Wigner,
        Measurement::Mw,
        0.5,
        PredictionMode::AsPublished,
        None,
    )
    .unwrap();
    assert!((wigner_mw.probability(0).unwrap() - 0.8535533905932737).abs() < ALGEBRA_TOL);
    assert_eq!(wigner_mw.probabilities[0].0, "omega0");
    assert_eq!(wigner_mw.probabilities[1].0, "omega1");

    let wigner_mf = predict(
        Observer::Wigner,
        Measurement::Mf,
        0.5,
        PredictionMode::AsPublished,
        None,
    )
    .unwrap();
    assert!((wigner_mf.probability(0).unwrap() - 0.75).abs() < ALGEBRA_TOL);
    assert_eq!(wigner_mf.probabilities[0].0, "phi0");

    let friend_mw = predict(
        Observer::Friend,
        Measurement::Mw,
        0.5,
        PredictionMode::AsPublished,
        Some(FriendRecord::Phi1),
    )
    .unwrap();
    assert!((friend_mw.probability(0).unwrap() - 0.5).abs() < ALGEBRA_TOL);

    let friend_mf = predict(
        Observer::Friend,
        Measurement::Mf,
        0.5,
        PredictionMode::AsPublished,
        Some(FriendRecord::Phi1),
    )
    .unwrap();
    assert!(friend_mf.probability(0).unwrap().abs() < ALGEBRA_TOL);
    assert!((friend_mf.probability(1).unwrap() - 1.0).abs() < ALGEBRA_TOL);
}

#[test]
fn state_derived_friend_predictions_condition_on_the_record() {
    let s = (FRAC_PI_2 * 0.5).sin();
    for (record, sign) in [(FriendRecord::Phi0, 1.0), (FriendRecord::Phi1, -1.0)] {
        let mw = predict(
            Observer::Friend,
            Measurement::Mw,
            0.5,
            PredictionMode::StateDerived,
            Some(record),
        )
        .unwrap();
        assert!((mw.probability(0).unwrap() - (1.0 + sign * s) / 2.0).abs() < ALGEBRA_TOL);

        let mf = predict(
            Observer::Friend,
            Measurement::Mf,
            0.5,
            PredictionMode::StateDerived,
            Some(record),
        )
        .unwrap();
        let on_record = mf.probability(record.index()).unwrap();
        assert!((on_record - (1.0 + s * s) / 2.0).abs() < ALGEBRA_TOL);
        assert!((on_record - 0.75).abs() < ALGEBRA_TOL);
    }
}

#[test]
fn prediction_modes_agree_where_the_narrative_pins_them() {
    // Wigner's two modes agree at both endpoints for both measurements.
    for theta in [0.0, 1.0] {
        for measurement in [Measurement::Mw, Measurement::Mf] {
            let published =
                predict(Observer::Wigner, measurement, theta, PredictionMode::AsPublished, None)
                    .unwrap();
            let derived =
                predict(Observer::Wigner, measurement, theta, PredictionMode::StateDerived, None)
                    .unwrap();
            for (p, d) in published.probabilities.iter().zip(&derived.probabilities) {
                assert!((p.1 - d.1).abs() < PROBABILITY_TOL, "theta {theta} {measurement}");
            }
        }
    }
    for record in [FriendRecord::Phi0, FriendRecord::Phi1] {
        // The friend's M_W modes agree at θ = 0 (no leakage to condition on).
        let published = predict(
            Observer::Friend,
            Measurement::Mw,
            0.0,
            PredictionMode::AsPublished,
            Some(record),
        )
        .unwrap();
        let derived = predict(
            Observer::Friend,
            Measurement::Mw,
            0.0,
            PredictionMode::StateDerived,
            Some(record),
        )
        .unwrap();
        for (p, d) in published.probabilities.iter().zip(&derived.probabilities) {
            assert!((p.1 - d.1).abs() < PROBABILITY_TOL);
        }
        // Her M_F modes agree at θ = 1, where the leaked branch is definite.
        let published = predict(
            Observer::Friend,
            Measurement::Mf,
            1.0,
            PredictionMode::AsPublished,
            Some(record),
        )
        .unwrap();
        let derived = predict(
            Observer::Friend,
            Measurement::Mf,
            1.0,
            PredictionMode::StateDerived,
            Some(record),
        )
        .unwrap();
        for (p, d) in published.probabilities.iter().zip(&derived.probabilities) {
            assert!((p.1 - d.1).abs() < PROBABILITY_TOL);
        }
    }
}

#[test]
fn predict_validates_record_ownership_and_theta() {
    assert!(matches!(
        predict(Observer::Friend, Measurement::Mw, 0.5, PredictionMode::AsPublished, None),
        Err(ProtocolError::RecordRequired)
    ));
    assert!(matches!(
        predict(
            Observer::Wigner,
            Measurement::Mw,
            0.5,
            PredictionMode::AsPublished,
            Some(FriendRecord::Phi0)
        ),
        Err(ProtocolError::RecordForbidden)
    ));
    assert!(matches!(
        predict(Observer::Wigner, Measurement::Mw, -0.1, PredictionMode::AsPublished, None),
        Err(ProtocolError::ThetaOutOfRange(_))
    ));
}

#[test]
fn closed_form_report_tracks_tolerances() {
    let grid: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
    let report = verify_closed_forms(&grid, 1e-10).unwrap();
    assert_eq!(report.checks.len(), grid.len());
    assert!(report.passed(), "max deviation {}", report.max_deviation());

    let strict = verify_closed_forms(&grid, 1e-30).unwrap();
    assert!(!strict.passed(), "float noise should exceed 1e-30 somewhere");
}

#[test]
fn prediction_serializes_round_trip() {
    let prediction = predict(
        Observer::Friend,
        Measurement::Mf,
        0.25,
        PredictionMode::StateDerived,
        Some(FriendRecord::Phi1),
    )
    .unwrap();
    let json = serde_json::to_string(&prediction).unwrap();
    assert!(json.contains("\"observer\":\"friend\""));
    assert!(json.contains("\"measurement\":\"mf\""));
    assert!(json.contains("\"mode\":\"state-derived\""));
    let back: Prediction = serde_json::from_str(&json).unwrap();
    assert_eq!(back, prediction);
}

fn observer_cases() -> impl Strategy<Value = (Observer, Option<FriendRecord>)> {
    prop_oneof![
        Just((Observer::Wigner, None)),
        Just((Observer::Friend, Some(FriendRecord::Phi0))),
        Just((Observer::Friend, Some(FriendRecord::Phi1))),
    ]
}

fn measurement_cases() -> impl Strategy<Value = Measurement> {
    prop_oneof![Just(Measurement::Mf), Just(Measurement::Mw)]
}

fn mode_cases() -> impl Strategy<Value = PredictionMode> {
    prop_oneof![Just(PredictionMode::AsPublished), Just(PredictionMode::StateDerived)]
}

proptest! {
    #[test]
    fn every_prediction_is_a_distribution(
        theta in 0.0f64..=1.0,
        (observer, record) in observer_cases(),
        measurement in measurement_cases(),
        mode in mode_cases(),
    ) {
        let prediction = predict(observer, measurement, theta, mode, record).unwrap();
        let sum: f64 = prediction.probabilities.iter().map(|&(_, p)| p).sum();
        prop_assert!((sum - 1.0).abs() < PROBABILITY_TOL);
        for &(_, p) in &prediction.probabilities {
            prop_assert!((-PROBABILITY_TOL..=1.0 + PROBABILITY_TOL).contains(&p));
        }
    }

    #[test]
    fn interaction_stays_unitary_across_theta(theta in 0.0f64..=1.0) {
        let u = interaction_unitary(theta).unwrap();
        prop_assert!(u.unitarity_deviation() < ALGEBRA_TOL);
    }

    #[test]
    fn completion_order_never_leaks_into_reachable_states(theta in 0.0f64..=1.0) {
        let config = ProtocolConfig::new(theta).unwrap();
        let psi1 = measurement_unitary().apply(&initial_state(&config).unwrap()).unwrap();
        let a = interaction_unitary_with_order(theta, ComplementOrder::Ascending)
            .unwrap()
            .apply(&psi1)
            .unwrap();
        let b = interaction_unitary_with_order(theta, ComplementOrder::Descending)
            .unwrap()
            .apply(&psi1)
            .unwrap();
        prop_assert!(a.max_deviation(&b).unwrap() < ALGEBRA_TOL);
    }
}
