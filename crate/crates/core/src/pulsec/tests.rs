use super::*;
use crate::circuit::{ancilla_state, cnot, expected_output, prepare_psi, randomization_unitary, run_protocol};
use crate::qstate::ops::{spin_op, Axis};
use crate::qstate::{equal_up_to_global_phase, fidelity_pure, DensityMatrix, StateVector};
use proptest::prelude::*;
use std::f64::consts::FRAC_PI_4;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// exp(−iθ·H) for Hermitian H via eigendecomposition.
fn expm_hermitian(h: &ComplexMatrix, theta: f64) -> ComplexMatrix {
    let (vals, vecs) = h.eigh();
    let d = ComplexMatrix::diagonal(&vals.iter().map(|v| C64::from_polar(1.0, -theta * v)).collect::<Vec<_>>());
    &(&vecs * &d) * &vecs.adjoint()
}

#[test]
fn rf_matches_generator_exponential() {
    for (flip, phase) in [(FRAC_PI_2, 0.3f64), (PI, -1.0), (2.2, 4.0)] {
        let gen = &spin_op(Axis::X, 2, 3).unwrap().scale(c(phase.cos(), 0.0))
            + &spin_op(Axis::Y, 2, 3).unwrap().scale(c(phase.sin(), 0.0));
        let u = rf_unitary(&[2], flip, phase, 3).unwrap();
        assert!(u.max_abs_diff(&expm_hermitian(&gen, flip)) < 1e-12);
    }
}

#[test]
fn rf_examples() {
    let pi_x = rf_unitary(&[1], PI, 0.0, 1).unwrap();
    let expect = ComplexMatrix::new(2, 2, vec![c(0.0, 0.0), c(0.0, -1.0), c(0.0, -1.0), c(0.0, 0.0)]).unwrap();
    assert!(pi_x.max_abs_diff(&expect) < 1e-15);
    assert!(rf_unitary(&[1], 0.0, 2.0, 3).unwrap().max_abs_diff(&ComplexMatrix::identity(8)) < 1e-15);
    assert!(rf_unitary(&[4], 1.0, 0.0, 3).is_err());
    for (t, p) in [(0.7, 1.9), (PI, 0.0), (2.0, -0.5)] {
        let out = StateVector::basis(1, 0).unwrap().apply(&rf_unitary(&[1], t, p, 1).unwrap()).unwrap();
        let psi = prepare_psi(t, p);
        assert!((out.inner(&psi).norm() - 1.0).abs() < 1e-14);
        assert!((out.amplitude(1) - psi.amplitude(1)).norm() < 1e-14);
    }
}

#[test]
fn factor_product_equals_randomization_exactly() {
    let p = randomization_factor_product();
    assert!(p.max_abs_diff(&randomization_unitary()) < 1e-14);
}

#[test]
fn randomization_sequence_up_to_global_phase() {
    let sys = SpinSystem::chfbr2();
    let u = sequence_unitary(&compile_randomization(), &sys, Mode::Ideal).unwrap();
    let scaled = randomization_unitary().scale(C64::from_polar(1.0, FRAC_PI_4));
    assert!(u.max_abs_diff(&scaled) < 1e-12);
    let r = verify_equivalence(&compile_randomization(), &randomization_unitary(), &sys, Mode::Ideal).unwrap();
    assert_eq!(r.class, EquivalenceClass::GlobalPhase);
    assert!(r.residual < 1e-10 && (r.global_phase - FRAC_PI_4).abs() < 1e-12);
}

#[test]
fn randomization_element_count() {
    let sys = SpinSystem::chfbr2();
    let seq = compile_randomization();
    assert_eq!(seq.len(), 7);
    let expanded = expand_macros(&seq, &sys).unwrap();
    // two 3-pulse z-rotations, three π/2 pulses, two 8-element echo blocks
    assert_eq!(expanded.len(), 3 + 1 + 8 + 1 + 8 + 1 + 3);
    assert!(expanded.is_primitive());
}

#[test]
fn zrot_composite_is_exact() {
    let sys = SpinSystem::chfbr2();
    for angle in [-FRAC_PI_2, 0.4, -2.7, PI] {
        let seq = PulseSequence::new(vec![PulseElement::ZRot { spin: 1, angle }]);
        let expanded = expand_macros(&seq, &sys).unwrap();
        assert_eq!(expanded.len(), 3);
        let u = sequence_unitary(&expanded, &sys, Mode::Ideal).unwrap();
        let target = expm_hermitian(&spin_op(Axis::Z, 1, 3).unwrap(), angle);
        assert!(u.max_abs_diff(&target) < 1e-12, "angle {angle}");
    }
}

#[test]
fn jblock_delays_total_half_period() {
    let sys = SpinSystem::chfbr2();
    for (i, j) in [(1, 3), (1, 2), (2, 3)] {
        let seq = PulseSequence::new(vec![PulseElement::JBlock { i, j }]);
        let exp = expand_macros(&seq, &sys).unwrap();
        let tau = 1.0 / (2.0 * sys.coupling(i, j).abs());
        assert!((exp.total_delay() - tau).abs() < 1e-15);
        assert!(exp.elements.iter().any(|e| matches!(e, PulseElement::Rf { flip, .. } if *flip == PI)));
    }
    let blk = expand_macros(&PulseSequence::new(vec![PulseElement::JBlock { i: 1, j: 3 }]), &sys).unwrap();
    assert!((blk.total_delay() * 1e3 - 2.227).abs() < 5e-4);
}

#[test]
fn jblock_rejects_zero_coupling() {
    let sys = SpinSystem::new(vec![0.0; 2], vec![vec![0.0; 2]; 2], vec![1.0; 2]).unwrap();
    let seq = PulseSequence::new(vec![PulseElement::JBlock { i: 1, j: 2 }]);
    assert_eq!(expand_macros(&seq, &sys), Err(Error::ZeroCoupling(1, 2)));
}

#[test]
fn cnot_macro_has_seven_elements() {
    let seq = compile_cnot23();
    assert_eq!(seq.len(), 7);
    assert_eq!(seq.elements[2], PulseElement::JBlock { i: 2, j: 3 });
}

#[test]
fn cnot_equivalence() {
    let sys = SpinSystem::chfbr2();
    let target = cnot(2, 3, 3).unwrap();
    for mode in [Mode::Ideal, Mode::Physical] {
        let r = verify_equivalence(&compile_cnot23(), &target, &sys, mode).unwrap();
        assert_ne!(r.class, EquivalenceClass::Fail, "{mode:?}: {r:?}");
        assert!(r.residual < 1e-10, "{mode:?}: {r:?}");
    }
    let ideal = verify_equivalence(&compile_cnot23(), &target, &sys, Mode::Ideal).unwrap();
    assert_eq!(ideal.class, EquivalenceClass::GlobalPhase);
    assert!((ideal.global_phase + FRAC_PI_4).abs() < 1e-12);
}

#[test]
fn identity_is_not_sigma_x() {
    let sys = SpinSystem::new(vec![0.0], vec![vec![0.0]], vec![1.0]).unwrap();
    let r = verify_equivalence(&PulseSequence::default(), &crate::qstate::ops::pauli_x(), &sys, Mode::Ideal).unwrap();
    assert_eq!(r.class, EquivalenceClass::Fail);
}

#[test]
fn local_z_fit_recovers_known_phases() {
    let t = cnot(2, 3, 3).unwrap();
    let left = [0.3, -1.2, 0.7];
    let right = [0.0, 2.1, -0.4];
    let dl = expm_hermitian(&(1..=3).fold(ComplexMatrix::zeros(8, 8), |acc, s| &acc + &spin_op(Axis::Z, s, 3).unwrap().scale(c(left[s - 1], 0.0))), 1.0);
    let dr = expm_hermitian(&(1..=3).fold(ComplexMatrix::zeros(8, 8), |acc, s| &acc + &spin_op(Axis::Z, s, 3).unwrap().scale(c(right[s - 1], 0.0))), 1.0);
    let u = (&(&dl * &t) * &dr).scale(C64::from_polar(1.0, 0.9));
    let r = equiv::classify(&u, &t).unwrap();
    assert_eq!(r.class, EquivalenceClass::LocalZPhase);
    assert!(r.residual < 1e-10, "{r:?}");
}

#[test]
fn empty_sequence_is_identity() {
    let u = sequence_unitary(&PulseSequence::default(), &SpinSystem::chfbr2(), Mode::Ideal).unwrap();
    assert_eq!(u, ComplexMatrix::identity(8));
}

#[test]
fn ideal_jblock_commutes_with_iz() {
    let sys = SpinSystem::chfbr2();
    for (i, j) in [(1, 2), (1, 3), (2, 3)] {
        let u = sequence_unitary(&PulseSequence::new(vec![PulseElement::JBlock { i, j }]), &sys, Mode::Ideal).unwrap();
        for s in [i, j] {
            let z = spin_op(Axis::Z, s, 3).unwrap();
            assert!((&u * &z).max_abs_diff(&(&z * &u)) < 1e-14);
        }
    }
}

#[test]
fn refocusing_cancels_offsets_and_other_couplings() {
    let sys = SpinSystem::chfbr2();
    for (i, j) in [(1, 2), (1, 3), (2, 3), (3, 1)] {
        let macro_seq = PulseSequence::new(vec![PulseElement::JBlock { i, j }]);
        let ideal = sequence_unitary(&macro_seq, &sys, Mode::Ideal).unwrap();
        let r = verify_equivalence(&macro_seq, &ideal, &sys, Mode::Physical).unwrap();
        assert_ne!(r.class, EquivalenceClass::Fail);
        assert!(r.residual < 1e-9, "({i},{j}): {r:?}");
    }
}

#[test]
fn refocusing_on_four_spins() {
    let j = vec![
        vec![0.0, 40.0, 130.0, -70.0],
        vec![40.0, 0.0, -210.0, 15.0],
        vec![130.0, -210.0, 0.0, 90.0],
        vec![-70.0, 15.0, 90.0, 0.0],
    ];
    let sys = SpinSystem::new(vec![310.0, -125.0, 47.0, 880.0], j, vec![1.0; 4]).unwrap();
    for (i, k) in [(1, 2), (2, 3), (4, 1)] {
        let seq = PulseSequence::new(vec![PulseElement::JBlock { i, j: k }]);
        let ideal = sequence_unitary(&seq, &sys, Mode::Ideal).unwrap();
        let r = verify_equivalence(&seq, &ideal, &sys, Mode::Physical).unwrap();
        assert!(r.residual < 1e-9, "({i},{k}): {r:?}");
    }
}

#[test]
fn physical_pi_pulse_inverts() {
    let sys = SpinSystem::chfbr2();
    let rho = StateVector::basis(3, 0).unwrap().projector();
    let seq = PulseSequence::new(vec![PulseElement::rf(2, PI, 0.0)]);
    let out = simulate_physical(&seq, &rho, &sys, &NoiseModel::noiseless()).unwrap();
    assert!((out.get(0b010, 0b010) - c(1.0, 0.0)).norm() < 1e-15);
}

#[test]
fn t2_decay_of_fluorine_coherence() {
    let sys = SpinSystem::chfbr2();
    let plus = prepare_psi(FRAC_PI_2, FRAC_PI_2);
    let zero = StateVector::basis(1, 0).unwrap();
    let rho = zero.tensor(&plus).tensor(&zero).projector();
    let noise = NoiseModel::new(0.0, 1, true, 0).unwrap();
    let seq = PulseSequence::new(vec![PulseElement::Delay { duration: 0.7 }]);
    let out = simulate_physical(&seq, &rho, &sys, &noise).unwrap();
    let before = rho.get(0b000, 0b010).norm();
    let after = out.get(0b000, 0b010).norm();
    assert!((after / before - (-1.0f64).exp()).abs() < 1e-12);
    assert!((out.get(0, 0) - rho.get(0, 0)).norm() < 1e-15);
}

#[test]
fn gradient_keeps_zero_quantum_terms() {
    let sys = SpinSystem::chfbr2();
    let psi = StateVector::random(3, &mut <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(3));
    let rho = psi.projector();
    let out = simulate_physical(&PulseSequence::new(vec![PulseElement::Gradient]), &rho, &sys, &NoiseModel::noiseless()).unwrap();
    assert_eq!(out.get(0b010, 0b100), rho.get(0b010, 0b100));
    assert_eq!(out.get(0b000, 0b001), c(0.0, 0.0));
    assert!((out.matrix().trace() - c(1.0, 0.0)).norm() < 1e-14);
}

#[test]
fn simulate_rejects_macros() {
    let sys = SpinSystem::chfbr2();
    let rho = DensityMatrix::maximally_mixed(3);
    let r = simulate_physical(&compile_randomization(), &rho, &sys, &NoiseModel::noiseless());
    assert!(matches!(r, Err(Error::UnexpandedMacro(_))));
}

#[test]
fn physical_randomization_matches_gate_model() {
    let sys = SpinSystem::chfbr2();
    let seq = expand_macros(&compile_randomization(), &sys).unwrap();
    for (t, p) in [(FRAC_PI_2, FRAC_PI_2), (1.0, 2.0), (2.6, 5.1)] {
        let input = prepare_psi(t, p).tensor(&ancilla_state());
        let out = simulate_physical(&seq, &input.projector(), &sys.on_resonance(), &NoiseModel::noiseless()).unwrap();
        let fit = fit_state_z_phases(&run_protocol(t, p).hidden_state, &out).unwrap();
        assert!(fit.fidelity >= 0.999, "{fit:?}");
    }
}

#[test]
fn full_pipeline_ideal_output() {
    let sys = SpinSystem::chfbr2();
    for (t, p) in [(FRAC_PI_2, FRAC_PI_2), (0.8, 3.3)] {
        let u = sequence_unitary(&compile_full(t, p), &sys, Mode::Ideal).unwrap();
        let out = StateVector::basis(3, 0).unwrap().apply(&u).unwrap();
        let f = fidelity_pure(&out, &expected_output(t, p)).unwrap();
        assert!((f - 1.0).abs() < 1e-12);
    }
}

#[test]
fn full_pipeline_physical_output() {
    let sys = SpinSystem::chfbr2();
    let (t, p) = (1.2, 0.4);
    let seq = expand_macros(&compile_full(t, p), &sys).unwrap();
    let rho = StateVector::basis(3, 0).unwrap().projector();
    let out = simulate_physical(&seq, &rho, &sys, &NoiseModel::noiseless()).unwrap();
    let target = crate::circuit::bell_phi_plus().tensor(&prepare_psi(t, p));
    assert!((fidelity_pure(&target, &out).unwrap() - 1.0).abs() < 1e-9);
}

#[test]
fn ancilla_preparation_pulse() {
    let sys = SpinSystem::chfbr2();
    let seq = PulseSequence::new(vec![PulseElement::Rf { spins: vec![2, 3], flip: FRAC_PI_2, phase: pseudo_hadamard_phase() }]);
    let u = sequence_unitary(&seq, &sys, Mode::Ideal).unwrap();
    let out = StateVector::basis(3, 0).unwrap().apply(&u).unwrap();
    let expect = StateVector::basis(1, 0).unwrap().tensor(&ancilla_state());
    assert!(out.amplitudes().iter().zip(expect.amplitudes()).all(|(a, b)| (a - b).norm() < 1e-15));
}

#[test]
fn text_examples() {
    let seq = PulseSequence::new(vec![
        PulseElement::rf(1, FRAC_PI_2, PHASE_MINUS_X),
        PulseElement::Delay { duration: 2.227e-3 },
        PulseElement::Gradient,
        PulseElement::JBlock { i: 1, j: 3 },
        PulseElement::ZRot { spin: 1, angle: -FRAC_PI_2 },
        PulseElement::Cnot { control: 2, target: 3 },
        PulseElement::Rf { spins: vec![2, 3], flip: PI, phase: 0.3 },
    ]);
    let text = render_sequence(&seq);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "RF spin=1 flip=90deg phase=-x");
    assert_eq!(lines[1], "DELAY 2.227ms");
    assert_eq!(lines[2], "GRAD");
    assert_eq!(lines[3], "JBLOCK i=1 j=3");
    assert_eq!(lines[4], "ZROT spin=1 angle=-90deg");
    assert_eq!(lines[5], "CNOT control=2 target=3");
    let back = parse_sequence(&text).unwrap();
    assert_eq!(render_sequence(&back), text);
}

#[test]
fn parse_errors_carry_line_numbers() {
    let err = parse_sequence("GRAD\n\n# comment\nRF spin=1 flip=90 phase=x\n").unwrap_err();
    assert!(matches!(err, Error::Parse { line: 4, .. }));
    assert!(matches!(parse_sequence("WOBBLE"), Err(Error::Parse { line: 1, .. })));
    assert!(matches!(parse_sequence("DELAY -1ms"), Err(Error::Parse { .. })));
    assert!(matches!(parse_sequence("CNOT control=2"), Err(Error::Parse { .. })));
}

#[test]
fn spin_system_validation() {
    let ok = SpinSystem::chfbr2();
    assert_eq!(ok.coupling(2, 3), -310.9);
    assert_eq!(ok.t2(2), 0.7);
    let asym = vec![vec![0.0, 1.0], vec![2.0, 0.0]];
    assert!(SpinSystem::new(vec![0.0; 2], asym, vec![1.0; 2]).is_err());
    assert!(SpinSystem::new(vec![0.0; 2], vec![vec![0.0; 2]; 2], vec![1.0, 0.0]).is_err());
    assert!(SpinSystem::new(vec![0.0; 2], vec![vec![1.0, 0.0], vec![0.0, 0.0]], vec![1.0; 2]).is_err());
}

#[test]
fn noise_validation() {
    assert!(NoiseModel::new(-0.1, 10, false, 1).is_err());
    assert!(NoiseModel::new(0.1, 0, false, 1).is_err());
    let m = NoiseModel::new(0.0, 5, false, 1).unwrap();
    assert!(m.scale_factors(3).iter().flatten().all(|&s| s == 1.0));
}

fn mean_fidelity(sigma: f64) -> f64 {
    let sys = SpinSystem::chfbr2();
    let noise = NoiseModel::new(sigma, 200, false, 11).unwrap();
    let (t, p) = (FRAC_PI_2, FRAC_PI_2);
    let seq = expand_macros(&compile_full(t, p), &sys).unwrap();
    let rho = StateVector::basis(3, 0).unwrap().projector();
    let out = simulate_physical(&seq, &rho, &sys, &noise).unwrap();
    let target = crate::circuit::bell_phi_plus().tensor(&prepare_psi(t, p));
    fidelity_pure(&target, &out).unwrap()
}

#[test]
fn fidelity_non_increasing_in_sigma() {
    let f: Vec<f64> = [0.0, 0.01, 0.03, 0.05].iter().map(|&s| mean_fidelity(s)).collect();
    for w in f.windows(2) {
        assert!(w[1] <= w[0] + 1e-12, "{f:?}");
    }
}

#[test]
fn ensemble_average_is_deterministic() {
    let sys = SpinSystem::chfbr2();
    let seq = expand_macros(&compile_full(1.0, 1.0), &sys).unwrap();
    let rho = StateVector::basis(3, 0).unwrap().projector();
    let noise = NoiseModel::new(0.03, 64, true, 5).unwrap();
    let a = simulate_physical(&seq, &rho, &sys, &noise).unwrap();
    let b = simulate_physical(&seq, &rho, &sys, &noise).unwrap();
    assert_eq!(a, b);
}

fn arb_element() -> impl Strategy<Value = PulseElement> {
    prop_oneof![
        (1usize..=3, -7.0f64..7.0, -7.0f64..7.0).prop_map(|(s, f, p)| PulseElement::rf(s, f, p)),
        (0.0f64..0.01).prop_map(|d| PulseElement::Delay { duration: d }),
        Just(PulseElement::Gradient),
        (1usize..=3, -7.0f64..7.0).prop_map(|(s, a)| PulseElement::ZRot { spin: s, angle: a }),
        prop::sample::select(vec![(1usize, 2usize), (1, 3), (2, 3), (3, 2)]).prop_map(|(i, j)| PulseElement::JBlock { i, j }),
        prop::sample::select(vec![(1usize, 2usize), (2, 3), (3, 1)]).prop_map(|(c, t)| PulseElement::Cnot { control: c, target: t }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn sequences_are_unitary(els in prop::collection::vec(arb_element(), 0..8)) {
        let sys = SpinSystem::chfbr2();
        let seq = PulseSequence::new(els);
        for mode in [Mode::Ideal, Mode::Physical] {
            let u = sequence_unitary(&seq, &sys, mode).unwrap();
            prop_assert!(u.unitarity_deviation() < 1e-12);
        }
    }

    #[test]
    fn primitive_elements_are_unitary(s in 1usize..=3, f in -10.0f64..10.0, p in -10.0f64..10.0) {
        prop_assert!(rf_unitary(&[s], f, p, 3).unwrap().unitarity_deviation() < 1e-12);
    }

    #[test]
    fn expansion_is_idempotent(els in prop::collection::vec(arb_element(), 0..8)) {
        let sys = SpinSystem::chfbr2();
        let once = expand_macros(&PulseSequence::new(els), &sys).unwrap();
        prop_assert!(once.is_primitive());
        prop_assert_eq!(expand_macros(&once, &sys).unwrap(), once);
    }

    #[test]
    fn text_round_trip(els in prop::collection::vec(arb_element(), 0..10)) {
        let text = render_sequence(&PulseSequence::new(els));
        let back = parse_sequence(&text).unwrap();
        prop_assert_eq!(render_sequence(&back), text);
    }

    #[test]
    fn ideal_and_macro_free_forms_agree(els in prop::collection::vec(arb_element(), 0..6)) {
        // on resonance, expanded blocks act exactly like their ideal forms
        let sys = SpinSystem::chfbr2();
        let seq = PulseSequence::new(els);
        let a = sequence_unitary(&seq, &sys, Mode::Ideal).unwrap();
        let b = sequence_unitary(&expand_macros(&seq, &sys).unwrap(), &sys, Mode::Ideal).unwrap();
        prop_assert!(equal_up_to_global_phase(&a, &b, 1e-9).unwrap().equal);
    }
}
