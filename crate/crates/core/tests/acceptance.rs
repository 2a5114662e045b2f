//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::f64::consts::{FRAC_PI_2, PI};
use std::time::{Duration, Instant};

use nohide::circuit::{
    bell_phi_plus, conditional_unitary, expected_output, prepare_psi, randomization_branches, randomization_unitary,
    run_protocol, verify_no_hiding_structure, Grid, HidingIsometry, BRANCH_PHASES,
};
use nohide::experiment::{gate_states, pulse_states, total_sequence_time};
use nohide::nmrsim::Receiver;
use nohide::pulsec::{
    compile_cnot23, compile_randomization, fit_state_z_phases, randomization_factor_product, verify_equivalence,
    EquivalenceClass, Mode, NoiseModel, SpinSystem,
};
use nohide::qstate::{equal_up_to_global_phase, partial_trace, DensityMatrix};
use nohide::tomo::{deviation_report, pauli_expectations, reconstruct};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const HIDING_TOL: f64 = 1e-12;
const RECOVERY_TOL: f64 = 1e-12;
const COMPILER_TOL: f64 = 1e-10;
const PHYSICAL_FIDELITY: f64 = 0.999;
const SURFACE_TOL: f64 = 1e-9;
const ZERO_SIGNAL_TOL: f64 = 1e-12;
/// Accepted window for the compiled free-precession time, ms.
const SEQUENCE_TIME_MS: (f64, f64) = (15.0, 60.0);
/// Minimum T2 attenuation over the sequence on the fastest-relaxing spin.
const T2_ATTENUATION_MIN: f64 = 0.958;
const STRUCTURE_TOL: f64 = 1e-12;
const STRUCTURE_SAMPLES: usize = 64;
const TOMO_TOL: f64 = 1e-12;
const NOISE_SIGMAS: [f64; 3] = [0.01, 0.03, 0.05];
const NOISE_ENSEMBLE: usize = 200;
const NOISE_SEED: u64 = 2011;
const AVG_BRACKET: (f64, f64) = (0.005, 0.10);
const MAX_BRACKET: (f64, f64) = (0.01, 0.20);

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn paper_grid() -> Vec<(f64, f64)> {
    Grid::default().points().iter().map(|p| (p.theta(), p.phi())).collect()
}

fn within_budget(elapsed: Duration, budget: Duration) -> bool {
    elapsed <= budget
}

fn hiding_exactness() -> Outcome {
    let start = Instant::now();
    let mixed = DensityMatrix::maximally_mixed(1);
    let worst = paper_grid()
        .iter()
        .map(|&(t, p)| run_protocol(t, p).system_marginal.matrix().max_abs_diff(mixed.matrix()))
        .fold(0.0, f64::max);
    let elapsed = start.elapsed();
    check(
        worst < HIDING_TOL && within_budget(elapsed, Duration::from_secs(1)),
        format!("325 states, max |Tr23(hidden) - I/2| = {worst:.2e}, {elapsed:.2?}"),
    )
}

fn recovery_exactness() -> Outcome {
    let start = Instant::now();
    let bell = bell_phi_plus().projector();
    let (mut worst_fid, mut worst_bell) = (0.0f64, 0.0f64);
    for (t, p) in paper_grid() {
        let rec = run_protocol(t, p);
        let target = bell_phi_plus().tensor(&prepare_psi(t, p));
        worst_fid = worst_fid.max(1.0 - target.inner(&rec.output_state).norm_sqr());
        worst_bell = worst_bell.max(rec.bell_marginal.matrix().max_abs_diff(bell.matrix()));
    }
    let elapsed = start.elapsed();
    check(
        worst_fid <= RECOVERY_TOL && worst_bell < RECOVERY_TOL && within_budget(elapsed, Duration::from_secs(1)),
        format!("max 1-F = {worst_fid:.2e}, Bell marginal spread {worst_bell:.2e}, {elapsed:.2?}"),
    )
}

fn compiler_correctness() -> Outcome {
    let start = Instant::now();
    let sys = SpinSystem::chfbr2();
    let product = equal_up_to_global_phase(&randomization_factor_product(), &randomization_unitary(), COMPILER_TOL)
        .expect("same shape");
    let cnot23 = nohide::circuit::cnot(2, 3, 3).expect("valid");
    let mut pass = product.equal;
    let mut detail = format!("factor product residual {:.2e} phase {:.3}", product.residual, product.phase);
    for (name, seq, target) in [
        ("randomization", compile_randomization(), randomization_unitary()),
        ("cnot23", compile_cnot23(), cnot23),
    ] {
        for mode in [Mode::Ideal, Mode::Physical] {
            let r = verify_equivalence(&seq, &target, &sys, mode).expect("verifiable");
            pass &= r.class != EquivalenceClass::Fail && r.residual <= COMPILER_TOL;
            detail += &format!("; {name}/{mode:?}: {:?} {:.2e}", r.class, r.residual);
        }
    }
    pass &= within_budget(start.elapsed(), Duration::from_secs(1));
    check(pass, format!("{detail}, {:.2?}", start.elapsed()))
}

fn physical_pipeline() -> Outcome {
    let start = Instant::now();
    let sys = SpinSystem::chfbr2();
    let mut worst = 1.0f64;
    for t in [30.0f64, 90.0, 150.0] {
        for p in [45.0f64, 180.0, 300.0] {
            let (t, p) = (t.to_radians(), p.to_radians());
            let out = pulse_states(t, p, &sys, &NoiseModel::noiseless()).expect("simulates").output;
            let q3 = partial_trace(&out, &[3]).expect("qubit 3");
            let fit = fit_state_z_phases(&prepare_psi(t, p), &q3).expect("fits");
            worst = worst.min(fit.fidelity);
        }
    }
    check(
        worst >= PHYSICAL_FIDELITY,
        format!("9 grid points, J = (49.7, 224.5, -310.9) Hz, min fitted fidelity {worst:.12}, {:.2?}", start.elapsed()),
    )
}

fn figure_surfaces() -> Outcome {
    let rx = Receiver::default();
    let sys = SpinSystem::chfbr2();
    let (mut surface, mut other) = (0.0f64, 0.0f64);
    let (mut p_surface, mut p_other) = (0.0f64, 0.0f64);
    for (t, p) in paper_grid() {
        let expect = t.sin() * p.sin();
        let g = gate_states(t, p);
        let ph = pulse_states(t, p, &sys, &NoiseModel::noiseless()).expect("simulates");
        for (states, s_err, o_err) in [(&g, &mut surface, &mut other), (&ph, &mut p_surface, &mut p_other)] {
            *s_err = s_err.max((rx.normalized(&states.input, 1).unwrap().re - expect).abs());
            *s_err = s_err.max((rx.normalized(&states.output, 3).unwrap().re - expect).abs());
            for s in [2, 3] {
                *o_err = o_err.max(rx.normalized(&states.input, s).unwrap().norm());
            }
            for s in [1, 2] {
                *o_err = o_err.max(rx.normalized(&states.output, s).unwrap().norm());
            }
        }
    }
    let ms = total_sequence_time(&sys).expect("compiles") * 1e3;
    let attenuation = (-ms * 1e-3 / sys.t2(2)).exp();
    let pass = surface < SURFACE_TOL
        && other < ZERO_SIGNAL_TOL
        && p_surface < SURFACE_TOL
        && p_other < ZERO_SIGNAL_TOL
        && (SEQUENCE_TIME_MS.0..=SEQUENCE_TIME_MS.1).contains(&ms)
        && attenuation >= T2_ATTENUATION_MIN;
    check(
        pass,
        format!(
            "gate: surface {surface:.2e} others {other:.2e}; pulse: surface {p_surface:.2e} others {p_other:.2e}; \
             sequence time {ms:.2} ms, T2 attenuation {attenuation:.4}"
        ),
    )
}

fn structure_theorem() -> Outcome {
    let seed = nohide::circuit::DEFAULT_STRUCTURE_SEED;
    let r = verify_no_hiding_structure(&HidingIsometry::randomization(), STRUCTURE_SAMPLES, seed).unwrap();
    let e = verify_no_hiding_structure(&HidingIsometry::erasure(), STRUCTURE_SAMPLES, seed).unwrap();
    let k = verify_no_hiding_structure(&HidingIsometry::keep_system(), STRUCTURE_SAMPLES, seed).unwrap();
    let pass = r.sigma_fixed
        && r.ancilla_isometry
        && r.max_residual < STRUCTURE_TOL
        && e.sigma_fixed
        && e.ancilla_isometry
        && e.max_residual < STRUCTURE_TOL
        && !k.sigma_fixed;
    check(
        pass,
        format!(
            "randomization residual {:.2e}, erasure residual {:.2e}, non-hiding sigma spread {:.2e}",
            r.max_residual, e.max_residual, k.sigma_residual
        ),
    )
}

fn tomography_round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let rho = DensityMatrix::random(3, &mut rng);
        let back = reconstruct(&pauli_expectations(&rho)).unwrap();
        worst = worst.max(back.matrix().max_abs_diff(rho.matrix()));
    }
    let theory = expected_output(FRAC_PI_2, FRAC_PI_2);
    let self_dev = deviation_report(theory.matrix(), theory.matrix()).unwrap();
    check(
        worst < TOMO_TOL && self_dev.avg_abs_dev == 0.0 && self_dev.max_abs_dev == 0.0,
        format!("50 random states, max round-trip error {worst:.2e}, self-deviation ({}, {})", self_dev.avg_abs_dev, self_dev.max_abs_dev),
    )
}

fn noise_bracket() -> Outcome {
    let start = Instant::now();
    let sys = SpinSystem::chfbr2();
    let theta = FRAC_PI_2;
    let mut pass = true;
    let mut detail = Vec::new();
    for phi in [FRAC_PI_2, 0.0, PI] {
        let theory = expected_output(theta, phi);
        let devs: Vec<(f64, f64)> = NOISE_SIGMAS
            .iter()
            .map(|&sigma| {
                let noise = NoiseModel::new(sigma, NOISE_ENSEMBLE, false, NOISE_SEED).unwrap();
                let out = pulse_states(theta, phi, &sys, &noise).unwrap().output;
                let rho = reconstruct(&pauli_expectations(&out)).unwrap();
                let d = deviation_report(theory.matrix(), rho.matrix()).unwrap();
                (d.avg_abs_dev, d.max_abs_dev)
            })
            .collect();
        let (avg, max) = devs[1];
        pass &= (AVG_BRACKET.0..=AVG_BRACKET.1).contains(&avg) && (MAX_BRACKET.0..=MAX_BRACKET.1).contains(&max);
        pass &= devs.windows(2).all(|w| w[1].0 >= w[0].0 && w[1].1 >= w[0].1);
        let cells: Vec<String> = devs.iter().map(|(a, m)| format!("{a:.4}/{m:.4}")).collect();
        detail.push(format!("phi={:.0}deg avg/max at sigma 0.01,0.03,0.05: {}", phi.to_degrees(), cells.join(", ")));
    }
    pass &= within_budget(start.elapsed(), Duration::from_secs(60));
    check(pass, format!("{}; {:.2?}", detail.join("; "), start.elapsed()))
}

fn branch_bridge() -> Outcome {
    let built = conditional_unitary(&randomization_branches()).unwrap();
    let literal = randomization_unitary();
    check(
        built == literal,
        format!("entrywise equal: {}, branch phases {:?}", built == literal, BRANCH_PHASES),
    )
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("hiding exactness", hiding_exactness),
        ("recovery exactness", recovery_exactness),
        ("compiler correctness", compiler_correctness),
        ("physical-mode pipeline", physical_pipeline),
        ("signal surfaces", figure_surfaces),
        ("structure theorem", structure_theorem),
        ("tomography round trip", tomography_round_trip),
        ("noise bracket", noise_bracket),
        ("branch decomposition", branch_bridge),
    ];
    let mut failures = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        if !o.pass {
            failures += 1;
        }
        println!("{} criterion {} ({name}): {}", if o.pass { "PASS" } else { "FAIL" }, k + 1, o.detail);
    }
    println!("acceptance: {} passed, {failures} failed", criteria.len() - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
