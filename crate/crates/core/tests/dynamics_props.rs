use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use rydberg_grover::dynamics::{
    controlled_phase_error, controlled_phase_fragment, empirical_prefactor, evolve, min_error_formula, optimal_rabi,
    Dispersion, Drive, DriveSpec, InteractionGraph,
};
use rydberg_grover::hilbert::{fidelity_mod_phase, AtomSpec, RegisterState, Role};
use rydberg_grover::protocols::Executor;
use rydberg_grover::pulses::Transition;

fn state(raw: &[(f64, f64)]) -> RegisterState {
    let atoms = vec![AtomSpec::qubit(); 3];
    let mut amps: Vec<Complex64> = raw.iter().map(|&(a, b)| Complex64::new(a, b)).collect();
    let n = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt().max(1e-3);
    amps.iter_mut().for_each(|z| *z /= n);
    RegisterState::from_amplitudes(atoms, amps).unwrap()
}

fn drive(phases: &[f64], bright: bool) -> DriveSpec {
    let transition = if bright {
        Transition::Bright { a: 0, b: 1, ryd: 2 }
    } else {
        Transition::Bare { from: 1, to: 2 }
    };
    DriveSpec {
        drives: phases
            .iter()
            .enumerate()
            .map(|(atom, &phase)| Drive {
                atom,
                transition,
                phase,
            })
            .collect(),
        rabi: 1.0,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn norm_never_grows(
        raw in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 27),
        phases in prop::collection::vec(0.0..2.0 * PI, 1..=3),
        bright in any::<bool>(),
        shift in 0.0..20.0f64,
        gamma in 0.0..0.5f64,
        t in 0.0..10.0f64,
    ) {
        let graph = InteractionGraph::all_pairs(&[0, 1, 2], Role::RydR, shift).unwrap().with_decay(Role::RydR, gamma).unwrap();
        let mut s = state(&raw);
        let before = s.norm_sqr();
        evolve(&mut s, &drive(&phases, bright), &graph, t).unwrap();
        let after = s.norm_sqr();
        prop_assert!(after <= before * (1.0 + 1e-12));
        if gamma == 0.0 {
            prop_assert!((after - before).abs() < 1e-10);
        }
    }

    #[test]
    fn evolution_is_time_additive(
        raw in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 27),
        phases in prop::collection::vec(0.0..2.0 * PI, 1..=3),
        shift in 0.0..20.0f64,
        gamma in 0.0..0.5f64,
        t1 in 0.0..5.0f64,
        t2 in 0.0..5.0f64,
    ) {
        let graph = InteractionGraph::all_pairs(&[0, 1, 2], Role::RydR, shift).unwrap().with_decay(Role::RydR, gamma).unwrap();
        let d = drive(&phases, false);
        let mut split = state(&raw);
        let mut whole = split.clone();
        evolve(&mut split, &d, &graph, t1).unwrap();
        evolve(&mut split, &d, &graph, t2).unwrap();
        evolve(&mut whole, &d, &graph, t1 + t2).unwrap();
        for (x, y) in split.amplitudes().iter().zip(whole.amplitudes()) {
            prop_assert!((x - y).norm() < 1e-9);
        }
    }
}

#[test]
fn strong_blockade_matches_ideal_pulses() {
    let rabi = 1.0;
    let graph = InteractionGraph::all_pairs(&[0, 1], Role::RydR, 1e4 * rabi).unwrap();
    let atoms = vec![AtomSpec::qubit(); 2];
    for label in [[0, 0], [0, 1], [1, 0], [1, 1]] {
        let mut ideal = RegisterState::basis_state(atoms.clone(), &label).unwrap();
        let mut dynamic = ideal.clone();
        controlled_phase_fragment(&mut Executor::ideal(), &mut ideal).unwrap();
        controlled_phase_fragment(&mut Executor::dynamical(graph.clone(), rabi).unwrap(), &mut dynamic).unwrap();
        assert!((dynamic.norm_sqr() - 1.0).abs() < 1e-10);
        // three pulses, each within 1e-5
        assert!(fidelity_mod_phase(&ideal, &dynamic).unwrap() > 1.0 - 3e-5, "{label:?}");
    }
}

#[test]
fn error_at_optimum_tracks_closed_form() {
    let tau = 1.0;
    for bt in [1e3, 1e4, 1e5] {
        let b = bt / tau;
        let e = controlled_phase_error(b, tau, optimal_rabi(b, tau).unwrap(), Dispersion::default()).unwrap();
        let f = min_error_formula(b, tau).unwrap();
        assert!(e / f < 2.0 && f / e < 2.0, "B tau {bt}: {e} vs {f}");
    }
}

#[test]
fn prefactor_grows_roughly_linearly() {
    let (b, tau) = (1e4, 1.0);
    let d = Dispersion::Hann {
        periods: 3.0,
        nodes: 16,
    };
    let c: Vec<f64> = (2..=4).map(|k| empirical_prefactor(k, b, tau, d).unwrap()).collect();
    let steps = [c[1] - c[0], c[2] - c[1]];
    assert!(steps.iter().all(|&s| s > 0.0), "{c:?}");
    // equal increments within 50%
    assert!((steps[1] / steps[0] - 1.0).abs() < 0.5, "{c:?}");
}
