//! Rotation blocks for resonant laser pulses.
//!
//! Convention: a pulse of area `theta` and laser phase `phi` on the pair
//! `(from, to)` acts as
//!
//! ```text
//! [ cos(theta/2)                 -i e^{+i phi} sin(theta/2) ]
//! [ -i e^{-i phi} sin(theta/2)   cos(theta/2)               ]
//! ```
//!
//! so a 2pi pulse is `-1` on the pair, and exciting with `phi` then
//! de-exciting with `phi + pi` is the identity.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{BlockadeCondition, Control, RegisterState, Role};

pub use crate::hilbert::BlockadeCondition as Blockade;

const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn rotation_block(theta: f64, phi: f64) -> DMatrix<Complex64> {
    let c = Complex64::new((theta / 2.0).cos(), 0.0);
    let s = (theta / 2.0).sin();
    DMatrix::from_row_slice(
        2,
        2,
        &[
            c,
            -I * Complex64::from_polar(s, phi),
            -I * Complex64::from_polar(s, -phi),
            c,
        ],
    )
}

/// 3x3 block on `(a, b, ryd)`: the dark state `(|a>+|b>)/sqrt2` is left
/// alone and `(|a>-|b>)/sqrt2` is rotated into `ryd` like a bare level.
pub fn bright_block(theta: f64, phi: f64) -> DMatrix<Complex64> {
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    let z = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    // columns: dark, bright, ryd
    let basis = DMatrix::from_row_slice(3, 3, &[h, h, z, h, -h, z, z, z, one]);
    let r = rotation_block(theta, phi);
    let mut inner = DMatrix::identity(3, 3);
    inner.view_mut((1, 1), (2, 2)).copy_from(&r);
    &basis * inner * basis.adjoint()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Transition {
    /// Single-field pulse between two levels.
    Bare { from: usize, to: usize },
    /// Lambda-configuration pulse from `(|a>-|b>)/sqrt2` to `ryd`.
    Bright { a: usize, b: usize, ryd: usize },
}

impl Transition {
    pub fn levels(&self) -> Vec<usize> {
        match *self {
            Transition::Bare { from, to } => vec![from, to],
            Transition::Bright { a, b, ryd } => vec![a, b, ryd],
        }
    }

    /// The upper level the pulse populates.
    pub fn upper(&self) -> usize {
        match *self {
            Transition::Bare { to, .. } => to,
            Transition::Bright { ryd, .. } => ryd,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseSpec {
    pub atom: usize,
    pub transition: Transition,
    /// Pulse area in radians.
    pub angle: f64,
    #[serde(default)]
    pub phase: f64,
    #[serde(default)]
    pub blockade: Option<BlockadeCondition>,
}

impl PulseSpec {
    pub fn bare(atom: usize, from: usize, to: usize, angle: f64, phase: f64) -> Self {
        Self {
            atom,
            transition: Transition::Bare { from, to },
            angle,
            phase,
            blockade: None,
        }
    }

    pub fn bright(atom: usize, a: usize, b: usize, ryd: usize, angle: f64, phase: f64) -> Self {
        Self {
            atom,
            transition: Transition::Bright { a, b, ryd },
            angle,
            phase,
            blockade: None,
        }
    }

    pub fn blocked_by(mut self, blockade: Option<BlockadeCondition>) -> Self {
        self.blockade = blockade.filter(|b| !b.blocking_atoms.is_empty());
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !self.angle.is_finite() || !(0.0..=4.0 * PI + 1e-12).contains(&self.angle) {
            return Err(Error::InvalidParameter(format!(
                "pulse area {} outside [0, 4pi]",
                self.angle
            )));
        }
        if !self.phase.is_finite() {
            return Err(Error::InvalidParameter("non-finite laser phase".into()));
        }
        if let Some(b) = &self.blockade {
            if b.blocking_atoms.contains(&self.atom) {
                return Err(Error::Precondition(format!(
                    "pulse on atom {} cannot be blockaded by itself",
                    self.atom
                )));
            }
        }
        Ok(())
    }

    pub fn block(&self) -> DMatrix<Complex64> {
        match self.transition {
            Transition::Bare { .. } => rotation_block(self.angle, self.phase),
            Transition::Bright { .. } => bright_block(self.angle, self.phase),
        }
    }

    /// Ideal-blockade application.
    pub fn apply(&self, state: &mut RegisterState) -> Result<()> {
        self.validate()?;
        let control = self.blockade.clone().map(Control::Blockade);
        state.apply_block_unitary(self.atom, &self.block(), &self.transition.levels(), control.as_ref())
    }
}

pub fn apply_sequence(state: &mut RegisterState, pulses: &[PulseSpec]) -> Result<()> {
    pulses.iter().try_for_each(|p| p.apply(state))
}

pub fn pi_pulse(
    state: &mut RegisterState,
    atom: usize,
    from_level: usize,
    ryd_level: usize,
    phi: f64,
    blockade: Option<BlockadeCondition>,
) -> Result<()> {
    PulseSpec::bare(atom, from_level, ryd_level, PI, phi)
        .blocked_by(blockade)
        .apply(state)
}

pub fn two_pi_pulse(
    state: &mut RegisterState,
    atom: usize,
    from_level: usize,
    ryd_level: usize,
    phi: f64,
    blockade: Option<BlockadeCondition>,
) -> Result<()> {
    PulseSpec::bare(atom, from_level, ryd_level, 2.0 * PI, phi)
        .blocked_by(blockade)
        .apply(state)
}

/// Bright-state pulse from the atom's qubit levels into its `|r>` level
/// (or `|s>` when it has no `|r>`).
pub fn bright_pulse(
    state: &mut RegisterState,
    atom: usize,
    theta: f64,
    phi: f64,
    blockade: Option<BlockadeCondition>,
) -> Result<()> {
    let spec = state
        .atoms()
        .get(atom)
        .ok_or(Error::InvalidAtom {
            index: atom,
            len: state.num_atoms(),
        })?
        .clone();
    let a = spec.require(Role::Ground0)?;
    let b = spec.require(Role::Ground1)?;
    let ryd = spec
        .level(Role::RydR)
        .or_else(|| spec.level(Role::RydS))
        .ok_or_else(|| Error::InvalidLevels(format!("atom {atom} has no Rydberg level")))?;
    PulseSpec::bright(atom, a, b, ryd, theta, phi)
        .blocked_by(blockade)
        .apply(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{basis_state, fidelity_mod_phase, unitarity_deviation, AtomSpec};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn close(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>, tol: f64) -> bool {
        (a - b).iter().all(|x| x.norm() < tol)
    }

    fn single(amps: [Complex64; 3]) -> RegisterState {
        RegisterState::from_amplitudes(vec![AtomSpec::qubit()], amps.to_vec()).unwrap()
    }

    #[test]
    fn rotation_block_values() {
        assert!(close(&rotation_block(0.0, 0.3), &DMatrix::identity(2, 2), 1e-15));
        assert!(close(
            &rotation_block(2.0 * PI, 1.1),
            &(-DMatrix::identity(2, 2)),
            1e-15
        ));
        for phi in [0.0, 0.4, 2.0, -1.3] {
            let r = rotation_block(PI, phi);
            assert!(close(&(&r * &r), &(-DMatrix::identity(2, 2)), 1e-15));
            assert!(unitarity_deviation(&r) < 1e-15);
        }
        assert!(unitarity_deviation(&bright_block(1.7, 0.9)) < 1e-14);
    }

    #[test]
    fn pi_pulse_rotation_convention() {
        let mut s = basis_state(vec![AtomSpec::qubit()], &[0]).unwrap();
        pi_pulse(&mut s, 0, 0, 2, 0.0, None).unwrap();
        assert!((s.amplitude(&[2]).unwrap() - c(0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn pi_pulse_is_blockaded() {
        let mut s = basis_state(vec![AtomSpec::qubit(); 2], &[2, 0]).unwrap();
        let before = s.clone();
        pi_pulse(&mut s, 1, 0, 2, 0.0, Some(BlockadeCondition::new(vec![0], vec![2]))).unwrap();
        assert_eq!(s, before);
    }

    #[test]
    fn round_trip_signs() {
        let mut s = basis_state(vec![AtomSpec::qubit()], &[0]).unwrap();
        pi_pulse(&mut s, 0, 0, 2, 0.0, None).unwrap();
        pi_pulse(&mut s, 0, 0, 2, 0.0, None).unwrap();
        assert!((s.amplitude(&[0]).unwrap() - c(-1.0, 0.0)).norm() < 1e-15);

        let mut s = basis_state(vec![AtomSpec::qubit()], &[0]).unwrap();
        pi_pulse(&mut s, 0, 0, 2, 0.0, None).unwrap();
        pi_pulse(&mut s, 0, 0, 2, PI, None).unwrap();
        assert!((s.amplitude(&[0]).unwrap() - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn round_trip_signs_random_phases() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..8 {
            let phi: f64 = rng.gen_range(-PI..PI);
            for (second, expected) in [(phi, -1.0), (phi + PI, 1.0)] {
                let mut s = basis_state(vec![AtomSpec::qubit()], &[1]).unwrap();
                pi_pulse(&mut s, 0, 1, 2, phi, None).unwrap();
                pi_pulse(&mut s, 0, 1, 2, second, None).unwrap();
                assert!((s.amplitude(&[1]).unwrap() - c(expected, 0.0)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn bright_pulse_examples() {
        let h = FRAC_1_SQRT_2;
        let dark = single([c(h, 0.0), c(h, 0.0), c(0.0, 0.0)]);
        let mut s = dark.clone();
        bright_pulse(&mut s, 0, PI, 0.0, None).unwrap();
        assert!(s
            .amplitudes()
            .iter()
            .zip(dark.amplitudes())
            .all(|(a, b)| (a - b).norm() < 1e-15));

        let mut s = single([c(h, 0.0), c(-h, 0.0), c(0.0, 0.0)]);
        bright_pulse(&mut s, 0, PI, 0.0, None).unwrap();
        assert!((s.amplitude(&[2]).unwrap() - c(0.0, -1.0)).norm() < 1e-15);

        // |0> = (dark + bright)/sqrt2; bright picks up -1 after two pi pulses
        let mut s = basis_state(vec![AtomSpec::qubit()], &[0]).unwrap();
        bright_pulse(&mut s, 0, PI, 0.3, None).unwrap();
        bright_pulse(&mut s, 0, PI, 0.3, None).unwrap();
        assert!((s.amplitude(&[1]).unwrap() - c(1.0, 0.0)).norm() < 1e-15);
        assert!(s.amplitude(&[0]).unwrap().norm() < 1e-15);
    }

    #[test]
    fn bright_pulse_leaves_dark_components_exactly() {
        // atom 1 dark in every component, atom 0 arbitrary
        let h = FRAC_1_SQRT_2;
        let amps: Vec<Complex64> = (0..9)
            .map(|i| {
                let (a0, a1) = (i / 3, i % 3);
                let w0 = [c(0.3, 0.1), c(-0.5, 0.2), c(0.4, -0.6)][a0];
                let w1 = if a1 < 2 { h } else { 0.0 };
                w0 * w1
            })
            .collect();
        let before = RegisterState::from_amplitudes(vec![AtomSpec::qubit(); 2], amps).unwrap();
        let mut s = before.clone();
        bright_pulse(&mut s, 1, PI, 0.77, None).unwrap();
        for (a, b) in s.amplitudes().iter().zip(before.amplitudes()) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn two_pi_pulse_examples() {
        let mut s = basis_state(vec![AtomSpec::qubit()], &[0]).unwrap();
        two_pi_pulse(&mut s, 0, 0, 2, 0.0, None).unwrap();
        assert!((s.amplitude(&[0]).unwrap() + 1.0).norm() < 1e-15);

        let mut s = basis_state(vec![AtomSpec::qubit(); 2], &[2, 0]).unwrap();
        let before = s.clone();
        two_pi_pulse(&mut s, 1, 0, 2, 0.0, Some(BlockadeCondition::new(vec![0], vec![2]))).unwrap();
        assert_eq!(s, before);

        let mut s = basis_state(vec![AtomSpec::qubit()], &[1]).unwrap();
        two_pi_pulse(&mut s, 0, 0, 2, 0.0, None).unwrap();
        assert_eq!(s.amplitude(&[1]).unwrap(), c(1.0, 0.0));
    }

    #[test]
    fn pulse_validation() {
        let mut s = basis_state(vec![AtomSpec::qubit()], &[0]).unwrap();
        assert!(PulseSpec::bare(0, 0, 2, 5.0 * PI, 0.0).apply(&mut s).is_err());
        assert!(PulseSpec::bare(0, 0, 2, PI, f64::NAN).apply(&mut s).is_err());
        let mut p = PulseSpec::bare(0, 0, 2, PI, 0.0);
        p.blockade = Some(BlockadeCondition::new(vec![0], vec![2]));
        assert!(p.apply(&mut s).is_err());
        let mut no_ryd = basis_state(
            vec![AtomSpec::new(2, &[(0, Role::Ground0), (1, Role::Ground1)]).unwrap()],
            &[0],
        )
        .unwrap();
        assert!(bright_pulse(&mut no_ryd, 0, PI, 0.0, None).is_err());
    }

    #[test]
    fn pulse_sequence_from_json() {
        let json = r#"[
            {"atom": 0, "transition": {"kind": "bare", "from": 0, "to": 2}, "angle": 3.141592653589793},
            {"atom": 1, "transition": {"kind": "bare", "from": 0, "to": 2}, "angle": 3.141592653589793,
             "blockade": {"blocking_atoms": [0], "blocking_levels": [2]}}
        ]"#;
        let seq: Vec<PulseSpec> = serde_json::from_str(json).unwrap();
        let mut s = basis_state(vec![AtomSpec::qubit(); 2], &[0, 0]).unwrap();
        apply_sequence(&mut s, &seq).unwrap();
        let expected = basis_state(vec![AtomSpec::qubit(); 2], &[2, 0]).unwrap();
        assert!((fidelity_mod_phase(&s, &expected).unwrap() - 1.0).abs() < 1e-15);
        let back: Vec<PulseSpec> = serde_json::from_str(&serde_json::to_string(&seq).unwrap()).unwrap();
        assert_eq!(back, seq);
    }
}
