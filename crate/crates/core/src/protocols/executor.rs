use std::collections::HashMap;
use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::dynamics::{evolve, Drive, DriveSpec, Generator, InteractionGraph, Method, Propagator};
use crate::error::{Error, Result};
use crate::hilbert::{Control, RegisterState, Role};
use crate::pulses::{PulseSpec, Transition};

/// Laser phases used by the protocol sweeps.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseScheme {
    /// Phase of every exciting pulse.
    pub excite: f64,
    /// Offset of the returning sweep in the one-atom-at-a-time schemes. With
    /// 0 the round trip leaves a factor -1 on excited components.
    pub sequential_return: f64,
    /// Offset of the returning register sweep in the ancilla schemes. With pi
    /// the round trip is the identity and the sign is carried by the ancilla.
    pub collective_return: f64,
}

impl Default for PhaseScheme {
    fn default() -> Self {
        Self {
            excite: 0.0,
            sequential_return: 0.0,
            collective_return: PI,
        }
    }
}

#[derive(Clone, Debug)]
pub enum Mode {
    /// Conditional unitaries, infinite blockade.
    Ideal,
    /// Timed drives with finite shifts and decay.
    Dynamical { graph: InteractionGraph, rabi: f64 },
}

/// Runs pulse layers on a state and counts their duration in units of a
/// single-atom pi pulse.
#[derive(Clone, Debug)]
pub struct Executor {
    mode: Mode,
    phases: PhaseScheme,
    durations: usize,
    cache: HashMap<Vec<u64>, Propagator>,
}

impl Executor {
    pub fn ideal() -> Self {
        Self::new(Mode::Ideal)
    }

    pub fn dynamical(graph: InteractionGraph, rabi: f64) -> Result<Self> {
        if !rabi.is_finite() || rabi <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "Rabi frequency {rabi} must be positive"
            )));
        }
        Ok(Self::new(Mode::Dynamical { graph, rabi }))
    }

    pub fn new(mode: Mode) -> Self {
        Self {
            mode,
            phases: PhaseScheme::default(),
            durations: 0,
            cache: HashMap::new(),
        }
    }

    pub fn with_phases(mut self, phases: PhaseScheme) -> Self {
        self.phases = phases;
        self
    }

    pub fn phases(&self) -> PhaseScheme {
        self.phases
    }

    pub fn mode(&self) -> &Mode {
        &self.mode
    }

    pub fn is_ideal(&self) -> bool {
        matches!(self.mode, Mode::Ideal)
    }

    /// Elapsed pulse time in single-atom pi-pulse durations.
    pub fn pulse_durations(&self) -> usize {
        self.durations
    }

    pub fn reset_count(&mut self) {
        self.durations = 0;
    }

    pub fn pulse(&mut self, state: &mut RegisterState, pulse: PulseSpec) -> Result<()> {
        self.layer(state, std::slice::from_ref(&pulse))
    }

    /// Pulses driven at the same time on distinct atoms. In ideal mode they
    /// are applied in order (each with its own blockade condition); in
    /// dynamical mode they evolve together and blockade conditions are
    /// replaced by the interaction graph.
    pub fn layer(&mut self, state: &mut RegisterState, pulses: &[PulseSpec]) -> Result<()> {
        if pulses.is_empty() {
            return Ok(());
        }
        for (n, p) in pulses.iter().enumerate() {
            p.validate()?;
            if pulses[..n].iter().any(|q| q.atom == p.atom) {
                return Err(Error::InvalidParameter(format!(
                    "atom {} driven twice in one layer",
                    p.atom
                )));
            }
        }
        let angle = pulses.iter().map(|p| p.angle).fold(0.0, f64::max);
        match &self.mode {
            Mode::Ideal => {
                for p in pulses {
                    p.apply(state)?;
                }
            }
            Mode::Dynamical { rabi, .. } => {
                if pulses.iter().any(|p| (p.angle - angle).abs() > 1e-12) {
                    return Err(Error::InvalidParameter("pulses in one layer need equal areas".into()));
                }
                let drive = DriveSpec {
                    drives: pulses
                        .iter()
                        .map(|p| Drive {
                            atom: p.atom,
                            transition: p.transition,
                            phase: p.phase,
                        })
                        .collect(),
                    rabi: *rabi,
                };
                let duration = angle / rabi;
                self.evolve_cached(state, &drive, duration)?;
            }
        }
        self.durations += (angle / PI).round() as usize;
        Ok(())
    }

    /// Free evolution under the interactions only. No-op in ideal mode.
    pub fn dwell(&mut self, state: &mut RegisterState, duration: f64) -> Result<()> {
        if self.is_ideal() {
            return Ok(());
        }
        self.evolve_cached(state, &DriveSpec::idle(), duration)
    }

    fn evolve_cached(&mut self, state: &mut RegisterState, drive: &DriveSpec, duration: f64) -> Result<()> {
        let Mode::Dynamical { graph, .. } = &self.mode else {
            unreachable!("ideal mode never evolves");
        };
        let mut key = vec![state.len() as u64, duration.to_bits(), drive.rabi.to_bits()];
        for d in &drive.drives {
            key.push(d.atom as u64);
            key.push(d.phase.to_bits());
            key.extend(d.transition.levels().iter().map(|&l| l as u64));
            key.push(u64::MAX);
        }
        if let Some(p) = self.cache.get(&key) {
            p.apply(state);
            return Ok(());
        }
        if state.len() > crate::dynamics::DENSE_MAX_DIM {
            return evolve(state, drive, graph, duration);
        }
        let generator = Generator::new(state, drive, graph)?;
        let prop = Propagator::new(Method::Dense, generator, duration)?;
        prop.apply(state);
        self.cache.insert(key, prop);
        Ok(())
    }

    /// Swap `a <-> b` on the target wherever the control atom occupies
    /// `ctl_level`, identity elsewhere.
    ///
    /// Dynamically this is: control `ctl_level -> r`, target bright
    /// `(|a>-|b>)/sqrt2 -> r`, a dwell of `pi/|dE_rr|` that writes `-1` on
    /// `|rr>`, then both pulses undone with shifted phase.
    pub fn controlled_transfer(
        &mut self,
        state: &mut RegisterState,
        ctl_atom: usize,
        ctl_level: usize,
        tgt_atom: usize,
        a: usize,
        b: usize,
    ) -> Result<()> {
        if ctl_atom == tgt_atom {
            return Err(Error::Precondition("control and target must differ".into()));
        }
        let n = state.num_atoms();
        for atom in [ctl_atom, tgt_atom] {
            if atom >= n {
                return Err(Error::InvalidAtom { index: atom, len: n });
            }
        }
        state.check_levels(ctl_atom, &[ctl_level])?;
        state.check_levels(tgt_atom, &[a, b])?;
        match &self.mode {
            Mode::Ideal => {
                let z = Complex64::new(0.0, 0.0);
                let o = Complex64::new(1.0, 0.0);
                let swap = DMatrix::from_row_slice(2, 2, &[z, o, o, z]);
                let control = Control::Requires {
                    atom: ctl_atom,
                    level: ctl_level,
                };
                state.apply_block_unitary(tgt_atom, &swap, &[a, b], Some(&control))?;
                self.durations += 4;
            }
            Mode::Dynamical { graph, .. } => {
                let ctl_r = state.atoms()[ctl_atom].require(Role::RydR)?;
                let tgt_r = state.atoms()[tgt_atom].require(Role::RydR)?;
                let shift = graph.shift(ctl_atom, tgt_atom, Role::RydR, Role::RydR);
                if shift == 0.0 {
                    return Err(Error::InvalidConfig(format!(
                        "no r-r interaction between atoms {ctl_atom} and {tgt_atom}"
                    )));
                }
                let dwell = PI / shift.abs();
                let phi = self.phases.excite;
                let back = phi + PI;
                let ctl = |phase| PulseSpec::bare(ctl_atom, ctl_level, ctl_r, PI, phase);
                let tgt = |phase| PulseSpec {
                    atom: tgt_atom,
                    transition: Transition::Bright { a, b, ryd: tgt_r },
                    angle: PI,
                    phase,
                    blockade: None,
                };
                self.pulse(state, ctl(phi))?;
                self.pulse(state, tgt(phi))?;
                self.dwell(state, dwell)?;
                self.pulse(state, tgt(back))?;
                self.pulse(state, ctl(back))?;
            }
        }
        Ok(())
    }
}
