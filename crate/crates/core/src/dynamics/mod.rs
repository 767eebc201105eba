//! Continuous-time evolution with finite blockade shifts and Rydberg decay.
//!
//! The register evolves under the effective non-Hermitian Hamiltonian
//!
//! ```text
//! H = sum_i (Omega/2)(e^{i phi}|a><r| + h.c.)_i
//!   + sum_{i<j} B_ij |r_i r_j><r_i r_j|
//!   - (i/2) sum_i gamma (Rydberg projector)_i
//! ```
//!
//! Population scattered by spontaneous emission leaves the state vector, so
//! the loss of squared norm is the emission probability.

mod analysis;
mod propagate;

pub use analysis::{
    collective_enhancement, controlled_phase_error, controlled_phase_fragment, dispersion_nodes, empirical_prefactor,
    error_inputs, gate_error, gauss_legendre, min_error_formula, minimize_over_rabi, optimal_rabi, scaling_fit,
    Dispersion, EnhancementResult, ErrorMinimum, ScalingFit,
};
pub use propagate::{Method, Propagator, DENSE_MAX_DIM};

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{Backend, GroupLayout, RegisterState, Role};
use crate::pulses::Transition;

/// Doubly-excited energy shift of one atom pair in specific Rydberg roles.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairShift {
    pub atoms: (usize, usize),
    pub roles: (Role, Role),
    /// Magnitude in rad/s.
    pub magnitude: f64,
    #[serde(default)]
    pub negative: bool,
}

impl PairShift {
    pub fn energy(&self) -> f64 {
        if self.negative {
            -self.magnitude
        } else {
            self.magnitude
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct InteractionGraph {
    shifts: Vec<PairShift>,
    /// Decay rate per Rydberg role, 1/s.
    decay: BTreeMap<Role, f64>,
}

impl InteractionGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Every pair among `atoms` shifted by `shift` when both sit in `role`.
    pub fn all_pairs(atoms: &[usize], role: Role, shift: f64) -> Result<Self> {
        let mut g = Self::new();
        for (n, &i) in atoms.iter().enumerate() {
            for &j in &atoms[n + 1..] {
                g.set_shift(i, j, role, role, shift)?;
            }
        }
        Ok(g)
    }

    /// Set `B_ij` for atom `i` in `role_i` and atom `j` in `role_j`. A negative
    /// value stores its magnitude with the sign flag set.
    pub fn set_shift(&mut self, i: usize, j: usize, role_i: Role, role_j: Role, shift: f64) -> Result<()> {
        if i == j {
            return Err(Error::InvalidParameter(format!("self-interaction on atom {i}")));
        }
        if !shift.is_finite() {
            return Err(Error::InvalidParameter("non-finite pair shift".into()));
        }
        let (atoms, roles) = if i < j {
            ((i, j), (role_i, role_j))
        } else {
            ((j, i), (role_j, role_i))
        };
        self.shifts.retain(|p| !(p.atoms == atoms && p.roles == roles));
        if shift != 0.0 {
            self.shifts.push(PairShift {
                atoms,
                roles,
                magnitude: shift.abs(),
                negative: shift < 0.0,
            });
        }
        Ok(())
    }

    pub fn with_shift(mut self, i: usize, j: usize, role_i: Role, role_j: Role, shift: f64) -> Result<Self> {
        self.set_shift(i, j, role_i, role_j, shift)?;
        Ok(self)
    }

    pub fn set_decay(&mut self, role: Role, gamma: f64) -> Result<()> {
        if !gamma.is_finite() || gamma < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "decay rate {gamma} must be finite and >= 0"
            )));
        }
        self.decay.insert(role, gamma);
        Ok(())
    }

    pub fn with_decay(mut self, role: Role, gamma: f64) -> Result<Self> {
        self.set_decay(role, gamma)?;
        Ok(self)
    }

    /// Signed shift, symmetric in its arguments. Zero when unset.
    pub fn shift(&self, i: usize, j: usize, role_i: Role, role_j: Role) -> f64 {
        let (atoms, roles) = if i < j {
            ((i, j), (role_i, role_j))
        } else {
            ((j, i), (role_j, role_i))
        };
        self.shifts
            .iter()
            .find(|p| p.atoms == atoms && p.roles == roles)
            .map_or(0.0, PairShift::energy)
    }

    pub fn decay(&self, role: Role) -> f64 {
        self.decay.get(&role).copied().unwrap_or(0.0)
    }

    pub fn pairs(&self) -> &[PairShift] {
        &self.shifts
    }
}

/// One laser field on one atom.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Drive {
    pub atom: usize,
    pub transition: Transition,
    pub phase: f64,
}

/// Constant drive applied to several atoms with a common Rabi frequency.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DriveSpec {
    pub drives: Vec<Drive>,
    /// Rabi frequency, rad/s.
    pub rabi: f64,
}

impl DriveSpec {
    pub fn idle() -> Self {
        Self::default()
    }

    pub fn validate(&self) -> Result<()> {
        if !self.rabi.is_finite() || self.rabi < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "Rabi frequency {} must be finite and >= 0",
                self.rabi
            )));
        }
        if self.drives.iter().any(|d| !d.phase.is_finite()) {
            return Err(Error::InvalidParameter("non-finite laser phase".into()));
        }
        Ok(())
    }
}

/// Local pieces of `H`: a diagonal (interactions and decay) plus one small
/// Hermitian block per driven atom.
#[derive(Clone, Debug)]
pub struct Generator {
    diag: Vec<Complex64>,
    terms: Vec<(GroupLayout, Vec<Complex64>)>,
    norm_bound: f64,
}

impl Generator {
    pub fn new(state: &RegisterState, drive: &DriveSpec, graph: &InteractionGraph) -> Result<Self> {
        drive.validate()?;
        let atoms = state.atoms();
        let mut terms = Vec::with_capacity(drive.drives.len());
        let half = drive.rabi / 2.0;
        for d in &drive.drives {
            if d.atom >= atoms.len() {
                return Err(Error::InvalidAtom {
                    index: d.atom,
                    len: atoms.len(),
                });
            }
            let levels = d.transition.levels();
            state.check_levels(d.atom, &levels)?;
            let up = Complex64::from_polar(half, d.phase);
            let block = match d.transition {
                Transition::Bare { .. } => vec![Complex64::new(0.0, 0.0), up, up.conj(), Complex64::new(0.0, 0.0)],
                Transition::Bright { .. } => {
                    let u = up * FRAC_1_SQRT_2;
                    let z = Complex64::new(0.0, 0.0);
                    // basis (a, b, r); bright = (|a> - |b>)/sqrt2
                    vec![z, z, u, z, z, -u, u.conj(), -u.conj(), z]
                }
            };
            let layout = GroupLayout::new(state.strides()[d.atom], state.dims()[d.atom], &levels);
            terms.push((layout, block));
        }

        let mut diag = vec![Complex64::new(0.0, 0.0); state.len()];
        for p in graph.pairs() {
            let (i, j) = p.atoms;
            if i >= atoms.len() || j >= atoms.len() {
                continue;
            }
            let (Some(li), Some(lj)) = (atoms[i].level(p.roles.0), atoms[j].level(p.roles.1)) else {
                continue;
            };
            let e = p.energy();
            for (idx, v) in diag.iter_mut().enumerate() {
                if state.digit(idx, i) == li && state.digit(idx, j) == lj {
                    v.re += e;
                }
            }
        }
        for (a, spec) in atoms.iter().enumerate() {
            let rates: Vec<f64> = (0..spec.num_levels())
                .map(|l| spec.role(l).map_or(0.0, |r| graph.decay(r)))
                .collect();
            if rates.iter().all(|&g| g == 0.0) {
                continue;
            }
            for (idx, v) in diag.iter_mut().enumerate() {
                v.im -= 0.5 * rates[state.digit(idx, a)];
            }
        }

        let diag_max = diag.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let norm_bound = diag_max + drive.drives.len() as f64 * half * 2.0;
        Ok(Self {
            diag,
            terms,
            norm_bound,
        })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// Upper bound on the induced infinity norm of `H`.
    pub fn norm_bound(&self) -> f64 {
        self.norm_bound
    }

    /// `out = H psi`
    pub fn apply(&self, psi: &[Complex64], out: &mut [Complex64]) {
        for ((o, d), p) in out.iter_mut().zip(&self.diag).zip(psi) {
            *o = d * p;
        }
        let backend = Backend::auto(psi.len());
        for (layout, block) in &self.terms {
            crate::hilbert::accumulate_block(backend, psi, out, layout, block);
        }
    }

    pub fn dense(&self) -> nalgebra::DMatrix<Complex64> {
        let n = self.dim();
        let mut m = nalgebra::DMatrix::zeros(n, n);
        let mut e = vec![Complex64::new(0.0, 0.0); n];
        let mut col = vec![Complex64::new(0.0, 0.0); n];
        for j in 0..n {
            e[j] = Complex64::new(1.0, 0.0);
            self.apply(&e, &mut col);
            for (i, v) in col.iter().enumerate() {
                m[(i, j)] = *v;
            }
            e[j] = Complex64::new(0.0, 0.0);
        }
        m
    }
}

/// Evolve `state` for `duration` seconds under `drive` and `graph`.
pub fn evolve(state: &mut RegisterState, drive: &DriveSpec, graph: &InteractionGraph, duration: f64) -> Result<()> {
    evolve_with(Method::Auto, state, drive, graph, duration)
}

pub fn evolve_with(
    method: Method,
    state: &mut RegisterState,
    drive: &DriveSpec,
    graph: &InteractionGraph,
    duration: f64,
) -> Result<()> {
    if !duration.is_finite() || duration < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "duration {duration} must be finite and >= 0"
        )));
    }
    if duration == 0.0 {
        return Ok(());
    }
    let generator = Generator::new(state, drive, graph)?;
    Propagator::new(method, generator, duration)?.apply(state);
    Ok(())
}
