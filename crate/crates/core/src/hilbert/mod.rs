//! Dense state vectors over registers of multi-level atoms.
//!
//! Storage is mixed-radix: atom 0 is the most significant digit and each
//! atom contributes a factor `num_levels` to the vector length.

mod kernel;

pub(crate) use kernel::{accumulate_block, GroupLayout};
pub use kernel::{Backend, PARALLEL_MIN_LEN};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Complex = Complex64;

/// Tolerance for unitarity of a single block.
pub const UNITARY_TOL: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// What a level is used for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Ground0,
    Ground1,
    /// Rydberg level that does not blockade its own kind.
    RydS,
    RydR,
    /// Third long-lived level of comparison ancillas.
    Logical2,
}

impl Role {
    pub fn is_rydberg(self) -> bool {
        matches!(self, Role::RydS | Role::RydR)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AtomSpec {
    roles: Vec<Option<Role>>,
}

impl AtomSpec {
    /// `roles` assigns a role to some level indices; the rest stay untagged.
    pub fn new(num_levels: usize, roles: &[(usize, Role)]) -> Result<Self> {
        if num_levels < 2 {
            return Err(Error::InvalidLevels(format!(
                "an atom needs at least 2 levels, got {num_levels}"
            )));
        }
        let mut tagged = vec![None; num_levels];
        for &(level, role) in roles {
            if level >= num_levels {
                return Err(Error::InvalidLevels(format!("level {level} >= {num_levels}")));
            }
            if tagged[level].is_some() {
                return Err(Error::InvalidLevels(format!("level {level} tagged twice")));
            }
            if tagged.contains(&Some(role)) {
                return Err(Error::InvalidLevels(format!("role {role:?} assigned to two levels")));
            }
            tagged[level] = Some(role);
        }
        if !tagged.contains(&Some(Role::Ground0)) || !tagged.contains(&Some(Role::Ground1)) {
            return Err(Error::InvalidLevels("ground0 and ground1 roles are required".into()));
        }
        Ok(Self { roles: tagged })
    }

    /// `|0>, |1>, |r>`
    pub fn qubit() -> Self {
        Self::new(3, &[(0, Role::Ground0), (1, Role::Ground1), (2, Role::RydR)]).unwrap()
    }

    /// `|0>, |1>, |s>, |r>` for the two-species schemes.
    pub fn two_species() -> Self {
        Self::new(
            4,
            &[(0, Role::Ground0), (1, Role::Ground1), (2, Role::RydS), (3, Role::RydR)],
        )
        .unwrap()
    }

    /// `|0>, |1>, |s>`: sub-register qubits never touch `|r>`.
    pub fn s_qubit() -> Self {
        Self::new(3, &[(0, Role::Ground0), (1, Role::Ground1), (2, Role::RydS)]).unwrap()
    }

    /// `|0>, |1>, |2>, |r>` comparison ancilla.
    pub fn comparison_ancilla() -> Self {
        Self::new(
            4,
            &[
                (0, Role::Ground0),
                (1, Role::Ground1),
                (2, Role::Logical2),
                (3, Role::RydR),
            ],
        )
        .unwrap()
    }

    pub fn num_levels(&self) -> usize {
        self.roles.len()
    }

    pub fn level(&self, role: Role) -> Option<usize> {
        self.roles.iter().position(|r| *r == Some(role))
    }

    pub fn role(&self, level: usize) -> Option<Role> {
        self.roles.get(level).copied().flatten()
    }

    pub fn rydberg_levels(&self) -> Vec<usize> {
        (0..self.num_levels())
            .filter(|&l| self.role(l).is_some_and(Role::is_rydberg))
            .collect()
    }

    pub(crate) fn require(&self, role: Role) -> Result<usize> {
        self.level(role)
            .ok_or_else(|| Error::InvalidLevels(format!("atom has no {role:?} level")))
    }
}

/// Skip groups in which any blocking atom sits in a blocking level (ideal,
/// infinite-shift blockade).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockadeCondition {
    pub blocking_atoms: Vec<usize>,
    pub blocking_levels: Vec<usize>,
}

impl BlockadeCondition {
    pub fn new(blocking_atoms: Vec<usize>, blocking_levels: Vec<usize>) -> Self {
        Self {
            blocking_atoms,
            blocking_levels,
        }
    }
}

/// Gate applied to a group only when the condition holds for the other atoms.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Control {
    Blockade(BlockadeCondition),
    /// Act only where `atom` occupies `level`.
    Requires {
        atom: usize,
        level: usize,
    },
}

impl Control {
    fn atoms(&self) -> Vec<usize> {
        match self {
            Control::Blockade(b) => b.blocking_atoms.clone(),
            Control::Requires { atom, .. } => vec![*atom],
        }
    }
}

/// Mixed-radix digit string, one level index per atom.
pub type BasisLabel = Vec<usize>;

#[derive(Clone, Debug, PartialEq)]
pub struct RegisterState {
    atoms: Vec<AtomSpec>,
    dims: Vec<usize>,
    strides: Vec<usize>,
    amps: Vec<Complex64>,
}

impl RegisterState {
    /// All-zero vector over the given atoms.
    pub fn zeros(atoms: Vec<AtomSpec>) -> Self {
        let dims: Vec<usize> = atoms.iter().map(AtomSpec::num_levels).collect();
        let mut strides = vec![1; dims.len()];
        for i in (0..dims.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * dims[i + 1];
        }
        let len = dims.iter().product();
        Self {
            atoms,
            dims,
            strides,
            amps: vec![ZERO; len],
        }
    }

    pub fn basis_state(atoms: Vec<AtomSpec>, label: &[usize]) -> Result<Self> {
        let mut state = Self::zeros(atoms);
        let idx = state.index_of(label)?;
        state.amps[idx] = ONE;
        Ok(state)
    }

    /// Product state of `(|0>+|1>)/sqrt2` on every atom of the given specs.
    pub fn uniform_over(atoms: Vec<AtomSpec>) -> Result<Self> {
        let k = atoms.len();
        Self::product(atoms, &vec![true; k])
    }

    /// `(|0>+|1>)/sqrt2` on atoms flagged `true`, `|0>` on the others.
    pub(crate) fn product(atoms: Vec<AtomSpec>, uniform: &[bool]) -> Result<Self> {
        let mut state = Self::zeros(atoms);
        let mut ground = Vec::with_capacity(state.atoms.len());
        for a in &state.atoms {
            ground.push((a.require(Role::Ground0)?, a.require(Role::Ground1)?));
        }
        let superposed = uniform.iter().filter(|u| **u).count();
        let amp = Complex64::new((0.5f64).powf(superposed as f64 / 2.0), 0.0);
        for bits in 0..(1usize << superposed) {
            let mut label = Vec::with_capacity(ground.len());
            let mut b = superposed;
            for (i, &(g0, g1)) in ground.iter().enumerate() {
                if uniform[i] {
                    b -= 1;
                    label.push(if (bits >> b) & 1 == 1 { g1 } else { g0 });
                } else {
                    label.push(g0);
                }
            }
            let idx = state.index_of(&label)?;
            state.amps[idx] = amp;
        }
        Ok(state)
    }

    /// Build from raw amplitudes in mixed-radix order.
    pub fn from_amplitudes(atoms: Vec<AtomSpec>, amps: Vec<Complex64>) -> Result<Self> {
        let mut state = Self::zeros(atoms);
        if amps.len() != state.amps.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} amplitudes for a {}-dimensional register",
                amps.len(),
                state.amps.len()
            )));
        }
        state.amps = amps;
        Ok(state)
    }

    pub fn atoms(&self) -> &[AtomSpec] {
        &self.atoms
    }

    pub fn num_atoms(&self) -> usize {
        self.atoms.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn index_of(&self, label: &[usize]) -> Result<usize> {
        if label.len() != self.dims.len() {
            return Err(Error::InvalidLabel(format!(
                "label has {} digits, register has {} atoms",
                label.len(),
                self.dims.len()
            )));
        }
        let mut idx = 0;
        for (i, (&d, &dim)) in label.iter().zip(&self.dims).enumerate() {
            if d >= dim {
                return Err(Error::InvalidLabel(format!(
                    "digit {d} of atom {i} exceeds {} levels",
                    dim
                )));
            }
            idx += d * self.strides[i];
        }
        Ok(idx)
    }

    pub fn label_of(&self, mut index: usize) -> BasisLabel {
        self.strides
            .iter()
            .map(|&s| {
                let d = index / s;
                index %= s;
                d
            })
            .collect()
    }

    #[inline]
    pub fn digit(&self, index: usize, atom: usize) -> usize {
        (index / self.strides[atom]) % self.dims[atom]
    }

    pub fn amplitude(&self, label: &[usize]) -> Result<Complex64> {
        Ok(self.amps[self.index_of(label)?])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(Complex64::norm_sqr).sum()
    }

    pub fn scale(&mut self, factor: Complex64) {
        self.amps.iter_mut().for_each(|a| *a *= factor);
    }

    fn check_atom(&self, atom: usize) -> Result<()> {
        if atom >= self.atoms.len() {
            return Err(Error::InvalidAtom {
                index: atom,
                len: self.atoms.len(),
            });
        }
        Ok(())
    }

    fn check_shape(&self, other: &Self) -> Result<()> {
        if self.atoms != other.atoms {
            return Err(Error::ShapeMismatch("states live on different registers".into()));
        }
        Ok(())
    }

    pub fn marginal_population(&self, atom: usize, level: usize) -> Result<f64> {
        self.check_atom(atom)?;
        if level >= self.dims[atom] {
            return Err(Error::InvalidLevels(format!("level {level} >= {}", self.dims[atom])));
        }
        Ok(self
            .amps
            .iter()
            .enumerate()
            .filter(|(i, _)| self.digit(*i, atom) == level)
            .map(|(_, a)| a.norm_sqr())
            .sum())
    }

    /// Total population in labels where some atom sits outside its allowed
    /// levels.
    pub fn population_outside(&self, allowed: &[Vec<usize>]) -> f64 {
        self.amps
            .iter()
            .enumerate()
            .filter(|(i, _)| (0..self.atoms.len()).any(|a| !allowed[a].contains(&self.digit(*i, a))))
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    pub fn apply_block_unitary(
        &mut self,
        atom: usize,
        block: &DMatrix<Complex64>,
        levels: &[usize],
        control: Option<&Control>,
    ) -> Result<()> {
        self.apply_block_unitary_with(Backend::auto(self.len()), atom, block, levels, control)
    }

    /// Act with `block` on `levels` of `atom` in every amplitude group that
    /// `control` admits. Groups that are skipped are left untouched.
    pub fn apply_block_unitary_with(
        &mut self,
        backend: Backend,
        atom: usize,
        block: &DMatrix<Complex64>,
        levels: &[usize],
        control: Option<&Control>,
    ) -> Result<()> {
        self.check_atom(atom)?;
        self.check_levels(atom, levels)?;
        if block.nrows() != levels.len() || block.ncols() != levels.len() {
            return Err(Error::ShapeMismatch(format!(
                "{}x{} block for {} levels",
                block.nrows(),
                block.ncols(),
                levels.len()
            )));
        }
        let dev = unitarity_deviation(block);
        if dev > UNITARY_TOL {
            return Err(Error::NonUnitary(dev));
        }
        let admit = self.admission(atom, control)?;
        let layout = GroupLayout::new(self.strides[atom], self.dims[atom], levels);
        let flat = row_major(block);
        kernel::apply_block(backend, &mut self.amps, &layout, &flat, admit);
        Ok(())
    }

    pub(crate) fn check_levels(&self, atom: usize, levels: &[usize]) -> Result<()> {
        if levels.is_empty() {
            return Err(Error::InvalidLevels("empty level list".into()));
        }
        for (i, &l) in levels.iter().enumerate() {
            if l >= self.dims[atom] {
                return Err(Error::InvalidLevels(format!(
                    "level {l} >= {} on atom {atom}",
                    self.dims[atom]
                )));
            }
            if levels[..i].contains(&l) {
                return Err(Error::InvalidLevels(format!("level {l} repeated")));
            }
        }
        Ok(())
    }

    fn admission(&self, target: usize, control: Option<&Control>) -> Result<impl Fn(usize) -> bool + Sync> {
        if let Some(c) = control {
            for a in c.atoms() {
                self.check_atom(a)?;
                if a == target {
                    return Err(Error::Precondition(format!(
                        "atom {a} cannot condition a pulse on itself"
                    )));
                }
            }
        }
        let strides = self.strides.clone();
        let dims = self.dims.clone();
        let rule = match control {
            None => Admission::Always,
            Some(Control::Blockade(b)) => {
                let mask = b.blocking_levels.iter().fold(0u64, |m, &l| m | (1u64 << l.min(63)));
                Admission::Unless(b.blocking_atoms.clone(), mask)
            }
            Some(Control::Requires { atom, level }) => Admission::When(*atom, *level),
        };
        Ok(move |base: usize| {
            let digit = |a: usize| (base / strides[a]) % dims[a];
            match &rule {
                Admission::Always => true,
                Admission::Unless(atoms, mask) => atoms.iter().all(|&a| mask & (1u64 << digit(a)) == 0),
                Admission::When(a, l) => digit(*a) == *l,
            }
        })
    }
}

enum Admission {
    Always,
    Unless(Vec<usize>, u64),
    When(usize, usize),
}

pub fn basis_state(atoms: Vec<AtomSpec>, label: &[usize]) -> Result<RegisterState> {
    RegisterState::basis_state(atoms, label)
}

/// `k` three-level qubit atoms in `(|0>+|1>)^k / 2^{k/2}`.
pub fn uniform_qubit_state(k: usize) -> RegisterState {
    RegisterState::uniform_over(vec![AtomSpec::qubit(); k]).expect("qubit atoms carry both ground roles")
}

/// `<a|b>`, conjugate-linear in `a`.
pub fn inner(a: &RegisterState, b: &RegisterState) -> Result<Complex64> {
    a.check_shape(b)?;
    Ok(a.amps.iter().zip(&b.amps).map(|(x, y)| x.conj() * y).sum())
}

/// `|<a|b>|^2`, blind to the global phase of either argument.
pub fn fidelity_mod_phase(a: &RegisterState, b: &RegisterState) -> Result<f64> {
    Ok(inner(a, b)?.norm_sqr())
}

pub fn unitarity_deviation(m: &DMatrix<Complex64>) -> f64 {
    let prod = m.adjoint() * m;
    let n = prod.nrows();
    let mut dev = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            dev = dev.max((prod[(i, j)] - Complex64::new(target, 0.0)).norm());
        }
    }
    dev
}

fn row_major(m: &DMatrix<Complex64>) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(m.len());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out.push(m[(i, j)]);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn not_block() -> DMatrix<Complex64> {
        DMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
    }

    #[test]
    fn basis_state_mixed_radix() {
        let s = basis_state(vec![AtomSpec::qubit(); 2], &[0, 1]).unwrap();
        assert_eq!(s.amplitudes()[1], ONE);
        assert_abs_diff_eq!(s.norm_sqr(), 1.0);

        let s = basis_state(vec![AtomSpec::qubit()], &[2]).unwrap();
        assert_eq!(s.amplitudes(), &[ZERO, ZERO, ONE]);

        let s = basis_state(vec![AtomSpec::qubit(); 3], &[1, 1, 1]).unwrap();
        assert_eq!(s.len(), 27);
        assert_eq!(s.amplitudes()[13], ONE);
        assert_eq!(s.label_of(13), vec![1, 1, 1]);
    }

    #[test]
    fn basis_state_rejects_bad_labels() {
        assert!(matches!(
            basis_state(vec![AtomSpec::qubit(); 2], &[0]),
            Err(Error::InvalidLabel(_))
        ));
        assert!(matches!(
            basis_state(vec![AtomSpec::qubit()], &[3]),
            Err(Error::InvalidLabel(_))
        ));
    }

    #[test]
    fn atom_spec_invariants() {
        assert!(AtomSpec::new(3, &[(0, Role::Ground0), (2, Role::RydR)]).is_err());
        assert!(AtomSpec::new(3, &[(0, Role::Ground0), (1, Role::Ground0)]).is_err());
        assert!(AtomSpec::new(1, &[]).is_err());
        let a = AtomSpec::two_species();
        assert_eq!(a.level(Role::RydS), Some(2));
        assert_eq!(a.rydberg_levels(), vec![2, 3]);
    }

    #[test]
    fn uniform_qubit_states() {
        let s = uniform_qubit_state(1);
        let h = 0.5f64.sqrt();
        assert_abs_diff_eq!(s.amplitudes()[0].re, h, epsilon = 1e-15);
        assert_abs_diff_eq!(s.amplitudes()[1].re, h, epsilon = 1e-15);
        assert_eq!(s.amplitudes()[2], ZERO);

        let s = uniform_qubit_state(2);
        let nonzero: Vec<_> = s.amplitudes().iter().filter(|a| a.norm() > 0.0).collect();
        assert_eq!(nonzero.len(), 4);
        assert!(nonzero.iter().all(|a| (a.re - 0.5).abs() < 1e-15));

        assert_abs_diff_eq!(uniform_qubit_state(10).norm_sqr(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn inner_products() {
        let atoms = vec![AtomSpec::qubit(); 2];
        let e0 = basis_state(atoms.clone(), &[0, 0]).unwrap();
        let e1 = basis_state(atoms.clone(), &[0, 1]).unwrap();
        assert_eq!(inner(&e0, &e0).unwrap(), ONE);
        assert_eq!(inner(&e0, &e1).unwrap(), ZERO);
        let u = uniform_qubit_state(2);
        assert_abs_diff_eq!(inner(&u, &e1).unwrap().re, 0.5, epsilon = 1e-15);
        let other = basis_state(vec![AtomSpec::qubit()], &[0]).unwrap();
        assert!(matches!(inner(&e0, &other), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn fidelity_ignores_global_phase() {
        let psi =
            RegisterState::from_amplitudes(vec![AtomSpec::qubit()], vec![c(0.6, 0.0), c(0.0, 0.8), ZERO]).unwrap();
        let mut neg = psi.clone();
        neg.scale(c(-1.0, 0.0));
        let mut rot = psi.clone();
        rot.scale(c(0.0, 1.0));
        assert_abs_diff_eq!(fidelity_mod_phase(&psi, &neg).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(fidelity_mod_phase(&psi, &rot).unwrap(), 1.0, epsilon = 1e-15);
        let e0 = basis_state(vec![AtomSpec::qubit()], &[0]).unwrap();
        let e1 = basis_state(vec![AtomSpec::qubit()], &[1]).unwrap();
        assert_eq!(fidelity_mod_phase(&e0, &e1).unwrap(), 0.0);
    }

    #[test]
    fn block_unitary_examples() {
        let atoms = vec![AtomSpec::qubit(); 2];
        let mut s = basis_state(atoms.clone(), &[0, 1]).unwrap();
        let before = s.clone();
        s.apply_block_unitary(0, &DMatrix::identity(2, 2), &[0, 1], None)
            .unwrap();
        assert_eq!(s, before);

        s.apply_block_unitary(0, &not_block(), &[0, 1], None).unwrap();
        assert_eq!(s.amplitude(&[1, 1]).unwrap(), ONE);
    }

    #[test]
    fn pi_rotation_squared_is_minus_identity() {
        // [[0,-i],[-i,0]]^2 = -I
        let r = DMatrix::from_row_slice(2, 2, &[ZERO, c(0.0, -1.0), c(0.0, -1.0), ZERO]);
        let psi = RegisterState::from_amplitudes(
            vec![AtomSpec::qubit(); 2],
            (0..9).map(|i| c(i as f64 * 0.1, 0.05 * i as f64)).collect(),
        )
        .unwrap();
        let mut s = psi.clone();
        s.apply_block_unitary(1, &r, &[2, 0], None).unwrap();
        s.apply_block_unitary(1, &r, &[2, 0], None).unwrap();
        for i in 0..9 {
            let expected = if s.digit(i, 1) == 1 {
                psi.amplitudes()[i]
            } else {
                -psi.amplitudes()[i]
            };
            assert!((s.amplitudes()[i] - expected).norm() < 1e-15);
        }
    }

    #[test]
    fn block_unitary_errors() {
        let mut s = uniform_qubit_state(2);
        let bad = DMatrix::from_element(2, 2, ONE);
        assert!(matches!(
            s.apply_block_unitary(0, &bad, &[0, 1], None),
            Err(Error::NonUnitary(_))
        ));
        assert!(matches!(
            s.apply_block_unitary(0, &not_block(), &[0, 0], None),
            Err(Error::InvalidLevels(_))
        ));
        assert!(matches!(
            s.apply_block_unitary(0, &not_block(), &[0, 3], None),
            Err(Error::InvalidLevels(_))
        ));
        assert!(matches!(
            s.apply_block_unitary(5, &not_block(), &[0, 1], None),
            Err(Error::InvalidAtom { .. })
        ));
        let own = Control::Blockade(BlockadeCondition::new(vec![0], vec![2]));
        assert!(s.apply_block_unitary(0, &not_block(), &[0, 1], Some(&own)).is_err());
    }

    #[test]
    fn blockade_skips_groups() {
        let atoms = vec![AtomSpec::qubit(); 2];
        let cond = Control::Blockade(BlockadeCondition::new(vec![0], vec![2]));
        let mut s = basis_state(atoms.clone(), &[2, 0]).unwrap();
        s.apply_block_unitary(1, &not_block(), &[0, 1], Some(&cond)).unwrap();
        assert_eq!(s.amplitude(&[2, 0]).unwrap(), ONE);
        let mut s = basis_state(atoms, &[1, 0]).unwrap();
        s.apply_block_unitary(1, &not_block(), &[0, 1], Some(&cond)).unwrap();
        assert_eq!(s.amplitude(&[1, 1]).unwrap(), ONE);
    }

    #[test]
    fn requires_control() {
        let atoms = vec![AtomSpec::comparison_ancilla(); 2];
        let cond = Control::Requires { atom: 0, level: 1 };
        let swap02 = not_block();
        let mut s = basis_state(atoms.clone(), &[1, 0]).unwrap();
        s.apply_block_unitary(1, &swap02, &[0, 2], Some(&cond)).unwrap();
        assert_eq!(s.amplitude(&[1, 2]).unwrap(), ONE);
        let mut s = basis_state(atoms, &[0, 0]).unwrap();
        s.apply_block_unitary(1, &swap02, &[0, 2], Some(&cond)).unwrap();
        assert_eq!(s.amplitude(&[0, 0]).unwrap(), ONE);
    }

    #[test]
    fn marginal_populations() {
        let s = basis_state(vec![AtomSpec::qubit(); 2], &[2, 0]).unwrap();
        assert_eq!(s.marginal_population(0, 2).unwrap(), 1.0);
        let u = uniform_qubit_state(2);
        assert_eq!(u.marginal_population(1, 2).unwrap(), 0.0);
        let h = 0.5f64.sqrt();
        let s = RegisterState::from_amplitudes(vec![AtomSpec::qubit()], vec![c(h, 0.0), ZERO, c(h, 0.0)]).unwrap();
        assert_abs_diff_eq!(s.marginal_population(0, 2).unwrap(), 0.5, epsilon = 1e-15);
        assert!(s.marginal_population(0, 3).is_err());
        assert!(s.marginal_population(1, 0).is_err());
    }
}
