//! Grover steps built from pulses, for the three register architectures.
//!
//! Every reflection is realised as `2|v><v| - I` or its negative; the two
//! differ by a global sign that the comparisons here ignore.

mod executor;

pub use executor::{Executor, Mode, PhaseScheme};

use std::f64::consts::PI;
use std::ops::Range;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::InteractionGraph;
use crate::error::{Error, Result};
use crate::hilbert::{AtomSpec, BlockadeCondition, RegisterState, Role};
use crate::pulses::PulseSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Architecture {
    Sequential,
    Simultaneous,
    Subregister,
}

impl Architecture {
    pub fn name(self) -> &'static str {
        match self {
            Architecture::Sequential => "sequential",
            Architecture::Simultaneous => "simultaneous",
            Architecture::Subregister => "subregister",
        }
    }
}

/// `n_s` sub-registers of `k_s` qubits each.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    pub n_s: usize,
    pub k_s: usize,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModeConfig {
    #[default]
    Ideal,
    /// Uniform pair shift (rad/s), Rydberg lifetime (s) and Rabi frequency
    /// (rad/s).
    Dynamical { shift: f64, tau: f64, rabi: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    pub architecture: Architecture,
    pub k: usize,
    /// Marked element, one binary digit per qubit, atom 0 first.
    pub marked: Vec<usize>,
    #[serde(default)]
    pub partition: Option<Partition>,
    #[serde(default)]
    pub mode: ModeConfig,
}

impl ProtocolConfig {
    pub fn new(architecture: Architecture, marked: Vec<usize>) -> Self {
        Self {
            architecture,
            k: marked.len(),
            marked,
            partition: None,
            mode: ModeConfig::Ideal,
        }
    }

    pub fn with_partition(mut self, n_s: usize, k_s: usize) -> Self {
        self.partition = Some(Partition { n_s, k_s });
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidConfig("k must be at least 1".into()));
        }
        if self.marked.len() != self.k {
            return Err(Error::InvalidConfig(format!(
                "marked element has {} digits, expected {}",
                self.marked.len(),
                self.k
            )));
        }
        if self.marked.iter().any(|&b| b > 1) {
            return Err(Error::InvalidConfig("marked element digits must be 0 or 1".into()));
        }
        if self.architecture == Architecture::Subregister {
            let p = self
                .partition
                .ok_or_else(|| Error::InvalidConfig("sub-register architecture needs a partition".into()))?;
            if p.n_s < 2 || p.k_s == 0 || p.n_s * p.k_s != self.k {
                return Err(Error::InvalidConfig(format!(
                    "partition {}x{} does not split k={} into at least two sub-registers",
                    p.n_s, p.k_s, self.k
                )));
            }
        }
        if let ModeConfig::Dynamical { shift, tau, rabi } = self.mode {
            if ![shift, tau, rabi].iter().all(|v| v.is_finite() && *v > 0.0) {
                return Err(Error::InvalidConfig(
                    "dynamical mode needs positive shift, tau and rabi".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn layout(&self) -> Result<Layout> {
        self.validate()?;
        Layout::new(self.architecture, self.k, self.partition)
    }

    /// Executor for `self.mode`, with the interaction graph of the layout.
    pub fn executor(&self) -> Result<Executor> {
        let layout = self.layout()?;
        match self.mode {
            ModeConfig::Ideal => Ok(Executor::ideal()),
            ModeConfig::Dynamical { shift, tau, rabi } => Executor::dynamical(layout.uniform_graph(shift, tau)?, rabi),
        }
    }
}

/// Atom arrangement for one architecture: `k` register atoms first, then
/// ancillas.
#[derive(Clone, Debug, PartialEq)]
pub struct Layout {
    pub architecture: Architecture,
    pub k: usize,
    pub partition: Option<Partition>,
    atoms: Vec<AtomSpec>,
}

impl Layout {
    pub fn new(architecture: Architecture, k: usize, partition: Option<Partition>) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidConfig("k must be at least 1".into()));
        }
        let atoms = match architecture {
            Architecture::Sequential => vec![AtomSpec::qubit(); k],
            Architecture::Simultaneous => {
                let mut a = vec![AtomSpec::two_species(); k];
                a.push(AtomSpec::qubit());
                a
            }
            Architecture::Subregister => {
                let p = partition.ok_or_else(|| Error::InvalidConfig("missing partition".into()))?;
                if p.n_s < 2 || p.n_s * p.k_s != k {
                    return Err(Error::InvalidConfig("partition does not match k".into()));
                }
                let mut a = vec![AtomSpec::s_qubit(); k];
                a.extend(std::iter::repeat_n(AtomSpec::comparison_ancilla(), p.n_s));
                a
            }
        };
        Ok(Self {
            architecture,
            k,
            partition,
            atoms,
        })
    }

    pub fn atoms(&self) -> &[AtomSpec] {
        &self.atoms
    }

    pub fn register(&self) -> Range<usize> {
        0..self.k
    }

    pub fn ancillas(&self) -> Range<usize> {
        self.k..self.atoms.len()
    }

    /// Full label with the register set to `bits` and ancillas in `|0>`.
    pub fn label(&self, bits: &[usize]) -> Vec<usize> {
        let mut l = bits.to_vec();
        l.resize(self.atoms.len(), 0);
        l
    }

    /// Uniform register superposition, ancillas in `|0>`.
    pub fn initial_state(&self) -> Result<RegisterState> {
        let mask: Vec<bool> = (0..self.atoms.len()).map(|i| i < self.k).collect();
        RegisterState::product(self.atoms.clone(), &mask)
    }

    /// Interaction graph with one shift value on every pair that the
    /// architecture relies on, and decay `1/tau` on all Rydberg levels.
    pub fn uniform_graph(&self, shift: f64, tau: f64) -> Result<InteractionGraph> {
        let mut g = InteractionGraph::new();
        let reg: Vec<usize> = self.register().collect();
        let anc: Vec<usize> = self.ancillas().collect();
        match self.architecture {
            Architecture::Sequential => g = InteractionGraph::all_pairs(&reg, Role::RydR, shift)?,
            Architecture::Simultaneous => {
                for &i in &reg {
                    g.set_shift(i, anc[0], Role::RydS, Role::RydR, shift)?;
                }
            }
            Architecture::Subregister => {
                let ks = self.partition.map_or(self.k, |p| p.k_s);
                for &i in &reg {
                    g.set_shift(i, anc[i / ks], Role::RydS, Role::RydR, shift)?;
                }
                for (n, &a) in anc.iter().enumerate() {
                    for &b in &anc[n + 1..] {
                        g.set_shift(a, b, Role::RydR, Role::RydR, shift)?;
                    }
                }
            }
        }
        g.set_decay(Role::RydR, 1.0 / tau)?;
        g.set_decay(Role::RydS, 1.0 / tau)?;
        Ok(g)
    }
}

/// Which reflection a half step implements.
#[derive(Clone, Debug, PartialEq)]
pub enum Reflection {
    /// About the marked element (oracle).
    Marked(Vec<usize>),
    /// About the uniform superposition (diffusion).
    Uniform,
}

fn level(state: &RegisterState, atom: usize, role: Role) -> Result<usize> {
    state.atoms()[atom].require(role)
}

fn ground(state: &RegisterState, atom: usize, bit: usize) -> Result<usize> {
    level(state, atom, if bit == 0 { Role::Ground0 } else { Role::Ground1 })
}

fn check_register(state: &RegisterState, k: usize) -> Result<()> {
    if k == 0 || k > state.num_atoms() {
        return Err(Error::Precondition(format!(
            "register of {k} atoms does not fit a state of {} atoms",
            state.num_atoms()
        )));
    }
    Ok(())
}

fn check_marked(marked: &[usize]) -> Result<()> {
    if marked.iter().any(|&b| b > 1) {
        return Err(Error::InvalidLabel("marked element digits must be 0 or 1".into()));
    }
    Ok(())
}

/// Fails when any of `atoms` holds Rydberg population. Only enforced in ideal
/// mode, where such population can only come from a malformed input.
fn require_unexcited(exec: &Executor, state: &RegisterState, atoms: Range<usize>) -> Result<()> {
    if !exec.is_ideal() {
        return Ok(());
    }
    for a in atoms {
        for l in state.atoms()[a].rydberg_levels() {
            if state.marginal_population(a, l)? > 1e-12 {
                return Err(Error::Precondition(format!("atom {a} has Rydberg population")));
            }
        }
    }
    Ok(())
}

fn require_ground0(exec: &Executor, state: &RegisterState, atoms: Range<usize>) -> Result<()> {
    if !exec.is_ideal() {
        return Ok(());
    }
    let norm = state.norm_sqr();
    for a in atoms {
        let g0 = level(state, a, Role::Ground0)?;
        if (state.marginal_population(a, g0)? - norm).abs() > 1e-12 {
            return Err(Error::Precondition(format!("ancilla {a} is not in |0>")));
        }
    }
    Ok(())
}

/// Transition driven on register atom `i` by a half step: from the ground
/// level opposite to the marked bit, or the bright superposition.
fn register_pulse(
    state: &RegisterState,
    i: usize,
    reflection: &Reflection,
    ryd: Role,
    angle: f64,
    phase: f64,
) -> Result<PulseSpec> {
    let r = level(state, i, ryd)?;
    Ok(match reflection {
        Reflection::Marked(bits) => PulseSpec::bare(i, ground(state, i, 1 - bits[i])?, r, angle, phase),
        Reflection::Uniform => PulseSpec::bright(
            i,
            level(state, i, Role::Ground0)?,
            level(state, i, Role::Ground1)?,
            r,
            angle,
            phase,
        ),
    })
}

/// Excite atoms `0..k` one at a time, each blocked by the lower-indexed atoms,
/// then de-excite in reverse order. Components with any excitation pick up
/// `-1`; the state with none is untouched.
fn sequential_sweep(exec: &mut Executor, state: &mut RegisterState, k: usize, reflection: &Reflection) -> Result<()> {
    check_register(state, k)?;
    require_unexcited(exec, state, 0..k)?;
    let phases = exec.phases();
    let ryd = state.atoms()[0].rydberg_levels();
    let pulse = |state: &RegisterState, i: usize, phase: f64| -> Result<PulseSpec> {
        let blockade = BlockadeCondition::new((0..i).collect(), ryd.clone());
        Ok(register_pulse(state, i, reflection, Role::RydR, PI, phase)?.blocked_by(Some(blockade)))
    };
    for i in 0..k {
        let p = pulse(state, i, phases.excite)?;
        exec.pulse(state, p)?;
    }
    for i in (0..k).rev() {
        let p = pulse(state, i, phases.excite + phases.sequential_return)?;
        exec.pulse(state, p)?;
    }
    Ok(())
}

/// `2|x0><x0| - I` on the first `marked.len()` atoms.
pub fn oracle_sequential(exec: &mut Executor, state: &mut RegisterState, marked: &[usize]) -> Result<()> {
    check_marked(marked)?;
    sequential_sweep(exec, state, marked.len(), &Reflection::Marked(marked.to_vec()))
}

/// `2P - I` on the first `k` atoms, `P` the projector on the uniform state.
pub fn diffusion_sequential(exec: &mut Executor, state: &mut RegisterState, k: usize) -> Result<()> {
    sequential_sweep(exec, state, k, &Reflection::Uniform)
}

/// Register layer to `|s>`, ancilla 2pi blocked by any `|s>`, register layer
/// back with the returning phase.
fn simultaneous_sweep(exec: &mut Executor, state: &mut RegisterState, k: usize, reflection: &Reflection) -> Result<()> {
    check_register(state, k)?;
    if state.num_atoms() != k + 1 {
        return Err(Error::Precondition(format!(
            "expected {k} register atoms and one ancilla"
        )));
    }
    require_unexcited(exec, state, 0..k + 1)?;
    require_ground0(exec, state, k..k + 1)?;
    let phases = exec.phases();
    let layer = |state: &RegisterState, phase: f64| -> Result<Vec<PulseSpec>> {
        (0..k)
            .map(|i| register_pulse(state, i, reflection, Role::RydS, PI, phase))
            .collect()
    };
    let s = level(state, 0, Role::RydS)?;
    let anc = PulseSpec::bare(
        k,
        level(state, k, Role::Ground0)?,
        level(state, k, Role::RydR)?,
        2.0 * PI,
        phases.excite,
    )
    .blocked_by(Some(BlockadeCondition::new((0..k).collect(), vec![s])));

    let up = layer(state, phases.excite)?;
    exec.layer(state, &up)?;
    exec.pulse(state, anc)?;
    let down = layer(state, phases.excite + phases.collective_return)?;
    exec.layer(state, &down)
}

/// `I - 2|x0><x0|` on the register, with the ancilla (last atom) in `|0>`.
pub fn oracle_simultaneous(exec: &mut Executor, state: &mut RegisterState, marked: &[usize]) -> Result<()> {
    check_marked(marked)?;
    simultaneous_sweep(exec, state, marked.len(), &Reflection::Marked(marked.to_vec()))
}

/// `I - 2P` on the register, with the ancilla (last atom) in `|0>`.
pub fn diffusion_simultaneous(exec: &mut Executor, state: &mut RegisterState, k: usize) -> Result<()> {
    simultaneous_sweep(exec, state, k, &Reflection::Uniform)
}

/// `|10> -> |02>`, other ancilla product states unchanged: transfer `0 <-> 2`
/// on `second` controlled by `first` in `|1>`, then `1 <-> 0` on `first`
/// controlled by `second` in `|2>`.
pub fn and_pair(exec: &mut Executor, state: &mut RegisterState, first: usize, second: usize) -> Result<()> {
    let (f1, s0, s2) = and_levels(state, first, second)?;
    let f0 = level(state, first, Role::Ground0)?;
    exec.controlled_transfer(state, first, f1, second, s0, s2)?;
    exec.controlled_transfer(state, second, s2, first, f1, f0)
}

pub fn and_pair_inverse(exec: &mut Executor, state: &mut RegisterState, first: usize, second: usize) -> Result<()> {
    let (f1, s0, s2) = and_levels(state, first, second)?;
    let f0 = level(state, first, Role::Ground0)?;
    exec.controlled_transfer(state, second, s2, first, f1, f0)?;
    exec.controlled_transfer(state, first, f1, second, s0, s2)
}

fn and_levels(state: &RegisterState, first: usize, second: usize) -> Result<(usize, usize, usize)> {
    let n = state.num_atoms();
    for a in [first, second] {
        if a >= n {
            return Err(Error::InvalidAtom { index: a, len: n });
        }
    }
    Ok((
        level(state, first, Role::Ground1)?,
        level(state, second, Role::Ground0)?,
        level(state, second, Role::Logical2)?,
    ))
}

/// Order in which ancilla pairs are combined. Neighbours by index are paired
/// level by level; an unpaired ancilla is carried to the next level, which is
/// the same as pairing it with a virtual ancilla fixed in `|1>`. Returns the
/// `(first, second)` pairs and the root.
pub fn reduction_tree(ancillas: &[usize]) -> (Vec<(usize, usize)>, usize) {
    let mut pairs = Vec::new();
    let mut level = ancillas.to_vec();
    while level.len() > 1 {
        let mut next = Vec::with_capacity(level.len().div_ceil(2));
        for chunk in level.chunks(2) {
            if let [a, b] = chunk {
                pairs.push((*a, *b));
            }
            next.push(chunk[0]);
        }
        level = next;
    }
    (pairs, level.first().copied().unwrap_or(0))
}

/// Points inside a sub-register half step where a probe may look.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stage {
    /// Ancillas transferred and register back in its ground levels.
    Transferred,
    /// Reduction tree done, before the root ancilla's 2pi pulse.
    Reduced,
}

/// One reflection in the sub-register architecture.
pub fn subregister_half_step(
    exec: &mut Executor,
    state: &mut RegisterState,
    partition: Partition,
    reflection: &Reflection,
    probe: &mut dyn FnMut(Stage, &RegisterState),
) -> Result<()> {
    let Partition { n_s, k_s } = partition;
    let k = n_s * k_s;
    if n_s == 0 || k_s == 0 || state.num_atoms() != k + n_s {
        return Err(Error::Precondition(format!(
            "state of {} atoms does not match {n_s} sub-registers of {k_s}",
            state.num_atoms()
        )));
    }
    if let Reflection::Marked(bits) = reflection {
        check_marked(bits)?;
        if bits.len() != k {
            return Err(Error::InvalidLabel(format!("marked element needs {k} digits")));
        }
    }
    require_unexcited(exec, state, 0..k + n_s)?;
    require_ground0(exec, state, k..k + n_s)?;
    let phases = exec.phases();
    let phi = phases.excite;
    let ancillas: Vec<usize> = (k..k + n_s).collect();
    let s = level(state, 0, Role::RydS)?;
    let (a0, a1, ar) = (
        level(state, k, Role::Ground0)?,
        level(state, k, Role::Ground1)?,
        level(state, k, Role::RydR)?,
    );

    let register_layer = |state: &RegisterState, phase: f64| -> Result<Vec<PulseSpec>> {
        (0..k)
            .map(|i| register_pulse(state, i, reflection, Role::RydS, PI, phase))
            .collect()
    };
    // ancilla transfer legs; only the leg from |0> is blocked by the register
    let leg = |from: usize, phase: f64, blocked: bool| -> Vec<PulseSpec> {
        ancillas
            .iter()
            .enumerate()
            .map(|(j, &a)| {
                let blockade = blocked.then(|| BlockadeCondition::new((j * k_s..(j + 1) * k_s).collect(), vec![s]));
                PulseSpec::bare(a, from, ar, PI, phase).blocked_by(blockade)
            })
            .collect()
    };
    let (pairs, root) = reduction_tree(&ancillas);

    let up = register_layer(state, phi)?;
    let down = register_layer(state, phi + phases.collective_return)?;
    exec.layer(state, &up)?;
    exec.layer(state, &leg(a0, phi, true))?;
    exec.layer(state, &leg(a1, phi + PI, false))?;
    exec.layer(state, &down)?;
    probe(Stage::Transferred, state);
    for &(f, s) in &pairs {
        and_pair(exec, state, f, s)?;
    }
    probe(Stage::Reduced, state);
    exec.pulse(state, PulseSpec::bare(root, a1, ar, 2.0 * PI, phi))?;
    for &(f, s) in pairs.iter().rev() {
        and_pair_inverse(exec, state, f, s)?;
    }
    exec.layer(state, &up)?;
    exec.layer(state, &leg(a1, phi, false))?;
    exec.layer(state, &leg(a0, phi + PI, true))?;
    exec.layer(state, &down)
}

/// Oracle then diffusion in the sub-register architecture.
pub fn grover_step_subregister(
    exec: &mut Executor,
    state: &mut RegisterState,
    partition: Partition,
    marked: &[usize],
) -> Result<()> {
    let mut none = |_: Stage, _: &RegisterState| {};
    subregister_half_step(exec, state, partition, &Reflection::Marked(marked.to_vec()), &mut none)?;
    subregister_half_step(exec, state, partition, &Reflection::Uniform, &mut none)
}

/// One reflection for the layout's architecture.
pub fn reflect(exec: &mut Executor, state: &mut RegisterState, layout: &Layout, reflection: &Reflection) -> Result<()> {
    let k = layout.k;
    match (layout.architecture, reflection) {
        (Architecture::Sequential, Reflection::Marked(m)) => oracle_sequential(exec, state, m),
        (Architecture::Sequential, Reflection::Uniform) => diffusion_sequential(exec, state, k),
        (Architecture::Simultaneous, Reflection::Marked(m)) => oracle_simultaneous(exec, state, m),
        (Architecture::Simultaneous, Reflection::Uniform) => diffusion_simultaneous(exec, state, k),
        (Architecture::Subregister, r) => {
            let p = layout
                .partition
                .ok_or_else(|| Error::InvalidConfig("missing partition".into()))?;
            subregister_half_step(exec, state, p, r, &mut |_, _| {})
        }
    }
}

/// Oracle followed by diffusion.
pub fn grover_iteration(
    exec: &mut Executor,
    state: &mut RegisterState,
    layout: &Layout,
    marked: &[usize],
) -> Result<()> {
    reflect(exec, state, layout, &Reflection::Marked(marked.to_vec()))?;
    reflect(exec, state, layout, &Reflection::Uniform)
}

/// `round(pi / (4 asin(2^{-k/2})) - 1/2)`
pub fn auto_iterations(k: usize) -> usize {
    let theta = (0.5f64).powf(k as f64 / 2.0).asin();
    (PI / (4.0 * theta) - 0.5).round().max(0.0) as usize
}

/// `sin^2((2m + 1) asin(2^{-k/2}))`
pub fn analytic_success(k: usize, m: usize) -> f64 {
    let theta = (0.5f64).powf(k as f64 / 2.0).asin();
    ((2 * m + 1) as f64 * theta).sin().powi(2)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iteration: usize,
    pub success_prob: f64,
    pub norm: f64,
    pub cumulative_pulses: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroverTrace {
    pub architecture: Architecture,
    pub k: usize,
    pub marked: Vec<usize>,
    pub iterations: usize,
    /// Starts with iteration 0, the prepared state.
    pub records: Vec<TraceRecord>,
}

impl GroverTrace {
    pub fn final_success(&self) -> f64 {
        self.records.last().map_or(0.0, |r| r.success_prob)
    }
}

/// Prepare the uniform state and run `iterations` (default: the auto count)
/// Grover iterations, recording the marked-element probability after each.
pub fn grover_search(config: &ProtocolConfig, iterations: Option<usize>) -> Result<GroverTrace> {
    grover_search_with_state(config, iterations).map(|(trace, _)| trace)
}

/// [`grover_search`] that also hands back the final register state.
pub fn grover_search_with_state(
    config: &ProtocolConfig,
    iterations: Option<usize>,
) -> Result<(GroverTrace, RegisterState)> {
    let layout = config.layout()?;
    let mut exec = config.executor()?;
    let iterations = iterations.unwrap_or_else(|| auto_iterations(config.k));
    let mut state = layout.initial_state()?;
    let target = layout.label(&config.marked);
    let record = |it: usize, state: &RegisterState, exec: &Executor| -> Result<TraceRecord> {
        Ok(TraceRecord {
            iteration: it,
            success_prob: state.amplitude(&target)?.norm_sqr(),
            norm: state.norm_sqr().sqrt(),
            cumulative_pulses: exec.pulse_durations(),
        })
    };
    let mut records = vec![record(0, &state, &exec)?];
    for it in 1..=iterations {
        grover_iteration(&mut exec, &mut state, &layout, &config.marked)?;
        records.push(record(it, &state, &exec)?);
    }
    let trace = GroverTrace {
        architecture: config.architecture,
        k: config.k,
        marked: config.marked.clone(),
        iterations,
        records,
    };
    Ok((trace, state))
}

/// Binary digits of `x` over `k` qubits, atom 0 most significant.
pub fn bits_of(x: usize, k: usize) -> Vec<usize> {
    (0..k).map(|i| (x >> (k - 1 - i)) & 1).collect()
}

/// Matrix of `op` restricted to the register qubit subspace (ancillas in
/// `|0>`), assembled column by column from basis inputs. Also returns the
/// largest population any column leaves outside that subspace.
pub fn qubit_block_matrix<F>(layout: &Layout, mut op: F) -> Result<(DMatrix<Complex64>, f64)>
where
    F: FnMut(&mut RegisterState) -> Result<()>,
{
    let n = 1usize << layout.k;
    let mut m = DMatrix::zeros(n, n);
    let mut leak: f64 = 0.0;
    for col in 0..n {
        let mut s = RegisterState::basis_state(layout.atoms().to_vec(), &layout.label(&bits_of(col, layout.k)))?;
        op(&mut s)?;
        let mut inside = 0.0;
        for row in 0..n {
            let a = s.amplitude(&layout.label(&bits_of(row, layout.k)))?;
            inside += a.norm_sqr();
            m[(row, col)] = a;
        }
        leak = leak.max(s.norm_sqr() - inside);
    }
    Ok((m, leak))
}

/// `2|x0><x0| - I` over `k` qubits.
pub fn marked_reflection(marked: &[usize]) -> DMatrix<Complex64> {
    let k = marked.len();
    let x0 = marked.iter().fold(0, |acc, &b| 2 * acc + b);
    let mut m = -DMatrix::<Complex64>::identity(1 << k, 1 << k);
    m[(x0, x0)] = Complex64::new(1.0, 0.0);
    m
}

/// `2P - I` over `k` qubits.
pub fn mean_inversion(k: usize) -> DMatrix<Complex64> {
    let n = 1usize << k;
    let two_over_n = Complex64::new(2.0 / n as f64, 0.0);
    DMatrix::from_element(n, n, two_over_n) - DMatrix::identity(n, n)
}

/// Largest entrywise difference between `a` and `b` after removing the
/// global phase that best aligns them.
pub fn distance_mod_phase(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    if a.shape() != b.shape() {
        return f64::INFINITY;
    }
    let overlap: Complex64 = a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum();
    let phase = if overlap.norm() > 0.0 {
        overlap / overlap.norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x * phase - y).norm())
        .fold(0.0, f64::max)
}
