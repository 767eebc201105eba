use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{DriveSpec, Generator, InteractionGraph, Method, Propagator};
use crate::error::{Error, Result};
use crate::hilbert::{basis_state, inner, AtomSpec, BlockadeCondition, RegisterState, Role};
use crate::protocols::Executor;
use crate::pulses::{PulseSpec, Transition};

/// `(7 pi)^(1/3) B^(2/3) / tau^(1/3)`
pub fn optimal_rabi(b: f64, tau: f64) -> Result<f64> {
    positive(b, "blockade shift")?;
    positive(tau, "lifetime")?;
    Ok((7.0 * PI).cbrt() * b.powf(2.0 / 3.0) / tau.cbrt())
}

/// `3 (7 pi)^(2/3) / 8 * (B tau)^(-2/3)`
pub fn min_error_formula(b: f64, tau: f64) -> Result<f64> {
    let bt = b * tau;
    if !(bt.is_finite() && bt > 0.0) || b <= 0.0 {
        return Err(Error::InvalidParameter(format!("B*tau = {bt} must be positive")));
    }
    Ok(3.0 * (7.0 * PI).powf(2.0 / 3.0) / 8.0 * bt.powf(-2.0 / 3.0))
}

fn positive(x: f64, what: &str) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{what} {x} must be positive")))
    }
}

/// Mean over `inputs` of `1 - |<ideal|dyn>|^2/||dyn||^2 + (1 - ||dyn||^2)`.
///
/// The fidelity is taken against the renormalised dynamical state so that
/// population lost to decay is counted once, by the norm term.
pub fn gate_error<F>(fragment: F, graph: &InteractionGraph, rabi: f64, inputs: &[RegisterState]) -> Result<f64>
where
    F: Fn(&mut Executor, &mut RegisterState) -> Result<()>,
{
    if inputs.is_empty() {
        return Err(Error::InvalidParameter("empty input set".into()));
    }
    let mut ideal = Executor::ideal();
    let mut dynamical = Executor::dynamical(graph.clone(), rabi)?;
    let mut total = 0.0;
    for input in inputs {
        let mut want = input.clone();
        fragment(&mut ideal, &mut want)?;
        let mut got = input.clone();
        fragment(&mut dynamical, &mut got)?;
        let norm = got.norm_sqr();
        let overlap = inner(&want, &got)?.norm_sqr() / (want.norm_sqr() * norm).max(f64::MIN_POSITIVE);
        total += 1.0 - overlap + (1.0 - norm);
    }
    Ok(total / inputs.len() as f64)
}

/// Two-qubit controlled phase: control `1 -> r` (pi), target `1 -> r` (2 pi,
/// blocked by the control), control back with the same phase. Atom 0 is the
/// control.
pub fn controlled_phase_fragment(exec: &mut Executor, state: &mut RegisterState) -> Result<()> {
    let r = state.atoms()[0].require(Role::RydR)?;
    let g1 = state.atoms()[0].require(Role::Ground1)?;
    let phi = exec.phases().excite;
    exec.pulse(state, PulseSpec::bare(0, g1, r, PI, phi))?;
    let blockade = BlockadeCondition::new(vec![0], vec![r]);
    exec.pulse(
        state,
        PulseSpec::bare(1, g1, r, 2.0 * PI, phi).blocked_by(Some(blockade)),
    )?;
    exec.pulse(state, PulseSpec::bare(0, g1, r, PI, phi))?;
    Ok(())
}

/// How the blockade shift is averaged when estimating a gate error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Dispersion {
    /// The single value of `B`.
    None,
    /// Hann-weighted spread of the generalised Rabi index
    /// `m = sqrt(1 + B^2/Omega^2)` over `periods` units around its nominal
    /// value, integrated with `nodes` Gauss-Legendre points. The leakage of a
    /// blockaded pulse oscillates with period 1 in `m`; averaging several
    /// periods gives the envelope that the closed-form scaling describes.
    Hann { periods: f64, nodes: usize },
}

impl Default for Dispersion {
    fn default() -> Self {
        Dispersion::Hann {
            periods: 3.0,
            nodes: 32,
        }
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for j in 2..=n {
                let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// Shift values and normalised weights for `dispersion` around `b`.
pub fn dispersion_nodes(b: f64, rabi: f64, dispersion: Dispersion) -> Result<Vec<(f64, f64)>> {
    positive(rabi, "Rabi frequency")?;
    if !b.is_finite() {
        return Err(Error::InvalidParameter("non-finite blockade shift".into()));
    }
    let (periods, nodes) = match dispersion {
        Dispersion::None => return Ok(vec![(b, 1.0)]),
        Dispersion::Hann { periods, nodes } => (periods, nodes),
    };
    if !(periods.is_finite() && periods > 0.0) || nodes == 0 {
        return Err(Error::InvalidParameter(
            "dispersion needs periods > 0 and nodes > 0".into(),
        ));
    }
    let ratio = b / rabi;
    let m0 = (1.0 + ratio * ratio).sqrt();
    let mut pts = Vec::with_capacity(nodes);
    for (x, w) in gauss_legendre(nodes) {
        let m = m0 + 0.5 * periods * x;
        if m <= 1.0 {
            continue;
        }
        let h = (0.5 * PI * x).cos().powi(2);
        pts.push((b.signum() * rabi * (m * m - 1.0).sqrt(), w * h));
    }
    let total: f64 = pts.iter().map(|p| p.1).sum();
    if total <= 0.0 {
        return Err(Error::InvalidParameter("dispersion window is empty".into()));
    }
    pts.iter_mut().for_each(|p| p.1 /= total);
    Ok(pts)
}

fn qubit_basis_inputs(atoms: &[AtomSpec]) -> Result<Vec<RegisterState>> {
    let k = atoms.len();
    (0..1usize << k)
        .map(|bits| {
            let label: Vec<usize> = (0..k).map(|i| (bits >> (k - 1 - i)) & 1).collect();
            basis_state(atoms.to_vec(), &label)
        })
        .collect()
}

/// Inputs for [`gate_error`]: every qubit basis state for up to four atoms,
/// otherwise 20 random qubit-subspace states drawn from `seed`.
pub fn error_inputs(atoms: &[AtomSpec], seed: u64) -> Result<Vec<RegisterState>> {
    if atoms.len() <= 4 {
        return qubit_basis_inputs(atoms);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let probe = RegisterState::zeros(atoms.to_vec());
    let qubit: Vec<usize> = (0..probe.len())
        .filter(|&i| (0..atoms.len()).all(|a| probe.digit(i, a) <= 1))
        .collect();
    (0..20)
        .map(|_| {
            let mut amps = vec![Complex64::new(0.0, 0.0); probe.len()];
            let mut norm = 0.0;
            for &i in &qubit {
                let z = Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
                norm += z.norm_sqr();
                amps[i] = z;
            }
            amps.iter_mut().for_each(|z| *z /= norm.sqrt());
            RegisterState::from_amplitudes(atoms.to_vec(), amps)
        })
        .collect()
}

/// Dispersion-averaged error of [`controlled_phase_fragment`] with pair
/// shift `b`, lifetime `tau` and Rabi frequency `rabi`.
pub fn controlled_phase_error(b: f64, tau: f64, rabi: f64, dispersion: Dispersion) -> Result<f64> {
    positive(tau, "lifetime")?;
    let atoms = vec![AtomSpec::qubit(); 2];
    let inputs = qubit_basis_inputs(&atoms)?;
    let mut acc = 0.0;
    for (shift, w) in dispersion_nodes(b, rabi, dispersion)? {
        let graph = InteractionGraph::all_pairs(&[0, 1], Role::RydR, shift)?.with_decay(Role::RydR, 1.0 / tau)?;
        acc += w * gate_error(controlled_phase_fragment, &graph, rabi, &inputs)?;
    }
    Ok(acc)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorMinimum {
    pub rabi: f64,
    pub error: f64,
}

fn map_grid<F>(xs: &[f64], f: &F) -> Vec<Result<f64>>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        xs.par_iter().map(|&x| f(x)).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        xs.iter().map(|&x| f(x)).collect()
    }
}

/// Minimise `error(rabi)` over `guess * e^[-span, span]`: a log-spaced grid of
/// `grid` points, then golden-section search on the bracketing cells.
pub fn minimize_over_rabi<F>(error: F, guess: f64, span: f64, grid: usize) -> Result<ErrorMinimum>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    positive(guess, "initial Rabi frequency")?;
    positive(span, "search span")?;
    if grid < 3 {
        return Err(Error::InvalidParameter("grid needs at least 3 points".into()));
    }
    let lo = guess.ln() - span;
    let step = 2.0 * span / (grid - 1) as f64;
    let xs: Vec<f64> = (0..grid).map(|i| lo + step * i as f64).collect();
    let rabis: Vec<f64> = xs.iter().map(|x| x.exp()).collect();
    let values = map_grid(&rabis, &error).into_iter().collect::<Result<Vec<_>>>()?;
    let best = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let mut a = xs[best.saturating_sub(1)];
    let mut b = xs[(best + 1).min(grid - 1)];
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = error(c.exp())?;
    let mut fd = error(d.exp())?;
    while b - a > 1e-4 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = error(c.exp())?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = error(d.exp())?;
        }
    }
    let (x, e) = if fc < fd { (c, fc) } else { (d, fd) };
    if values[best] < e {
        return Ok(ErrorMinimum {
            rabi: rabis[best],
            error: values[best],
        });
    }
    Ok(ErrorMinimum {
        rabi: x.exp(),
        error: e,
    })
}

/// Least-squares line through `(ln x, ln y)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub slope: f64,
    pub intercept: f64,
}

pub fn scaling_fit(points: &[(f64, f64)]) -> Result<ScalingFit> {
    if points.len() < 2 {
        return Err(Error::InvalidParameter("fit needs at least two points".into()));
    }
    if points
        .iter()
        .any(|&(x, y)| !(x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite()))
    {
        return Err(Error::InvalidParameter("log-log fit needs positive finite data".into()));
    }
    let n = points.len() as f64;
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("fit needs distinct x values".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    Ok(ScalingFit {
        slope,
        intercept: my - slope * mx,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnhancementResult {
    /// Oscillation frequency of the ground population divided by `Omega`.
    pub ratio: f64,
    /// Set when `B/Omega < 10`.
    pub weak_blockade: bool,
}

const ENHANCEMENT_SAMPLES: usize = 4096;

/// Drive `m` mutually blockaded atoms from `|0...0>` and read off the
/// frequency of the ground-state population from the peak of its windowed
/// spectrum.
pub fn collective_enhancement(m: usize, rabi: f64, b: f64) -> Result<EnhancementResult> {
    if m == 0 || m > 8 {
        return Err(Error::InvalidParameter(format!("atom count {m} outside 1..=8")));
    }
    positive(rabi, "Rabi frequency")?;
    positive(b, "blockade shift")?;
    let atoms = vec![AtomSpec::qubit(); m];
    let ids: Vec<usize> = (0..m).collect();
    let graph = InteractionGraph::all_pairs(&ids, Role::RydR, b)?;
    let drive = DriveSpec {
        drives: (0..m)
            .map(|atom| super::Drive {
                atom,
                transition: Transition::Bare { from: 0, to: 2 },
                phase: 0.0,
            })
            .collect(),
        rabi,
    };
    let mut state = basis_state(atoms, &vec![0; m])?;
    let dt = PI / (10.0 * rabi);
    let step = Propagator::new(Method::Auto, Generator::new(&state, &drive, &graph)?, dt)?;
    let mut pop = Vec::with_capacity(ENHANCEMENT_SAMPLES);
    for _ in 0..ENHANCEMENT_SAMPLES {
        pop.push(state.amplitudes()[0].norm_sqr());
        step.apply(&mut state);
    }
    let mean = pop.iter().sum::<f64>() / pop.len() as f64;
    let n = pop.len() as f64;
    let signal: Vec<f64> = pop
        .iter()
        .enumerate()
        .map(|(i, p)| (p - mean) * (PI * i as f64 / (n - 1.0)).sin().powi(2))
        .collect();
    // power at angular frequency w (in units of Omega)
    let power = |w: f64| -> f64 {
        let theta = w * rabi * dt;
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, s) in signal.iter().enumerate() {
            acc += Complex64::from_polar(*s, -theta * i as f64);
        }
        acc.norm_sqr()
    };
    let coarse = 0.002;
    let (mut best, mut best_p) = (coarse, f64::MIN);
    let mut w = coarse;
    while w < 10.0 {
        let p = power(w);
        if p > best_p {
            best = w;
            best_p = p;
        }
        w += coarse;
    }
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut c) = (best - coarse, best + coarse);
    while c - a > 1e-9 {
        let x1 = c - g * (c - a);
        let x2 = a + g * (c - a);
        if power(x1) > power(x2) {
            c = x2;
        } else {
            a = x1;
        }
    }
    Ok(EnhancementResult {
        ratio: 0.5 * (a + c),
        weak_blockade: b / rabi < 10.0,
    })
}

/// `c(k) = E_min (B tau)^(2/3)` for the sequential oracle on `k` qubit atoms
/// with uniform all-pairs shift `b`, measured on the full computational
/// basis with the Rabi frequency optimised.
pub fn empirical_prefactor(k: usize, b: f64, tau: f64, dispersion: Dispersion) -> Result<f64> {
    if !(1..=4).contains(&k) {
        return Err(Error::InvalidParameter(format!(
            "prefactor defined for 1 <= k <= 4, got {k}"
        )));
    }
    positive(b, "blockade shift")?;
    positive(tau, "lifetime")?;
    let atoms = vec![AtomSpec::qubit(); k];
    let inputs = qubit_basis_inputs(&atoms)?;
    let ids: Vec<usize> = (0..k).collect();
    let marked = vec![0; k];
    let fragment = |exec: &mut Executor, s: &mut RegisterState| crate::protocols::oracle_sequential(exec, s, &marked);
    let error = |rabi: f64| -> Result<f64> {
        let mut acc = 0.0;
        for (shift, w) in dispersion_nodes(b, rabi, dispersion)? {
            let graph = InteractionGraph::all_pairs(&ids, Role::RydR, shift)?.with_decay(Role::RydR, 1.0 / tau)?;
            acc += w * gate_error(fragment, &graph, rabi, &inputs)?;
        }
        Ok(acc)
    };
    let min = minimize_over_rabi(error, optimal_rabi(b, tau)?, 1.0, 9)?;
    Ok(min.error * (b * tau).powf(2.0 / 3.0))
}
