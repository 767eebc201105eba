//! Self-checks run by the command-line `verify` subcommand.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::{
    collective_enhancement, controlled_phase_error, min_error_formula, minimize_over_rabi, optimal_rabi, scaling_fit,
    Dispersion,
};
use crate::error::Result;
use crate::errorbudget::{shenvi_threshold, subregister_error, table_display};
use crate::hilbert::{basis_state, AtomSpec};
use crate::protocols::{
    analytic_success, and_pair, and_pair_inverse, auto_iterations, bits_of, distance_mod_phase, grover_search,
    marked_reflection, mean_inversion, qubit_block_matrix, reflect, Architecture, Executor, Layout, Partition,
    PhaseScheme, ProtocolConfig, Reflection,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Level {
    Fast,
    Full,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
    /// Wall time; not serialised so reports stay reproducible.
    #[serde(skip)]
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub level: Level,
    pub seed: u64,
    pub checks: Vec<Check>,
    /// Fitted exponent of the minimised two-atom error, full level only.
    pub fitted_exponent: Option<f64>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

const MATRIX_TOL: f64 = 1e-10;

fn run_check(checks: &mut Vec<Check>, name: &str, f: impl FnOnce() -> Result<(bool, String)>) {
    let t = Instant::now();
    let (passed, detail) = match f() {
        Ok(r) => r,
        Err(e) => (false, format!("error: {e}")),
    };
    checks.push(Check {
        name: name.into(),
        passed,
        detail,
        seconds: t.elapsed().as_secs_f64(),
    });
}

/// Marked elements to test for `k` qubits: all of them up to `exhaustive`,
/// otherwise eight drawn without replacement.
fn marks(k: usize, exhaustive: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut all: Vec<usize> = (0..1usize << k).collect();
    if k > exhaustive {
        all.shuffle(rng);
        all.truncate(8);
    }
    all
}

/// Largest deviation of the layout's reflection from `2|x0><x0| - I` over
/// the given marks, and the largest leaked population.
pub fn oracle_deviation(layout: &Layout, phases: PhaseScheme, xs: &[usize]) -> Result<(f64, f64)> {
    let mut worst: f64 = 0.0;
    let mut leak: f64 = 0.0;
    for &x in xs {
        let bits = bits_of(x, layout.k);
        let mut exec = Executor::ideal().with_phases(phases);
        let (m, l) = qubit_block_matrix(layout, |s| {
            reflect(&mut exec, s, layout, &Reflection::Marked(bits.clone()))
        })?;
        worst = worst.max(distance_mod_phase(&m, &marked_reflection(&bits)));
        leak = leak.max(l);
    }
    Ok((worst, leak))
}

pub fn diffusion_deviation(layout: &Layout, phases: PhaseScheme) -> Result<(f64, f64)> {
    let mut exec = Executor::ideal().with_phases(phases);
    let (m, l) = qubit_block_matrix(layout, |s| reflect(&mut exec, s, layout, &Reflection::Uniform))?;
    Ok((distance_mod_phase(&m, &mean_inversion(layout.k)), l))
}

/// Largest deviation between two layouts' qubit-block reflections.
pub fn equivalence_deviation(a: &Layout, b: &Layout, reflection: &Reflection, phases: PhaseScheme) -> Result<f64> {
    let mut ea = Executor::ideal().with_phases(phases);
    let mut eb = Executor::ideal().with_phases(phases);
    let (ma, _) = qubit_block_matrix(a, |s| reflect(&mut ea, s, a, reflection))?;
    let (mb, _) = qubit_block_matrix(b, |s| reflect(&mut eb, s, b, reflection))?;
    Ok(distance_mod_phase(&ma, &mb))
}

/// Largest gap between simulated and analytic success probabilities over all
/// iterations up to the auto count. Every mark for `k <= 3`, 8 random ones
/// above.
pub fn grover_law_deviation(ks: std::ops::RangeInclusive<usize>, rng: &mut ChaCha8Rng) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for k in ks {
        for x in marks(k, 3, rng) {
            let cfg = ProtocolConfig::new(Architecture::Sequential, bits_of(x, k));
            let trace = grover_search(&cfg, Some(auto_iterations(k)))?;
            for r in &trace.records {
                worst = worst.max((r.success_prob - analytic_success(k, r.iteration)).abs());
            }
        }
    }
    Ok(worst)
}

/// One point of [`scaling_study`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScalingRow {
    pub b_tau: f64,
    /// Numerical minimiser over the closed-form optimal Rabi frequency.
    pub rabi_ratio: f64,
    /// Numerical minimum over the closed-form minimum error.
    pub error_ratio: f64,
}

/// Omega-minimised controlled-phase error at each `B tau` (with `tau = 1`),
/// and the fitted log-log slope.
pub fn scaling_study(bts: &[f64]) -> Result<(Vec<ScalingRow>, f64)> {
    let tau = 1.0;
    let mut rows = Vec::with_capacity(bts.len());
    let mut pts = Vec::with_capacity(bts.len());
    for &bt in bts {
        let b = bt / tau;
        let guess = optimal_rabi(b, tau)?;
        let min = minimize_over_rabi(
            |w| controlled_phase_error(b, tau, w, Dispersion::default()),
            guess,
            1.0,
            21,
        )?;
        rows.push(ScalingRow {
            b_tau: bt,
            rabi_ratio: min.rabi / guess,
            error_ratio: min.error / min_error_formula(b, tau)?,
        });
        pts.push((bt, min.error));
    }
    Ok((rows, scaling_fit(&pts)?.slope))
}

pub fn run(level: Level, seed: u64, phases: PhaseScheme) -> VerifyReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::new();
    let kmax = match level {
        Level::Fast => 3,
        Level::Full => 6,
    };

    run_check(&mut checks, "sequential oracle matrices", || {
        let mut worst: f64 = 0.0;
        let mut leak: f64 = 0.0;
        for k in 1..=kmax {
            let (w, l) = oracle_deviation(
                &Layout::new(Architecture::Sequential, k, None)?,
                phases,
                &marks(k, 4, &mut rng),
            )?;
            worst = worst.max(w);
            leak = leak.max(l);
        }
        Ok((
            worst < MATRIX_TOL && leak < 1e-12,
            format!("k<= {kmax}, max dev {worst:.3e}, leak {leak:.1e}"),
        ))
    });
    run_check(&mut checks, "sequential diffusion matrices", || {
        let mut worst: f64 = 0.0;
        for k in 1..=kmax {
            worst = worst.max(diffusion_deviation(&Layout::new(Architecture::Sequential, k, None)?, phases)?.0);
        }
        Ok((worst < MATRIX_TOL, format!("k<= {kmax}, max dev {worst:.3e}")))
    });
    run_check(&mut checks, "simultaneous equals sequential", || {
        let mut worst: f64 = 0.0;
        for k in 1..=kmax.min(4) {
            let seq = Layout::new(Architecture::Sequential, k, None)?;
            let sim = Layout::new(Architecture::Simultaneous, k, None)?;
            for x in marks(k, 4, &mut rng) {
                let r = Reflection::Marked(bits_of(x, k));
                worst = worst.max(equivalence_deviation(&seq, &sim, &r, phases)?);
            }
            worst = worst.max(equivalence_deviation(&seq, &sim, &Reflection::Uniform, phases)?);
        }
        Ok((worst < MATRIX_TOL, format!("max dev {worst:.3e}")))
    });
    if level == Level::Full {
        run_check(&mut checks, "sub-register equals sequential (k=4, n_s=2)", || {
            let seq = Layout::new(Architecture::Sequential, 4, None)?;
            let sub = Layout::new(Architecture::Subregister, 4, Some(Partition { n_s: 2, k_s: 2 }))?;
            let mut worst: f64 = 0.0;
            for x in 0..16 {
                worst = worst.max(equivalence_deviation(
                    &seq,
                    &sub,
                    &Reflection::Marked(bits_of(x, 4)),
                    phases,
                )?);
            }
            worst = worst.max(equivalence_deviation(&seq, &sub, &Reflection::Uniform, phases)?);
            Ok((worst < MATRIX_TOL, format!("max dev {worst:.3e}")))
        });
    }
    run_check(&mut checks, "and-pair truth table", || {
        let atoms = vec![AtomSpec::comparison_ancilla(); 2];
        let mut exec = Executor::ideal().with_phases(phases);
        let mut worst: f64 = 0.0;
        for (input, output) in [([0, 0], [0, 0]), ([0, 1], [0, 1]), ([1, 0], [0, 2]), ([1, 1], [1, 1])] {
            let mut s = basis_state(atoms.clone(), &input)?;
            and_pair(&mut exec, &mut s, 0, 1)?;
            worst = worst.max((s.amplitude(&output)? - 1.0).norm());
            and_pair_inverse(&mut exec, &mut s, 0, 1)?;
            worst = worst.max((s.amplitude(&input)? - 1.0).norm());
        }
        Ok((worst < 1e-12, format!("max dev {worst:.1e}")))
    });
    run_check(&mut checks, "Grover success law", || {
        let top = if level == Level::Fast { 6 } else { 10 };
        let worst = grover_law_deviation(2..=top, &mut rng)?;
        Ok((worst < 1e-9, format!("k=2..{top}, max dev {worst:.1e}")))
    });
    run_check(&mut checks, "pulse counts", || {
        let mut ok = true;
        for k in 1..=kmax {
            let t = grover_search(&ProtocolConfig::new(Architecture::Sequential, vec![0; k]), Some(1))?;
            ok &= t.records[1].cumulative_pulses == 4 * k;
            let t = grover_search(&ProtocolConfig::new(Architecture::Simultaneous, vec![0; k]), Some(1))?;
            ok &= t.records[1].cumulative_pulses == 8;
        }
        Ok((ok, "sequential 4k, simultaneous 8".into()))
    });
    run_check(&mut checks, "closed forms", || {
        let shenvi: Vec<String> = [256.0, 512.0, 32768.0, 65536.0, 16777216.0]
            .iter()
            .map(|&n| shenvi_threshold(n).map(table_display))
            .collect::<Result<_>>()?;
        let sr = [2, 3].map(|n| subregister_error(n, 8, |_| 0.08, 0.0).map(table_display));
        let ok = shenvi == [".25", ".21", ".074", ".063", ".016"]
            && sr[0].as_deref().ok() == Some(".16")
            && sr[1].as_deref().ok() == Some(".24")
            && (optimal_rabi(8.0, 1.0)? / optimal_rabi(1.0, 1.0)? - 4.0).abs() < 1e-12
            && (min_error_formula(1e3, 1.0)? / min_error_formula(1e6, 1.0)? - 100.0).abs() < 1e-9;
        Ok((ok, format!("Shenvi {}", shenvi.join(" "))))
    });

    let mut fitted_exponent = None;
    if level == Level::Full {
        run_check(&mut checks, "collective enhancement", || {
            let mut worst: f64 = 0.0;
            for m in 1..=3 {
                let r = collective_enhancement(m, 1.0, 100.0)?;
                worst = worst.max((r.ratio / (m as f64).sqrt() - 1.0).abs());
            }
            Ok((worst < 0.01, format!("max relative dev {worst:.1e}")))
        });
        run_check(&mut checks, "error scaling fit", || {
            let bts: Vec<f64> = (0..5).map(|i| 10f64.powf(3.0 + 0.5 * i as f64)).collect();
            let (rows, slope) = scaling_study(&bts)?;
            fitted_exponent = Some(slope);
            let ok = (-0.75..=-0.58).contains(&slope)
                && rows
                    .iter()
                    .all(|r| (r.rabi_ratio - 1.0).abs() <= 0.1 && (0.5..=2.0).contains(&r.error_ratio));
            Ok((ok, format!("slope {slope:.4}")))
        });
    }

    VerifyReport {
        level,
        seed,
        checks,
        fitted_exponent,
    }
}
