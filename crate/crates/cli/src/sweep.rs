use rayon::prelude::*;
use rydberg_grover::dynamics::{
    controlled_phase_error, min_error_formula, minimize_over_rabi, optimal_rabi, scaling_fit, Dispersion,
};
use rydberg_grover::interactions::{
    lattice_average_error, pair_shift, AveragingRule, LatticeMode, LatticeSpec, Species,
};
use rydberg_grover::{Error, Result};

use crate::output::{num, Csv};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Param {
    #[value(name = "B")]
    B,
    Tau,
    #[value(name = "Omega")]
    Omega,
    D,
    N,
    K,
}

impl Param {
    pub fn name(self) -> &'static str {
        match self {
            Param::B => "B",
            Param::Tau => "tau",
            Param::Omega => "Omega",
            Param::D => "d",
            Param::N => "n",
            Param::K => "k",
        }
    }

    fn log_by_default(self) -> bool {
        matches!(self, Param::B | Param::Tau | Param::Omega)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Spacing {
    Log,
    Linear,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Mode {
    SingleSpecies,
    TwoSpecies,
}

/// Everything held fixed while one parameter moves.
#[derive(Clone, Debug)]
pub struct Fixed {
    pub b: f64,
    pub tau: f64,
    pub omega: Option<f64>,
    pub dispersion: Dispersion,
    pub species: Species,
    pub d: Option<f64>,
    pub n: Option<f64>,
    pub k: usize,
    pub mode: Mode,
    pub averaging: AveragingRule,
}

pub fn grid(
    param: Param,
    values: Option<&[f64]>,
    range: Option<(f64, f64, usize)>,
    spacing: Option<Spacing>,
) -> Result<Vec<f64>> {
    let xs = match (values, range) {
        (Some(v), _) => v.to_vec(),
        (None, Some((from, to, points))) => {
            if points == 0 {
                return Err(Error::InvalidParameter("empty range".into()));
            }
            let log = match spacing {
                Some(s) => s == Spacing::Log,
                None => param.log_by_default(),
            };
            if log && (from <= 0.0 || to <= 0.0) {
                return Err(Error::InvalidParameter("log spacing needs positive bounds".into()));
            }
            (0..points)
                .map(|i| {
                    let t = if points == 1 {
                        0.0
                    } else {
                        i as f64 / (points - 1) as f64
                    };
                    if log {
                        (from.ln() + t * (to.ln() - from.ln())).exp()
                    } else {
                        from + t * (to - from)
                    }
                })
                .collect()
        }
        (None, None) => return Err(Error::InvalidParameter("give --values or --from/--to/--points".into())),
    };
    if xs.is_empty() {
        return Err(Error::InvalidParameter("empty range".into()));
    }
    if xs.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidParameter("non-finite sweep value".into()));
    }
    if param == Param::K && xs.iter().any(|&x| x < 1.0 || x.fract() != 0.0) {
        return Err(Error::InvalidParameter("k values must be positive integers".into()));
    }
    Ok(xs)
}

/// `d ln y / d ln x` by central differences, one-sided at the ends.
fn local_slopes(xs: &[f64], ys: &[f64]) -> Vec<Option<f64>> {
    let n = xs.len();
    (0..n)
        .map(|i| {
            if n < 2 {
                return None;
            }
            let (a, b) = (i.saturating_sub(1), (i + 1).min(n - 1));
            let (dx, dy) = (xs[b].ln() - xs[a].ln(), ys[b].ln() - ys[a].ln());
            (dx != 0.0 && dy.is_finite()).then(|| dy / dx)
        })
        .collect()
}

fn fit(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = xs.iter().copied().zip(ys.iter().copied()).collect();
    scaling_fit(&pts).ok().map(|f| f.slope)
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

pub const GATE_COLUMNS: [&str; 9] = [
    "param",
    "B",
    "tau",
    "Omega",
    "error",
    "Omega_opt",
    "error_formula",
    "local_slope",
    "fit_slope",
];

pub const LATTICE_COLUMNS: [&str; 14] = [
    "param",
    "d",
    "n",
    "k",
    "mode",
    "B_nearest",
    "tau",
    "pair_error",
    "lattice_error",
    "ceiling_violated",
    "pair_local_slope",
    "lattice_local_slope",
    "pair_fit_slope",
    "lattice_fit_slope",
];

/// Run the sweep; rows come back in grid order.
pub fn run(param: Param, xs: &[f64], fixed: &Fixed) -> Result<Csv> {
    match param {
        Param::B | Param::Tau | Param::Omega => gate_sweep(param, xs, fixed),
        Param::D | Param::N | Param::K => lattice_sweep(param, xs, fixed),
    }
}

struct GateCell {
    b: f64,
    tau: f64,
    omega: f64,
    error: f64,
    omega_opt: f64,
    formula: f64,
}

fn gate_sweep(param: Param, xs: &[f64], f: &Fixed) -> Result<Csv> {
    let cells: Vec<GateCell> = xs
        .par_iter()
        .map(|&x| -> Result<GateCell> {
            let (b, tau) = match param {
                Param::B => (x, f.tau),
                Param::Tau => (f.b, x),
                _ => (f.b, f.tau),
            };
            let omega_opt = optimal_rabi(b, tau)?;
            let (omega, error) = if param == Param::Omega {
                (x, controlled_phase_error(b, tau, x, f.dispersion)?)
            } else if let Some(w) = f.omega {
                (w, controlled_phase_error(b, tau, w, f.dispersion)?)
            } else {
                let m = minimize_over_rabi(|w| controlled_phase_error(b, tau, w, f.dispersion), omega_opt, 1.0, 21)?;
                (m.rabi, m.error)
            };
            Ok(GateCell {
                b,
                tau,
                omega,
                error,
                omega_opt,
                formula: min_error_formula(b, tau)?,
            })
        })
        .collect::<Result<_>>()?;
    let errors: Vec<f64> = cells.iter().map(|c| c.error).collect();
    let local = local_slopes(xs, &errors);
    let global = if xs.len() >= 2 { fit(xs, &errors) } else { None };
    let mut csv = Csv::new(&GATE_COLUMNS);
    for (c, s) in cells.iter().zip(local) {
        csv.row(&[
            param.name().into(),
            num(c.b),
            num(c.tau),
            num(c.omega),
            num(c.error),
            num(c.omega_opt),
            num(c.formula),
            opt(s),
            opt(global),
        ]);
    }
    Ok(csv)
}

struct LatticeCell {
    d: f64,
    n: f64,
    k: usize,
    b_nearest: f64,
    tau: f64,
    pair: f64,
    lattice: f64,
    ceiling: bool,
}

fn lattice_sweep(param: Param, xs: &[f64], f: &Fixed) -> Result<Csv> {
    let species = &f.species;
    let default_n = match f.mode {
        Mode::SingleSpecies => species.setup.n_sequential,
        Mode::TwoSpecies => species.setup.n_simultaneous,
    };
    let cells: Vec<LatticeCell> = xs
        .par_iter()
        .map(|&x| -> Result<LatticeCell> {
            let mut d = f.d.unwrap_or(species.setup.d);
            let mut n = f.n.unwrap_or(default_n);
            let mut k = f.k;
            match param {
                Param::D => d = x,
                Param::N => n = x,
                _ => k = x as usize,
            }
            let tau = species.model.tau_at(n)?;
            let (spec, mode) = match f.mode {
                Mode::SingleSpecies => (LatticeSpec::for_atoms(k, d, false)?, LatticeMode::SingleSpecies),
                Mode::TwoSpecies => (LatticeSpec::for_atoms(k + 1, d, true)?, LatticeMode::TwoSpecies),
            };
            let b_nearest = match f.mode {
                Mode::SingleSpecies => pair_shift(&species.model, n, d)?,
                Mode::TwoSpecies => species.model.c3_at(n)? / d.powi(3),
            };
            Ok(LatticeCell {
                d,
                n,
                k,
                b_nearest,
                tau,
                pair: min_error_formula(b_nearest, tau)?,
                lattice: lattice_average_error(&species.model, n, &spec, mode, tau, f.averaging)?,
                ceiling: species.ceiling_violated(n, d)?,
            })
        })
        .collect::<Result<_>>()?;
    let pair: Vec<f64> = cells.iter().map(|c| c.pair).collect();
    let lattice: Vec<f64> = cells.iter().map(|c| c.lattice).collect();
    let (pl, ll) = (local_slopes(xs, &pair), local_slopes(xs, &lattice));
    let (pf, lf) = if xs.len() >= 2 {
        (fit(xs, &pair), fit(xs, &lattice))
    } else {
        (None, None)
    };
    let mode = match f.mode {
        Mode::SingleSpecies => "single_species",
        Mode::TwoSpecies => "two_species",
    };
    let mut csv = Csv::new(&LATTICE_COLUMNS);
    for (i, c) in cells.iter().enumerate() {
        csv.row(&[
            param.name().into(),
            num(c.d),
            num(c.n),
            c.k.to_string(),
            mode.into(),
            num(c.b_nearest),
            num(c.tau),
            num(c.pair),
            num(c.lattice),
            c.ceiling.to_string(),
            opt(pl[i]),
            opt(ll[i]),
            opt(pf),
            opt(lf),
        ]);
    }
    Ok(csv)
}
