//! Pair interaction models and square-lattice geometry.
//!
//! Lengths are in micrometres, energies in rad/s, times in seconds.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::dynamics::{min_error_formula, InteractionGraph};
use crate::error::{Error, Result};
use crate::hilbert::Role;

/// Rydberg constant as an angular frequency, rad/s.
pub const RYDBERG_ANGULAR: f64 = 2.0 * PI * 3.289_841_960_25e15;

/// Two-channel Forster model with principal-quantum-number scaling, quoted
/// at reference level `n0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairModel {
    pub n0: f64,
    /// Resonant dipole-dipole coefficient at `n0`, rad/s um^3. Scales as n^4.
    #[serde(rename = "C3")]
    pub c3: f64,
    /// Van der Waals coefficient at `n0`, rad/s um^6. Scales as n^11. When
    /// absent it follows from `C3^2 / delta`.
    #[serde(rename = "C6", default, skip_serializing_if = "Option::is_none")]
    pub c6: Option<f64>,
    /// Forster defect at `n0`, rad/s. Scales as n^-3.
    pub delta: f64,
    /// Rydberg lifetime at `n0`, s. Scales as n^3.
    pub tau0: f64,
}

impl PairModel {
    pub fn validate(&self) -> Result<()> {
        let finite = [self.n0, self.c3, self.delta, self.tau0].iter().all(|v| v.is_finite());
        if !finite || self.n0 < 2.0 || self.c3 < 0.0 || self.tau0 <= 0.0 {
            return Err(Error::InvalidConfig(
                "pair model needs n0 >= 2, C3 >= 0 and tau0 > 0, all finite".into(),
            ));
        }
        if let Some(c6) = self.c6 {
            if !c6.is_finite() || c6 < 0.0 {
                return Err(Error::InvalidConfig("C6 must be finite and >= 0".into()));
            }
            if self.delta != 0.0 {
                let implied = self.c3 * self.c3 / self.delta.abs();
                if (c6 - implied).abs() > 0.01 * implied {
                    return Err(Error::InvalidConfig(format!(
                        "C6 = {c6:e} disagrees with C3^2/delta = {implied:e}"
                    )));
                }
            }
        }
        Ok(())
    }

    fn ratio(&self, n: f64) -> Result<f64> {
        if !(n.is_finite() && n >= 2.0) {
            return Err(Error::InvalidParameter(format!(
                "principal quantum number {n} must be >= 2"
            )));
        }
        Ok(n / self.n0)
    }

    pub fn c3_at(&self, n: f64) -> Result<f64> {
        Ok(self.c3 * self.ratio(n)?.powi(4))
    }

    pub fn delta_at(&self, n: f64) -> Result<f64> {
        Ok(self.delta * self.ratio(n)?.powi(-3))
    }

    pub fn c6_at(&self, n: f64) -> Result<f64> {
        let x = self.ratio(n)?;
        match self.c6 {
            Some(c6) => Ok(c6 * x.powi(11)),
            None if self.delta != 0.0 => Ok(self.c3_at(n)?.powi(2) / self.delta_at(n)?.abs()),
            None => Err(Error::InvalidConfig(
                "no van der Waals coefficient for a resonant model".into(),
            )),
        }
    }

    pub fn tau_at(&self, n: f64) -> Result<f64> {
        Ok(self.tau0 * self.ratio(n)?.powi(3))
    }
}

/// Shift of the interacting two-atom eigenstate,
/// `|(-delta + sign(delta) sqrt(delta^2 + 4 V^2)) / 2|` with `V = C3(n)/R^3`.
pub fn pair_shift(model: &PairModel, n: f64, r: f64) -> Result<f64> {
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::InvalidParameter(format!("separation {r} must be positive")));
    }
    let v = model.c3_at(n)? / r.powi(3);
    let d = model.delta_at(n)?;
    if d == 0.0 {
        return Ok(v);
    }
    // (sqrt(d^2 + 4v^2) - |d|)/2 written without cancellation
    Ok(2.0 * v * v / (d.abs() + (d * d + 4.0 * v * v).sqrt()))
}

/// Half the spacing between neighbouring Rydberg levels,
/// `energy_scale (1/(n-1)^2 - 1/n^2) / 2`.
pub fn blockade_ceiling(energy_scale: f64, n: f64) -> Result<f64> {
    if !(n.is_finite() && n >= 2.0) {
        return Err(Error::InvalidParameter(format!(
            "principal quantum number {n} must be >= 2"
        )));
    }
    if !(energy_scale.is_finite() && energy_scale > 0.0) {
        return Err(Error::InvalidParameter("energy scale must be positive".into()));
    }
    Ok(energy_scale * (1.0 / ((n - 1.0) * (n - 1.0)) - 1.0 / (n * n)) / 2.0)
}

/// A species preset: pair model, level-spacing energy scale and the lattice
/// setup used for table estimates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Species {
    pub name: String,
    #[serde(flatten)]
    pub model: PairModel,
    /// Rydberg energy unit, rad/s.
    pub energy_scale: f64,
    #[serde(default)]
    pub setup: TableSetup,
}

/// Lattice period and principal quantum numbers for the table estimates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableSetup {
    /// Lattice period, um.
    pub d: f64,
    pub n_sequential: f64,
    pub n_simultaneous: f64,
}

impl Default for TableSetup {
    fn default() -> Self {
        Self {
            d: 3.0,
            n_sequential: 75.0,
            n_simultaneous: 60.0,
        }
    }
}

impl Species {
    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if !(self.energy_scale.is_finite() && self.energy_scale > 0.0) {
            return Err(Error::InvalidConfig("energy_scale must be positive".into()));
        }
        let s = &self.setup;
        if !(s.d.is_finite() && s.d > 0.0 && s.n_sequential >= 2.0 && s.n_simultaneous >= 2.0) {
            return Err(Error::InvalidConfig("setup needs d > 0 and n >= 2".into()));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let s: Species = serde_json::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    /// Cs-like `ns` model quoted at n = 75.
    pub fn cs_like() -> Self {
        let c3 = 2.0 * PI * 12.0e9;
        let c6 = 2.0 * PI * 3.0e12;
        Self {
            name: "cs-like".into(),
            model: PairModel {
                n0: 75.0,
                c3,
                c6: Some(c6),
                delta: c3 * c3 / c6,
                tau0: 140e-6,
            },
            energy_scale: RYDBERG_ANGULAR,
            setup: TableSetup::default(),
        }
    }

    /// Rb-like `ns` model quoted at n = 100.
    pub fn rb_like() -> Self {
        let c3 = 2.0 * PI * 20.0e9;
        let c6 = 2.0 * PI * 5.0e13;
        Self {
            name: "rb-like".into(),
            model: PairModel {
                n0: 100.0,
                c3,
                c6: Some(c6),
                delta: c3 * c3 / c6,
                tau0: 320e-6,
            },
            energy_scale: RYDBERG_ANGULAR,
            setup: TableSetup {
                d: 4.0,
                n_sequential: 100.0,
                n_simultaneous: 80.0,
            },
        }
    }

    /// Whether the nearest-neighbour shift at spacing `d` exceeds the
    /// blockade ceiling at level `n`.
    pub fn ceiling_violated(&self, n: f64, d: f64) -> Result<bool> {
        Ok(pair_shift(&self.model, n, d)? >= blockade_ceiling(self.energy_scale, n)?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LatticeMode {
    /// All atoms interact through `r - r` pairs.
    SingleSpecies,
    /// Register atoms in `s` interact only with the ancilla in `r`.
    TwoSpecies,
}

/// Square lattice with `side` atoms per row and period `d`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub side: usize,
    pub d: f64,
    /// One site near the centre holds the ancilla.
    #[serde(default)]
    pub center_ancilla: bool,
}

impl LatticeSpec {
    /// Lattice holding `k` atoms in total. With `center_ancilla` one of them
    /// is the ancilla.
    pub fn for_atoms(k: usize, d: f64, center_ancilla: bool) -> Result<Self> {
        let side = (k as f64).sqrt().round() as usize;
        if side * side != k || k == 0 {
            return Err(Error::InvalidParameter(format!(
                "{k} atoms do not fill a square lattice"
            )));
        }
        let spec = Self {
            side,
            d,
            center_ancilla,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.side == 0 || !(self.d.is_finite() && self.d > 0.0) {
            return Err(Error::InvalidParameter("lattice needs side >= 1 and d > 0".into()));
        }
        if self.center_ancilla && self.side < 2 {
            return Err(Error::InvalidParameter("ancilla lattice needs side >= 2".into()));
        }
        Ok(())
    }

    pub fn num_sites(&self) -> usize {
        self.side * self.side
    }

    pub fn num_register(&self) -> usize {
        self.num_sites() - usize::from(self.center_ancilla)
    }

    /// Row-major index of the ancilla site: the centre, or for even sides
    /// the upper-left of the four central sites.
    fn ancilla_site(&self) -> usize {
        let c = (self.side - 1) / 2;
        c * self.side + c
    }

    /// `sqrt(2(k - 1)) d`, an upper bound on the largest separation.
    pub fn nominal_max_spacing(&self) -> f64 {
        (2.0 * (self.num_sites() as f64 - 1.0)).sqrt() * self.d
    }
}

/// Site coordinates, register atoms in row-major order, then the ancilla.
pub fn lattice_positions(spec: &LatticeSpec) -> Result<Vec<[f64; 2]>> {
    spec.validate()?;
    let site = |i: usize| [(i % spec.side) as f64 * spec.d, (i / spec.side) as f64 * spec.d];
    let mut pos: Vec<[f64; 2]> = Vec::with_capacity(spec.num_sites());
    let anc = spec.center_ancilla.then(|| spec.ancilla_site());
    for i in 0..spec.num_sites() {
        if Some(i) != anc {
            pos.push(site(i));
        }
    }
    if let Some(a) = anc {
        pos.push(site(a));
    }
    Ok(pos)
}

pub fn distance(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Largest pairwise separation.
pub fn max_separation(positions: &[[f64; 2]]) -> f64 {
    let mut best: f64 = 0.0;
    for (n, &a) in positions.iter().enumerate() {
        for &b in &positions[n + 1..] {
            best = best.max(distance(a, b));
        }
    }
    best
}

/// `(i, j, B_ij)` for the pairs that matter in `mode`. In two-species mode
/// the last position is the ancilla and only its links count; they carry
/// the resonant `C3(n)/R^3` interaction.
pub fn relevant_pairs(
    model: &PairModel,
    n: f64,
    positions: &[[f64; 2]],
    mode: LatticeMode,
) -> Result<Vec<(usize, usize, f64)>> {
    let mut out = Vec::new();
    match mode {
        LatticeMode::SingleSpecies => {
            for i in 0..positions.len() {
                for j in i + 1..positions.len() {
                    out.push((i, j, pair_shift(model, n, distance(positions[i], positions[j]))?));
                }
            }
        }
        LatticeMode::TwoSpecies => {
            let Some(anc) = positions.len().checked_sub(1) else {
                return Ok(out);
            };
            let c3 = model.c3_at(n)?;
            for (i, &p) in positions[..anc].iter().enumerate() {
                let r = distance(p, positions[anc]);
                if r <= 0.0 {
                    return Err(Error::InvalidParameter("coincident atoms".into()));
                }
                out.push((i, anc, c3 / r.powi(3)));
            }
        }
    }
    Ok(out)
}

/// Interaction graph for atoms at `positions` with decay `1/tau(n)` on both
/// Rydberg roles.
pub fn graph_from_positions(
    model: &PairModel,
    n: f64,
    positions: &[[f64; 2]],
    mode: LatticeMode,
) -> Result<InteractionGraph> {
    let mut g = InteractionGraph::new();
    let roles = match mode {
        LatticeMode::SingleSpecies => (Role::RydR, Role::RydR),
        LatticeMode::TwoSpecies => (Role::RydS, Role::RydR),
    };
    for (i, j, b) in relevant_pairs(model, n, positions, mode)? {
        g.set_shift(i, j, roles.0, roles.1, b)?;
    }
    let gamma = 1.0 / model.tau_at(n)?;
    g.set_decay(Role::RydR, gamma)?;
    g.set_decay(Role::RydS, gamma)?;
    Ok(g)
}

pub fn lattice_interaction_graph(
    model: &PairModel,
    n: f64,
    spec: &LatticeSpec,
    mode: LatticeMode,
) -> Result<InteractionGraph> {
    check_mode(spec, mode)?;
    graph_from_positions(model, n, &lattice_positions(spec)?, mode)
}

fn check_mode(spec: &LatticeSpec, mode: LatticeMode) -> Result<()> {
    if mode == LatticeMode::TwoSpecies && !spec.center_ancilla {
        return Err(Error::InvalidParameter(
            "two-species lattice needs the central ancilla".into(),
        ));
    }
    Ok(())
}

/// How per-pair shifts are combined into one error estimate.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AveragingRule {
    /// Mean of the per-pair minimum errors.
    #[default]
    PairError,
    /// Minimum error of the mean shift.
    MeanShift,
}

pub fn average_error(shifts: &[f64], tau: f64, rule: AveragingRule) -> Result<f64> {
    if shifts.is_empty() {
        return Err(Error::InvalidParameter("no interacting pairs to average".into()));
    }
    let n = shifts.len() as f64;
    match rule {
        AveragingRule::PairError => {
            let mut acc = 0.0;
            for &b in shifts {
                acc += min_error_formula(b, tau)?;
            }
            Ok(acc / n)
        }
        AveragingRule::MeanShift => min_error_formula(shifts.iter().sum::<f64>() / n, tau),
    }
}

/// Minimum two-atom error averaged over the relevant lattice pairs.
pub fn lattice_average_error(
    model: &PairModel,
    n: f64,
    spec: &LatticeSpec,
    mode: LatticeMode,
    tau: f64,
    rule: AveragingRule,
) -> Result<f64> {
    check_mode(spec, mode)?;
    let pos = lattice_positions(spec)?;
    let shifts: Vec<f64> = relevant_pairs(model, n, &pos, mode)?.into_iter().map(|p| p.2).collect();
    average_error(&shifts, tau, rule)
}
