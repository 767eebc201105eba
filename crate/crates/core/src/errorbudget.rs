//! Per-iteration error budgets and the comparison table.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interactions::{lattice_average_error, AveragingRule, LatticeMode, LatticeSpec, Species};
use crate::protocols::{Architecture, Partition};

/// `N^(-1/4)`
pub fn shenvi_threshold(n: f64) -> Result<f64> {
    if !(n.is_finite() && n >= 2.0) {
        return Err(Error::InvalidParameter(format!("database size {n} must be >= 2")));
    }
    Ok(n.powf(-0.25))
}

/// Two significant figures, halves rounded away from zero, leading zero
/// dropped: `0.0625 -> ".063"`.
pub fn table_display(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let e = x.abs().log10().floor() as i32;
    let scale = 10f64.powi(1 - e);
    let r = (x * scale).round() / scale;
    let decimals = (1 - e).max(0) as usize;
    let s = format!("{r:.decimals$}");
    if let Some(rest) = s.strip_prefix("0.") {
        format!(".{rest}")
    } else if let Some(rest) = s.strip_prefix("-0.") {
        format!("-.{rest}")
    } else {
        s
    }
}

/// `n_s E(k_s) + (n_s - 1) E_a`
pub fn subregister_error<F>(n_s: usize, k_s: usize, e_of_k: F, e_a: f64) -> Result<f64>
where
    F: Fn(usize) -> f64,
{
    if n_s == 0 || k_s == 0 {
        return Err(Error::InvalidParameter("n_s and k_s must be at least 1".into()));
    }
    if !(e_a.is_finite() && e_a >= 0.0) {
        return Err(Error::InvalidParameter(format!("ancilla error {e_a} must be >= 0")));
    }
    let e = e_of_k(k_s);
    if !(e.is_finite() && e >= 0.0) {
        return Err(Error::InvalidParameter(format!("E({k_s}) = {e} must be >= 0")));
    }
    Ok(n_s as f64 * e + (n_s - 1) as f64 * e_a)
}

/// Pulse time of one Grover iteration in single-atom pi-pulse durations.
///
/// A simultaneous layer counts once and a 2pi pulse twice. A controlled
/// transfer counts 4 (its dwell is excluded), so an AND pair counts 8 and a
/// sub-register reflection counts `10 + 16 (n_s - 1)`.
pub fn pulse_count(architecture: Architecture, k: usize, partition: Option<Partition>) -> Result<usize> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    match architecture {
        Architecture::Sequential => Ok(4 * k),
        Architecture::Simultaneous => Ok(8),
        Architecture::Subregister => {
            let p = partition.ok_or_else(|| Error::InvalidParameter("sub-register count needs a partition".into()))?;
            if p.n_s == 0 || p.n_s * p.k_s != k {
                return Err(Error::InvalidParameter("partition does not match k".into()));
            }
            Ok(2 * (10 + 16 * (p.n_s - 1)))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    FullQuadratic,
    Degraded,
}

/// Full quadratic speedup iff `E_step <= N^(-1/4)`; the boundary counts as
/// full.
pub fn speedup_verdict(e_step: f64, n: f64) -> Result<Verdict> {
    Ok(if e_step <= shenvi_threshold(n)? {
        Verdict::FullQuadratic
    } else {
        Verdict::Degraded
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Components {
    pub blockade_leakage: f64,
    pub spontaneous_emission: f64,
    pub ancilla_comparison: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorBudget {
    pub architecture: Architecture,
    pub n_items: f64,
    pub k: usize,
    pub e_step: f64,
    pub components: Components,
    pub pulses_per_iteration: usize,
    pub shenvi: f64,
    pub verdict: Verdict,
    pub provenance: String,
}

impl ErrorBudget {
    fn new(
        architecture: Architecture,
        k: usize,
        partition: Option<Partition>,
        components: Components,
        provenance: String,
    ) -> Result<Self> {
        let n_items = 2f64.powi(k as i32);
        let e_step = components.blockade_leakage + components.spontaneous_emission + components.ancilla_comparison;
        Ok(Self {
            architecture,
            n_items,
            k,
            e_step,
            components,
            pulses_per_iteration: pulse_count(architecture, k, partition)?,
            shenvi: shenvi_threshold(n_items)?,
            verdict: speedup_verdict(e_step, n_items)?,
            provenance,
        })
    }
}

/// At the optimal Rabi frequency two thirds of the minimum error is decay and
/// one third blockade leakage.
fn split(e: f64) -> Components {
    Components {
        blockade_leakage: e / 3.0,
        spontaneous_emission: 2.0 * e / 3.0,
        ancilla_comparison: 0.0,
    }
}

/// Sequential addressing on a `sqrt(k)` square lattice: two reflections, each
/// costing the lattice-averaged two-atom minimum error over all pairs.
pub fn sequential_budget(species: &Species, k: usize, rule: AveragingRule) -> Result<ErrorBudget> {
    let n = species.setup.n_sequential;
    let lattice = LatticeSpec::for_atoms(k, species.setup.d, false)?;
    let tau = species.model.tau_at(n)?;
    let half = lattice_average_error(&species.model, n, &lattice, LatticeMode::SingleSpecies, tau, rule)?;
    ErrorBudget::new(
        Architecture::Sequential,
        k,
        None,
        split(2.0 * half),
        format!(
            "{}: n={n}, d={} um, {k}-site lattice, all pairs",
            species.name, species.setup.d
        ),
    )
}

/// Simultaneous addressing with `k` register atoms around a central ancilla:
/// two reflections, each costing the ancilla-link averaged minimum error.
pub fn simultaneous_budget(species: &Species, k: usize, rule: AveragingRule) -> Result<ErrorBudget> {
    let n = species.setup.n_simultaneous;
    let lattice = LatticeSpec::for_atoms(k + 1, species.setup.d, true)?;
    let tau = species.model.tau_at(n)?;
    let half = lattice_average_error(&species.model, n, &lattice, LatticeMode::TwoSpecies, tau, rule)?;
    ErrorBudget::new(
        Architecture::Simultaneous,
        k,
        None,
        split(2.0 * half),
        format!(
            "{}: n={n}, d={} um, {}-site lattice, ancilla links",
            species.name,
            species.setup.d,
            k + 1
        ),
    )
}

/// Sub-register composition from a simultaneous budget for `k_s` qubits.
pub fn subregister_budget(inner: &ErrorBudget, n_s: usize, e_a: f64) -> Result<ErrorBudget> {
    let k_s = inner.k;
    let total = subregister_error(n_s, k_s, |_| inner.e_step, e_a)?;
    let scale = n_s as f64;
    let components = Components {
        blockade_leakage: scale * inner.components.blockade_leakage,
        spontaneous_emission: scale * inner.components.spontaneous_emission,
        ancilla_comparison: total - scale * inner.e_step,
    };
    ErrorBudget::new(
        Architecture::Subregister,
        n_s * k_s,
        Some(Partition { n_s, k_s }),
        components,
        format!("{n_s} x [{}], E_a={e_a}", inner.provenance),
    )
}

/// How a reproduced cell compares with the printed one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Agreement {
    /// Same two-significant-figure display.
    Exact,
    /// Within `[0.4x, 10x]` of the printed value.
    OrderOfMagnitude,
    Outside,
    /// Printed value reproduced with a different display.
    Mismatch,
    /// Blank in the printed table.
    NotApplicable,
}

pub const MAGNITUDE_BAND: (f64, f64) = (0.4, 10.0);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub printed: Option<String>,
    pub value: Option<f64>,
    pub display: Option<String>,
    pub agreement: Agreement,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub note: String,
}

impl Cell {
    fn blank() -> Self {
        Self {
            printed: None,
            value: None,
            display: None,
            agreement: Agreement::NotApplicable,
            note: String::new(),
        }
    }

    fn exact(printed: &str, value: f64, note: String) -> Self {
        let display = table_display(value);
        let agreement = if display == printed {
            Agreement::Exact
        } else {
            Agreement::Mismatch
        };
        Self {
            printed: Some(printed.into()),
            value: Some(value),
            display: Some(display),
            agreement,
            note,
        }
    }

    fn magnitude(printed: &str, value: f64, note: String) -> Self {
        let reference: f64 = format!("0{printed}").parse().unwrap_or(f64::NAN);
        let ratio = value / reference;
        let agreement = if ratio >= MAGNITUDE_BAND.0 && ratio <= MAGNITUDE_BAND.1 {
            Agreement::OrderOfMagnitude
        } else {
            Agreement::Outside
        };
        Self {
            printed: Some(printed.into()),
            value: Some(value),
            display: Some(table_display(value)),
            agreement,
            note,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub n_items: u64,
    /// `k - 1` for rows quoted in register atoms around an ancilla.
    pub register_atoms: Option<usize>,
    pub k: Option<usize>,
    pub sequential: Cell,
    pub simultaneous: Cell,
    pub subregister: Cell,
    /// Sub-register composition with a nonzero ancilla-comparison error.
    pub subregister_with_ea: Option<f64>,
    pub shenvi: Cell,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableReport {
    pub species: String,
    pub averaging: AveragingRule,
    pub e_a: f64,
    pub rows: Vec<TableRow>,
}

struct PrintedRow {
    n_items: u64,
    register_atoms: Option<usize>,
    k: Option<usize>,
    sequential: Option<&'static str>,
    simultaneous: Option<&'static str>,
    subregister: Option<(&'static str, usize, usize)>,
    shenvi: &'static str,
}

const PRINTED: [PrintedRow; 5] = [
    PrintedRow {
        n_items: 256,
        register_atoms: Some(8),
        k: None,
        sequential: None,
        simultaneous: Some(".08"),
        subregister: None,
        shenvi: ".25",
    },
    PrintedRow {
        n_items: 512,
        register_atoms: None,
        k: Some(9),
        sequential: Some(".004"),
        simultaneous: None,
        subregister: None,
        shenvi: ".21",
    },
    PrintedRow {
        n_items: 32768,
        register_atoms: Some(15),
        k: None,
        sequential: None,
        simultaneous: Some(".20"),
        subregister: None,
        shenvi: ".074",
    },
    PrintedRow {
        n_items: 65536,
        register_atoms: None,
        k: Some(16),
        sequential: Some(".015"),
        simultaneous: None,
        subregister: Some((".16", 8, 2)),
        shenvi: ".063",
    },
    PrintedRow {
        n_items: 16777216,
        register_atoms: Some(24),
        k: None,
        sequential: None,
        simultaneous: Some(".28"),
        subregister: Some((".24", 8, 3)),
        shenvi: ".016",
    },
];

/// Printed simultaneous error for `k_s` register atoms, used to recompose
/// the sub-register cells.
fn printed_simultaneous(k_s: usize) -> Option<f64> {
    PRINTED
        .iter()
        .find(|r| r.register_atoms == Some(k_s))
        .and_then(|r| r.simultaneous)
        .and_then(|s| format!("0{s}").parse().ok())
}

/// Rebuild the comparison table. Shenvi and sub-register cells must match
/// the printed display exactly; model cells are checked against the
/// order-of-magnitude band. `e_a` feeds the extra sub-register column only.
pub fn table_report(species: &Species, rule: AveragingRule, e_a: f64) -> Result<TableReport> {
    species.validate()?;
    let mut rows = Vec::with_capacity(PRINTED.len());
    for p in &PRINTED {
        let shenvi = Cell::exact(p.shenvi, shenvi_threshold(p.n_items as f64)?, String::new());
        let sequential = match (p.sequential, p.k) {
            (Some(printed), Some(k)) => {
                let b = sequential_budget(species, k, rule)?;
                Cell::magnitude(printed, b.e_step, b.provenance)
            }
            _ => Cell::blank(),
        };
        let simultaneous = match (p.simultaneous, p.register_atoms) {
            (Some(printed), Some(k)) => {
                let b = simultaneous_budget(species, k, rule)?;
                Cell::magnitude(printed, b.e_step, b.provenance)
            }
            _ => Cell::blank(),
        };
        let (subregister, subregister_with_ea) = match p.subregister {
            Some((printed, k_s, n_s)) => {
                let e_k = printed_simultaneous(k_s)
                    .ok_or_else(|| Error::InvalidConfig(format!("no printed E({k_s}) to compose from")))?;
                let value = subregister_error(n_s, k_s, |_| e_k, 0.0)?;
                let with = subregister_error(n_s, k_s, |_| e_k, e_a)?;
                let note = format!("{n_s} x E({k_s}) with E({k_s}) = {e_k} from the simultaneous column, E_a = 0");
                (Cell::exact(printed, value, note), Some(with))
            }
            None => (Cell::blank(), None),
        };
        rows.push(TableRow {
            n_items: p.n_items,
            register_atoms: p.register_atoms,
            k: p.k,
            sequential,
            simultaneous,
            subregister,
            subregister_with_ea,
            shenvi,
        });
    }
    Ok(TableReport {
        species: species.name.clone(),
        averaging: rule,
        e_a,
        rows,
    })
}

impl TableReport {
    /// Aligned text rendering with the printed value beside each
    /// reproduced one.
    pub fn to_text(&self) -> String {
        let cell = |c: &Cell| -> String {
            match (&c.printed, &c.display) {
                (Some(p), Some(d)) => format!("{d} [{p}] {}", tag(c.agreement)),
                _ => "-".into(),
            }
        };
        let mut out = format!(
            "species {}, averaging {}, E_a {}\n{:>9} {:>4} {:>3} | {:<34} | {:<34} | {:<26} | {:<20}\n",
            self.species,
            serde_json::to_value(self.averaging)
                .ok()
                .and_then(|v| v.as_str().map(String::from))
                .unwrap_or_default(),
            self.e_a,
            "N",
            "k-1",
            "k",
            "sequential",
            "simultaneous",
            "sub-registers",
            "limit N^-1/4"
        );
        for r in &self.rows {
            let opt = |v: Option<usize>| v.map_or(String::new(), |x| x.to_string());
            out.push_str(&format!(
                "{:>9} {:>4} {:>3} | {:<34} | {:<34} | {:<26} | {:<20}\n",
                r.n_items,
                opt(r.register_atoms),
                opt(r.k),
                cell(&r.sequential),
                cell(&r.simultaneous),
                cell(&r.subregister),
                cell(&r.shenvi)
            ));
        }
        out
    }

    pub fn cells(&self) -> impl Iterator<Item = &Cell> {
        self.rows
            .iter()
            .flat_map(|r| [&r.sequential, &r.simultaneous, &r.subregister, &r.shenvi])
    }
}

fn tag(a: Agreement) -> &'static str {
    match a {
        Agreement::Exact => "exact",
        Agreement::OrderOfMagnitude => "order-of-magnitude",
        Agreement::Outside => "outside",
        Agreement::Mismatch => "MISMATCH",
        Agreement::NotApplicable => "n/a",
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shenvi_values() {
        let want = [
            (256.0, ".25"),
            (512.0, ".21"),
            (32768.0, ".074"),
            (65536.0, ".063"),
            (16777216.0, ".016"),
        ];
        for (n, s) in want {
            assert_eq!(table_display(shenvi_threshold(n).unwrap()), s);
        }
        assert_eq!(shenvi_threshold(65536.0).unwrap(), 0.0625);
        assert_eq!(shenvi_threshold(16777216.0).unwrap(), 0.015625);
        for n in [2.0, 100.0, 4096.0] {
            assert_eq!(shenvi_threshold(16.0 * n).unwrap(), shenvi_threshold(n).unwrap() / 2.0);
        }
        assert!(shenvi_threshold(1.0).is_err());
    }

    #[test]
    fn display_rounding() {
        assert_eq!(table_display(0.16), ".16");
        assert_eq!(table_display(0.24000000000000002), ".24");
        assert_eq!(table_display(0.004), ".0040");
        assert_eq!(table_display(1.25), "1.3");
        assert_eq!(table_display(12.0), "12");
    }

    #[test]
    fn subregister_composition() {
        let e = |_: usize| 0.08;
        assert_eq!(subregister_error(1, 8, e, 0.3).unwrap(), 0.08);
        assert_eq!(table_display(subregister_error(2, 8, e, 0.0).unwrap()), ".16");
        assert_eq!(table_display(subregister_error(3, 8, e, 0.0).unwrap()), ".24");
        let a = subregister_error(4, 8, e, 0.01).unwrap();
        let b = subregister_error(4, 8, e, 0.02).unwrap();
        assert!(((b - a) / 0.01 - 3.0).abs() < 1e-9);
        assert!(subregister_error(2, 8, e, -0.1).is_err());
    }

    #[test]
    fn pulse_counts() {
        assert_eq!(pulse_count(Architecture::Sequential, 9, None).unwrap(), 36);
        assert_eq!(pulse_count(Architecture::Simultaneous, 3, None).unwrap(), 8);
        assert_eq!(pulse_count(Architecture::Simultaneous, 24, None).unwrap(), 8);
        let p = Some(Partition { n_s: 2, k_s: 2 });
        assert_eq!(pulse_count(Architecture::Subregister, 4, p).unwrap(), 52);
        assert!(pulse_count(Architecture::Subregister, 4, None).is_err());
    }

    #[test]
    fn verdicts() {
        assert_eq!(speedup_verdict(0.015, 65536.0).unwrap(), Verdict::FullQuadratic);
        assert_eq!(speedup_verdict(0.20, 32768.0).unwrap(), Verdict::Degraded);
        let t = shenvi_threshold(512.0).unwrap();
        assert_eq!(speedup_verdict(t, 512.0).unwrap(), Verdict::FullQuadratic);
    }

    #[test]
    fn report_derived_columns() {
        let r = table_report(&Species::cs_like(), AveragingRule::PairError, 0.01).unwrap();
        assert_eq!(r.rows.len(), 5);
        assert!(r.rows.iter().all(|row| row.shenvi.agreement == Agreement::Exact));
        let subs: Vec<_> = r.rows.iter().filter(|row| row.subregister.printed.is_some()).collect();
        assert_eq!(subs.len(), 2);
        for row in subs {
            assert_eq!(row.subregister.agreement, Agreement::Exact);
            let shift = row.subregister_with_ea.unwrap() - row.subregister.value.unwrap();
            assert!(shift > 0.0 && shift <= 0.02 + 1e-12);
        }
        assert_eq!(r.rows[0].sequential.agreement, Agreement::NotApplicable);
        assert!(r.to_text().contains(".074 [.074] exact"));
    }

    #[test]
    fn sequential_model_near_printed() {
        let b = sequential_budget(&Species::cs_like(), 9, AveragingRule::PairError).unwrap();
        assert!(b.e_step >= 0.4 * 0.004 && b.e_step <= 10.0 * 0.004, "{}", b.e_step);
        assert_eq!(b.pulses_per_iteration, 36);
        assert_eq!(b.verdict, Verdict::FullQuadratic);
    }
}
