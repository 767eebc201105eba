use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use rydberg_grover::dynamics::Dispersion;
use rydberg_grover::errorbudget::table_report;
use rydberg_grover::interactions::{AveragingRule, Species};
use rydberg_grover::protocols::{analytic_success, grover_search_with_state, PhaseScheme, ProtocolConfig};
use rydberg_grover::verify::{self, Level};

mod output;
mod sweep;

use output::{num, to_json, Csv, Format, Run};

#[derive(Parser)]
#[command(
    name = "rgrover",
    version,
    about = "Grover search on Rydberg-blockade atom registers"
)]
struct Cli {
    /// Seed for every random draw in the run.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output directory.
    #[arg(long, global = true, default_value = "rgrover-out")]
    out: PathBuf,
    #[arg(long, global = true, value_enum, default_value_t = Format::Both)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Grover search from a protocol config and record the trace.
    Grover(GroverArgs),
    /// Run the built-in invariant suites.
    Verify(VerifyArgs),
    /// Sweep one parameter of the gate-error or lattice models.
    Sweep(SweepArgs),
    /// Rebuild the architecture comparison table for a species.
    Table(TableArgs),
}

#[derive(Args)]
struct GroverArgs {
    /// Protocol config (JSON).
    config: PathBuf,
    /// Iterations to run; default is the optimal count for the register.
    #[arg(long)]
    iterations: Option<usize>,
    /// Also write the final register state.
    #[arg(long)]
    emit_state: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum LevelArg {
    Fast,
    Full,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = LevelArg::Fast)]
    level: LevelArg,
    /// Phase (rad) added to de-exciting pulses of the sequential sweeps.
    /// Anything but 0 breaks the oracle; used for mutation checks.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    return_phase: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum AveragingArg {
    PairError,
    MeanShift,
}

impl From<AveragingArg> for AveragingRule {
    fn from(a: AveragingArg) -> Self {
        match a {
            AveragingArg::PairError => AveragingRule::PairError,
            AveragingArg::MeanShift => AveragingRule::MeanShift,
        }
    }
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, value_enum)]
    param: sweep::Param,
    /// Explicit comma-separated values; overrides the range.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    values: Option<Vec<f64>>,
    #[arg(long, requires_all = ["to", "points"], allow_negative_numbers = true)]
    from: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    to: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
    /// Grid spacing; log for B, tau and Omega, linear otherwise.
    #[arg(long, value_enum)]
    spacing: Option<sweep::Spacing>,
    /// Pair shift B in rad/s for gate sweeps.
    #[arg(long = "B", default_value_t = 1e4)]
    b: f64,
    /// Rydberg lifetime in s for gate sweeps.
    #[arg(long, default_value_t = 1.0)]
    tau: f64,
    /// Fixed Rabi frequency; by default B and tau sweeps minimise over it.
    #[arg(long = "Omega")]
    omega: Option<f64>,
    /// Drop the blockade-shift dispersion average and use the raw error.
    #[arg(long)]
    raw: bool,
    /// Species preset file, or cs-like / rb-like.
    #[arg(long, default_value = "cs-like")]
    species: String,
    /// Lattice period in um; default from the species file.
    #[arg(long)]
    d: Option<f64>,
    /// Principal quantum number; default from the species file.
    #[arg(long)]
    n: Option<f64>,
    /// Register atoms on the lattice.
    #[arg(long, default_value_t = 9)]
    k: usize,
    #[arg(long, value_enum, default_value_t = sweep::Mode::SingleSpecies)]
    mode: sweep::Mode,
    #[arg(long, value_enum, default_value_t = AveragingArg::PairError)]
    averaging: AveragingArg,
}

#[derive(Args)]
struct TableArgs {
    /// Species preset file, or cs-like / rb-like.
    #[arg(long)]
    species: String,
    #[arg(long, value_enum, default_value_t = AveragingArg::PairError)]
    averaging: AveragingArg,
    /// Ancilla-comparison error for the extra sub-register column.
    #[arg(long, default_value_t = 0.0)]
    ea: f64,
}

/// Bad input: exit code 2 and nothing written.
struct Invalid(anyhow::Error);

enum Failure {
    Invalid(anyhow::Error),
    Runtime(anyhow::Error),
    ChecksFailed,
}

impl From<Invalid> for Failure {
    fn from(e: Invalid) -> Self {
        Failure::Invalid(e.0)
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

fn invalid<E: Into<anyhow::Error>>(e: E) -> Invalid {
    Invalid(e.into())
}

fn load_species(arg: &str) -> Result<(Species, Option<String>), Invalid> {
    let path = Path::new(arg);
    if !path.exists() {
        return match arg {
            "cs-like" => Ok((Species::cs_like(), None)),
            "rb-like" => Ok((Species::rb_like(), None)),
            _ => Err(Invalid(anyhow!(
                "species file {arg} not found (built-ins: cs-like, rb-like)"
            ))),
        };
    }
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {arg}"))
        .map_err(Invalid)?;
    let species = Species::from_json(&text)
        .with_context(|| format!("parsing {arg}"))
        .map_err(Invalid)?;
    Ok((species, Some(arg.to_string())))
}

#[derive(Serialize)]
struct StateDump<'a> {
    ordering: &'static str,
    dims: &'a [usize],
    amplitudes: Vec<[f64; 2]>,
}

fn cmd_grover(cli: &Cli, args: &GroverArgs) -> Result<(), Failure> {
    let path = args.config.display().to_string();
    let text = std::fs::read_to_string(&args.config)
        .with_context(|| format!("reading {path}"))
        .map_err(Invalid)?;
    let config: ProtocolConfig = serde_json::from_str(&text)
        .with_context(|| format!("parsing {path}"))
        .map_err(Invalid)?;
    config.validate().map_err(invalid)?;
    let (trace, state) = grover_search_with_state(&config, args.iterations).map_err(anyhow::Error::from)?;

    let mut run = Run::new(&cli.out, "grover", cli.seed, vec![path]);
    if cli.format.csv() {
        let mut csv = Csv::new(&[
            "iteration",
            "success_prob",
            "norm",
            "cumulative_pulses",
            "analytic_success",
        ]);
        for r in &trace.records {
            csv.row(&[
                r.iteration.to_string(),
                num(r.success_prob),
                num(r.norm),
                r.cumulative_pulses.to_string(),
                num(analytic_success(config.k, r.iteration)),
            ]);
        }
        run.write("trace.csv", &csv.text())?;
    }
    if cli.format.json() {
        run.write("trace.json", &to_json(&trace)?)?;
    }
    if args.emit_state {
        let dump = StateDump {
            ordering: "mixed radix, atom 0 most significant",
            dims: state.dims(),
            amplitudes: state.amplitudes().iter().map(|z| [z.re, z.im]).collect(),
        };
        run.write("state.json", &to_json(&dump)?)?;
    }
    let manifest = run.finish()?;
    println!(
        "{} k={} iterations={} success={}",
        config.architecture.name(),
        config.k,
        trace.iterations,
        num(trace.final_success())
    );
    println!("manifest {}", manifest.display());
    Ok(())
}

fn cmd_verify(cli: &Cli, args: &VerifyArgs) -> Result<(), Failure> {
    if !args.return_phase.is_finite() {
        return Err(invalid(anyhow!("return phase must be finite")).into());
    }
    let level = match args.level {
        LevelArg::Fast => Level::Fast,
        LevelArg::Full => Level::Full,
    };
    let phases = PhaseScheme {
        sequential_return: PhaseScheme::default().sequential_return + args.return_phase,
        ..PhaseScheme::default()
    };
    let report = verify::run(level, cli.seed, phases);
    for c in &report.checks {
        println!(
            "[{}] {} - {} ({:.2} s)",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.detail,
            c.seconds
        );
    }
    if let Some(s) = report.fitted_exponent {
        println!("fitted exponent {}", num(s));
    }
    let mut run = Run::new(&cli.out, "verify", cli.seed, Vec::new());
    if cli.format.csv() {
        let mut csv = Csv::new(&["check", "passed", "detail"]);
        for c in &report.checks {
            csv.row(&[c.name.clone(), c.passed.to_string(), c.detail.clone()]);
        }
        run.write("verify.csv", &csv.text())?;
    }
    if cli.format.json() {
        run.write("verify.json", &to_json(&report)?)?;
    }
    run.finish()?;
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::ChecksFailed)
    }
}

fn cmd_sweep(cli: &Cli, args: &SweepArgs) -> Result<(), Failure> {
    let (species, species_path) = load_species(&args.species)?;
    let range = match (args.from, args.to, args.points) {
        (Some(f), Some(t), Some(p)) => Some((f, t, p)),
        _ => None,
    };
    let xs = sweep::grid(args.param, args.values.as_deref(), range, args.spacing).map_err(invalid)?;
    let fixed = sweep::Fixed {
        b: args.b,
        tau: args.tau,
        omega: args.omega,
        dispersion: if args.raw {
            Dispersion::None
        } else {
            Dispersion::default()
        },
        species,
        d: args.d,
        n: args.n,
        k: args.k,
        mode: args.mode,
        averaging: args.averaging.into(),
    };
    // the library rejects bad parameters before any file exists
    let table = sweep::run(args.param, &xs, &fixed).map_err(invalid)?;

    let mut run = Run::new(&cli.out, "sweep", cli.seed, species_path.into_iter().collect());
    let stem = format!("sweep_{}", args.param.name());
    if cli.format.csv() {
        run.write(&format!("{stem}.csv"), &table.text())?;
    }
    if cli.format.json() {
        run.write(&format!("{stem}.json"), &to_json(&table.records())?)?;
    }
    let manifest = run.finish()?;
    println!("{} rows, manifest {}", table.len(), manifest.display());
    Ok(())
}

fn cmd_table(cli: &Cli, args: &TableArgs) -> Result<(), Failure> {
    let (species, species_path) = load_species(&args.species)?;
    if !(args.ea.is_finite() && args.ea >= 0.0) {
        return Err(invalid(anyhow!("--ea must be finite and >= 0")).into());
    }
    let report = table_report(&species, args.averaging.into(), args.ea).map_err(invalid)?;
    let text = report.to_text();
    print!("{text}");

    let mut run = Run::new(&cli.out, "table", cli.seed, species_path.into_iter().collect());
    run.write("table.txt", &text)?;
    if cli.format.csv() {
        let mut csv = Csv::new(&["N", "column", "printed", "value", "display", "agreement", "note"]);
        for r in &report.rows {
            for (column, c) in [
                ("sequential", &r.sequential),
                ("simultaneous", &r.simultaneous),
                ("subregister", &r.subregister),
                ("shenvi", &r.shenvi),
            ] {
                csv.row(&[
                    r.n_items.to_string(),
                    column.into(),
                    c.printed.clone().unwrap_or_default(),
                    c.value.map(num).unwrap_or_default(),
                    c.display.clone().unwrap_or_default(),
                    serde_json::to_value(c.agreement)
                        .ok()
                        .and_then(|v| v.as_str().map(String::from))
                        .unwrap_or_default(),
                    c.note.clone(),
                ]);
            }
        }
        run.write("table.csv", &csv.text())?;
    }
    if cli.format.json() {
        run.write("table.json", &to_json(&report)?)?;
    }
    run.finish()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Grover(a) => cmd_grover(&cli, a),
        Command::Verify(a) => cmd_verify(&cli, a),
        Command::Sweep(a) => cmd_sweep(&cli, a),
        Command::Table(a) => cmd_table(&cli, a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(e)) => {
            eprintln!("invalid input: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
        Err(Failure::ChecksFailed) => {
            eprintln!("verification failed");
            ExitCode::FAILURE
        }
    }
}
