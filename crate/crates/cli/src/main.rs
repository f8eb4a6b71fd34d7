mod instance;
mod json;
mod report;

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use covext_core::Tolerances;

use crate::instance::{load, preset_info, resolve_tolerances, Observable, PRESETS};
use crate::json::{InstanceFile, ReportFile, REPORT_FORMAT};
use crate::report::{describe, empty_report, run_checks, verify, Checks};

const EXIT_INPUT: u8 = 1;
const EXIT_NUMERIC: u8 = 2;
const EXIT_VERIFY: u8 = 3;

#[derive(Debug)]
pub struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<covext_core::Error> for CliError {
    fn from(e: covext_core::Error) -> Self {
        use covext_core::Error::*;
        let code = match e {
            InvalidInput(_) | NotCovariantStructure(_) => EXIT_INPUT,
            InvalidCertificate(_) | NumericalInconsistency(_) => EXIT_NUMERIC,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

#[derive(Parser)]
#[command(name = "covext", version, about = "Build covariant observables and test their extremality")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the observable of an instance and report its effects and validity.
    Build {
        instance: PathBuf,
        /// Write the JSON report here.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run extremality and sharpness checks. Without test flags all three run.
    Check {
        /// Instance file, or a report written by `build` or `check`.
        instance: PathBuf,
        #[arg(long)]
        covariant_extreme: bool,
        #[arg(long)]
        global_extreme: bool,
        #[arg(long)]
        pvm: bool,
        /// Run the sampling oracle with this many trials.
        #[arg(long, value_name = "TRIALS")]
        oracle: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Run independent checks on this many threads.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// List presets or show the parameters of one.
    Presets {
        #[command(subcommand)]
        action: PresetAction,
    },
    /// Re-check the witness decompositions stored in a report.
    VerifyWitnesses { report: PathBuf },
}

#[derive(Subcommand)]
enum PresetAction {
    List,
    Describe { name: String },
}

fn read_json(path: &Path) -> Result<serde_json::Value, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

fn parse<T: serde::de::DeserializeOwned>(path: &Path, value: serde_json::Value) -> Result<T, CliError> {
    serde_json::from_value(value).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

/// Reads an instance, or the observable section of a report.
fn read_instance(path: &Path) -> Result<InstanceFile, CliError> {
    let value = read_json(path)?;
    if value.get("format").and_then(|f| f.as_str()) == Some(REPORT_FORMAT) {
        let report: ReportFile = parse(path, value)?;
        return Ok(match report.observable {
            Some(obs) => obs,
            None => report.instance,
        });
    }
    parse(path, value)
}

fn write_report(path: Option<&Path>, report: &ReportFile) -> Result<(), CliError> {
    let Some(path) = path else {
        return Ok(());
    };
    let mut text = serde_json::to_string_pretty(report).expect("report serializes");
    text.push('\n');
    std::fs::write(path, text).map_err(|e| CliError::input(format!("cannot write {}: {e}", path.display())))
}

fn prepare(path: &Path) -> Result<(InstanceFile, Tolerances, Observable), CliError> {
    let inst = read_instance(path)?;
    let tol = resolve_tolerances(inst.tolerances.as_ref())?;
    let obs = load(&inst, &tol)?;
    Ok((inst, tol, obs))
}

fn summarize(report: &ReportFile) {
    if let Some(v) = &report.validity {
        println!(
            "validity: positive {} normalized {} covariant {} (min eigenvalue {:.3e})",
            v.is_positive, v.is_normalized, v.is_covariant, v.min_eigenvalue
        );
    }
    if let Some(p) = report.pvm {
        println!("pvm: {p}");
    }
    if let Some(r) = report.rank {
        println!("rank: {r}");
    }
    let ext = [
        ("covariant", report.covariant_extremality.as_ref()),
        ("global", report.global_extremality.as_ref()),
    ];
    for (label, r) in ext {
        if let Some(r) = r {
            println!("{label}: {} (perturbation dim {})", r.verdict, r.perturbation_dim);
        }
    }
    if let Some(o) = &report.oracle {
        match o.trial {
            Some(t) => println!("oracle: decomposition found in trial {}", t + 1),
            None => println!("oracle: no decomposition found in {} trials", o.trials),
        }
    }
    if let Some(m) = &report.moment {
        println!("moment observable: {} indices, {} arcs", m.indices.len(), m.arcs.len());
        if let Some(r) = &m.covariant_extremality {
            println!("covariant: {} (perturbation dim {})", r.verdict, r.perturbation_dim);
        }
        if let (Some(v), Some(f)) = (&m.global_verdict, &m.free_modes) {
            println!("global: {v} at truncation (free modes {:?}, all |m| > {} free)", f.modes, f.window);
        }
    }
}

fn build(instance: &Path, output: Option<&Path>) -> Result<(), CliError> {
    let (inst, tol, obs) = prepare(instance)?;
    let mut report = empty_report(&inst, &tol, 0);
    describe(&mut report, &obs, &tol)?;
    summarize(&report);
    write_report(output, &report)
}

fn check(instance: &Path, checks: Checks, seed: u64, output: Option<&Path>) -> Result<(), CliError> {
    let (inst, tol, obs) = prepare(instance)?;
    let mut report = empty_report(&inst, &tol, seed);
    describe(&mut report, &obs, &tol)?;
    run_checks(&mut report, &obs, &checks, seed, &tol)?;
    summarize(&report);
    write_report(output, &report)
}

fn presets(action: PresetAction) -> Result<(), CliError> {
    match action {
        PresetAction::List => {
            for p in PRESETS {
                println!("{:<20} {}", p.name, p.summary);
            }
        }
        PresetAction::Describe { name } => {
            let p = preset_info(&name).ok_or_else(|| CliError::input(format!("unknown preset `{name}`")))?;
            println!("{}: {}", p.name, p.summary);
            for (k, v) in p.params {
                println!("  {k:<12} {v}");
            }
        }
    }
    Ok(())
}

fn verify_witnesses(path: &Path) -> Result<(), CliError> {
    let report: ReportFile = parse(path, read_json(path)?)?;
    let results = verify(&report)?;
    if results.is_empty() {
        println!("nothing to verify: report carries no witnesses");
        return Ok(());
    }
    let mut failed = false;
    for r in &results {
        println!("{} witnesses: {} ({})", r.label, if r.ok { "ok" } else { "FAILED" }, r.detail);
        failed |= !r.ok;
    }
    if failed {
        return Err(CliError {
            code: EXIT_VERIFY,
            message: "witness verification failed".into(),
        });
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Build { instance, output } => build(&instance, output.as_deref()),
        Command::Check {
            instance,
            covariant_extreme,
            global_extreme,
            pvm,
            oracle,
            seed,
            jobs,
            output,
        } => {
            let none = !(covariant_extreme || global_extreme || pvm || oracle.is_some());
            let checks = Checks {
                covariant: covariant_extreme || none,
                global: global_extreme || none,
                pvm: pvm || none,
                oracle_trials: oracle,
                jobs,
            };
            check(&instance, checks, seed, output.as_deref())
        }
        Command::Presets { action } => presets(action),
        Command::VerifyWitnesses { report } => verify_witnesses(&report),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}
