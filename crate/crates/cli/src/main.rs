//! `piestim` command-line front end.
//!
//! Exit codes: 0 success, 1 domain or configuration error, 2 verification failure,
//! 3 I/O error.

mod format;

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use piestim::curve::sweep;
use piestim::fidelity::{f_known, f_unknown, shrink_cloning, CloneCount};
use piestim::optimal_states::{
    check_constraints, known_opt_state, optimal_fidelity, unknown_opt_state,
};
use piestim::spin_algebra::sector_reduced_density;
use piestim::verify::run_verification;
use piestim::{BlochVector, Execution, Structure};
use serde::Serialize;

use format::{half_integer, sig, state_csv, sweep_csv, to_json, SectorLine, StateDescription};

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Domain(String),
    #[error("{0}")]
    Verification(String),
    #[error("cannot write {path}: {source}")]
    Io { path: String, source: io::Error },
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Domain(_) => 1,
            CliError::Verification(_) => 2,
            CliError::Io { .. } => 3,
        }
    }
}

impl From<piestim::Error> for CliError {
    fn from(e: piestim::Error) -> Self {
        CliError::Domain(e.to_string())
    }
}

#[derive(Clone, Copy, Debug, Default, ValueEnum)]
enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum StructureArg {
    Known,
    Unknown,
}

impl From<StructureArg> for Structure {
    fn from(s: StructureArg) -> Self {
        match s {
            StructureArg::Known => Structure::Known,
            StructureArg::Unknown => Structure::Unknown,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "piestim",
    version,
    about = "Direction estimation on permutation-invariant qubit states"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fidelity of the four state families over a grid of local Bloch lengths.
    Sweep {
        #[arg(long)]
        n: u32,
        #[arg(long, default_value_t = 0.0)]
        r_min: f64,
        #[arg(long, default_value_t = 1.0)]
        r_max: f64,
        #[arg(long, default_value_t = 101)]
        steps: usize,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sector weights and orientations of an optimal state.
    OptimalState {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        r: f64,
        #[arg(long, value_enum)]
        structure: StructureArg,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cross-check the closed forms against the brute-force oracle.
    Verify {
        #[arg(long)]
        n: u32,
        /// Points per axis of the sphere quadrature (default 2n + 4).
        #[arg(long)]
        quadrature_order: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Shrink factor of the optimal universal N -> M cloner.
    Shrink {
        #[arg(long)]
        n: u32,
        /// Number of clones, or `inf`.
        #[arg(long)]
        m: String,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn emit(out: Option<&PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        }),
        None => {
            let mut stdout = io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|source| CliError::Io {
                    path: "stdout".into(),
                    source,
                })
        }
    }
}

fn cmd_sweep(
    n: u32,
    r_min: f64,
    r_max: f64,
    steps: usize,
    format: Format,
    out: Option<&PathBuf>,
) -> Result<(), CliError> {
    let curve = sweep(n, r_min, r_max, steps, Execution::Parallel)?;
    if let Some(bad) = curve.invalid_rows().next() {
        return Err(CliError::Verification(format!(
            "row failed the ordering check: {bad:?}"
        )));
    }
    let text = match format {
        Format::Csv => sweep_csv(&curve.rows),
        Format::Json => to_json(&curve.rows),
    };
    emit(out, &text)
}

fn describe_state(n: u32, r: f64, structure: Structure) -> Result<StateDescription, CliError> {
    let z = BlochVector::zhat();
    let state = match structure {
        Structure::Known => known_opt_state(n, r, z)?,
        Structure::Unknown => unknown_opt_state(n, r, z)?,
    };
    let fidelity = if r > 0.0 {
        match structure {
            Structure::Known => f_known(&state)?.value,
            Structure::Unknown => f_unknown(&state)?.value,
        }
    } else {
        optimal_fidelity(n, r, structure)?.value
    };
    let sectors = state
        .entries()
        .iter()
        .map(|e| {
            let bloch = sector_reduced_density(&e.state).bloch;
            SectorLine {
                two_j: e.state.sector().two_j(),
                j: half_integer(e.state.sector().two_j()),
                weight: e.weight,
                orientation: if bloch.z < 0.0 {
                    "antiparallel"
                } else {
                    "parallel"
                },
                bloch_length: bloch.norm(),
            }
        })
        .collect();
    Ok(StateDescription {
        n,
        r,
        structure,
        fidelity,
        residuals: check_constraints(&state, &z.scale(r)),
        sectors,
    })
}

fn cmd_optimal_state(
    n: u32,
    r: f64,
    structure: Structure,
    format: Format,
    out: Option<&PathBuf>,
) -> Result<(), CliError> {
    let d = describe_state(n, r, structure)?;
    let text = match format {
        Format::Csv => state_csv(&d),
        Format::Json => to_json(&d),
    };
    emit(out, &text)
}

fn cmd_verify(
    n: u32,
    order: Option<usize>,
    seed: u64,
    format: Format,
    out: Option<&PathBuf>,
) -> Result<(), CliError> {
    let report = run_verification(n, order, seed, Execution::Parallel)?;
    let text = match format {
        Format::Csv => format!("{report}\n"),
        Format::Json => to_json(&report),
    };
    emit(out, &text)?;
    if report.passed() {
        Ok(())
    } else {
        let failed: Vec<&str> = report.failures().map(|c| c.name.as_str()).collect();
        Err(CliError::Verification(format!(
            "failed checks: {}",
            failed.join(", ")
        )))
    }
}

#[derive(Serialize)]
struct ShrinkOutput {
    n: u32,
    m: String,
    shrink: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    fidelity: Option<f64>,
}

fn cmd_shrink(n: u32, m: &str, format: Format, out: Option<&PathBuf>) -> Result<(), CliError> {
    let clones: CloneCount = m.parse()?;
    let shrink = shrink_cloning(n, clones)?.value();
    let fidelity =
        matches!(clones, CloneCount::Infinite).then(|| (n as f64 + 1.0) / (n as f64 + 2.0));
    let text = match format {
        Format::Csv => {
            let mut s = format!("shrink={}\n", sig(shrink, 12));
            if let Some(f) = fidelity {
                s.push_str(&format!("fidelity={}\n", sig(f, 12)));
            }
            s
        }
        Format::Json => to_json(&ShrinkOutput {
            n,
            m: m.to_string(),
            shrink,
            fidelity,
        }),
    };
    emit(out, &text)
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Sweep {
            n,
            r_min,
            r_max,
            steps,
            format,
            out,
        } => cmd_sweep(n, r_min, r_max, steps, format, out.as_ref()),
        Command::OptimalState {
            n,
            r,
            structure,
            format,
            out,
        } => cmd_optimal_state(n, r, structure.into(), format, out.as_ref()),
        Command::Verify {
            n,
            quadrature_order,
            seed,
            format,
            out,
        } => cmd_verify(n, quadrature_order, seed, format, out.as_ref()),
        Command::Shrink { n, m, format, out } => cmd_shrink(n, &m, format, out.as_ref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
