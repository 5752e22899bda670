use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use rayon::prelude::*;
use structavg::analysis::{self, AnalysisOptions, AnalysisReport, INPUT_ERROR_EXIT};
use structavg::construction;
use structavg::hilbert;
use structavg::sim::{Scenario, SimError};
use structavg::{PatternFormat, SparsityPattern};

/// Structural averaged controllability toolkit.
///
/// Exit codes: 0 certified controllable (or success), 1 certified not
/// controllable, 2 undetermined, 3 input error, 4 singular Gramian or failed
/// check.
#[derive(Parser)]
#[command(name = "structavg", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every test on a pattern file (JSON or DOT) and classify it.
    Analyze {
        /// Pattern file; omit when using --dir.
        path: Option<PathBuf>,
        /// Analyze every .json/.dot/.gv file in a directory.
        #[arg(long, conflicts_with = "path")]
        dir: Option<PathBuf>,
        #[arg(long)]
        json: bool,
        /// Largest state count for the exhaustive acyclic-trap search.
        #[arg(long, env = analysis::TRAP_LIMIT_ENV)]
        trap_limit: Option<usize>,
        /// Highest power tried by the averaged rank test (default 4n).
        #[arg(long)]
        jmax: Option<usize>,
        /// Include per-test wall time in the report.
        #[arg(long)]
        timing: bool,
    },
    /// Hilbert-matrix checks, printed as JSON lines.
    Hilbert {
        #[command(subcommand)]
        action: HilbertAction,
    },
    /// Steer an ensemble average as described by a scenario file.
    Simulate {
        scenario: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Emit the monomial certificate of a pattern as JSON.
    Construct { path: PathBuf },
}

#[derive(Subcommand)]
enum HilbertAction {
    /// Single-truncation determinant checks for n = 2..=N.
    Verify {
        #[arg(long)]
        n_max: usize,
    },
    /// Exact determinants of all sparse Hilbert matrices of one size.
    Scan {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = hilbert::DEFAULT_SCAN_LIMIT)]
        limit: usize,
    },
    /// Explicit inverse of H_n and the check that it inverts H_n.
    Inverse {
        #[arg(long)]
        n: usize,
    },
}

const CHECK_FAILED_EXIT: i32 = 4;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            INPUT_ERROR_EXIT
        }
    };
    ExitCode::from(code as u8)
}

fn run(command: Command) -> Result<i32> {
    match command {
        Command::Analyze {
            path,
            dir,
            json,
            trap_limit,
            jmax,
            timing,
        } => {
            let mut opts = AnalysisOptions::from_env();
            if let Some(limit) = trap_limit {
                opts.trap_limit = limit;
            }
            opts.j_max = jmax;
            opts.record_timing = timing;
            match (path, dir) {
                (Some(path), None) => {
                    let report = analyze_file(&path, &opts)?;
                    print_report(&report, json, None);
                    Ok(report.classification.exit_code())
                }
                (None, Some(dir)) => analyze_dir(&dir, &opts, json),
                _ => bail!("give a pattern file or --dir"),
            }
        }
        Command::Hilbert { action } => run_hilbert(action),
        Command::Simulate { scenario, json } => {
            let text = std::fs::read_to_string(&scenario).with_context(|| format!("reading {}", scenario.display()))?;
            let scenario = Scenario::from_json(&text)?;
            match scenario.run() {
                Ok(result) => {
                    if json {
                        println!("{}", serde_json::to_string(&result)?);
                    } else {
                        println!("achieved average: {:?}", result.achieved_average);
                        println!("target:           {:?}", result.target);
                        println!("relative error:   {:.3e}", result.relative_error);
                        println!("Gramian condition: {:.3e}", result.gramian_condition);
                        println!("control energy:   {:.6e}", result.control_energy);
                    }
                    Ok(0)
                }
                Err(e @ SimError::SingularGramian { .. }) => {
                    eprintln!("error: {e}");
                    Ok(CHECK_FAILED_EXIT)
                }
                Err(e) => Err(e.into()),
            }
        }
        Command::Construct { path } => {
            let g = load(&path)?;
            match construction::monomial_certificate(&g) {
                Ok(cert) => {
                    println!("{}", serde_json::to_string(&cert)?);
                    Ok(if cert.is_controllable() { 0 } else { 2 })
                }
                Err(refusal) => {
                    println!("{}", serde_json::to_string(&refusal)?);
                    eprintln!("construction refused: {refusal}");
                    Ok(2)
                }
            }
        }
    }
}

fn load(path: &Path) -> Result<SparsityPattern> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    SparsityPattern::parse(&bytes, PatternFormat::from_path(path)).with_context(|| format!("parsing {}", path.display()))
}

fn analyze_file(path: &Path, opts: &AnalysisOptions) -> Result<AnalysisReport> {
    Ok(analysis::analyze(&load(path)?, opts))
}

fn print_report(report: &AnalysisReport, json: bool, label: Option<&Path>) {
    if json {
        let value = serde_json::to_value(report).expect("report serializes");
        match label {
            Some(path) => println!("{}", serde_json::json!({ "file": path.display().to_string(), "report": value })),
            None => println!("{value}"),
        }
    } else {
        if let Some(path) = label {
            println!("== {}", path.display());
        }
        print!("{}", report.render());
    }
}

fn analyze_dir(dir: &Path, opts: &AnalysisOptions, json: bool) -> Result<i32> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| matches!(p.extension().and_then(|e| e.to_str()), Some("json" | "dot" | "gv")))
        .collect();
    files.sort();
    let results: Vec<(PathBuf, Result<AnalysisReport>)> = files
        .into_par_iter()
        .map(|path| {
            let report = analyze_file(&path, opts);
            (path, report)
        })
        .collect();
    let mut worst = 0;
    for (path, result) in results {
        match result {
            Ok(report) => {
                print_report(&report, json, Some(&path));
                worst = worst.max(report.classification.exit_code());
            }
            Err(e) => {
                eprintln!("error: {e:#}");
                worst = worst.max(INPUT_ERROR_EXIT);
            }
        }
    }
    Ok(worst)
}

fn run_hilbert(action: HilbertAction) -> Result<i32> {
    match action {
        HilbertAction::Verify { n_max } => {
            if n_max < 2 {
                bail!("--n-max must be at least 2");
            }
            let reports: Vec<_> = (2..=n_max)
                .into_par_iter()
                .map(hilbert::verify_single_truncation)
                .collect::<Result<_, _>>()?;
            let mut failed = false;
            for r in reports {
                failed |= !r.passed();
                println!("{}", serde_json::to_string(&r)?);
            }
            Ok(if failed { CHECK_FAILED_EXIT } else { 0 })
        }
        HilbertAction::Scan { n, limit } => {
            let report = hilbert::conjecture_scan(n, 1..=n, limit)?;
            for rec in &report.records {
                println!("{}", serde_json::to_string(rec)?);
            }
            println!("{}", serde_json::to_string(&report)?);
            Ok(if report.singular.is_empty() { 0 } else { CHECK_FAILED_EXIT })
        }
        HilbertAction::Inverse { n } => {
            if n == 0 {
                bail!("--n must be positive");
            }
            let inv = hilbert::hilbert_inverse(n);
            let identity = inv.mul(&hilbert::hilbert(n))? == structavg::algebra::RationalMatrix::identity(n);
            println!("{}", serde_json::json!({ "n": n, "inverse": integer_rows(&inv), "inverts": identity }));
            Ok(if identity { 0 } else { CHECK_FAILED_EXIT })
        }
    }
}

/// Hilbert inverses are integral; print plain integers where possible.
fn integer_rows(m: &structavg::algebra::RationalMatrix) -> serde_json::Value {
    let rows: Vec<Vec<serde_json::Value>> = (0..m.rows())
        .map(|r| {
            m.row(r)
                .iter()
                .map(|x| {
                    if x.is_integer() {
                        match x.to_integer().to_string().parse::<i64>() {
                            Ok(v) => serde_json::Value::from(v),
                            Err(_) => serde_json::Value::String(x.to_integer().to_string()),
                        }
                    } else {
                        serde_json::Value::String(x.to_string())
                    }
                })
                .collect()
        })
        .collect();
    serde_json::Value::from(rows)
}
