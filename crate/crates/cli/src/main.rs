//! Command-line driver: file handling, report printing, and exit codes.
//! Exit codes: 0 pass, 1 verification failed, 2 input error, 3 internal
//! invariant breach, 4 no pure benchmark equilibrium found.

use clap::{Parser, Subcommand};
use segforge::designer::{design_sigma_star, supported_equilibrium};
use segforge::docio::{CandidateDocument, MarketDocument};
use segforge::market::Market;
use segforge::report::{
    render_benchmark_csv, render_benchmark_text, render_equilibrium_check_text,
    render_minimax_text, BenchmarkEntry, RunReport,
};
use segforge::verifier::{
    compare_against_benchmark, find_unsegmented_pure_equilibria, minimax_report,
    verify_public_equilibrium, VerifierError,
};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXIT_VERIFY_FAILED: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_BREACH: u8 = 3;
const EXIT_NO_BENCHMARK: u8 = 4;

#[derive(Parser)]
#[command(
    name = "segforge",
    version,
    about = "Consumer-optimal public market segmentation for finite-type Bertrand markets"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Design the consumer-optimal segmentation and its supported equilibrium
    Design {
        /// Market document (JSON)
        input: PathBuf,
        /// Write the designed segmentation as a candidate document
        #[arg(long)]
        out: Option<PathBuf>,
        /// Emit CSV tables instead of aligned text
        #[arg(long)]
        csv: bool,
    },
    /// Verify a candidate segmentation and price profile as an equilibrium
    Verify {
        /// Market document (JSON)
        input: PathBuf,
        /// Candidate document (JSON)
        candidate: PathBuf,
    },
    /// Search unsegmented pure equilibria and compare profits against the design
    Benchmark {
        /// Market document (JSON)
        input: PathBuf,
        /// Emit CSV tables instead of aligned text
        #[arg(long)]
        csv: bool,
    },
    /// Report each firm's minimax profit
    Minimax {
        /// Market document (JSON)
        input: PathBuf,
    },
}

/// An error message plus the exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }

    fn breach(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_BREACH,
            message: message.into(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    // library asserts guard exact-arithmetic identities; a panic is an
    // internal invariant breach, never an input problem
    match std::panic::catch_unwind(|| run(cli.command)) {
        Ok(Ok(code)) => ExitCode::from(code),
        Ok(Err(failure)) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
        Err(_) => {
            eprintln!("error: internal invariant breach");
            ExitCode::from(EXIT_BREACH)
        }
    }
}

fn run(command: Command) -> Result<u8, Failure> {
    match command {
        Command::Design { input, out, csv } => cmd_design(&input, out.as_deref(), csv),
        Command::Verify { input, candidate } => cmd_verify(&input, &candidate),
        Command::Benchmark { input, csv } => cmd_benchmark(&input, csv),
        Command::Minimax { input } => cmd_minimax(&input),
    }
}

fn load_market(path: &Path) -> Result<Market, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))?;
    let doc = MarketDocument::parse_str(&text)
        .map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    doc.to_market()
        .map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn cmd_design(input: &Path, out: Option<&Path>, csv: bool) -> Result<u8, Failure> {
    let market = load_market(input)?;
    let sigma = design_sigma_star(&market);
    let outcome = supported_equilibrium(&sigma);
    let minimax = minimax_report(&market);
    let report = RunReport::build(&market, &sigma, &outcome, &minimax);

    if csv {
        print!("{}", report.render_csv());
    } else {
        print!("{}", report.render_text());
    }

    if !report.verification.all_ok() {
        return Err(Failure::breach(
            "designed segmentation failed its own verification",
        ));
    }

    if let Some(path) = out {
        let doc = CandidateDocument::from_design(&sigma, &outcome);
        std::fs::write(path, doc.to_canonical_string())
            .map_err(|e| Failure::input(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(0)
}

fn cmd_verify(input: &Path, candidate_path: &Path) -> Result<u8, Failure> {
    let market = load_market(input)?;
    let text = std::fs::read_to_string(candidate_path)
        .map_err(|e| Failure::input(format!("cannot read {}: {e}", candidate_path.display())))?;
    let doc = CandidateDocument::parse_str(&text)
        .map_err(|e| Failure::input(format!("{}: {e}", candidate_path.display())))?;
    let candidate = doc
        .to_candidate()
        .map_err(|e| Failure::input(format!("{}: {e}", candidate_path.display())))?;

    let check = verify_public_equilibrium(&market, &candidate)
        .map_err(|e| Failure::input(e.to_string()))?;
    print!("{}", render_equilibrium_check_text(&check));
    Ok(if check.passed() {
        0
    } else {
        EXIT_VERIFY_FAILED
    })
}

fn cmd_benchmark(input: &Path, csv: bool) -> Result<u8, Failure> {
    let market = load_market(input)?;
    let sigma = design_sigma_star(&market);
    let outcome = supported_equilibrium(&sigma);
    let minimax = minimax_report(&market);
    let report = RunReport::build(&market, &sigma, &outcome, &minimax);
    if !report.verification.all_ok() {
        return Err(Failure::breach(
            "designed segmentation failed its own verification",
        ));
    }

    let found = find_unsegmented_pure_equilibria(&market);
    let mut entries = Vec::with_capacity(found.len());
    for bench in &found {
        match compare_against_benchmark(&market, bench, &outcome.firm_profits) {
            Ok(comparison) => {
                if comparison.floor_positive && !comparison.all_strictly_worse {
                    return Err(Failure::breach(
                        "strict profit comparison failed despite a positive surplus floor",
                    ));
                }
                entries.push(BenchmarkEntry::Compared {
                    prices: bench.prices.clone(),
                    policy: bench.tie_policy.label(),
                    comparison,
                });
            }
            Err(err @ VerifierError::NonpositiveBenchmarkProfit { .. }) => {
                entries.push(BenchmarkEntry::NotApplicable {
                    prices: bench.prices.clone(),
                    policy: bench.tie_policy.label(),
                    reason: err.to_string(),
                });
            }
            Err(other) => {
                return Err(Failure::breach(format!(
                    "benchmark from the search failed re-verification: {other}"
                )));
            }
        }
    }

    if csv {
        print!("{}", report.render_csv());
        print!("{}", render_benchmark_csv(&entries));
    } else {
        print!("{}", report.render_text());
        print!("{}", render_benchmark_text(&entries));
    }

    Ok(if found.is_empty() {
        EXIT_NO_BENCHMARK
    } else {
        0
    })
}

fn cmd_minimax(input: &Path) -> Result<u8, Failure> {
    let market = load_market(input)?;
    let minimax = minimax_report(&market);
    print!("{}", render_minimax_text(&minimax));
    Ok(0)
}
