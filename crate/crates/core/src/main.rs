use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use wittkit::cli::{parse_document, plan, run_checks, RunOptions};
use wittkit::witt::{derive_witt_polynomials, PolyKind};

#[derive(Parser)]
#[command(name = "wittkit", version, about = "Exact checks for Witt vectors, perfectoid towers and algebra modifications")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every check in a ring-spec file.
    Run {
        file: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the JSON report here instead of stdout.
        #[arg(long)]
        json: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Include wall time per check (makes the report non-reproducible).
        #[arg(long)]
        timings: bool,
    },
    /// Print the Witt structure polynomials.
    DerivePolys {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = Kind::All)]
        kind: Kind,
    },
    /// Print a ring-spec file in canonical form.
    Fmt {
        file: PathBuf,
        /// Rewrite the file in place.
        #[arg(long)]
        write: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    All,
    Sum,
    Product,
    Negation,
    Frobenius,
}

const INPUT_ERROR: u8 = 2;

fn input_error(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(INPUT_ERROR)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { file, seed, json, jobs, timings } => {
            let src = match std::fs::read_to_string(&file) {
                Ok(s) => s,
                Err(e) => return input_error(format!("{}: {e}", file.display())),
            };
            let plan = match parse_document(&src).and_then(plan) {
                Ok(p) => p,
                Err(e) => return input_error(format!("{}: {e}", file.display())),
            };
            let report = run_checks(&plan, RunOptions { seed, jobs: jobs.max(1), timings });
            for c in &report.checks {
                let status = if c.pass { "PASS" } else { "FAIL" };
                match &c.error {
                    Some(e) => eprintln!("{status} {} {}: {} ({e})", c.kind, c.name, c.verdict),
                    None => eprintln!("{status} {} {}: {}", c.kind, c.name, c.verdict),
                }
            }
            let out = report.to_json_string();
            match json {
                Some(path) => {
                    if let Err(e) = std::fs::write(&path, out) {
                        return input_error(format!("{}: {e}", path.display()));
                    }
                }
                None => print!("{out}"),
            }
            if report.pass() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Command::DerivePolys { p, n, kind } => {
            if !wittkit::cli::plan::PRIMES.contains(&p) || n > wittkit::cli::plan::MAX_N as usize {
                return input_error(format!("cap exceeded: p = {p}, n = {n}"));
            }
            let kinds: Vec<PolyKind> = match kind {
                Kind::All => PolyKind::ALL.to_vec(),
                Kind::Sum => vec![PolyKind::Sum],
                Kind::Product => vec![PolyKind::Product],
                Kind::Negation => vec![PolyKind::Negation],
                Kind::Frobenius => vec![PolyKind::Frobenius],
            };
            for k in kinds {
                match derive_witt_polynomials(p, n, k) {
                    Ok(polys) => {
                        for (i, f) in polys.iter().enumerate() {
                            println!("{}_{i} = {f}", k.name());
                        }
                    }
                    Err(e) => return input_error(e),
                }
            }
            ExitCode::SUCCESS
        }
        Command::Fmt { file, write } => {
            let src = match std::fs::read_to_string(&file) {
                Ok(s) => s,
                Err(e) => return input_error(format!("{}: {e}", file.display())),
            };
            let doc = match parse_document(&src) {
                Ok(d) => d,
                Err(e) => return input_error(format!("{}: {e}", file.display())),
            };
            if write {
                if let Err(e) = std::fs::write(&file, doc.to_string()) {
                    return input_error(format!("{}: {e}", file.display()));
                }
            } else {
                print!("{doc}");
            }
            ExitCode::SUCCESS
        }
    }
}
