use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ontolab::cli::{self, CheckKind, CliOptions, DemoKind, Report};

/// Exact-arithmetic checker for finite ontological models: ontic/epistemic
/// classification, locality, canonical forms, local-polytope membership and
/// preparation independence.
#[derive(Parser)]
#[command(name = "ontolab", version, about)]
struct Cli {
    /// Emit machine-readable JSON reports instead of text.
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one named check against a JSON input file.
    ///
    /// Checks: classify-property, hs-supports, deterministic,
    /// parameter-independent, local, factorisable, no-signalling,
    /// local-realizable, quasi-decompose, prep-independent,
    /// no-prep-signalling, steering.
    Check {
        /// Input file (schema depends on the check).
        file: PathBuf,
        /// Check name.
        check: String,
    },
    /// Rewrite a local model into canonical form over global assignments.
    Canonicalize {
        /// Ontological model file.
        file: PathBuf,
        /// Where to write the canonical model and collapse map.
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Decide local realizability of an empirical table by exact LP.
    Localize {
        /// Empirical model file.
        file: PathBuf,
        /// Restrict to one preparation (default: all).
        #[arg(short, long)]
        prep: Option<String>,
    },
    /// Run a built-in demonstration: epr, steering, or prep-relaxation.
    Demo {
        /// Demo name.
        name: String,
    },
}

fn main() -> ExitCode {
    let args = Cli::parse();
    let options = CliOptions::from_env();
    let result = match &args.command {
        Command::Check { file, check } => CheckKind::from_name(check)
            .and_then(|kind| cli::run_check(file, kind, &options)),
        Command::Canonicalize { file, out } => cli::run_canonicalize(file, out, &options),
        Command::Localize { file, prep } => cli::run_localize(file, prep.as_deref(), &options),
        Command::Demo { name } => DemoKind::from_name(name).map(cli::run_demo),
    };
    match result {
        Ok(report) => {
            emit(&report, args.json);
            ExitCode::from(report.exit_code() as u8)
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}

fn emit(report: &Report, json: bool) {
    if json {
        println!(
            "{}",
            serde_json::to_string_pretty(report).expect("reports serialize infallibly")
        );
    } else {
        print!("{}", report.render_text());
    }
}
