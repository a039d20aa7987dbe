//! `scsp` — check, compile, solve, and verify stochastic constraint models.
//!
//! Exit codes: 0 success (for `verify`: exact agreement), 1 error (I/O,
//! parse, validation, size limits), 2 unsat/infeasible model.

mod report;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use scsp::compile::{compile_with, dump_metadata, CompileOptions};
use scsp::flat::write_flat;
use scsp::parser::parse_model;
use scsp::pipeline::{solve_model, verify_model, PipelineOptions};
use scsp::StochasticModel;

use report::RunReport;

const EXIT_OK: u8 = 0;
const EXIT_ERROR: u8 = 1;
const EXIT_UNSAT: u8 = 2;

#[derive(Parser)]
#[command(
    name = "scsp",
    version,
    about = "Stochastic constraint programs: scenario compilation, solving, and oracle verification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
enum Format {
    #[default]
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Parse, lower, and validate a model; report diagnostics.
    Check { file: PathBuf },
    /// Compile a model to the `scsp-flat 1` dump format.
    Compile {
        file: PathBuf,
        /// Output file; defaults to standard output.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run the full pipeline and print a run report.
    Solve {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
        /// Cap on scenario-tree leaves.
        #[arg(long, default_value_t = scsp::scenario::DEFAULT_SCENARIO_CAP)]
        max_scenarios: usize,
        /// Zero wall-clock statistics for byte-identical reruns.
        #[arg(long)]
        stable: bool,
    },
    /// Solve via both the pipeline and the brute-force oracle; exit 0 only
    /// on exact agreement.
    Verify {
        file: PathBuf,
        /// Cap on the number of policies the oracle enumerates.
        #[arg(long, default_value_t = 1_000_000)]
        max_policies: u64,
    },
}

fn load_model(path: &Path) -> Result<StochasticModel, u8> {
    let text = match fs::read_to_string(path) {
        Ok(text) => text,
        Err(err) => {
            eprintln!("error: cannot read {}: {err}", path.display());
            return Err(EXIT_ERROR);
        }
    };
    parse_model(&text).map_err(|diags| {
        for d in &diags {
            eprintln!("{d}");
        }
        EXIT_ERROR
    })
}

fn cmd_check(file: &Path) -> u8 {
    match load_model(file) {
        Ok(_) => EXIT_OK,
        Err(code) => code,
    }
}

fn cmd_compile(file: &Path, output: Option<&Path>) -> u8 {
    let model = match load_model(file) {
        Ok(m) => m,
        Err(code) => return code,
    };
    let compiled = match compile_with(&model, &CompileOptions::default()) {
        Ok(out) => out,
        Err(err) => {
            eprintln!("error: {err}");
            return EXIT_ERROR;
        }
    };
    let comments = dump_metadata(&model, &compiled.tree, &compiled.table);
    let dump = write_flat(&compiled.csp, &comments);
    match output {
        Some(path) => {
            if let Err(err) = fs::write(path, dump) {
                eprintln!("error: cannot write {}: {err}", path.display());
                return EXIT_ERROR;
            }
        }
        None => print!("{dump}"),
    }
    EXIT_OK
}

fn cmd_solve(file: &Path, format: Format, max_scenarios: usize, stable: bool) -> u8 {
    let model = match load_model(file) {
        Ok(m) => m,
        Err(code) => return code,
    };
    let options = PipelineOptions {
        max_scenarios,
        ..PipelineOptions::default()
    };
    let solve = match solve_model(&model, &options) {
        Ok(solve) => solve,
        Err(err) => {
            eprintln!("error: {err}");
            return EXIT_ERROR;
        }
    };
    let report = RunReport::from_solve(&model, &solve, stable);
    match format {
        Format::Text => print!("{}", report.to_text()),
        Format::Json => print!("{}", report.to_json()),
    }
    if solve.solution.is_some() {
        EXIT_OK
    } else {
        EXIT_UNSAT
    }
}

fn cmd_verify(file: &Path, max_policies: u64) -> u8 {
    let model = match load_model(file) {
        Ok(m) => m,
        Err(code) => return code,
    };
    let options = PipelineOptions {
        max_policies: max_policies as u128,
        ..PipelineOptions::default()
    };
    let report = match verify_model(&model, &options) {
        Ok(report) => report,
        Err(err) => {
            eprintln!("error: {err}");
            return EXIT_ERROR;
        }
    };
    println!("oracle:   {}", report.oracle);
    println!("pipeline: {}", report.pipeline);
    if report.agreement {
        println!("agreement: exact");
        EXIT_OK
    } else {
        println!("agreement: MISMATCH");
        for note in &report.notes {
            println!("  {note}");
        }
        EXIT_ERROR
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() {
                EXIT_ERROR
            } else {
                EXIT_OK
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    let code = match &cli.command {
        Command::Check { file } => cmd_check(file),
        Command::Compile { file, output } => cmd_compile(file, output.as_deref()),
        Command::Solve {
            file,
            format,
            max_scenarios,
            stable,
        } => cmd_solve(file, *format, *max_scenarios, *stable),
        Command::Verify { file, max_policies } => cmd_verify(file, *max_policies),
    };
    ExitCode::from(code)
}
