use clap::{Parser, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;
use toricgit_cli::{error_report, parse_job_file, render_text, report, resolve_job, CliError, Command, PartialOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

/// Toric GIT quotients, equivariant sheaves and quotient polarizations.
///
/// Reads one JSON job, runs one command and writes a report. Exit status is
/// 0 on success, 2 when the problem is mathematically infeasible and 1 for
/// malformed input. TORICGIT_THREADS caps the worker thread count.
#[derive(Debug, Parser)]
#[command(name = "toricgit", version)]
struct Args {
    /// Job file (JSON); `-` reads standard input.
    #[arg(long)]
    input: PathBuf,
    /// Command to run; overrides the `command` field of the job.
    #[arg(long, value_enum)]
    command: Option<Command>,
    /// Relative tolerance for the Minkowski solver.
    #[arg(long)]
    tol: Option<f64>,
    /// Seed for random candidates and solver restarts.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    max_iter: Option<usize>,
    /// Cap on enumerated candidate subspaces.
    #[arg(long)]
    cap: Option<usize>,
    /// Largest dilation tried by the subgroup search.
    #[arg(long)]
    k_max: Option<i64>,
    /// Report destination; standard output when absent.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("TORICGIT_THREADS") else { return Ok(()) };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n >= 1)
        .ok_or_else(|| CliError::schema(format!("TORICGIT_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::io(format!("cannot size the thread pool: {e}")))
}

fn read_input(path: &PathBuf) -> Result<Vec<u8>, CliError> {
    if path.as_os_str() == "-" {
        let mut buf = Vec::new();
        std::io::Read::read_to_end(&mut std::io::stdin(), &mut buf).map_err(|e| CliError::io(format!("stdin: {e}")))?;
        Ok(buf)
    } else {
        std::fs::read(path).map_err(|e| CliError::io(format!("{}: {e}", path.display())))
    }
}

/// Reads and resolves the job; failures carry the raw bytes for hashing.
fn prepare(args: &Args) -> Result<toricgit_cli::Job, (Vec<u8>, CliError)> {
    let bytes = read_input(&args.input).map_err(|e| (Vec::new(), e))?;
    configure_threads().map_err(|e| (bytes.clone(), e))?;
    let text =
        std::str::from_utf8(&bytes).map_err(|_| (bytes.clone(), CliError::schema("input is not UTF-8".into())))?;
    let flags =
        PartialOptions { tol: args.tol, seed: args.seed, max_iter: args.max_iter, cap: args.cap, k_max: args.k_max };
    parse_job_file(text).and_then(|f| resolve_job(f, args.command, &flags)).map_err(|e| (bytes.clone(), e))
}

fn main() -> ExitCode {
    let args = Args::parse();
    let (value, code) = match prepare(&args) {
        Ok(job) => report(&job),
        Err((bytes, e)) => (error_report(&bytes, &e), e.exit_code()),
    };
    let rendered = match args.format {
        Format::Json => serde_json::to_string_pretty(&value).expect("reports serialize") + "\n",
        Format::Text => render_text(&value),
    };
    match &args.output {
        Some(path) => {
            if let Err(e) = std::fs::write(path, rendered) {
                eprintln!("cannot write {}: {e}", path.display());
                return ExitCode::from(1);
            }
        }
        None => print!("{rendered}"),
    }
    ExitCode::from(code as u8)
}
