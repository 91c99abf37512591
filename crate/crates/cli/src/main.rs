//! Batch front end: parse a JSON run configuration, dispatch the computation
//! and emit a reproducible result artifact.
//!
//! Exit codes: 0 on success, 2 on configuration errors, 3 on numerical
//! failures inside the engine.

mod commands;
mod config;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use sha2::{Digest, Sha256};

use commands::{execute, CliError};
use config::RunConfig;
use output::Envelope;

#[derive(Debug, Parser)]
#[command(
    name = "polymoment",
    version,
    about = "Moment engine for polynomial stochastic processes"
)]
struct Args {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output artifact path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format.
    #[arg(long, value_parser = ["json", "csv"])]
    format: Option<String>,
    /// Also write sample-level CSV `<out>.samples.csv` (requires --out).
    #[arg(long)]
    dump: bool,
    /// Worker thread count; results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", err.message());
            ExitCode::from(err.exit_code() as u8)
        }
    }
}

fn run(args: &Args) -> Result<(), CliError> {
    if let Some(threads) = args.threads {
        if threads == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    }
    if args.dump && args.out.is_none() {
        return Err(CliError::Config(
            "--dump needs --out to name the samples file".into(),
        ));
    }

    let raw = std::fs::read(&args.config).map_err(|e| {
        CliError::Config(format!("cannot read config {}: {e}", args.config.display()))
    })?;
    let config: RunConfig = serde_json::from_slice(&raw)
        .map_err(|e| CliError::Config(format!("config does not validate: {e}")))?;
    let config_sha256 = hex::encode(Sha256::digest(&raw));

    let started = std::time::Instant::now();
    let outcome = execute(&config)?;
    eprintln!(
        "{}: completed in {:.3} s",
        config.command.name(),
        started.elapsed().as_secs_f64()
    );

    let envelope = Envelope {
        command: config.command.name(),
        config_sha256,
        seed: config.seed,
        version: env!("CARGO_PKG_VERSION"),
        rng: polymoment::mcsim::RNG_ALGORITHM,
        result: outcome.result,
    };

    let format = args
        .format
        .clone()
        .or_else(|| config.format.clone())
        .unwrap_or_else(|| "json".to_string());
    let bytes = match format.as_str() {
        "json" => envelope.to_json_bytes(),
        "csv" => envelope.to_csv_bytes(),
        other => {
            return Err(CliError::Config(format!(
                "unknown format {other:?}; expected json or csv"
            )))
        }
    };

    let out_path = args
        .out
        .clone()
        .or_else(|| config.out.clone().map(PathBuf::from));
    match &out_path {
        Some(path) => write_file(path, &bytes)?,
        None => {
            use std::io::Write;
            std::io::stdout()
                .write_all(&bytes)
                .map_err(|e| CliError::Numerical(format!("write stdout: {e}")))?;
        }
    }

    if args.dump {
        let out = out_path.expect("--dump implies --out");
        match &outcome.samples {
            Some(values) => {
                let mut dump_path = out.into_os_string();
                dump_path.push(".samples.csv");
                write_file(Path::new(&dump_path), &output::samples_csv(values))?;
            }
            None => eprintln!("note: this command produces no per-path samples; dump skipped"),
        }
    }
    Ok(())
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes)
        .map_err(|e| CliError::Numerical(format!("cannot write {}: {e}", path.display())))
}
