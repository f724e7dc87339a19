//! `mvlab`: runs one experiment from a TOML config and writes a report plus
//! a run manifest.

// `!(x > 0.0)` is deliberate: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod experiments;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use serde::Serialize;
use serde_json::json;

use config::{ExperimentConfig, Format};
use experiments::{Report, RunError};

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERIC: u8 = 3;
const EXIT_RESOURCE: u8 = 4;

#[derive(Debug, Parser)]
#[command(name = "mvlab", version, about = "Numerical experiments on mean values of multiplicative functions")]
struct Args {
    /// Experiment config (TOML).
    #[arg(long, value_name = "PATH", required_unless_present = "list_registry")]
    config: Option<PathBuf>,
    /// Worker threads; 1 is the bit-exact reference mode.
    #[arg(long, value_name = "N")]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long, value_name = "DIR", default_value = "out")]
    out: PathBuf,
    /// Overrides `[output] format`.
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Overrides the config seed.
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// Print the builtin rules and prime sets as JSON and exit.
    #[arg(long)]
    list_registry: bool,
}

#[derive(Serialize)]
struct Manifest<'a> {
    schema: &'static str,
    tool: &'static str,
    version: &'static str,
    experiment: &'static str,
    config: String,
    seed: u64,
    threads: usize,
    sieve_limit: u64,
    wall_time_seconds: f64,
    output: String,
    format: Format,
    report_schema: &'a str,
}

struct Failure {
    code: u8,
    message: String,
}

fn fail(code: u8, message: impl Into<String>) -> Failure {
    Failure { code, message: message.into() }
}

impl From<RunError> for Failure {
    fn from(e: RunError) -> Self {
        match e {
            RunError::Config(c) => fail(EXIT_CONFIG, c.to_string()),
            RunError::Lab { field, err } => {
                use mvlab::Error::*;
                let code = match &err {
                    InvalidArgument(_) | UnknownRule(_) => EXIT_CONFIG,
                    NumericDomain { .. } | DegenerateInput(_) | InvalidInput { .. } => EXIT_NUMERIC,
                    Resource(_) => EXIT_RESOURCE,
                };
                let message = match field {
                    Some(f) => format!("config field '{f}': {err}"),
                    None => err.to_string(),
                };
                fail(code, message)
            }
        }
    }
}

fn write_csv(path: &Path, report: &Report) -> Result<(), Failure> {
    let io = |e: csv::Error| fail(EXIT_RESOURCE, format!("writing {}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    w.write_record(&report.header).map_err(io)?;
    for r in &report.rows {
        w.write_record(r).map_err(io)?;
    }
    w.flush().map_err(|e| fail(EXIT_RESOURCE, format!("writing {}: {e}", path.display())))
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| fail(EXIT_RESOURCE, e.to_string()))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| fail(EXIT_RESOURCE, format!("writing {}: {e}", path.display())))
}

fn run(args: Args) -> Result<(), Failure> {
    if args.list_registry {
        let doc = json!({ "schema": "mvlab.registry/1", "rules": mvlab::registry::list_registry() });
        println!("{}", serde_json::to_string_pretty(&doc).unwrap());
        return Ok(());
    }
    let path = args.config.expect("clap enforces --config");
    let text = fs::read_to_string(&path).map_err(|e| fail(EXIT_CONFIG, format!("reading {}: {e}", path.display())))?;
    let mut cfg = ExperimentConfig::parse(&text).map_err(|e| fail(EXIT_CONFIG, format!("{}: {e}", path.display())))?;
    if let Some(seed) = args.seed {
        cfg.seed = Some(seed);
    }
    if let Some(format) = args.format {
        cfg.output.format = Some(format);
    }
    let format = cfg.output.format.unwrap_or(Format::Csv);
    let threads = match args.threads {
        Some(0) => return Err(fail(EXIT_CONFIG, "--threads must be at least 1")),
        Some(n) => n,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };

    let start = Instant::now();
    let report = experiments::run(&cfg, threads)?;
    let wall = start.elapsed().as_secs_f64();

    fs::create_dir_all(&args.out).map_err(|e| fail(EXIT_RESOURCE, format!("creating {}: {e}", args.out.display())))?;
    let stem = cfg.output.path.clone().unwrap_or_else(|| cfg.experiment.name().to_string());
    let out_path = args.out.join(format!("{stem}.{}", format.extension()));
    if let Some(parent) = out_path.parent() {
        fs::create_dir_all(parent).map_err(|e| fail(EXIT_RESOURCE, format!("creating {}: {e}", parent.display())))?;
    }
    let report_schema = format!("mvlab.{}/1", report.kind);
    match format {
        Format::Csv => write_csv(&out_path, &report)?,
        Format::Json => write_json(&out_path, &json!({ "schema": report_schema, "report": report.json }))?,
    }

    let manifest = Manifest {
        schema: "mvlab.manifest/1",
        tool: "mvlab",
        version: env!("CARGO_PKG_VERSION"),
        experiment: cfg.experiment.name(),
        config: cfg.to_toml(),
        seed: cfg.seed.unwrap_or(0),
        threads,
        sieve_limit: report.sieve_limit,
        wall_time_seconds: wall,
        output: out_path.file_name().unwrap().to_string_lossy().into_owned(),
        format,
        report_schema: &report_schema,
    };
    let manifest_path = args.out.join(format!("{stem}.manifest.json"));
    write_json(&manifest_path, &serde_json::to_value(&manifest).unwrap())?;

    println!("{} ({} thread(s), {wall:.2} s)", cfg.experiment.name(), threads);
    for line in &report.summary {
        println!("  {line}");
    }
    println!("wrote {} and {}", out_path.display(), manifest_path.display());
    Ok(())
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
