//! Experiment runner.
//!
//! Exit codes: 0 every check passed, 1 a check failed, 2 invalid config,
//! 3 runtime error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use rayon::prelude::*;
use witten_lab::experiments::{self, preset, presets, ExperimentConfig, Outcome};
use witten_lab::Error;

const EXIT_FAIL: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

#[derive(Parser)]
#[command(name = "witten-lab", version, about = "Witten-Laplacian heat flow and entropy experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment: a JSON config path or a preset name.
    Run {
        config: String,
        /// Output directory (overrides the config and WITTEN_LAB_OUTPUT).
        #[arg(long)]
        output: Option<PathBuf>,
        /// Print the report JSON instead of the summary.
        #[arg(long)]
        json: bool,
    },
    /// Static checks without running.
    Validate { config: String },
    /// List the built-in presets; with --dump DIR also write them as JSON.
    Presets {
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// Run every `*.json` config in a directory.
    Batch {
        dir: PathBuf,
        /// Run the experiments concurrently.
        #[arg(long)]
        parallel: bool,
    },
}

enum Failure {
    Config(String),
    Runtime(anyhow::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(msg) => Failure::Config(msg),
            other => Failure::Runtime(other.into()),
        }
    }
}

fn load(arg: &str) -> std::result::Result<ExperimentConfig, Failure> {
    let path = Path::new(arg);
    if !path.exists() {
        if let Some(p) = preset(arg) {
            return Ok(p);
        }
    }
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {arg} (not a preset name either)"))
        .map_err(Failure::Runtime)?;
    Ok(ExperimentConfig::from_json(&text)?)
}

fn summarize(outcome: &Outcome, dir: &Path) {
    let v = &outcome.report.verdict;
    println!("{}: {}", v.name, if v.passed { "PASS" } else { "FAIL" });
    for c in &v.checks {
        let mark = if c.passed { "ok" } else { "FAILED" };
        println!("  {:<34} {:>13.6e}  tol {:>9.2e}  {mark}", c.name, c.measured, c.tolerance);
    }
    println!("  artifacts: {}", dir.display());
}

fn run_one(config: ExperimentConfig, json: bool) -> std::result::Result<bool, Failure> {
    let dir = experiments::output_dir(&config);
    let outcome = experiments::run(&config)?;
    if json {
        println!("{}", serde_json::to_string_pretty(&outcome.report).map_err(|e| Failure::Runtime(e.into()))?);
    } else {
        summarize(&outcome, &dir);
    }
    Ok(outcome.passed())
}

fn exit_for(result: std::result::Result<bool, Failure>) -> ExitCode {
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_FAIL),
        Err(Failure::Config(msg)) => {
            eprintln!("invalid config: {msg}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_RUNTIME)
        }
    }
}

fn batch(dir: &Path, parallel: bool) -> Result<Vec<(PathBuf, std::result::Result<bool, Failure>)>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .with_context(|| format!("listing {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    let job = |p: &PathBuf| {
        let result = load(&p.to_string_lossy()).and_then(|c| {
            let outcome = experiments::run(&c)?;
            Ok(outcome.passed())
        });
        (p.clone(), result)
    };
    Ok(if parallel { files.par_iter().map(job).collect() } else { files.iter().map(job).collect() })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, output, json } => exit_for(load(&config).and_then(|mut c| {
            if output.is_some() {
                c.output = output;
            }
            run_one(c, json)
        })),
        Command::Validate { config } => match load(&config) {
            Ok(c) => {
                let diagnostics = c.validate();
                if diagnostics.is_empty() {
                    println!("{}: ok", c.name);
                    ExitCode::SUCCESS
                } else {
                    for d in &diagnostics {
                        println!("{}: {d}", c.name);
                    }
                    ExitCode::from(EXIT_CONFIG)
                }
            }
            Err(e) => exit_for(Err(e)),
        },
        Command::Presets { dump } => {
            for p in presets() {
                println!("{:<26} {}", p.name, p.description);
                if let Some(dir) = &dump {
                    let written = std::fs::create_dir_all(dir)
                        .and_then(|_| std::fs::write(dir.join(format!("{}.json", p.name)), p.to_json()));
                    if let Err(e) = written {
                        eprintln!("error: writing {}: {e}", dir.display());
                        return ExitCode::from(EXIT_RUNTIME);
                    }
                }
            }
            ExitCode::SUCCESS
        }
        Command::Batch { dir, parallel } => match batch(&dir, parallel) {
            Ok(results) => {
                let mut worst = 0u8;
                for (path, result) in results {
                    let (label, code) = match result {
                        Ok(true) => ("PASS".to_string(), 0),
                        Ok(false) => ("FAIL".to_string(), EXIT_FAIL),
                        Err(Failure::Config(m)) => (format!("CONFIG ERROR: {m}"), EXIT_CONFIG),
                        Err(Failure::Runtime(e)) => (format!("ERROR: {e:#}"), EXIT_RUNTIME),
                    };
                    println!("{}: {label}", path.display());
                    worst = worst.max(code);
                }
                ExitCode::from(worst)
            }
            Err(e) => exit_for(Err(Failure::Runtime(e))),
        },
    }
}
