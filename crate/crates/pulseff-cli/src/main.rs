//! Batch front-end: validate and run TOML-configured filter-function
//! computations.

mod config;
mod tasks;

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "pulseff", version, about = "Filter functions and averaged quantum processes for noisy pulse sequences")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run all tasks of a config and write CSV outputs plus a manifest.
    Run {
        /// Path to the TOML run configuration.
        config: PathBuf,
        /// Output directory (overrides the config).
        #[arg(long)]
        output_dir: Option<PathBuf>,
        /// Worker thread count (overrides the config and PULSEFF_THREADS).
        #[arg(long)]
        threads: Option<usize>,
        /// Random seed (overrides the config).
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Parse and schema-check a config without computing anything.
    Validate {
        /// Path to the TOML run configuration.
        config: PathBuf,
    },
    /// Print a ready-to-run example config (fid, spin_echo, qft, inline).
    Emit {
        /// Example name.
        name: String,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            config,
            output_dir,
            threads,
            seed,
        } => match run(&config, output_dir, threads, seed) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!(
                    "{}",
                    serde_json::json!({ "error": format!("{e:#}") })
                );
                ExitCode::FAILURE
            }
        },
        Command::Validate { config } => match validate(&config) {
            Ok(violations) => {
                if violations.is_empty() {
                    ExitCode::SUCCESS
                } else {
                    for v in &violations {
                        println!("{v}");
                    }
                    ExitCode::from(2)
                }
            }
            Err(e) => {
                eprintln!(
                    "{}",
                    serde_json::json!({ "error": format!("{e:#}") })
                );
                ExitCode::FAILURE
            }
        },
        Command::Emit { name } => match config::example_config(&name) {
            Some(text) => {
                print!("{text}");
                ExitCode::SUCCESS
            }
            None => {
                eprintln!(
                    "{}",
                    serde_json::json!({
                        "error": format!(
                            "unknown example '{name}', available: {}",
                            config::EXAMPLE_NAMES.join(", ")
                        )
                    })
                );
                ExitCode::FAILURE
            }
        },
    }
}

fn load(path: &PathBuf) -> anyhow::Result<(config::RunConfig, Vec<u8>, PathBuf)> {
    let bytes = std::fs::read(path)
        .map_err(|e| anyhow::anyhow!("cannot read {}: {e}", path.display()))?;
    let text = std::str::from_utf8(&bytes)
        .map_err(|e| anyhow::anyhow!("{} is not UTF-8: {e}", path.display()))?;
    let cfg = config::RunConfig::parse(text)
        .map_err(|e| anyhow::anyhow!("parse error in {}: {e}", path.display()))?;
    let base_dir = path
        .parent()
        .map(|p| p.to_path_buf())
        .unwrap_or_else(|| PathBuf::from("."));
    Ok((cfg, bytes, base_dir))
}

fn validate(path: &PathBuf) -> anyhow::Result<Vec<config::Violation>> {
    let (cfg, _, base_dir) = load(path)?;
    Ok(cfg.validate(&base_dir))
}

fn run(
    path: &PathBuf,
    output_dir: Option<PathBuf>,
    threads: Option<usize>,
    seed: Option<u64>,
) -> anyhow::Result<()> {
    let (cfg, bytes, base_dir) = load(path)?;
    let violations = cfg.validate(&base_dir);
    if !violations.is_empty() {
        let list: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
        anyhow::bail!("config validation failed:\n{}", list.join("\n"));
    }
    let threads = threads
        .or(cfg.threads)
        .or_else(|| {
            std::env::var("PULSEFF_THREADS")
                .ok()
                .and_then(|s| s.parse().ok())
        })
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        });
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .ok(); // already built is fine
    let seed = seed.unwrap_or(cfg.seed);
    let out = output_dir
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    let outcome = tasks::run(&cfg, &bytes, &base_dir, &out, seed, threads)?;
    println!("wrote {}", outcome.manifest_path.display());
    Ok(())
}
