//! Batch driver: `dicke-phase <config> [--workers K] [--output-dir DIR]`.
//!
//! Exit codes: 0 success, 2 config error, 3 solver error, 4 I/O error.

pub mod config;
pub mod output;
pub mod tasks;

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::Parser;
use rand::Rng;

pub use config::{load_config, parse_config, RunConfig, Task, DEFAULT_OUTPUT_DIR, OUTPUT_DIR_ENV};
pub use output::{write_metadata, write_table, Cell, Metadata, StageTiming, Table};

pub const TOOL_NAME: &str = "dicke-phase";
pub const METADATA_FILE: &str = "metadata.json";
/// Generated seeds stay below 2^53 so they survive a JSON round trip through
/// any double-based reader.
const MAX_GENERATED_SEED: u64 = 1 << 53;

#[derive(Debug, Parser)]
#[command(name = TOOL_NAME, version, about = "Steady-state phase diagrams of a dissipative all-to-all Ising model")]
pub struct Args {
    /// TOML config, or a metadata.json from an earlier run.
    pub config: PathBuf,
    /// Worker threads; overrides the config.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Output directory; overrides the config and the environment.
    #[arg(long = "output-dir")]
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("solver error: {0}")]
    Solver(#[from] crate::Error),
    #[error("I/O error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Solver(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

/// Summary of a completed run.
#[derive(Debug)]
pub struct RunReport {
    pub output_dir: PathBuf,
    pub files: Vec<PathBuf>,
    pub config: RunConfig,
}

/// Output directory precedence: flag, config, environment, default.
pub fn resolve_output_dir(flag: Option<&Path>, cfg: &RunConfig, env: Option<OsString>) -> PathBuf {
    if let Some(dir) = flag {
        return dir.to_path_buf();
    }
    if let Some(dir) = cfg.output.as_ref().and_then(|o| o.dir.clone()) {
        return dir;
    }
    match env {
        Some(v) if !v.is_empty() => PathBuf::from(v),
        _ => PathBuf::from(DEFAULT_OUTPUT_DIR),
    }
}

/// Loads, resolves and validates a config, applying command-line overrides.
pub fn prepare(args: &Args) -> Result<(RunConfig, PathBuf), CliError> {
    let mut cfg = load_config(&args.config).map_err(CliError::Config)?;
    if let Some(w) = args.workers {
        cfg.workers = Some(w);
    }
    let dir = resolve_output_dir(args.output_dir.as_deref(), &cfg, std::env::var_os(OUTPUT_DIR_ENV));
    let mut cfg = cfg.resolve(|| rand::rng().random_range(0..MAX_GENERATED_SEED));
    cfg.validate().map_err(CliError::Config)?;
    if let Some(out) = cfg.output.as_mut() {
        out.dir = Some(dir.clone());
    }
    Ok((cfg, dir))
}

/// Runs a prepared config and writes its tables plus `metadata.json`.
pub fn run_config(cfg: RunConfig, dir: &Path) -> Result<RunReport, CliError> {
    let started = Instant::now();
    let tables = tasks::execute(&cfg)?;
    let solve_seconds = started.elapsed().as_secs_f64();

    let io = |e: std::io::Error, p: &Path| CliError::Io(format!("{}: {e}", p.display()));
    std::fs::create_dir_all(dir).map_err(|e| io(e, dir))?;
    let write_started = Instant::now();
    let mut files = Vec::new();
    for table in &tables {
        let path = dir.join(table.file_name());
        write_table(table, &path).map_err(|e| io(e, &path))?;
        files.push(path);
    }
    let meta = Metadata {
        tool: TOOL_NAME,
        version: env!("CARGO_PKG_VERSION"),
        config: &cfg,
        rng_seed: cfg.seed_value(),
        timings: vec![
            StageTiming { stage: cfg.task.name().to_string(), seconds: solve_seconds },
            StageTiming { stage: "write".into(), seconds: write_started.elapsed().as_secs_f64() },
        ],
        outputs: tables.iter().map(|t| t.file_name()).collect(),
    };
    let meta_path = dir.join(METADATA_FILE);
    write_metadata(&meta, &meta_path).map_err(|e| io(e, &meta_path))?;
    files.push(meta_path);
    Ok(RunReport { output_dir: dir.to_path_buf(), files, config: cfg })
}

/// Entry point shared by the binary and the tests; returns the exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match prepare(&args).and_then(|(cfg, dir)| run_config(cfg, &dir)) {
        Ok(report) => {
            for f in &report.files {
                println!("{}", f.display());
            }
            0
        }
        Err(e) => {
            eprintln!("{TOOL_NAME}: {e}");
            e.exit_code()
        }
    }
}
