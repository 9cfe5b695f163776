//! Experiment runner behind the `revanneal` command-line tool.

pub mod config;
pub mod experiments;
pub mod output;

use std::fmt;
use std::path::Path;
use std::time::Instant;

use serde_json::{json, Value};

pub use config::Config;
pub use output::{Cell, Table};

/// Failure of a run, carrying the process exit code.
#[derive(Clone, Debug, PartialEq)]
pub struct RunError {
    code: i32,
    message: String,
}

impl RunError {
    pub fn config(message: impl Into<String>) -> Self {
        RunError { code: 2, message: message.into() }
    }

    pub fn numerical(message: impl Into<String>) -> Self {
        RunError { code: 3, message: message.into() }
    }

    /// Wraps a library error raised while computing `item`.
    pub fn from_core(item: &str, e: revanneal::Error) -> Self {
        match e {
            revanneal::Error::Config(m) | revanneal::Error::Input(m) => RunError::config(format!("{item}: {m}")),
            revanneal::Error::Numerical(m) => RunError::numerical(format!("{item}: {m}")),
        }
    }

    pub fn code(&self) -> i32 {
        self.code
    }
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for RunError {}

/// Tables and per-run diagnostics of one experiment.
#[derive(Clone, Debug, Default)]
pub struct ResultBundle {
    pub tables: Vec<Table>,
    /// One JSON object per evolution or chain (norm drift, step counts).
    pub runs: Vec<Value>,
}

/// Runs `experiment` on a pool of `cfg.workers` threads and writes its
/// tables and manifest to `out`.
pub fn run(experiment: &str, cfg: &Config, out: &Path) -> Result<ResultBundle, RunError> {
    cfg.validate(experiment)?;
    let start = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| RunError::numerical(format!("worker pool: {e}")))?;
    let bundle = pool.install(|| experiments::dispatch(experiment, cfg))?;
    if bundle.tables.is_empty() {
        return Err(RunError::numerical(format!("{experiment} produced no tables")));
    }

    std::fs::create_dir_all(out).map_err(|e| RunError::numerical(format!("creating {}: {e}", out.display())))?;
    for t in &bundle.tables {
        output::write_table(out, t, &cfg.format)?;
    }
    let config_echo = serde_json::to_value(cfg).map_err(|e| RunError::numerical(e.to_string()))?;
    let manifest = json!({
        "experiment": experiment,
        "version": env!("CARGO_PKG_VERSION"),
        "seed": cfg.seed,
        "workers": cfg.workers,
        "format": cfg.format,
        "config": config_echo,
        "tables": bundle.tables.iter().map(|t| json!({"name": t.name, "columns": t.columns, "rows": t.rows.len()})).collect::<Vec<_>>(),
        "runs": bundle.runs,
        "wall_time_s": start.elapsed().as_secs_f64(),
    });
    output::write_json(&out.join("manifest.json"), &manifest)?;
    Ok(bundle)
}
