use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use harness::{config::EXPERIMENTS, Config, RunError};

/// Runs one reverse-annealing experiment and writes its tables and manifest.
#[derive(Parser, Debug)]
#[command(name = "revanneal", version)]
struct Cli {
    /// One of: phase-diagram, gap-scaling, evolve, error-scaling, tts,
    /// tts-scaling, svd, svd-scan, potential, svmc, ira-cycle, ira-markov,
    /// ira-spectrum.
    experiment: String,
    /// Flat JSON config file; every key is optional.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides a config key, e.g. `--set n_list=[20,40]`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Worker threads (overrides the `workers` key).
    #[arg(long)]
    workers: Option<usize>,
    /// RNG seed (overrides the `seed` key).
    #[arg(long)]
    seed: Option<u64>,
}

fn run(cli: &Cli) -> Result<(), RunError> {
    if !EXPERIMENTS.contains(&cli.experiment.as_str()) {
        return Err(RunError::config(format!(
            "unknown experiment `{}`; expected one of {}",
            cli.experiment,
            EXPERIMENTS.join(", ")
        )));
    }
    let text = match &cli.config {
        Some(p) => Some(
            std::fs::read_to_string(p).map_err(|e| RunError::config(format!("reading {}: {e}", p.display())))?,
        ),
        None => None,
    };
    let mut cfg = Config::load(text.as_deref(), &cli.set)?;
    if let Some(w) = cli.workers {
        cfg.workers = w;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    let bundle = harness::run(&cli.experiment, &cfg, &cli.out)?;
    for t in &bundle.tables {
        println!("{}: {} rows", t.name, t.rows.len());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code() as u8)
        }
    }
}
