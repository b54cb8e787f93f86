use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use zakdd::config::{ConfigError, Experiment, ExperimentConfig};
use zakdd::experiments::{run, RunOptions};

/// Zak-OTFS delay-Doppler experiments.
#[derive(Parser, Debug)]
#[command(name = "zakdd", version)]
struct Cli {
    experiment: Experiment,
    /// JSON configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; defaults to the configured `output`, then `out`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for trial batches.
    #[arg(long)]
    threads: Option<usize>,
    /// Reuse per-point results already in the output directory.
    #[arg(long)]
    resume: bool,
}

fn load(cli: &Cli) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(&cli.config)
        .map_err(|e| ConfigError(format!("cannot read {}: {e}", cli.config.display())))?;
    let mut cfg = ExperimentConfig::from_json(&text)?;
    if let Some(want) = cfg.experiment {
        if want != cli.experiment {
            return Err(ConfigError(format!(
                "config is for experiment `{}`, not `{}`",
                want.name(),
                cli.experiment.name()
            )));
        }
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match load(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let out = cli.out.clone().or_else(|| cfg.output.clone()).unwrap_or_else(|| PathBuf::from("out"));
    match run(cli.experiment, &cfg, &out, &RunOptions { resume: cli.resume }) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
