use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use harness::{preset, presets, report, run_experiment, ExperimentConfig, RunOptions};

/// Global phase estimation experiments.
#[derive(Parser)]
#[command(name = "gpe", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML config.
    Run {
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Run a named preset (see `gpe presets`).
    Preset {
        name: String,
        #[command(flatten)]
        common: Common,
    },
    /// List presets, or print one as TOML.
    Presets { name: Option<String> },
    /// Summarize an experiment directory.
    Report { dir: PathBuf },
}

#[derive(clap::Args)]
struct Common {
    /// Output directory (overrides `output_dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override any config key, e.g. `--set train.max_iters=500`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[arg(long)]
    quiet: bool,
}

fn execute(cfg: ExperimentConfig, common: Common) -> anyhow::Result<ExitCode> {
    let mut cfg = cfg.with_overrides(&common.overrides)?;
    if let Some(out) = common.out {
        cfg.output_dir = Some(out);
    }
    if cfg.output_dir.is_none() {
        cfg.output_dir = Some(PathBuf::from("out").join(&cfg.name));
    }
    let outcome = run_experiment(&cfg, RunOptions { progress: !common.quiet })?;
    print!("{}", outcome.report);
    if let Some(dir) = &cfg.output_dir {
        println!("artifacts: {}", dir.display());
    }
    Ok(if outcome.any_failed() { ExitCode::FAILURE } else { ExitCode::SUCCESS })
}

fn main() -> anyhow::Result<ExitCode> {
    match Cli::parse().command {
        Command::Run { config, common } => {
            let cfg = ExperimentConfig::load(&config).with_context(|| format!("loading {}", config.display()))?;
            execute(cfg, common)
        }
        Command::Preset { name, common } => execute(preset(&name)?, common),
        Command::Presets { name: None } => {
            for (name, cfg) in presets() {
                let labels: Vec<_> = cfg.models.iter().map(|m| m.label.as_str()).collect();
                println!("{name:<20} runs={:<3} shots={:<8} models={}", cfg.runs, cfg.eval.shots, labels.join(","));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Presets { name: Some(name) } => {
            print!("{}", preset(&name)?.to_toml());
            Ok(ExitCode::SUCCESS)
        }
        Command::Report { dir } => {
            let r = report(&dir)?;
            r.write(&dir.join(harness::experiment::SUMMARY_DIR))?;
            print!("{r}");
            Ok(if r.failures.is_empty() && !r.is_partial() { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
    }
}
