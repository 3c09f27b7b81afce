use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lanecross_cli::config::Arm;
use lanecross_cli::experiment::{checkpoint_path, RunSpec};
use lanecross_cli::{commands, exit, CliError, ExperimentConfig};
use lanecross_core::env::ObsMode;
use lanecross_dqn::Variant;

#[derive(Parser)]
#[command(name = "lanecross", version, about = "Lane-change DQN experiments on replayed highway traffic")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Experiment config (TOML); defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the corpus seed (generate) or the seed list (train, evaluate).
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; overrides `experiment.out`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Write the track corpus and its manifest.
    Generate(Common),
    /// Train every (variant, arm, seed) run.
    Train(Common),
    /// Greedy evaluation of trained checkpoints on the test split.
    Evaluate {
        #[command(flatten)]
        common: Common,
        /// Evaluate this checkpoint instead of the trained runs.
        #[arg(long, requires = "arm")]
        checkpoint: Option<PathBuf>,
        #[arg(long)]
        arm: Option<Arm>,
        #[arg(long, default_value = "dqn")]
        variant: Variant,
    },
    /// Compare evaluation reports against the base arm.
    Compare {
        #[command(flatten)]
        common: Common,
        /// Report JSON files; defaults to every report under `<out>/eval`.
        reports: Vec<PathBuf>,
    },
    /// Print the observation feature names.
    PrintObsLayout {
        #[arg(long, default_value = "ttlc")]
        mode: ObsMode,
    },
}

fn load(common: &Common) -> Result<(ExperimentConfig, PathBuf), CliError> {
    let cfg = match &common.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    let out = common.out.clone().unwrap_or_else(|| cfg.out_dir().to_path_buf());
    Ok((cfg, out))
}

fn with_seed_list(mut cfg: ExperimentConfig, seed: Option<u64>) -> ExperimentConfig {
    if let Some(s) = seed {
        cfg.experiment.seeds = vec![s];
    }
    cfg
}

fn run(cli: Cli) -> Result<String, CliError> {
    match cli.command {
        Command::Generate(common) => {
            let (mut cfg, out) = load(&common)?;
            if let Some(s) = common.seed {
                cfg.corpus.seed = s;
            }
            commands::generate(&cfg, &out)
        }
        Command::Train(common) => {
            let (cfg, out) = load(&common)?;
            commands::train(&with_seed_list(cfg, common.seed), &out)
        }
        Command::Evaluate { common, checkpoint, arm, variant } => {
            let (cfg, out) = load(&common)?;
            let cfg = with_seed_list(cfg, common.seed);
            match (checkpoint, arm) {
                (Some(ckpt), Some(arm)) => {
                    let run = RunSpec { variant, arm, seed: cfg.experiment.seeds[0] };
                    let r = commands::evaluate_checkpoint(&cfg, &out, &ckpt, &run)?;
                    Ok(format!("{}: {}/{} collisions, mean score {:.3}\n", r.file_stem(), r.collisions, r.eval_runs, r.mean_score))
                }
                (None, Some(arm)) => {
                    let run = RunSpec { variant, arm, seed: cfg.experiment.seeds[0] };
                    let ckpt = checkpoint_path(&out, &run);
                    let r = commands::evaluate_checkpoint(&cfg, &out, &ckpt, &run)?;
                    Ok(format!("{}: {}/{} collisions, mean score {:.3}\n", r.file_stem(), r.collisions, r.eval_runs, r.mean_score))
                }
                _ => commands::evaluate(&cfg, &out).map(|(_, text)| text),
            }
        }
        Command::Compare { common, reports } => {
            let (_, out) = load(&common)?;
            let paths = if reports.is_empty() { commands::find_reports(&out)? } else { reports };
            let loaded = paths.iter().map(|p| commands::load_report(p)).collect::<Result<Vec<_>, _>>()?;
            let cmp = commands::compare_reports(&loaded, &out)?;
            for w in &cmp.warnings {
                eprintln!("warning: {w}");
            }
            Ok(cmp.to_table())
        }
        Command::PrintObsLayout { mode } => Ok(commands::obs_layout(mode)),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(text) => {
            print!("{text}");
            ExitCode::from(exit::OK as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
