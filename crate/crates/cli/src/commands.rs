//! Subcommand implementations. Each returns the text meant for stdout.

use std::path::{Path, PathBuf};

use lanecross_core::env::{observation_layout, ObsMode};
use lanecross_nn::checkpoint;
use serde::Serialize;

use crate::compare::{compare, Comparison};
use crate::config::ExperimentConfig;
use crate::corpus::{load_corpus, write_corpus};
use crate::experiment::{agent_seed, checkpoint_path, env_seed, evaluate_policy, runs, train_dir, train_run, RunSpec};
use crate::report::EvalReport;
use crate::{read_file, write_file, CliError};

pub fn eval_dir(out: &Path) -> PathBuf {
    out.join("eval")
}

pub fn generate(cfg: &ExperimentConfig, out: &Path) -> Result<String, CliError> {
    let m = write_corpus(cfg, out)?;
    Ok(format!("wrote {} tracks to {}\n", m.tracks.len(), crate::corpus::tracks_dir(out).display()))
}

#[derive(Debug, Serialize)]
struct TrainedRun {
    run: String,
    #[serde(flatten)]
    spec: RunSpec,
    obs_len: usize,
    env_seed: u64,
    agent_seed: u64,
    episodes: usize,
    env_steps: u64,
    updates: u64,
    collisions: usize,
    checkpoint: String,
    metrics: String,
}

#[derive(Debug, Serialize)]
struct TrainManifest {
    experiment: String,
    seed_scheme: &'static str,
    train_ids: Vec<usize>,
    test_ids: Vec<usize>,
    runs: Vec<TrainedRun>,
}

/// Trains every configured run; one checkpoint and metrics CSV each.
pub fn train(cfg: &ExperimentConfig, out: &Path) -> Result<String, CliError> {
    let tracks = load_corpus(cfg, out)?;
    let mut trained = Vec::new();
    let mut text = String::new();
    for run in runs(cfg) {
        let res = train_run(cfg, &tracks, &run)?;
        let dir = train_dir(out, &run);
        let ckpt = checkpoint_path(out, &run);
        write_file(&dir.join("metrics.csv"), &res.csv)?;
        write_file(&ckpt, checkpoint::to_bytes(&res.policy))?;
        text += &format!(
            "{}: {} episodes, {} collisions, obs_len {}\n",
            run.name(),
            res.summary.episodes,
            res.summary.collisions,
            run.arm.obs_mode().len()
        );
        trained.push(TrainedRun {
            run: run.name(),
            spec: run,
            obs_len: run.arm.obs_mode().len(),
            env_seed: env_seed(run.seed),
            agent_seed: agent_seed(run.seed),
            episodes: res.summary.episodes,
            env_steps: res.summary.env_steps,
            updates: res.summary.updates,
            collisions: res.summary.collisions,
            checkpoint: format!("train/{}/checkpoint.lcqn", run.name()),
            metrics: format!("train/{}/metrics.csv", run.name()),
        });
    }
    let (train_ids, test_ids) = cfg.split();
    let manifest = TrainManifest {
        experiment: cfg.experiment.name.clone(),
        seed_scheme: "splitmix64(seed, [SPAWN]) for episodes, splitmix64(seed, [AGENT]) for the agent",
        train_ids,
        test_ids,
        runs: trained,
    };
    write_file(&out.join("train").join("manifest.json"), serde_json::to_string_pretty(&manifest).expect("json") + "\n")?;
    Ok(text)
}

fn load_checkpoint(path: &Path) -> Result<lanecross_nn::Network, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    checkpoint::from_bytes(&bytes).map_err(|e| CliError::io(path, e))
}

fn write_report(out: &Path, report: &EvalReport) -> Result<(), CliError> {
    let dir = eval_dir(out);
    write_file(&dir.join(format!("{}.json", report.file_stem())), report.to_json())?;
    write_file(&dir.join(format!("{}.csv", report.file_stem())), report.to_csv())
}

/// Evaluates one checkpoint as `run`.
pub fn evaluate_checkpoint(cfg: &ExperimentConfig, out: &Path, ckpt: &Path, run: &RunSpec) -> Result<EvalReport, CliError> {
    let tracks = load_corpus(cfg, out)?;
    let net = load_checkpoint(ckpt)?;
    let rows = evaluate_policy(cfg, &tracks, &net, run.arm, run.seed)?;
    let report = EvalReport::new(run.variant, run.arm, run.seed, ckpt.display().to_string(), net.input_dim(), rows);
    write_report(out, &report)?;
    Ok(report)
}

/// Evaluates every configured run from its checkpoint under `out/train`.
pub fn evaluate(cfg: &ExperimentConfig, out: &Path) -> Result<(Vec<EvalReport>, String), CliError> {
    let tracks = load_corpus(cfg, out)?;
    let mut reports = Vec::new();
    let mut text = String::new();
    for run in runs(cfg) {
        let ckpt = checkpoint_path(out, &run);
        let net = load_checkpoint(&ckpt)?;
        let rows = evaluate_policy(cfg, &tracks, &net, run.arm, run.seed)?;
        let rel = format!("train/{}/checkpoint.lcqn", run.name());
        let report = EvalReport::new(run.variant, run.arm, run.seed, rel, net.input_dim(), rows);
        write_report(out, &report)?;
        text += &format!(
            "{}: {}/{} collisions, mean score {:.3}\n",
            run.name(),
            report.collisions,
            report.eval_runs,
            report.mean_score
        );
        reports.push(report);
    }
    Ok((reports, text))
}

/// Reports under `out/eval`, sorted by file name.
pub fn find_reports(out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let dir = eval_dir(out);
    let mut paths: Vec<PathBuf> = std::fs::read_dir(&dir)
        .map_err(|e| CliError::io(&dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    Ok(paths)
}

pub fn load_report(path: &Path) -> Result<EvalReport, CliError> {
    EvalReport::from_json(&read_file(path)?).map_err(|e| CliError::io(path, e))
}

/// Compares reports and writes `compare.{csv,json,txt}` under `out`.
pub fn compare_reports(reports: &[EvalReport], out: &Path) -> Result<Comparison, CliError> {
    let cmp = compare(reports)?;
    write_file(&out.join("compare.csv"), cmp.to_csv())?;
    write_file(&out.join("compare.json"), cmp.to_json())?;
    write_file(&out.join("compare.txt"), cmp.to_table())?;
    Ok(cmp)
}

pub fn obs_layout(mode: ObsMode) -> String {
    observation_layout(mode)
        .iter()
        .enumerate()
        .map(|(i, name)| format!("{i:>2} {name}\n"))
        .collect()
}
