//! `run`: one configured experiment, written as `records.csv` and
//! `summary.json`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use super::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::optim::{run_optimizer, Trajectory, TrainRecord};

/// Fixed step sizes searched for the SGD/AMSGrad/AccSGD baselines.
pub const BASELINE_RATE_GRID: [f64; 7] = [0.011, 0.009, 0.008, 0.007, 0.006, 0.005, 0.004];

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub config: ExperimentConfig,
    pub seed: u64,
    pub algorithm: String,
    pub groups: Vec<String>,
    pub steps_requested: usize,
    pub steps_completed: usize,
    pub diverged: bool,
    pub divergence_step: Option<usize>,
    pub divergence_reason: Option<String>,
    /// Full training objective (with regularizer) at the last iterate.
    pub final_train_loss: Option<f64>,
    /// Same, without the regularizer.
    pub final_train_data_loss: Option<f64>,
    pub final_test_loss: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub trajectory: Trajectory,
    pub summary: Summary,
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

/// Runs the experiment. `limit` caps the dataset (overriding the config).
pub fn run_experiment(config: &ExperimentConfig, limit: Option<usize>) -> Result<Outcome> {
    config.validate()?;
    let built = config.build(limit)?;
    let obj = built.objective.as_ref();
    let opts = config.run_options(built.sampling_seed);
    let trajectory = run_optimizer(obj, &built.x0, &config.algorithm, &config.rate, &opts)?;
    let (train, test) = if trajectory.diverged() {
        (None, None)
    } else {
        let full = obj.full_value(&trajectory.final_x)?;
        let test = obj.held_out_loss(&trajectory.final_x).transpose()?;
        (Some(full), test)
    };
    let summary = Summary {
        config: config.clone(),
        seed: config.seed,
        algorithm: config.algorithm.label().to_string(),
        groups: obj.groups().into_iter().map(|g| g.name).collect(),
        steps_requested: config.steps,
        steps_completed: trajectory.records.len() - 1,
        diverged: trajectory.diverged(),
        divergence_step: trajectory.diverged_at,
        divergence_reason: trajectory.divergence.clone(),
        final_train_loss: train.and_then(|l| finite(l.total)),
        final_train_data_loss: train.and_then(|l| finite(l.data)),
        final_test_loss: test.and_then(|l| finite(l.total)),
    };
    Ok(Outcome { trajectory, summary })
}

/// Shortest text that parses back to the same `f64`.
fn num(out: &mut String, v: f64) {
    write!(out, "{v:?}").expect("write to string");
}

/// `iter,train_loss,test_loss,lr_g0..,L_g0..,wall_ms,diverged`; empty cells
/// for absent values.
pub fn records_csv(records: &[TrainRecord], groups: usize) -> String {
    let mut out = String::from("iter,train_loss,test_loss");
    for k in 0..groups {
        write!(out, ",lr_g{k}").unwrap();
    }
    for k in 0..groups {
        write!(out, ",L_g{k}").unwrap();
    }
    out.push_str(",wall_ms,diverged\n");
    for r in records {
        write!(out, "{},", r.iter).unwrap();
        num(&mut out, r.train_loss);
        out.push(',');
        if let Some(t) = r.test_loss {
            num(&mut out, t);
        }
        for k in 0..groups {
            out.push(',');
            if let Some(v) = r.lr.get(k) {
                num(&mut out, *v);
            }
        }
        for k in 0..groups {
            out.push(',');
            if let Some(v) = r.l_hat.as_ref().and_then(|l| l.get(k)) {
                num(&mut out, *v);
            }
        }
        out.push(',');
        if let Some(w) = r.wall_ms {
            num(&mut out, w);
        }
        writeln!(out, ",{}", u8::from(r.diverged)).unwrap();
    }
    out
}

/// Writes `records.csv` and `summary.json` into `dir` (created if needed).
pub fn write_outcome(outcome: &Outcome, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let csv = records_csv(&outcome.trajectory.records, outcome.summary.groups.len());
    let path = dir.join("records.csv");
    fs::write(&path, csv).map_err(|e| Error::io(&path, e))?;
    let path = dir.join("summary.json");
    let json = serde_json::to_string_pretty(&outcome.summary)?;
    fs::write(&path, json + "\n").map_err(|e| Error::io(&path, e))?;
    Ok(())
}

/// Runs independent experiments in parallel, each into its own directory.
pub fn run_grid(jobs: &[(ExperimentConfig, PathBuf)], limit: Option<usize>) -> Vec<Result<Summary>> {
    jobs.par_iter()
        .map(|(cfg, dir)| {
            let outcome = run_experiment(cfg, limit)?;
            write_outcome(&outcome, dir)?;
            Ok(outcome.summary)
        })
        .collect()
}
