//! Benchmark matrix: many seeded episodes reduced to median/min/max rows.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::episode::{run_episode, EpisodeError, EpisodeOptions};
use crate::metrics::MetricsReport;
use crate::policy::PolicySpec;
use crate::scenario::{ScenarioConfig, TaskKind};

/// One (task, policy) cell of the matrix and the seeds to run it with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixEntry {
    pub task: TaskKind,
    pub policy: PolicySpec,
    pub seeds: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct BenchmarkMatrix {
    /// Shared scenario; each entry only swaps the task.
    pub base: ScenarioConfig,
    pub entries: Vec<MatrixEntry>,
}

impl BenchmarkMatrix {
    pub fn config_for(&self, task: TaskKind) -> ScenarioConfig {
        ScenarioConfig {
            task,
            ..self.base.clone()
        }
    }

    pub fn validate(&self) -> Result<(), EpisodeError> {
        for entry in &self.entries {
            let cfg = self.config_for(entry.task);
            cfg.validate().map_err(|e| EpisodeError::Env(e.into()))?;
            entry.policy.validate(&cfg.physics)?;
        }
        Ok(())
    }
}

/// How matrix episodes are scheduled. Results do not depend on it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Uses the rayon pool when the `parallel` feature is enabled and
    /// falls back to sequential execution otherwise.
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeSummary {
    pub task: TaskKind,
    pub policy: String,
    pub seed: u64,
    pub metrics: MetricsReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRow {
    pub task: TaskKind,
    pub policy: String,
    pub metric: String,
    pub median: f64,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct BenchmarkReport {
    pub rows: Vec<BenchmarkRow>,
    pub episodes: Vec<EpisodeSummary>,
}

pub const METRIC_NAMES: [&str; 5] = [
    "total_distance",
    "net_displacement",
    "projected_displacement",
    "score_j",
    "success",
];

fn metric_value(m: &MetricsReport, name: &str) -> f64 {
    match name {
        "total_distance" => m.total_distance,
        "net_displacement" => m.net_displacement,
        "projected_displacement" => m.projected_displacement,
        "score_j" => m.score_j,
        "success" => f64::from(u8::from(m.success)),
        _ => unreachable!("unknown metric {name}"),
    }
}

/// Median (mean of the two middle values for even counts), min, and max.
/// Returns `None` for an empty slice.
pub fn summarize(values: &[f64]) -> Option<(f64, f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    };
    Some((median, sorted[0], sorted[n - 1]))
}

type Job = (usize, u64);

fn run_jobs(matrix: &BenchmarkMatrix, jobs: &[Job], execution: Execution) -> Vec<Result<MetricsReport, EpisodeError>> {
    let run = |&(entry, seed): &Job| {
        let e = &matrix.entries[entry];
        run_episode(&matrix.config_for(e.task), &e.policy, seed, EpisodeOptions::default()).map(|(_, m)| m)
    };
    match execution {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            jobs.par_iter().map(run).collect()
        }
        _ => jobs.iter().map(run).collect(),
    }
}

/// Runs every (entry, seed) episode and aggregates each entry's metrics.
/// Rows follow entry order, then `METRIC_NAMES` order; episodes follow
/// entry order, then seed order.
pub fn run_benchmark(matrix: &BenchmarkMatrix, execution: Execution) -> Result<BenchmarkReport, EpisodeError> {
    matrix.validate()?;
    let mut jobs: Vec<Job> = Vec::new();
    for (i, entry) in matrix.entries.iter().enumerate() {
        let mut seeds = entry.seeds.clone();
        seeds.sort_unstable();
        jobs.extend(seeds.into_iter().map(|s| (i, s)));
    }
    let results = run_jobs(matrix, &jobs, execution);

    let mut report = BenchmarkReport::default();
    for (&(entry, seed), result) in jobs.iter().zip(results) {
        let e = &matrix.entries[entry];
        report.episodes.push(EpisodeSummary {
            task: e.task,
            policy: e.policy.name().to_string(),
            seed,
            metrics: result?,
        });
    }
    for (i, entry) in matrix.entries.iter().enumerate() {
        let metrics: Vec<MetricsReport> = jobs
            .iter()
            .zip(&report.episodes)
            .filter(|((e, _), _)| *e == i)
            .map(|(_, s)| s.metrics)
            .collect();
        for name in METRIC_NAMES {
            let values: Vec<f64> = metrics.iter().map(|m| metric_value(m, name)).collect();
            if let Some((median, min, max)) = summarize(&values) {
                report.rows.push(BenchmarkRow {
                    task: entry.task,
                    policy: entry.policy.name().to_string(),
                    metric: name.to_string(),
                    median,
                    min,
                    max,
                });
            }
        }
    }
    Ok(report)
}

pub fn write_report_csv<W: Write>(report: &BenchmarkReport, mut out: W) -> io::Result<()> {
    writeln!(out, "task,policy,metric,median,min,max")?;
    for r in &report.rows {
        writeln!(out, "{},{},{},{:?},{:?},{:?}", r.task, r.policy, r.metric, r.median, r.min, r.max)?;
    }
    out.flush()
}
