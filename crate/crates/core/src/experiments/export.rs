//! CSV and JSON output files.
//!
//! CSV format writes `trajectory.csv` (`t,prob,prob_baseline`), an optional
//! `trajectory_unoptimized.csv` with the same columns, `learning_curve.csv`
//! and `learned.json`. JSON format writes a single `result.json` holding
//! everything, which `write_document` can later turn into the CSV files.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::runner::{ExperimentError, LearnedParams, Metadata, Metrics, ScenarioResult, SweepCell};
use crate::dynamics::Trajectory;
use crate::optimize::{IterationRecord, StopReason};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExportFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioInfo {
    pub name: String,
    pub description: String,
    pub n_s: usize,
    pub n_a: usize,
    pub seed: u64,
    pub noisy: bool,
}

/// Trajectory and baseline sampled on a common grid.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryTable {
    pub t: Vec<f64>,
    pub prob: Vec<f64>,
    pub prob_baseline: Vec<f64>,
}

impl TrajectoryTable {
    fn new(traj: &Trajectory, baseline: &Trajectory) -> Self {
        Self {
            t: traj.times.clone(),
            prob: traj.prob.clone(),
            prob_baseline: baseline.prob.clone(),
        }
    }
}

#[derive(Debug, Serialize)]
struct TrajectoryRow {
    t: f64,
    prob: f64,
    prob_baseline: f64,
}

/// Everything a run produced, in serializable form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultDocument {
    pub scenario: ScenarioInfo,
    pub learned: LearnedParams,
    pub metrics: Metrics,
    pub stop_reason: Option<StopReason>,
    pub iterations: usize,
    pub metadata: Metadata,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trajectory: Option<TrajectoryTable>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unoptimized: Option<TrajectoryTable>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub learning_curve: Option<Vec<IterationRecord>>,
}

impl ResultDocument {
    pub fn from_result(r: &ScenarioResult) -> Self {
        Self {
            scenario: ScenarioInfo {
                name: r.name.clone(),
                description: r.description.clone(),
                n_s: r.n_s,
                n_a: r.n_a,
                seed: r.seed,
                noisy: r.noisy,
            },
            learned: r.learned.clone(),
            metrics: r.metrics.clone(),
            stop_reason: r.stop_reason,
            iterations: r.learning_curve.len(),
            metadata: r.metadata.clone(),
            trajectory: Some(TrajectoryTable::new(&r.trajectory, &r.baseline)),
            unoptimized: r
                .unoptimized
                .as_ref()
                .map(|u| TrajectoryTable::new(u, &r.baseline)),
            learning_curve: Some(r.learning_curve.clone()),
        }
    }

    /// Scalars only, as stored in `learned.json`.
    pub fn summary(&self) -> Self {
        Self {
            trajectory: None,
            unoptimized: None,
            learning_curve: None,
            ..self.clone()
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ExperimentError + '_ {
    move |source| ExperimentError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> ExperimentError + '_ {
    move |e| ExperimentError::Io {
        path: path.display().to_string(),
        source: std::io::Error::other(e),
    }
}

pub fn write_trajectory_csv(path: &Path, table: &TrajectoryTable) -> Result<(), ExperimentError> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    if table.t.is_empty() {
        w.write_record(["t", "prob", "prob_baseline"])
            .map_err(csv_err(path))?;
    }
    for i in 0..table.t.len() {
        let row = TrajectoryRow {
            t: table.t[i],
            prob: table.prob[i],
            prob_baseline: table.prob_baseline[i],
        };
        w.serialize(row).map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

pub fn write_learning_curve_csv(
    path: &Path,
    curve: &[IterationRecord],
) -> Result<(), ExperimentError> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    if curve.is_empty() {
        w.write_record([
            "iter",
            "loss",
            "prob",
            "eta_a",
            "gamma_a",
            "delta_a",
            "alpha",
            "t_hat",
            "trace_rho_a",
        ])
        .map_err(csv_err(path))?;
    }
    for r in curve {
        w.serialize(r).map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), ExperimentError> {
    let mut text =
        serde_json::to_string_pretty(value).map_err(|e| ExperimentError::Format(e.to_string()))?;
    text.push('\n');
    fs::write(path, text).map_err(io_err(path))
}

pub fn read_document(path: &Path) -> Result<ResultDocument, ExperimentError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text)
        .map_err(|e| ExperimentError::Format(format!("{}: {e}", path.display())))
}

/// Writes a document into `dir` and returns the files written.
pub fn write_document(
    doc: &ResultDocument,
    dir: &Path,
    format: ExportFormat,
) -> Result<Vec<PathBuf>, ExperimentError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut written = Vec::new();
    match format {
        ExportFormat::Json => {
            let p = dir.join("result.json");
            write_json(&p, doc)?;
            written.push(p);
        }
        ExportFormat::Csv => {
            let p = dir.join("trajectory.csv");
            write_trajectory_csv(
                &p,
                doc.trajectory
                    .as_ref()
                    .unwrap_or(&TrajectoryTable::default()),
            )?;
            written.push(p);
            if let Some(u) = &doc.unoptimized {
                let p = dir.join("trajectory_unoptimized.csv");
                write_trajectory_csv(&p, u)?;
                written.push(p);
            }
            let p = dir.join("learning_curve.csv");
            write_learning_curve_csv(&p, doc.learning_curve.as_deref().unwrap_or(&[]))?;
            written.push(p);
            let p = dir.join("learned.json");
            write_json(&p, &doc.summary())?;
            written.push(p);
        }
    }
    Ok(written)
}

pub fn export(
    result: &ScenarioResult,
    dir: &Path,
    format: ExportFormat,
) -> Result<Vec<PathBuf>, ExperimentError> {
    write_document(&ResultDocument::from_result(result), dir, format)
}

#[derive(Debug, Serialize)]
struct SummaryRow {
    n_s: usize,
    n_a: usize,
    #[serde(rename = "max_P")]
    max_p: Option<f64>,
    eta_a: Option<f64>,
    gamma_a: Option<f64>,
    delta_a: Option<f64>,
    alpha: Option<f64>,
    t_star: Option<f64>,
    status: String,
}

/// One row per sweep cell; failed cells keep their error text in `status`.
pub fn write_sweep_summary(path: &Path, cells: &[SweepCell]) -> Result<(), ExperimentError> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    for c in cells {
        let row = match &c.outcome {
            Ok(r) => SummaryRow {
                n_s: c.n_s,
                n_a: c.n_a,
                max_p: Some(r.metrics.max_prob),
                eta_a: Some(r.learned.eta_a),
                gamma_a: Some(r.learned.gamma_a),
                delta_a: Some(r.learned.delta_a),
                alpha: Some(r.learned.alpha),
                t_star: Some(r.metrics.t_at_max),
                status: "ok".into(),
            },
            Err(e) => SummaryRow {
                n_s: c.n_s,
                n_a: c.n_a,
                max_p: None,
                eta_a: None,
                gamma_a: None,
                delta_a: None,
                alpha: None,
                t_star: None,
                status: format!("error: {e}"),
            },
        };
        w.serialize(row).map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}
