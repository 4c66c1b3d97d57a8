use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::config::{ConfigError, Mode, ReportConfig, ScenarioConfig};
use crate::algebra::UnitSystem;
use crate::dynamics::{
    evolve_rk4, evolve_unitary, DensityMatrix, DynamicsError, GkslGenerator, Rk4Options, Trajectory,
};
use crate::model::CouplingKind;
use crate::optimize::{
    optimize_from, IterationRecord, Objective, OptState, OptimizeError, StopReason,
};
use crate::oracle::stationary_probability;

/// Tolerance band around the stationary value used for settling times.
pub const SETTLE_TOL: f64 = 0.01;
/// Level whose first crossing measures how fast a noisy transient rises.
pub const PASSAGE_LEVEL: f64 = 0.19;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Optimize(#[from] OptimizeError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed result file: {0}")]
    Format(String),
}

impl ExperimentError {
    /// True for problems with the input rather than the run.
    pub fn is_config_error(&self) -> bool {
        matches!(self, ExperimentError::Config(_))
            || matches!(
                self,
                ExperimentError::Optimize(
                    OptimizeError::InvalidConfig(_) | OptimizeError::Model(_)
                )
            )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub unit_system: UnitSystem,
    pub time_unit: String,
    pub version: String,
}

impl Metadata {
    fn new(unit_system: UnitSystem) -> Self {
        let energy = match unit_system {
            UnitSystem::DeltaSUnits => "Delta_S",
            UnitSystem::GammaSUnits => "gamma_S",
        };
        Self {
            unit_system,
            time_unit: format!("hbar/{energy}; 1 time unit ~ 10 ms for cold-atom energy scales"),
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

/// Final parameters and ancilla state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnedParams {
    pub eta_a: f64,
    pub gamma_a: f64,
    pub delta_a: f64,
    pub alpha: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub alpha_matrix: Option<[[f64; 3]; 3]>,
    pub t_hat: f64,
    pub rho_a_dim: usize,
    /// Row-major, real and imaginary parts interleaved.
    pub rho_a: Vec<f64>,
}

impl LearnedParams {
    /// Diagonal of `rho_A` (number-state populations).
    pub fn populations(&self) -> Vec<f64> {
        (0..self.rho_a_dim)
            .map(|k| self.rho_a[2 * (k * self.rho_a_dim + k)])
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    /// `P` at `t_hat` (exact time cut-off) and the matching loss.
    pub prob_at_t_hat: f64,
    pub loss: f64,
    pub max_prob: f64,
    pub t_at_max: f64,
    pub final_prob: f64,
    pub baseline_max_prob: f64,
    pub baseline_final_prob: f64,
    pub unoptimized_max_prob: Option<f64>,
    pub unoptimized_final_prob: Option<f64>,
    /// `1/(N_S + 1)` for noisy scenarios.
    pub stationary_prob: Option<f64>,
    pub first_passage: Option<f64>,
    pub settle_time: Option<f64>,
    pub unoptimized_settle_time: Option<f64>,
    pub baseline_settle_time: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct ScenarioResult {
    pub name: String,
    pub description: String,
    pub n_s: usize,
    pub n_a: usize,
    pub seed: u64,
    pub noisy: bool,
    /// Learned model, free evolution over the report window.
    pub trajectory: Trajectory,
    /// System alone, same grid.
    pub baseline: Trajectory,
    /// Coupled model at its starting parameters, same grid.
    pub unoptimized: Option<Trajectory>,
    pub learned: LearnedParams,
    pub state: OptState,
    pub learning_curve: Vec<IterationRecord>,
    pub stop_reason: Option<StopReason>,
    pub metrics: Metrics,
    pub metadata: Metadata,
}

fn linspace(t_max: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| t_max * i as f64 / (n - 1) as f64).collect()
}

fn rk4_options(report: &ReportConfig, dim_s: usize) -> Rk4Options {
    let mut opts = Rk4Options::new(report.t_max, report.dt, dim_s);
    let steps = opts.n_steps().max(1);
    opts.record_stride = steps.div_ceil(report.max_rows - 1).max(1);
    opts
}

fn coupled_trajectory(
    obj: &Objective,
    s: &OptState,
    report: &ReportConfig,
) -> Result<Trajectory, ExperimentError> {
    let rho0 = obj.initial_joint_state(s)?;
    let dim_s = obj.operators().dim_s;
    Ok(if obj.is_noisy() {
        evolve_rk4(&rho0, &obj.generator(s)?, &rk4_options(report, dim_s))?
    } else {
        evolve_unitary(
            &obj.hamiltonian(s),
            &rho0,
            &linspace(report.t_max, report.points),
            dim_s,
            None,
        )?
    })
}

fn baseline_trajectory(
    obj: &Objective,
    report: &ReportConfig,
) -> Result<Trajectory, ExperimentError> {
    let ops = obj.operators();
    let rho0: &DensityMatrix = &ops.rho_system;
    let h = ops.h_system.clone();
    Ok(if obj.is_noisy() {
        let gen = GkslGenerator::system(h, ops.ops_s.jz.clone(), obj.model().noise.lambda_s)?;
        evolve_rk4(rho0, &gen, &rk4_options(report, ops.dim_s))?
    } else {
        evolve_unitary(
            &h,
            rho0,
            &linspace(report.t_max, report.points),
            ops.dim_s,
            None,
        )?
    })
}

fn learned_params(obj: &Objective, s: &OptState) -> Result<LearnedParams, ExperimentError> {
    let rho = obj.ancilla(s)?;
    let m = rho.matrix();
    Ok(LearnedParams {
        eta_a: s.eta_a,
        gamma_a: s.gamma_a,
        delta_a: s.delta_a,
        alpha: obj.reported_alpha(s),
        alpha_matrix: matches!(obj.model().coupling.kind, CouplingKind::General { .. })
            .then_some(s.alpha_matrix),
        t_hat: s.t_hat(),
        rho_a_dim: m.rows(),
        rho_a: m.as_slice().iter().flat_map(|z| [z.re, z.im]).collect(),
    })
}

/// Settling time into the stationary band: the last recorded time outside it
/// (zero if the trajectory never leaves it).
fn settle_time(traj: &Trajectory, target: f64) -> f64 {
    traj.last_departure(target, SETTLE_TOL).unwrap_or(0.0)
}

/// Optimizes (when there is anything to learn) and evaluates one scenario.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ScenarioResult, ExperimentError> {
    let obj = Objective::new(&cfg.model, &cfg.opt)?;
    let start = obj.initial_state()?;
    let (state, curve, stop, final_eval) = if cfg.mode == Mode::Optimize && !obj.layout().is_empty()
    {
        let out = optimize_from(&obj, start.clone())?;
        (
            out.state,
            out.history,
            Some(out.stop_reason),
            out.final_eval,
        )
    } else {
        let eval = obj.evaluate_exact(&start)?;
        (start.clone(), Vec::new(), None, eval)
    };

    let trajectory = coupled_trajectory(&obj, &state, &cfg.report)?;
    let baseline = baseline_trajectory(&obj, &cfg.report)?;
    let unoptimized = if cfg.report.unoptimized {
        Some(coupled_trajectory(&obj, &start, &cfg.report)?)
    } else {
        None
    };

    let noisy = obj.is_noisy();
    let stationary = if noisy {
        Some(stationary_probability(cfg.model.n_s).expect("n_s >= 1"))
    } else {
        None
    };
    let (t_at_max, max_prob) = trajectory.max_prob().unwrap_or((0.0, 0.0));
    let last = |t: &Trajectory| t.prob.last().copied().unwrap_or(0.0);
    let metrics = Metrics {
        prob_at_t_hat: final_eval.prob,
        loss: final_eval.loss,
        max_prob,
        t_at_max,
        final_prob: last(&trajectory),
        baseline_max_prob: baseline.max_prob().map_or(0.0, |m| m.1),
        baseline_final_prob: last(&baseline),
        unoptimized_max_prob: unoptimized.as_ref().and_then(|u| u.max_prob()).map(|m| m.1),
        unoptimized_final_prob: unoptimized.as_ref().map(last),
        stationary_prob: stationary,
        first_passage: if noisy {
            trajectory.first_passage(PASSAGE_LEVEL)
        } else {
            None
        },
        settle_time: stationary.map(|p| settle_time(&trajectory, p)),
        unoptimized_settle_time: stationary
            .and_then(|p| unoptimized.as_ref().map(|u| settle_time(u, p))),
        baseline_settle_time: stationary.map(|p| settle_time(&baseline, p)),
    };

    Ok(ScenarioResult {
        name: cfg.name.clone(),
        description: cfg.description.clone(),
        n_s: cfg.model.n_s,
        n_a: cfg.model.n_a,
        seed: cfg.opt.seed,
        noisy,
        trajectory,
        baseline,
        unoptimized,
        learned: learned_params(&obj, &state)?,
        state,
        learning_curve: curve,
        stop_reason: stop,
        metrics,
        metadata: Metadata::new(cfg.model.conv_s.unit_system),
    })
}

/// One grid cell of a sweep.
#[derive(Debug)]
pub struct SweepCell {
    pub n_s: usize,
    pub n_a: usize,
    pub outcome: Result<ScenarioResult, ExperimentError>,
}

/// Runs every `(n_s, n_a)` cell; a failing cell is recorded and the sweep
/// continues. `on_cell` sees each cell as soon as it finishes.
pub fn run_sweep(cfg: &ScenarioConfig, mut on_cell: impl FnMut(&SweepCell)) -> Vec<SweepCell> {
    let Some(sweep) = &cfg.sweep else {
        let r = run_scenario(cfg);
        let cell = SweepCell {
            n_s: cfg.model.n_s,
            n_a: cfg.model.n_a,
            outcome: r,
        };
        on_cell(&cell);
        return vec![cell];
    };
    let mut cells = Vec::new();
    for (n_s, n_a) in sweep.cells() {
        let outcome = run_scenario(&cfg.cell(n_s, n_a));
        let cell = SweepCell { n_s, n_a, outcome };
        on_cell(&cell);
        cells.push(cell);
    }
    cells
}
