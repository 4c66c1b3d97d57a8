//! Gradient-based learning of the ancilla, the coupling and the read-out
//! time.

mod adam;
mod ancilla;
mod objective;

pub use adam::adam_step;
pub use ancilla::{
    ancilla_state, constrained_ancilla, factor_gradient, initial_factor, project_diagonal,
    AncillaConstraint,
};
pub use objective::{Evaluation, Objective};

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::DynamicsError;
use crate::linalg::{CMatrix, LinalgError};
use crate::model::{CouplingKind, ModelConfig, ModelError};

#[derive(Debug, Error, Clone)]
pub enum OptimizeError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("ancilla factor has vanishing norm")]
    DegenerateAncilla,
    #[error("invalid optimizer configuration: {0}")]
    InvalidConfig(String),
    #[error("non-finite loss or gradient at iteration {iteration}")]
    NonFinite {
        iteration: usize,
        last_valid: Box<OptState>,
    },
}

/// `ln(1 + e^x)`.
pub fn softplus(x: f64) -> f64 {
    if x > 30.0 {
        x
    } else {
        x.exp().ln_1p()
    }
}

pub fn softplus_inverse(y: f64) -> f64 {
    if y > 30.0 {
        y
    } else {
        y.exp_m1().ln()
    }
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// One real coordinate of the learnable parameter vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ParamKey {
    EtaA,
    GammaA,
    DeltaA,
    Alpha,
    AlphaIJ(usize, usize),
    /// Unconstrained time coordinate, `t_hat = softplus(raw)`.
    TimeRaw,
    FactorRe(usize, usize),
    FactorIm(usize, usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptConfig {
    pub learning_rate: f64,
    pub max_iters: usize,
    /// Weight of the `t_hat^2` penalty.
    pub time_penalty: f64,
    pub ancilla_constraint: AncillaConstraint,
    pub minimize_probability: bool,
    /// RK4 step for noisy dynamics.
    pub dt: f64,
    /// Horizon for reported noisy trajectories.
    pub t_window: f64,
    /// Width of the smooth time mask; `5 dt` when unset.
    pub mask_temperature: Option<f64>,
    pub seed: u64,
    pub plateau_tol: f64,
    pub plateau_window: usize,
    /// Draw the learnable Hamiltonian coefficients from `U[0, 1)` instead of
    /// starting at their configured values.
    pub randomize_initial: bool,
}

impl Default for OptConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.01,
            max_iters: 5000,
            time_penalty: 0.0,
            ancilla_constraint: AncillaConstraint::None,
            minimize_probability: false,
            dt: 0.01,
            t_window: 10.0,
            mask_temperature: None,
            seed: 0,
            plateau_tol: 1e-9,
            plateau_window: 200,
            randomize_initial: false,
        }
    }
}

impl OptConfig {
    pub fn validate(&self) -> Result<(), OptimizeError> {
        let bad = |m: &str| Err(OptimizeError::InvalidConfig(m.into()));
        if !(self.learning_rate > 0.0) {
            return bad("learning_rate must be positive");
        }
        if !(self.time_penalty >= 0.0) {
            return bad("time_penalty must be non-negative");
        }
        if !(self.dt > 0.0) {
            return bad("dt must be positive");
        }
        if !(self.t_window > 0.0) {
            return bad("t_window must be positive");
        }
        if self.mask_temperature.is_some_and(|t| !(t > 0.0)) {
            return bad("mask_temperature must be positive");
        }
        if self.plateau_window == 0 {
            return bad("plateau_window must be at least 1");
        }
        Ok(())
    }

    pub fn mask_temperature(&self) -> f64 {
        self.mask_temperature.unwrap_or(5.0 * self.dt)
    }
}

/// Learnable quantities plus Adam accumulators.
#[derive(Debug, Clone, PartialEq)]
pub struct OptState {
    pub eta_a: f64,
    pub gamma_a: f64,
    pub delta_a: f64,
    pub alpha: f64,
    pub alpha_matrix: [[f64; 3]; 3],
    pub t_raw: f64,
    pub ancilla_factor: CMatrix,
    pub adam_m: Vec<f64>,
    pub adam_v: Vec<f64>,
    pub step: u64,
}

impl OptState {
    /// Starting point for `model`: configured values, `t_hat` from the model,
    /// seeded Gaussian factor for a random ancilla.
    pub fn initial(
        model: &ModelConfig,
        cfg: &OptConfig,
        n_params: usize,
    ) -> Result<Self, OptimizeError> {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let dim_a = model.dim_a();
        let factor = initial_factor(&model.ancilla_init, dim_a, || {
            CMatrix::from_fn(dim_a, dim_a, |_, _| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                C64::new(re, im)
            })
        })?;
        let a = &model.ancilla;
        let mut pick = |p: crate::model::Param| {
            if cfg.randomize_initial && p.learnable {
                rng.gen_range(0.0..1.0)
            } else {
                p.value
            }
        };
        let (eta_a, gamma_a, delta_a) = (pick(a.eta), pick(a.gamma), pick(a.delta));
        let alpha = pick(model.coupling.alpha);
        let mut alpha_matrix = [[0.0; 3]; 3];
        if let CouplingKind::General { matrix } = model.coupling.kind {
            alpha_matrix = matrix;
            if cfg.randomize_initial && model.coupling.alpha.learnable {
                for row in alpha_matrix.iter_mut() {
                    for x in row.iter_mut() {
                        *x = rng.gen_range(0.0..1.0);
                    }
                }
            }
        }
        Ok(Self {
            eta_a,
            gamma_a,
            delta_a,
            alpha,
            alpha_matrix,
            t_raw: softplus_inverse(model.t_hat.value),
            ancilla_factor: factor,
            adam_m: vec![0.0; n_params],
            adam_v: vec![0.0; n_params],
            step: 0,
        })
    }

    pub fn t_hat(&self) -> f64 {
        softplus(self.t_raw)
    }

    pub fn get(&self, key: ParamKey) -> f64 {
        match key {
            ParamKey::EtaA => self.eta_a,
            ParamKey::GammaA => self.gamma_a,
            ParamKey::DeltaA => self.delta_a,
            ParamKey::Alpha => self.alpha,
            ParamKey::AlphaIJ(i, j) => self.alpha_matrix[i][j],
            ParamKey::TimeRaw => self.t_raw,
            ParamKey::FactorRe(i, j) => self.ancilla_factor[(i, j)].re,
            ParamKey::FactorIm(i, j) => self.ancilla_factor[(i, j)].im,
        }
    }

    pub fn set(&mut self, key: ParamKey, v: f64) {
        match key {
            ParamKey::EtaA => self.eta_a = v,
            ParamKey::GammaA => self.gamma_a = v,
            ParamKey::DeltaA => self.delta_a = v,
            ParamKey::Alpha => self.alpha = v,
            ParamKey::AlphaIJ(i, j) => self.alpha_matrix[i][j] = v,
            ParamKey::TimeRaw => self.t_raw = v,
            ParamKey::FactorRe(i, j) => self.ancilla_factor[(i, j)].re = v,
            ParamKey::FactorIm(i, j) => self.ancilla_factor[(i, j)].im = v,
        }
    }

    pub fn vector(&self, layout: &[ParamKey]) -> Vec<f64> {
        layout.iter().map(|&k| self.get(k)).collect()
    }

    pub fn set_vector(&mut self, layout: &[ParamKey], v: &[f64]) {
        for (&k, &x) in layout.iter().zip(v) {
            self.set(k, x);
        }
    }
}

/// One row of the learning curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iter: usize,
    pub loss: f64,
    pub prob: f64,
    pub eta_a: f64,
    pub gamma_a: f64,
    pub delta_a: f64,
    pub alpha: f64,
    pub t_hat: f64,
    pub trace_rho_a: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    MaxIters,
    Plateau,
    NothingToLearn,
}

#[derive(Debug, Clone)]
pub struct OptOutcome {
    pub state: OptState,
    pub history: Vec<IterationRecord>,
    /// Loss and probability of the final state with the exact time cut-off.
    pub final_eval: Evaluation,
    pub stop_reason: StopReason,
}

fn record(
    iter: usize,
    eval: &Evaluation,
    state: &OptState,
    obj: &Objective,
) -> Result<IterationRecord, OptimizeError> {
    let rho_a = obj.ancilla(state)?;
    Ok(IterationRecord {
        iter,
        loss: eval.loss,
        prob: eval.prob,
        eta_a: state.eta_a,
        gamma_a: state.gamma_a,
        delta_a: state.delta_a,
        alpha: obj.reported_alpha(state),
        t_hat: state.t_hat(),
        trace_rho_a: rho_a.matrix().trace().re,
    })
}

/// Runs Adam from the model's initial point until `max_iters` or a loss
/// plateau.
pub fn optimize(cfg: &OptConfig, model: &ModelConfig) -> Result<OptOutcome, OptimizeError> {
    let obj = Objective::new(model, cfg)?;
    let state = obj.initial_state()?;
    optimize_from(&obj, state)
}

/// Continues optimization from an explicit state.
pub fn optimize_from(obj: &Objective, mut state: OptState) -> Result<OptOutcome, OptimizeError> {
    let n = obj.layout().len();
    if state.adam_m.len() != n {
        state.adam_m = vec![0.0; n];
        state.adam_v = vec![0.0; n];
    }
    let (history, stop_reason) = run_loop(obj, &mut state)?;
    let final_eval = obj.evaluate_exact(&state)?;
    Ok(OptOutcome {
        state,
        history,
        final_eval,
        stop_reason,
    })
}

fn run_loop(
    obj: &Objective,
    state: &mut OptState,
) -> Result<(Vec<IterationRecord>, StopReason), OptimizeError> {
    let cfg = obj.config();
    let mut history = Vec::new();
    if obj.layout().is_empty() {
        let eval = obj.evaluate(state)?;
        history.push(record(0, &eval, state, obj)?);
        return Ok((history, StopReason::NothingToLearn));
    }
    let window = cfg.plateau_window;
    for iter in 0..cfg.max_iters {
        let (eval, grad) = obj.loss_and_gradient(state)?;
        if !eval.loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return Err(OptimizeError::NonFinite {
                iteration: iter,
                last_valid: Box::new(state.clone()),
            });
        }
        history.push(record(iter, &eval, state, obj)?);
        if history.len() > window {
            let recent = &history[history.len() - 1 - window..];
            let (lo, hi) = recent
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
                    (lo.min(r.loss), hi.max(r.loss))
                });
            if hi - lo < cfg.plateau_tol {
                return Ok((history, StopReason::Plateau));
            }
        }
        adam_step(state, obj.layout(), &grad, cfg);
    }
    let eval = obj.evaluate(state)?;
    if !eval.loss.is_finite() {
        return Err(OptimizeError::NonFinite {
            iteration: cfg.max_iters,
            last_valid: Box::new(state.clone()),
        });
    }
    history.push(record(cfg.max_iters, &eval, state, obj)?);
    Ok((history, StopReason::MaxIters))
}
