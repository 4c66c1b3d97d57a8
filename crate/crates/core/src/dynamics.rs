//! Density-matrix evolution: exact unitary propagation for closed systems
//! and a classical RK4 integrator for the dephasing (GKSL) master equation.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{hermitian_eig, matmul_into, partial_trace_ancilla, CMatrix, LinalgError};

/// Hermiticity tolerance of a valid state.
pub const HERMITIAN_TOL: f64 = 1e-9;
/// Trace tolerance of a valid state.
pub const TRACE_TOL: f64 = 1e-9;
/// Smallest admissible eigenvalue of a valid state.
pub const MIN_EIGENVALUE: f64 = -1e-8;
/// Largest admissible per-step change of the trace in RK4.
pub const TRACE_DRIFT_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("invalid density matrix: {0}")]
    InvalidState(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("time step must be positive, got {0}")]
    NonPositiveStep(f64),
    #[error("times must be ascending and start at t >= 0")]
    BadTimeGrid,
    #[error("state invariant broken at step {step}: {what}")]
    InvariantBreach { step: usize, what: String },
}

/// Hermitian, positive-semidefinite, unit-trace matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(CMatrix);

impl DensityMatrix {
    /// Validates all state invariants (requires an eigendecomposition).
    pub fn new(m: CMatrix) -> Result<Self, DynamicsError> {
        let rho = Self(m);
        rho.validate()?;
        Ok(rho)
    }

    /// Wraps without checking; for matrices that are states by construction.
    pub fn new_unchecked(m: CMatrix) -> Self {
        Self(m)
    }

    /// `|k><k|` in a `dim`-dimensional space.
    pub fn basis_state(dim: usize, k: usize) -> Self {
        let mut m = CMatrix::zeros(dim, dim);
        m[(k, k)] = C64::new(1.0, 0.0);
        Self(m)
    }

    /// All `n` bosons in the left well, `|N><N|`.
    pub fn all_left(n_bosons: usize) -> Self {
        Self::basis_state(n_bosons + 1, n_bosons)
    }

    /// All bosons in the right well, `|0><0|`.
    pub fn all_right(n_bosons: usize) -> Self {
        Self::basis_state(n_bosons + 1, 0)
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self(CMatrix::identity(dim).scale_real(1.0 / dim as f64))
    }

    /// `|psi><psi| / <psi|psi>`.
    pub fn from_pure(psi: &[C64]) -> Result<Self, DynamicsError> {
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(DynamicsError::InvalidState(
                "zero or non-finite state vector".into(),
            ));
        }
        Ok(Self(CMatrix::outer(psi, psi).scale_real(1.0 / norm)))
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        DensityMatrix(crate::linalg::kron(&self.0, &other.0))
    }

    pub fn min_eigenvalue(&self) -> Result<f64, DynamicsError> {
        Ok(hermitian_eig(&self.0.hermitian_part())?.values[0])
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        let m = &self.0;
        if !m.is_square() {
            return Err(DynamicsError::InvalidState(format!(
                "{}x{} is not square",
                m.rows(),
                m.cols()
            )));
        }
        if !m.all_finite() {
            return Err(DynamicsError::InvalidState("non-finite entries".into()));
        }
        let herm = m.hermiticity_error();
        if herm > HERMITIAN_TOL {
            return Err(DynamicsError::InvalidState(format!(
                "not Hermitian (deviation {herm:e})"
            )));
        }
        let tr = m.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(DynamicsError::InvalidState(format!("trace {tr} != 1")));
        }
        let lo = self.min_eigenvalue()?;
        if lo < MIN_EIGENVALUE {
            return Err(DynamicsError::InvalidState(format!(
                "negative eigenvalue {lo:e}"
            )));
        }
        Ok(())
    }
}

/// Dephasing strengths for system and ancilla.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct NoiseParams {
    pub lambda_s: f64,
    pub lambda_a: f64,
}

impl NoiseParams {
    pub fn new(lambda_s: f64, lambda_a: f64) -> Self {
        Self { lambda_s, lambda_a }
    }

    pub fn is_noiseless(&self) -> bool {
        self.lambda_s == 0.0 && self.lambda_a == 0.0
    }
}

/// State at a recorded time.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub time: f64,
    pub state: DensityMatrix,
}

/// Tunneling probability sampled along a time grid.
#[derive(Debug, Clone, Default)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub prob: Vec<f64>,
    pub snapshots: Vec<Snapshot>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// `(t, P)` at the largest probability (first one on ties).
    pub fn max_prob(&self) -> Option<(f64, f64)> {
        let mut best: Option<(f64, f64)> = None;
        for (&t, &p) in self.times.iter().zip(&self.prob) {
            if best.map_or(true, |(_, bp)| p > bp) {
                best = Some((t, p));
            }
        }
        best
    }

    /// First recorded time with `P >= level`.
    pub fn first_passage(&self, level: f64) -> Option<f64> {
        self.times
            .iter()
            .zip(&self.prob)
            .find(|(_, &p)| p >= level)
            .map(|(&t, _)| t)
    }

    /// Last recorded time at which `|P - target| > tol`, or `None` if the
    /// whole trajectory is within tolerance.
    pub fn last_departure(&self, target: f64, tol: f64) -> Option<f64> {
        self.times
            .iter()
            .zip(&self.prob)
            .rev()
            .find(|(_, &p)| (p - target).abs() > tol)
            .map(|(&t, _)| t)
    }

    /// Recorded probability closest in time to `t`.
    pub fn prob_near(&self, t: f64) -> Option<f64> {
        let idx = self
            .times
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - t).abs().total_cmp(&(b.1 - t).abs()))?
            .0;
        Some(self.prob[idx])
    }
}

/// `<0|rho_S|0>` (all bosons right), with round-off below zero clamped.
pub fn tunneling_probability(rho_s: &DensityMatrix) -> f64 {
    clamp_probability(rho_s.matrix()[(0, 0)].re)
}

fn clamp_probability(p: f64) -> f64 {
    if (-1e-9..0.0).contains(&p) {
        0.0
    } else {
        p
    }
}

/// Tunneling probability read directly off a joint state without forming the
/// reduced matrix: `sum_a <0,a|rho|0,a>`.
pub fn joint_tunneling_probability(rho: &CMatrix, dim_s: usize) -> f64 {
    let dim_a = rho.rows() / dim_s;
    clamp_probability((0..dim_a).map(|a| rho[(a, a)].re).sum())
}

fn check_times(times: &[f64]) -> Result<(), DynamicsError> {
    if times.first().is_some_and(|&t| t < 0.0) || times.windows(2).any(|w| w[1] < w[0]) {
        return Err(DynamicsError::BadTimeGrid);
    }
    Ok(())
}

/// `rho(t) = U(t) rho0 U(t)^H`, `U = exp(-i h t)`; probabilities from the
/// reduced system state. `dim_s` is the system factor (use `h.rows()` for a
/// bare system). Stores a snapshot every `snapshot_stride` samples if given.
pub fn evolve_unitary(
    h: &CMatrix,
    rho0: &DensityMatrix,
    times: &[f64],
    dim_s: usize,
    snapshot_stride: Option<usize>,
) -> Result<Trajectory, DynamicsError> {
    let dim = h.rows();
    if rho0.dim() != dim || dim_s == 0 || dim % dim_s != 0 {
        return Err(DynamicsError::DimensionMismatch(format!(
            "H is {dim}x{dim}, state has dim {}, system dim {dim_s}",
            rho0.dim()
        )));
    }
    check_times(times)?;
    let eig = hermitian_eig(h)?;
    let mut traj = Trajectory {
        times: times.to_vec(),
        prob: Vec::with_capacity(times.len()),
        snapshots: vec![],
    };
    let mut tmp = CMatrix::zeros(dim, dim);
    let mut rho_t = CMatrix::zeros(dim, dim);
    for (i, &t) in times.iter().enumerate() {
        let u = eig.propagator(t);
        matmul_into(&u, rho0.matrix(), &mut tmp);
        matmul_into(&tmp, &u.adjoint(), &mut rho_t);
        rho_t.symmetrize();
        traj.prob.push(joint_tunneling_probability(&rho_t, dim_s));
        if snapshot_stride.is_some_and(|s| i % s.max(1) == 0) {
            let reduced = partial_trace_ancilla(&rho_t, dim_s, dim / dim_s)?;
            traj.snapshots.push(Snapshot {
                time: t,
                state: DensityMatrix::new_unchecked(reduced),
            });
        }
    }
    Ok(traj)
}

/// `D[L](rho) = L rho L - 1/2 {L^2, rho}` for Hermitian `L`.
fn dephasing_term(l: &CMatrix, rho: &CMatrix) -> CMatrix {
    let l2 = l.matmul(l);
    let mut out = l.matmul(rho).matmul(l);
    out.axpy_real(-0.5, &l2.matmul(rho));
    out.axpy_real(-0.5, &rho.matmul(&l2));
    out
}

/// GKSL generator applied to `rho`:
/// `-i[H, rho] + lambda_A D[I (x) J_z](rho) + lambda_S D[J_z (x) I](rho)`.
///
/// Dense reference form; valid for any square `rho`. For a bare system pass
/// `lambda_a = 0` (the ancilla operator is then ignored).
pub fn gksl_rhs(
    rho: &CMatrix,
    h: &CMatrix,
    jz_s: &CMatrix,
    jz_a: &CMatrix,
    noise: &NoiseParams,
) -> CMatrix {
    let mut out = h.commutator(rho).scale(C64::new(0.0, -1.0));
    if noise.lambda_a != 0.0 {
        out.axpy_real(noise.lambda_a, &dephasing_term(jz_a, rho));
    }
    if noise.lambda_s != 0.0 {
        out.axpy_real(noise.lambda_s, &dephasing_term(jz_s, rho));
    }
    out
}

/// The GKSL generator as a linear map, specialised for number-diagonal
/// dephasing operators where `D[L]` acts entrywise:
/// `D[L](rho)_ab = -(l_a - l_b)^2 / 2 * rho_ab`.
#[derive(Debug, Clone)]
pub struct GkslGenerator {
    h: CMatrix,
    /// Entrywise dephasing rates, row-major; `None` when noiseless.
    rates: Option<Vec<f64>>,
    /// Non-diagonal dissipators `(lambda, L)`, handled densely.
    dense: Vec<(f64, CMatrix)>,
}

impl GkslGenerator {
    /// `h` must be Hermitian; each dissipator `(lambda, L)` needs Hermitian `L`.
    pub fn new(h: CMatrix, dissipators: Vec<(f64, CMatrix)>) -> Result<Self, DynamicsError> {
        let n = h.rows();
        if !h.is_square() {
            return Err(DynamicsError::DimensionMismatch(
                "Hamiltonian is not square".into(),
            ));
        }
        let mut rates = vec![0.0; n * n];
        let mut any = false;
        let mut dense = Vec::new();
        for (lambda, l) in dissipators {
            if l.rows() != n || !l.is_square() {
                return Err(DynamicsError::DimensionMismatch(format!(
                    "dissipator is {}x{}, Hamiltonian is {n}x{n}",
                    l.rows(),
                    l.cols()
                )));
            }
            if lambda == 0.0 {
                continue;
            }
            if l.is_diagonal() {
                let d: Vec<f64> = l.diag().iter().map(|z| z.re).collect();
                for a in 0..n {
                    for b in 0..n {
                        rates[a * n + b] -= lambda * 0.5 * (d[a] - d[b]).powi(2);
                    }
                }
                any = true;
            } else {
                dense.push((lambda, l));
            }
        }
        Ok(Self {
            h,
            rates: any.then_some(rates),
            dense,
        })
    }

    /// System plus ancilla: dephasing by `J_z (x) I` and `I (x) J_z`.
    pub fn joint(
        h: CMatrix,
        jz_s_embedded: CMatrix,
        jz_a_embedded: CMatrix,
        noise: &NoiseParams,
    ) -> Result<Self, DynamicsError> {
        Self::new(
            h,
            vec![
                (noise.lambda_s, jz_s_embedded),
                (noise.lambda_a, jz_a_embedded),
            ],
        )
    }

    /// Bare system dephased by its own `J_z`.
    pub fn system(h: CMatrix, jz: CMatrix, lambda_s: f64) -> Result<Self, DynamicsError> {
        Self::new(h, vec![(lambda_s, jz)])
    }

    pub fn dim(&self) -> usize {
        self.h.rows()
    }

    pub fn hamiltonian(&self) -> &CMatrix {
        &self.h
    }

    fn apply_inner(&self, x: &CMatrix, out: &mut CMatrix, scratch: &mut CMatrix, sign: f64) {
        // For Hermitian H and X: [H, X] = M - M^H with M = H X.
        matmul_into(&self.h, x, scratch);
        let n = x.rows();
        let m = scratch.as_slice();
        let o = out.as_mut_slice();
        let xs = x.as_slice();
        for a in 0..n {
            for b in 0..n {
                let d = m[a * n + b] - m[b * n + a].conj();
                // sign * (-i) * d
                let mut v = C64::new(sign * d.im, -sign * d.re);
                if let Some(r) = &self.rates {
                    v += xs[a * n + b] * r[a * n + b];
                }
                o[a * n + b] = v;
            }
        }
        for (lambda, l) in &self.dense {
            out.axpy_real(*lambda, &dephasing_term(l, x));
        }
    }

    /// `out = L(x)` for Hermitian `x`.
    pub fn apply_into(&self, x: &CMatrix, out: &mut CMatrix, scratch: &mut CMatrix) {
        self.apply_inner(x, out, scratch, 1.0);
    }

    /// `out = L^*(y)`, the adjoint under `Re Tr(A^H B)`, for Hermitian `y`.
    pub fn apply_adjoint_into(&self, y: &CMatrix, out: &mut CMatrix, scratch: &mut CMatrix) {
        self.apply_inner(y, out, scratch, -1.0);
    }

    pub fn apply(&self, x: &CMatrix) -> CMatrix {
        let n = self.dim();
        let mut out = CMatrix::zeros(n, n);
        let mut scratch = CMatrix::zeros(n, n);
        self.apply_into(x, &mut out, &mut scratch);
        out
    }
}

/// Work buffers for one RK4 step; stage values are kept for reverse passes.
#[derive(Debug, Clone)]
pub struct Rk4Stages {
    pub k1: CMatrix,
    pub k2: CMatrix,
    pub k3: CMatrix,
    pub k4: CMatrix,
    stage_in: CMatrix,
    scratch: CMatrix,
}

impl Rk4Stages {
    pub fn new(dim: usize) -> Self {
        let z = CMatrix::zeros(dim, dim);
        Self {
            k1: z.clone(),
            k2: z.clone(),
            k3: z.clone(),
            k4: z.clone(),
            stage_in: z.clone(),
            scratch: z,
        }
    }

    /// Fills `k1..k4` for the state `rho` and writes the increment
    /// `dt/6 (k1 + 2k2 + 2k3 + k4)` into `incr`.
    pub fn step(&mut self, gen: &GkslGenerator, rho: &CMatrix, dt: f64, incr: &mut CMatrix) {
        gen.apply_into(rho, &mut self.k1, &mut self.scratch);
        stage_input(&mut self.stage_in, rho, 0.5 * dt, &self.k1);
        gen.apply_into(&self.stage_in, &mut self.k2, &mut self.scratch);
        stage_input(&mut self.stage_in, rho, 0.5 * dt, &self.k2);
        gen.apply_into(&self.stage_in, &mut self.k3, &mut self.scratch);
        stage_input(&mut self.stage_in, rho, dt, &self.k3);
        gen.apply_into(&self.stage_in, &mut self.k4, &mut self.scratch);
        let w = dt / 6.0;
        let out = incr.as_mut_slice();
        let (k1, k2, k3, k4) = (
            self.k1.as_slice(),
            self.k2.as_slice(),
            self.k3.as_slice(),
            self.k4.as_slice(),
        );
        for i in 0..out.len() {
            out[i] = (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * w;
        }
    }
}

fn stage_input(out: &mut CMatrix, rho: &CMatrix, h: f64, k: &CMatrix) {
    for ((o, &r), &kk) in out
        .as_mut_slice()
        .iter_mut()
        .zip(rho.as_slice())
        .zip(k.as_slice())
    {
        *o = r + kk * h;
    }
}

/// Options for [`evolve_rk4`].
#[derive(Debug, Clone)]
pub struct Rk4Options {
    pub t_final: f64,
    pub dt: f64,
    /// Updates of step `j` (ending at `j dt`) are applied only while
    /// `j dt <= t_mask`; later steps leave the state frozen.
    pub t_mask: Option<f64>,
    /// System factor dimension used for the reduced probability.
    pub dim_s: usize,
    /// Record `P` every this many steps (the final step is always recorded).
    pub record_stride: usize,
    /// Keep reduced-state snapshots every this many steps.
    pub snapshot_stride: Option<usize>,
}

impl Rk4Options {
    pub fn new(t_final: f64, dt: f64, dim_s: usize) -> Self {
        Self {
            t_final,
            dt,
            t_mask: None,
            dim_s,
            record_stride: 1,
            snapshot_stride: None,
        }
    }

    /// Every step up to `T = 50`, every tenth step beyond.
    pub fn default_snapshot_stride(t_final: f64) -> usize {
        if t_final <= 50.0 {
            1
        } else {
            10
        }
    }

    pub fn n_steps(&self) -> usize {
        (self.t_final / self.dt).round() as usize
    }
}

/// Integrates the master equation with classical RK4 and fixed step `dt`,
/// re-symmetrizing `rho` after every step.
pub fn evolve_rk4(
    rho0: &DensityMatrix,
    gen: &GkslGenerator,
    opts: &Rk4Options,
) -> Result<Trajectory, DynamicsError> {
    if !(opts.dt > 0.0) {
        return Err(DynamicsError::NonPositiveStep(opts.dt));
    }
    if !(opts.t_final >= 0.0) {
        return Err(DynamicsError::BadTimeGrid);
    }
    let dim = gen.dim();
    if rho0.dim() != dim || opts.dim_s == 0 || dim % opts.dim_s != 0 {
        return Err(DynamicsError::DimensionMismatch(format!(
            "generator dim {dim}, state dim {}, system dim {}",
            rho0.dim(),
            opts.dim_s
        )));
    }
    let n_steps = opts.n_steps();
    let stride = opts.record_stride.max(1);
    let mut traj = Trajectory::default();
    let mut rho = rho0.matrix().clone();
    rho.symmetrize();
    let mut stages = Rk4Stages::new(dim);
    let mut incr = CMatrix::zeros(dim, dim);

    let record = |traj: &mut Trajectory, step: usize, rho: &CMatrix| -> Result<(), DynamicsError> {
        let t = step as f64 * opts.dt;
        traj.times.push(t);
        traj.prob.push(joint_tunneling_probability(rho, opts.dim_s));
        if opts.snapshot_stride.is_some_and(|s| step % s.max(1) == 0) {
            let reduced = partial_trace_ancilla(rho, opts.dim_s, dim / opts.dim_s)?;
            traj.snapshots.push(Snapshot {
                time: t,
                state: DensityMatrix::new_unchecked(reduced),
            });
        }
        Ok(())
    };

    record(&mut traj, 0, &rho)?;
    let mut trace = rho.trace().re;
    for j in 1..=n_steps {
        let active = opts
            .t_mask
            .map_or(true, |tm| j as f64 * opts.dt <= tm + 1e-9 * opts.dt);
        if active {
            stages.step(gen, &rho, opts.dt, &mut incr);
            rho += &incr;
            rho.symmetrize();
            if !rho.all_finite() {
                return Err(DynamicsError::InvariantBreach {
                    step: j,
                    what: "non-finite entries".into(),
                });
            }
            let tr = rho.trace().re;
            if (tr - trace).abs() > TRACE_DRIFT_TOL {
                return Err(DynamicsError::InvariantBreach {
                    step: j,
                    what: format!("trace drifted by {:e}", tr - trace),
                });
            }
            trace = tr;
        }
        if j % stride == 0 || j == n_steps {
            record(&mut traj, j, &rho)?;
        }
    }
    Ok(traj)
}
