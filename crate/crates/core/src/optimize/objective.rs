//! Loss and exact gradients.
//!
//! Noiseless losses come from one eigendecomposition of `H_SA`, with
//! parameter derivatives of the propagator from divided differences of the
//! spectrum. Noisy losses run RK4 with a smooth time mask and are
//! differentiated by a reverse sweep over the stored stages.

use num_complex::Complex64 as C64;

use super::{
    constrained_ancilla, factor_gradient, sigmoid, AncillaConstraint, OptConfig, OptState,
    OptimizeError, ParamKey,
};
use crate::dynamics::{DensityMatrix, GkslGenerator, Rk4Stages};
use crate::linalg::{hermitian_eig, CMatrix, SparseMatrix};
use crate::model::{CouplingKind, HamiltonianSlot, ModelConfig, ModelOperators};

/// Steps past `t_hat` (in units of the mask width) after which the smooth
/// mask is treated as closed.
const MASK_TAIL: f64 = 40.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub loss: f64,
    pub prob: f64,
    pub t_hat: f64,
}

/// Derivatives of `P` before they are mapped onto the parameter vector.
struct ProbGradient {
    prob: f64,
    /// One entry per Hamiltonian generator.
    coeffs: Vec<f64>,
    t_hat: f64,
    /// `S` with `P = Tr(S rho_A)` to first order.
    ancilla: CMatrix,
}

/// Stored forward pass of the masked RK4 integration.
struct Tape {
    rho: Vec<CMatrix>,
    k1: Vec<CMatrix>,
    k2: Vec<CMatrix>,
    k3: Vec<CMatrix>,
    incr: Vec<CMatrix>,
    weights: Vec<f64>,
}

/// Loss of one scenario as a function of the learnable parameters.
#[derive(Debug, Clone)]
pub struct Objective {
    model: ModelConfig,
    cfg: OptConfig,
    ops: ModelOperators,
    sparse: Vec<SparseMatrix>,
    layout: Vec<ParamKey>,
}

impl Objective {
    pub fn new(model: &ModelConfig, cfg: &OptConfig) -> Result<Self, OptimizeError> {
        cfg.validate()?;
        let ops = ModelOperators::new(model)?;
        let layout = build_layout(model, cfg);
        let sparse = ops.sparse_generators.clone();
        Ok(Self {
            model: model.clone(),
            cfg: cfg.clone(),
            ops,
            sparse,
            layout,
        })
    }

    pub fn layout(&self) -> &[ParamKey] {
        &self.layout
    }

    pub fn config(&self) -> &OptConfig {
        &self.cfg
    }

    pub fn model(&self) -> &ModelConfig {
        &self.model
    }

    pub fn operators(&self) -> &ModelOperators {
        &self.ops
    }

    pub fn is_noisy(&self) -> bool {
        !self.model.noise.is_noiseless()
    }

    pub fn initial_state(&self) -> Result<OptState, OptimizeError> {
        OptState::initial(&self.model, &self.cfg, self.layout.len())
    }

    /// Generator coefficients in the order of `ModelOperators::generators`.
    pub fn coefficients(&self, s: &OptState) -> Vec<f64> {
        self.ops
            .generators
            .iter()
            .map(|(slot, _)| match *slot {
                HamiltonianSlot::EtaA => s.eta_a,
                HamiltonianSlot::GammaA => s.gamma_a,
                HamiltonianSlot::DeltaA => s.delta_a,
                HamiltonianSlot::Alpha => s.alpha,
                HamiltonianSlot::AlphaIJ(i, j) => s.alpha_matrix[i][j],
            })
            .collect()
    }

    pub fn hamiltonian(&self, s: &OptState) -> CMatrix {
        self.ops.hamiltonian(&self.coefficients(s))
    }

    /// Ancilla state after the configured constraint.
    pub fn ancilla(&self, s: &OptState) -> Result<DensityMatrix, OptimizeError> {
        constrained_ancilla(&s.ancilla_factor, self.cfg.ancilla_constraint)
    }

    /// `rho_L (x) rho_A`.
    pub fn initial_joint_state(&self, s: &OptState) -> Result<DensityMatrix, OptimizeError> {
        Ok(self.ops.rho_system.tensor(&self.ancilla(s)?))
    }

    pub fn generator(&self, s: &OptState) -> Result<GkslGenerator, OptimizeError> {
        Ok(GkslGenerator::joint(
            self.hamiltonian(s),
            self.ops.jz_s.clone(),
            self.ops.jz_a.clone(),
            &self.model.noise,
        )?)
    }

    /// Coupling strength shown in learning curves: `alpha`, or `alpha_zz`
    /// for the general coupling.
    pub fn reported_alpha(&self, s: &OptState) -> f64 {
        match self.model.coupling.kind {
            CouplingKind::General { .. } => s.alpha_matrix[2][2],
            _ => s.alpha,
        }
    }

    fn loss_from(&self, prob: f64, t_hat: f64) -> f64 {
        let base = if self.cfg.minimize_probability {
            prob
        } else {
            1.0 - prob
        };
        base + self.cfg.time_penalty * t_hat * t_hat
    }

    fn dloss_dprob(&self) -> f64 {
        if self.cfg.minimize_probability {
            1.0
        } else {
            -1.0
        }
    }

    /// Training loss: exact for noiseless dynamics, smooth time mask for
    /// noisy dynamics.
    pub fn evaluate(&self, s: &OptState) -> Result<Evaluation, OptimizeError> {
        let prob = if self.is_noisy() {
            self.noisy_forward(s, false)?.0
        } else {
            self.unitary_probability(s)?
        };
        Ok(self.evaluation(prob, s.t_hat()))
    }

    /// Loss with the hard cut-off `j dt <= t_hat` in the noisy case.
    pub fn evaluate_exact(&self, s: &OptState) -> Result<Evaluation, OptimizeError> {
        let prob = if self.is_noisy() {
            self.noisy_hard_probability(s)?
        } else {
            self.unitary_probability(s)?
        };
        Ok(self.evaluation(prob, s.t_hat()))
    }

    fn evaluation(&self, prob: f64, t_hat: f64) -> Evaluation {
        Evaluation {
            loss: self.loss_from(prob, t_hat),
            prob,
            t_hat,
        }
    }

    /// Training loss and its gradient in `layout` order.
    pub fn loss_and_gradient(&self, s: &OptState) -> Result<(Evaluation, Vec<f64>), OptimizeError> {
        let pg = if self.is_noisy() {
            self.noisy_gradient(s)?
        } else {
            self.unitary_gradient(s)?
        };
        let t_hat = s.t_hat();
        let eval = self.evaluation(pg.prob, t_hat);
        let dl = self.dloss_dprob();
        let needs_factor = self
            .layout
            .iter()
            .any(|k| matches!(k, ParamKey::FactorRe(..) | ParamKey::FactorIm(..)));
        let fgrad = needs_factor
            .then(|| factor_gradient(&s.ancilla_factor, &pg.ancilla, self.cfg.ancilla_constraint));
        let dt_draw = sigmoid(s.t_raw);
        let slot_index =
            |slot: HamiltonianSlot| self.ops.generators.iter().position(|(s, _)| *s == slot);
        let grad = self
            .layout
            .iter()
            .map(|&key| match key {
                ParamKey::EtaA => dl * pg.coeffs[slot_index(HamiltonianSlot::EtaA).unwrap()],
                ParamKey::GammaA => dl * pg.coeffs[slot_index(HamiltonianSlot::GammaA).unwrap()],
                ParamKey::DeltaA => dl * pg.coeffs[slot_index(HamiltonianSlot::DeltaA).unwrap()],
                ParamKey::Alpha => dl * pg.coeffs[slot_index(HamiltonianSlot::Alpha).unwrap()],
                ParamKey::AlphaIJ(i, j) => {
                    dl * pg.coeffs[slot_index(HamiltonianSlot::AlphaIJ(i, j)).unwrap()]
                }
                ParamKey::TimeRaw => {
                    (dl * pg.t_hat + 2.0 * self.cfg.time_penalty * t_hat) * dt_draw
                }
                ParamKey::FactorRe(i, j) => dl * fgrad.as_ref().unwrap()[(i, j)].re,
                ParamKey::FactorIm(i, j) => dl * fgrad.as_ref().unwrap()[(i, j)].im,
            })
            .collect();
        Ok((eval, grad))
    }

    fn unitary_probability(&self, s: &OptState) -> Result<f64, OptimizeError> {
        let eig = hermitian_eig(&self.hamiltonian(s))?;
        let u = eig.propagator(s.t_hat());
        let rho0 = self.initial_joint_state(s)?.into_matrix();
        let rho_t = u.matmul(&rho0).matmul(&u.adjoint());
        Ok(block_probability(&rho_t, self.ops.dim_a))
    }

    fn unitary_gradient(&self, s: &OptState) -> Result<ProbGradient, OptimizeError> {
        let h = self.hamiltonian(s);
        let eig = hermitian_eig(&h)?;
        let (v, lam) = (&eig.vectors, &eig.values);
        let t = s.t_hat();
        let (d, da) = (self.ops.dim(), self.ops.dim_a);
        let u = eig.propagator(t);
        let u_adj = u.adjoint();
        let rho0 = self.initial_joint_state(s)?.into_matrix();
        let rho_t = u.matmul(&rho0).matmul(&u_adj);
        let prob = block_probability(&rho_t, da);

        // dP/dt = Tr(Pi (-i)[H, rho]) = sum_{i in Pi} 2 Im (H rho)_ii
        let mut dp_dt = 0.0;
        for i in 0..da {
            let z: C64 = (0..d).map(|c| h[(i, c)] * rho_t[(c, i)]).sum();
            dp_dt += 2.0 * z.im;
        }

        // dP/dtheta = 2 Re sum_ab Phi_ab Kt_ab B_ba with B = V^H rho0 U^H Pi V
        let pv = CMatrix::from_fn(d, d, |i, k| {
            if i < da {
                v[(i, k)]
            } else {
                C64::new(0.0, 0.0)
            }
        });
        let v_adj = v.adjoint();
        let b = v_adj.matmul(&rho0.matmul(&u_adj.matmul(&pv)));
        let weighted = CMatrix::from_fn(d, d, |a, c| {
            divided_difference(lam[a], lam[c], t) * b[(c, a)]
        });
        let coeffs = self
            .sparse
            .iter()
            .map(|k| {
                let kt = v_adj.matmul(&sparse_times_dense(k, v));
                2.0 * kt.inner_re(&conj_entries(&weighted))
            })
            .collect();

        // O = U^H Pi U gives P = Tr(O rho0)
        let o = CMatrix::from_fn(d, d, |i, j| {
            (0..da).map(|r| u[(r, i)].conj() * u[(r, j)]).sum()
        });
        let ancilla = ancilla_sensitivity(&o, self.ops.rho_system.matrix(), self.ops.dim_s, da);
        Ok(ProbGradient {
            prob,
            coeffs,
            t_hat: dp_dt,
            ancilla,
        })
    }

    fn mask_weights(&self, t_hat: f64) -> Vec<f64> {
        let dt = self.cfg.dt;
        let tau = self.cfg.mask_temperature();
        let n = ((t_hat + MASK_TAIL * tau) / dt).ceil() as usize + 1;
        (1..=n)
            .map(|j| sigmoid((t_hat - (j as f64 - 0.5) * dt) / tau))
            .collect()
    }

    /// Masked RK4: `rho_j = rho_{j-1} + w_j Delta_j`.
    fn noisy_forward(
        &self,
        s: &OptState,
        store: bool,
    ) -> Result<(f64, Option<Tape>), OptimizeError> {
        let gen = self.generator(s)?;
        let weights = self.mask_weights(s.t_hat());
        let d = self.ops.dim();
        let mut rho = self.initial_joint_state(s)?.into_matrix();
        let mut stages = Rk4Stages::new(d);
        let mut incr = CMatrix::zeros(d, d);
        let mut tape = store.then(|| Tape {
            rho: Vec::with_capacity(weights.len()),
            k1: Vec::with_capacity(weights.len()),
            k2: Vec::with_capacity(weights.len()),
            k3: Vec::with_capacity(weights.len()),
            incr: Vec::with_capacity(weights.len()),
            weights: weights.clone(),
        });
        for &w in &weights {
            stages.step(&gen, &rho, self.cfg.dt, &mut incr);
            if let Some(tp) = tape.as_mut() {
                tp.rho.push(rho.clone());
                tp.k1.push(stages.k1.clone());
                tp.k2.push(stages.k2.clone());
                tp.k3.push(stages.k3.clone());
                tp.incr.push(incr.clone());
            }
            rho.axpy_real(w, &incr);
        }
        if !rho.all_finite() {
            return Err(OptimizeError::NonFinite {
                iteration: 0,
                last_valid: Box::new(s.clone()),
            });
        }
        Ok((block_probability(&rho, self.ops.dim_a), tape))
    }

    fn noisy_hard_probability(&self, s: &OptState) -> Result<f64, OptimizeError> {
        let gen = self.generator(s)?;
        let dt = self.cfg.dt;
        let n = (s.t_hat() / dt + 1e-9).floor() as usize;
        let d = self.ops.dim();
        let mut rho = self.initial_joint_state(s)?.into_matrix();
        let mut stages = Rk4Stages::new(d);
        let mut incr = CMatrix::zeros(d, d);
        for _ in 0..n {
            stages.step(&gen, &rho, dt, &mut incr);
            rho += &incr;
            rho.symmetrize();
        }
        Ok(block_probability(&rho, self.ops.dim_a))
    }

    fn noisy_gradient(&self, s: &OptState) -> Result<ProbGradient, OptimizeError> {
        let (prob, tape) = self.noisy_forward(s, true)?;
        let tape = tape.expect("tape requested");
        let gen = self.generator(s)?;
        let (d, da) = (self.ops.dim(), self.ops.dim_a);
        let dt = self.cfg.dt;
        let tau = self.cfg.mask_temperature();

        let mut ybar = CMatrix::from_real_diag(
            &(0..d)
                .map(|i| if i < da { 1.0 } else { 0.0 })
                .collect::<Vec<_>>(),
        );
        let mut coeffs = vec![0.0; self.sparse.len()];
        let mut dp_dt = 0.0;
        let mut acc = CMatrix::zeros(d, d);
        let mut kbar = CMatrix::zeros(d, d);
        let mut xbar = CMatrix::zeros(d, d);
        let mut stage = CMatrix::zeros(d, d);
        let mut scratch = CMatrix::zeros(d, d);

        for j in (0..tape.weights.len()).rev() {
            let w = tape.weights[j];
            dp_dt += ybar.inner_re(&tape.incr[j]) * w * (1.0 - w) / tau;
            let c = w * dt;
            let rho = &tape.rho[j];
            acc.as_mut_slice().copy_from_slice(ybar.as_slice());

            // stages 4..1: (slope in the stage input, its step, weight in Delta)
            let plan: [(Option<&CMatrix>, f64, f64); 4] = [
                (Some(&tape.k3[j]), dt, c / 6.0),
                (Some(&tape.k2[j]), 0.5 * dt, c / 3.0),
                (Some(&tape.k1[j]), 0.5 * dt, c / 3.0),
                (None, 0.0, c / 6.0),
            ];
            kbar.as_mut_slice()
                .iter_mut()
                .for_each(|z| *z = C64::new(0.0, 0.0));
            for (idx, &(prev_k, h, wk)) in plan.iter().enumerate() {
                for (kb, &yb) in kbar.as_mut_slice().iter_mut().zip(ybar.as_slice()) {
                    *kb += yb * wk;
                }
                match prev_k {
                    Some(k) => combine_into(&mut stage, rho, h, k),
                    None => stage.as_mut_slice().copy_from_slice(rho.as_slice()),
                }
                for (g, sp) in coeffs.iter_mut().zip(&self.sparse) {
                    *g += sp.commutator_overlap(&kbar, &stage);
                }
                gen.apply_adjoint_into(&kbar, &mut xbar, &mut scratch);
                acc += &xbar;
                if idx < 3 {
                    for (kb, &xb) in kbar.as_mut_slice().iter_mut().zip(xbar.as_slice()) {
                        *kb = xb * h;
                    }
                }
            }
            std::mem::swap(&mut ybar, &mut acc);
        }
        let ancilla = ancilla_sensitivity(&ybar, self.ops.rho_system.matrix(), self.ops.dim_s, da);
        Ok(ProbGradient {
            prob,
            coeffs,
            t_hat: dp_dt,
            ancilla,
        })
    }
}

fn build_layout(model: &ModelConfig, cfg: &OptConfig) -> Vec<ParamKey> {
    let mut layout = Vec::new();
    let a = &model.ancilla;
    for (p, key) in [
        (a.eta, ParamKey::EtaA),
        (a.gamma, ParamKey::GammaA),
        (a.delta, ParamKey::DeltaA),
    ] {
        if p.learnable {
            layout.push(key);
        }
    }
    if model.coupling.alpha.learnable {
        match model.coupling.kind {
            CouplingKind::General { .. } => {
                for i in 0..3 {
                    for j in 0..3 {
                        layout.push(ParamKey::AlphaIJ(i, j));
                    }
                }
            }
            _ => layout.push(ParamKey::Alpha),
        }
    }
    if model.t_hat.learnable {
        layout.push(ParamKey::TimeRaw);
    }
    if model.ancilla_learnable {
        let n = model.dim_a();
        if cfg.ancilla_constraint == AncillaConstraint::DiagonalSoftmax {
            layout.extend((0..n).map(|k| ParamKey::FactorRe(k, k)));
        } else {
            for i in 0..n {
                for j in 0..n {
                    layout.push(ParamKey::FactorRe(i, j));
                    layout.push(ParamKey::FactorIm(i, j));
                }
            }
        }
    }
    layout
}

/// `sum_{a < dim_a} rho_aa`: probability that the system block is `|0>`.
fn block_probability(rho: &CMatrix, dim_a: usize) -> f64 {
    (0..dim_a).map(|a| rho[(a, a)].re).sum()
}

/// `(e^{-i a t} - e^{-i b t}) / (a - b)`, written as
/// `-i t e^{-i m t} sinc(delta t / 2)` so that close eigenvalues are safe.
fn divided_difference(a: f64, b: f64, t: f64) -> C64 {
    let m = 0.5 * (a + b);
    let x = 0.5 * (a - b) * t;
    let sinc = if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    };
    C64::new(0.0, -t) * C64::from_polar(1.0, -m * t) * sinc
}

fn conj_entries(m: &CMatrix) -> CMatrix {
    CMatrix::from_fn(m.rows(), m.cols(), |i, j| m[(i, j)].conj())
}

fn sparse_times_dense(k: &SparseMatrix, v: &CMatrix) -> CMatrix {
    let n = v.cols();
    let mut out = CMatrix::zeros(k.dim, n);
    for &(r, c, z) in &k.entries {
        for j in 0..n {
            out[(r, j)] += z * v[(c, j)];
        }
    }
    out
}

/// `out = rho + h k`.
fn combine_into(out: &mut CMatrix, rho: &CMatrix, h: f64, k: &CMatrix) {
    for ((o, &r), &kk) in out
        .as_mut_slice()
        .iter_mut()
        .zip(rho.as_slice())
        .zip(k.as_slice())
    {
        *o = r + kk * h;
    }
}

/// Contracts a joint-space sensitivity `A` (with `dP = Re Tr(A^H d rho0)`)
/// against the fixed system state: `S_xy = sum_{s,s'} rho_S[s',s] A[(s,x),(s',y)]`.
fn ancilla_sensitivity(adj: &CMatrix, rho_sys: &CMatrix, dim_s: usize, dim_a: usize) -> CMatrix {
    let mut sens = CMatrix::zeros(dim_a, dim_a);
    for s in 0..dim_s {
        for sp in 0..dim_s {
            let r = rho_sys[(sp, s)];
            if r == C64::new(0.0, 0.0) {
                continue;
            }
            for x in 0..dim_a {
                for y in 0..dim_a {
                    sens[(x, y)] += r * adj[(s * dim_a + x, sp * dim_a + y)];
                }
            }
        }
    }
    sens.hermitian_part()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{ConventionFlags, HamiltonianParams, SpinScale, UnitSystem};
    use crate::dynamics::NoiseParams;
    use crate::model::{AncillaInit, AncillaParams, Coupling, Param};
    use crate::optimize::softplus_inverse;
    use std::f64::consts::{FRAC_PI_4, PI};

    fn conv(s: SpinScale) -> ConventionFlags {
        ConventionFlags::new(s, UnitSystem::DeltaSUnits)
    }

    fn fig1_model(alpha: f64, t: f64) -> ModelConfig {
        ModelConfig {
            n_s: 1,
            n_a: 1,
            system: HamiltonianParams::new(0.0, 0.5, 1.0),
            conv_s: conv(SpinScale::Pauli),
            conv_a: conv(SpinScale::J),
            ancilla: AncillaParams {
                eta: Param::fixed(0.0),
                gamma: Param::fixed(0.0),
                delta: Param::fixed(1.0),
            },
            coupling: Coupling {
                kind: CouplingKind::DensityDensity,
                alpha: Param::learnable(alpha),
            },
            t_hat: Param::learnable(t),
            noise: NoiseParams::default(),
            ancilla_init: AncillaInit::AllLeft,
            ancilla_learnable: false,
        }
    }

    fn fd(obj: &Objective, s: &OptState) -> Vec<f64> {
        let h = 1e-5;
        let layout = obj.layout().to_vec();
        let x0 = s.vector(&layout);
        (0..layout.len())
            .map(|i| {
                let mut sp = s.clone();
                let mut xp = x0.clone();
                xp[i] += h;
                sp.set_vector(&layout, &xp);
                let mut sm = s.clone();
                let mut xm = x0.clone();
                xm[i] -= h;
                sm.set_vector(&layout, &xm);
                (obj.evaluate(&sp).unwrap().loss - obj.evaluate(&sm).unwrap().loss) / (2.0 * h)
            })
            .collect()
    }

    fn assert_matches_fd(obj: &Objective, s: &OptState) {
        let (_, g) = obj.loss_and_gradient(s).unwrap();
        let f = fd(obj, s);
        for (k, (a, b)) in g.iter().zip(&f).enumerate() {
            assert!(
                (a - b).abs() <= (1e-4 * b.abs()).max(1e-7),
                "{:?}: analytic {a}, fd {b}",
                obj.layout()[k]
            );
        }
    }

    #[test]
    fn time_derivative_of_symmetric_two_level() {
        let mut model = fig1_model(0.0, FRAC_PI_4);
        model.n_a = 0;
        model.system = HamiltonianParams::new(0.0, 1.0, 0.0);
        model.coupling.alpha = Param::fixed(0.0);
        let obj = Objective::new(&model, &OptConfig::default()).unwrap();
        let s = obj.initial_state().unwrap();
        let (eval, g) = obj.loss_and_gradient(&s).unwrap();
        assert!((eval.prob - 0.5).abs() < 1e-14);
        assert_eq!(obj.layout(), &[ParamKey::TimeRaw]);
        assert!((g[0] / sigmoid(s.t_raw) + 1.0).abs() < 1e-12);
    }

    #[test]
    fn descent_on_alpha_heads_for_minus_two() {
        let obj = Objective::new(&fig1_model(0.0, 1.0), &OptConfig::default()).unwrap();
        let s = obj.initial_state().unwrap();
        let (_, g) = obj.loss_and_gradient(&s).unwrap();
        assert!(g[0] > 0.0);
        assert_matches_fd(&obj, &s);
    }

    #[test]
    fn gradient_vanishes_at_perfect_transfer() {
        let obj = Objective::new(&fig1_model(-2.0, PI), &OptConfig::default()).unwrap();
        let s = obj.initial_state().unwrap();
        let (eval, g) = obj.loss_and_gradient(&s).unwrap();
        assert!(eval.loss.abs() < 1e-14);
        assert!(g.iter().map(|x| x * x).sum::<f64>().sqrt() <= 1e-6);
    }

    fn rich_model(noise: NoiseParams, kind: CouplingKind) -> ModelConfig {
        ModelConfig {
            n_s: 2,
            n_a: 2,
            system: HamiltonianParams::new(0.3, 1.0, 0.7),
            conv_s: conv(SpinScale::J),
            conv_a: conv(SpinScale::J),
            ancilla: AncillaParams::learnable_from_one(),
            coupling: Coupling {
                kind,
                alpha: Param::learnable(0.4),
            },
            t_hat: Param::learnable(1.3),
            noise,
            ancilla_init: AncillaInit::Random,
            ancilla_learnable: true,
        }
    }

    #[test]
    fn noiseless_gradient_matches_finite_differences() {
        let kinds = [
            CouplingKind::DensityDensity,
            CouplingKind::General {
                matrix: [[0.1, -0.2, 0.3], [0.0, 0.5, 0.2], [-0.4, 0.1, 0.6]],
            },
        ];
        for (i, kind) in kinds.into_iter().enumerate() {
            for constraint in [
                AncillaConstraint::None,
                AncillaConstraint::Diagonal,
                AncillaConstraint::DiagonalSoftmax,
            ] {
                for minimize in [false, true] {
                    let cfg = OptConfig {
                        seed: 11 + i as u64,
                        randomize_initial: true,
                        time_penalty: 0.1,
                        ancilla_constraint: constraint,
                        minimize_probability: minimize,
                        ..OptConfig::default()
                    };
                    let obj =
                        Objective::new(&rich_model(NoiseParams::default(), kind), &cfg).unwrap();
                    assert_matches_fd(&obj, &obj.initial_state().unwrap());
                }
            }
        }
    }

    #[test]
    fn noisy_gradient_matches_finite_differences() {
        let cfg = OptConfig {
            seed: 5,
            randomize_initial: true,
            dt: 0.02,
            time_penalty: 0.05,
            ..OptConfig::default()
        };
        let model = rich_model(NoiseParams::new(0.05, 0.02), CouplingKind::DensityDensity);
        let obj = Objective::new(&model, &cfg).unwrap();
        let mut s = obj.initial_state().unwrap();
        s.t_raw = softplus_inverse(0.9);
        assert_matches_fd(&obj, &s);
    }

    #[test]
    fn smooth_mask_tracks_the_hard_cutoff() {
        let cfg = OptConfig {
            seed: 2,
            dt: 0.01,
            ..OptConfig::default()
        };
        let model = rich_model(NoiseParams::new(0.01, 0.0), CouplingKind::DensityDensity);
        let obj = Objective::new(&model, &cfg).unwrap();
        let mut s = obj.initial_state().unwrap();
        s.t_raw = softplus_inverse(1.005);
        let smooth = obj.evaluate(&s).unwrap().prob;
        let hard = obj.evaluate_exact(&s).unwrap().prob;
        assert!((smooth - hard).abs() < 1e-3, "{smooth} vs {hard}");
    }
}
