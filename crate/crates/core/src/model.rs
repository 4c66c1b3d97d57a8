//! Physical description of a system + ancilla scenario and the operators
//! derived from it.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{
    build_local_hamiltonian, build_operators, coupling_operator, AlgebraError, Axis,
    ConventionFlags, HamiltonianParams, OperatorSet,
};
use crate::dynamics::{DensityMatrix, NoiseParams};
use crate::linalg::{kron, CMatrix, SparseMatrix};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("invalid model: {0}")]
    Invalid(String),
}

/// A scalar that is either held fixed or learned, with its starting value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Param {
    pub value: f64,
    pub learnable: bool,
}

impl Param {
    pub fn fixed(value: f64) -> Self {
        Self {
            value,
            learnable: false,
        }
    }

    pub fn learnable(value: f64) -> Self {
        Self {
            value,
            learnable: true,
        }
    }
}

/// Ancilla Bose–Hubbard coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AncillaParams {
    pub eta: Param,
    pub gamma: Param,
    pub delta: Param,
}

impl AncillaParams {
    /// All three learnable, starting at one.
    pub fn learnable_from_one() -> Self {
        Self {
            eta: Param::learnable(1.0),
            gamma: Param::learnable(1.0),
            delta: Param::learnable(1.0),
        }
    }
}

/// Form of the system–ancilla interaction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingKind {
    /// `alpha G_z (x) G_z`.
    DensityDensity,
    /// `alpha G_a (x) G_b` for one pair of axes, e.g. `sigma_x (x) J_z`.
    Axes { system: Axis, ancilla: Axis },
    /// `sum_ij alpha_ij G_i (x) G_j`; the 3x3 matrix is learned when
    /// `Coupling::alpha` is learnable.
    General { matrix: [[f64; 3]; 3] },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coupling {
    pub kind: CouplingKind,
    /// Strength for the scalar kinds; only the learnable flag matters for
    /// `General`.
    pub alpha: Param,
}

/// How the ancilla starts.
#[derive(Debug, Clone, PartialEq)]
pub enum AncillaInit {
    /// Random density matrix from a seeded Gaussian factor.
    Random,
    AllLeft,
    AllRight,
    /// Number state `|k>` (k bosons left).
    Number(usize),
    /// Pure state, amplitudes in the number basis.
    Vector(Vec<C64>),
    /// Mixed state given directly.
    Density(CMatrix),
}

#[derive(Debug, Clone)]
pub struct ModelConfig {
    pub n_s: usize,
    pub n_a: usize,
    pub system: HamiltonianParams,
    pub conv_s: ConventionFlags,
    pub conv_a: ConventionFlags,
    pub ancilla: AncillaParams,
    pub coupling: Coupling,
    /// Evolution (read-out) time.
    pub t_hat: Param,
    pub noise: NoiseParams,
    pub ancilla_init: AncillaInit,
    pub ancilla_learnable: bool,
}

impl ModelConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.n_s == 0 {
            return Err(ModelError::Invalid("n_s must be at least 1".into()));
        }
        self.conv_s.validate(&build_operators(self.n_s))?;
        self.conv_a.validate(&build_operators(self.n_a))?;
        if !(self.t_hat.value > 0.0) {
            return Err(ModelError::Invalid("t_hat must be positive".into()));
        }
        if self.noise.lambda_s < 0.0 || self.noise.lambda_a < 0.0 {
            return Err(ModelError::Invalid(
                "noise strengths must be non-negative".into(),
            ));
        }
        let finite = [
            self.system.eta,
            self.system.gamma,
            self.system.delta,
            self.ancilla.eta.value,
            self.ancilla.gamma.value,
            self.ancilla.delta.value,
            self.coupling.alpha.value,
        ];
        if finite.iter().any(|x| !x.is_finite()) {
            return Err(ModelError::Invalid(
                "Hamiltonian parameters must be finite".into(),
            ));
        }
        let dim_a = self.n_a + 1;
        match &self.ancilla_init {
            AncillaInit::Number(k) if *k > self.n_a => {
                return Err(ModelError::Invalid(format!(
                    "ancilla number state {k} exceeds N_A = {}",
                    self.n_a
                )))
            }
            AncillaInit::Vector(v) => {
                if v.len() != dim_a {
                    return Err(ModelError::Invalid(format!(
                        "ancilla vector has {} entries, expected {dim_a}",
                        v.len()
                    )));
                }
                let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum();
                if (norm - 1.0).abs() > 1e-9 {
                    return Err(ModelError::Invalid(format!(
                        "ancilla vector is not normalized (norm^2 = {norm})"
                    )));
                }
            }
            AncillaInit::Density(m) => {
                if m.rows() != dim_a {
                    return Err(ModelError::Invalid(format!(
                        "ancilla density matrix must be {dim_a}x{dim_a}"
                    )));
                }
                DensityMatrix::new(m.clone())
                    .map_err(|e| ModelError::Invalid(format!("ancilla density matrix: {e}")))?;
            }
            _ => {}
        }
        Ok(())
    }

    pub fn dim_s(&self) -> usize {
        self.n_s + 1
    }

    pub fn dim_a(&self) -> usize {
        self.n_a + 1
    }

    pub fn dim(&self) -> usize {
        self.dim_s() * self.dim_a()
    }

    /// True when anything at all is learned.
    pub fn has_learnables(&self) -> bool {
        let a = &self.ancilla;
        a.eta.learnable
            || a.gamma.learnable
            || a.delta.learnable
            || self.coupling.alpha.learnable
            || self.t_hat.learnable
            || self.ancilla_learnable
    }
}

/// Which learnable quantity a Hamiltonian generator belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HamiltonianSlot {
    EtaA,
    GammaA,
    DeltaA,
    Alpha,
    AlphaIJ(usize, usize),
}

/// Operators of a model: the fixed part of `H_SA` and one generator per
/// tunable coefficient, so that `H_SA = H_fixed + sum_i theta_i K_i`.
#[derive(Debug, Clone)]
pub struct ModelOperators {
    pub ops_s: OperatorSet,
    pub ops_a: OperatorSet,
    pub dim_s: usize,
    pub dim_a: usize,
    /// `H_S (x) I`.
    pub h_fixed: CMatrix,
    pub generators: Vec<(HamiltonianSlot, CMatrix)>,
    pub sparse_generators: Vec<SparseMatrix>,
    /// `J_z (x) I` and `I (x) J_z` (unscaled) for dephasing.
    pub jz_s: CMatrix,
    pub jz_a: CMatrix,
    /// System Hamiltonian alone, for the uncoupled baseline.
    pub h_system: CMatrix,
    /// All bosons of the system in the left well.
    pub rho_system: DensityMatrix,
}

impl ModelOperators {
    pub fn new(model: &ModelConfig) -> Result<Self, ModelError> {
        model.validate()?;
        let ops_s = build_operators(model.n_s);
        let ops_a = build_operators(model.n_a);
        let (dim_s, dim_a) = (ops_s.dim(), ops_a.dim());
        let id_s = CMatrix::identity(dim_s);
        let id_a = CMatrix::identity(dim_a);
        let h_system = build_local_hamiltonian(&ops_s, &model.system, &model.conv_s)?;
        let h_fixed = kron(&h_system, &id_a);

        let ga = |axis| ops_a.scaled(axis, model.conv_a.spin_scale);
        let gz = ga(Axis::Z);
        let mut generators = vec![
            (HamiltonianSlot::EtaA, kron(&id_s, &gz.matmul(&gz))),
            (
                HamiltonianSlot::GammaA,
                kron(&id_s, &ga(Axis::X).scale_real(-1.0)),
            ),
            (HamiltonianSlot::DeltaA, kron(&id_s, &gz.scale_real(-1.0))),
        ];
        let (cs, ca) = (&model.conv_s, &model.conv_a);
        match model.coupling.kind {
            CouplingKind::DensityDensity => generators.push((
                HamiltonianSlot::Alpha,
                coupling_operator(&ops_s, &ops_a, Axis::Z, Axis::Z, cs, ca)?,
            )),
            CouplingKind::Axes { system, ancilla } => generators.push((
                HamiltonianSlot::Alpha,
                coupling_operator(&ops_s, &ops_a, system, ancilla, cs, ca)?.hermitian_part(),
            )),
            CouplingKind::General { .. } => {
                for (i, ax_s) in Axis::ALL.iter().enumerate() {
                    for (j, ax_a) in Axis::ALL.iter().enumerate() {
                        let op = coupling_operator(&ops_s, &ops_a, *ax_s, *ax_a, cs, ca)?
                            .hermitian_part();
                        generators.push((HamiltonianSlot::AlphaIJ(i, j), op));
                    }
                }
            }
        }
        let sparse_generators = generators
            .iter()
            .map(|(_, g)| SparseMatrix::from_dense(g))
            .collect();
        Ok(Self {
            jz_s: kron(&ops_s.jz, &id_a),
            jz_a: kron(&id_s, &ops_a.jz),
            rho_system: DensityMatrix::all_left(model.n_s),
            ops_s,
            ops_a,
            dim_s,
            dim_a,
            h_fixed,
            generators,
            sparse_generators,
            h_system,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim_s * self.dim_a
    }

    /// `H_fixed + sum_i coeffs[i] K_i`, coefficients in generator order.
    pub fn hamiltonian(&self, coeffs: &[f64]) -> CMatrix {
        debug_assert_eq!(coeffs.len(), self.generators.len());
        let mut h = self.h_fixed.clone();
        for ((_, g), &c) in self.generators.iter().zip(coeffs) {
            if c != 0.0 {
                h.axpy_real(c, g);
            }
        }
        h
    }

    /// Ancilla parameters seen by the local-Hamiltonian builder.
    pub fn ancilla_hamiltonian(
        &self,
        p: &HamiltonianParams,
        conv: &ConventionFlags,
    ) -> Result<CMatrix, ModelError> {
        Ok(build_local_hamiltonian(&self.ops_a, p, conv)?)
    }
}
