//! Jordan–Schwinger spin operators for `N` bosons in two modes, and the
//! Bose–Hubbard Hamiltonians built from them.
//!
//! Basis index `k = 0..=N` counts the bosons in the LEFT well, so that
//! `J_z |k> = (N - 2k)/2 |k>`: index `N` is "all left", index `0` is "all
//! right".

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{kron, CMatrix};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlgebraError {
    #[error("Pauli scaling needs a single boson, got N = {0}")]
    PauliNeedsOneBoson(usize),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

/// Spin component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];
}

/// `J_x`, `J_y`, `J_z` on the symmetric `(N+1)`-dimensional sector.
#[derive(Debug, Clone)]
pub struct OperatorSet {
    pub n_bosons: usize,
    pub jx: CMatrix,
    pub jy: CMatrix,
    pub jz: CMatrix,
}

impl OperatorSet {
    pub fn dim(&self) -> usize {
        self.n_bosons + 1
    }

    pub fn component(&self, axis: Axis) -> &CMatrix {
        match axis {
            Axis::X => &self.jx,
            Axis::Y => &self.jy,
            Axis::Z => &self.jz,
        }
    }

    /// `G = J` or `G = 2J` depending on the convention.
    pub fn scaled(&self, axis: Axis, scale: SpinScale) -> CMatrix {
        self.component(axis).scale_real(scale.factor())
    }

    /// Diagonal of `J_z`, i.e. `(N - 2k)/2`.
    pub fn jz_diag(&self) -> Vec<f64> {
        (0..self.dim())
            .map(|k| (self.n_bosons as f64 - 2.0 * k as f64) / 2.0)
            .collect()
    }
}

/// Matrix elements
/// `<j|J_x|k> = [sqrt((k+1)(N-k)) d_{j,k+1} + sqrt(k(N-k+1)) d_{j,k-1}] / 2`,
/// the analogous `J_y`, and `<j|J_z|k> = (N-2k)/2 d_jk`.
pub fn build_operators(n_bosons: usize) -> OperatorSet {
    let n = n_bosons;
    let dim = n + 1;
    let nf = n as f64;
    let raise = |k: usize| (((k + 1) as f64) * (nf - k as f64)).sqrt() / 2.0; // <k+1| . |k>
    let mut jx = CMatrix::zeros(dim, dim);
    let mut jy = CMatrix::zeros(dim, dim);
    let mut jz = CMatrix::zeros(dim, dim);
    for k in 0..dim {
        jz[(k, k)] = C64::new((nf - 2.0 * k as f64) / 2.0, 0.0);
        if k < n {
            let v = raise(k);
            jx[(k + 1, k)] = C64::new(v, 0.0);
            jx[(k, k + 1)] = C64::new(v, 0.0);
            // <k+1|J_y|k> = -v/i = i v ; <k|J_y|k+1> = v/i = -i v
            jy[(k + 1, k)] = C64::new(0.0, v);
            jy[(k, k + 1)] = C64::new(0.0, -v);
        }
    }
    OperatorSet {
        n_bosons,
        jx,
        jy,
        jz,
    }
}

/// Bose–Hubbard coefficients `(eta, gamma, delta)`: self-interaction,
/// tunneling and well asymmetry. Signs are unconstrained.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct HamiltonianParams {
    pub eta: f64,
    pub gamma: f64,
    pub delta: f64,
}

impl HamiltonianParams {
    pub fn new(eta: f64, gamma: f64, delta: f64) -> Self {
        Self { eta, gamma, delta }
    }
}

/// Whether single-boson operators enter as `J` (eigenvalues +-1/2) or as
/// Pauli matrices `2J` (eigenvalues +-1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpinScale {
    J,
    Pauli,
}

impl SpinScale {
    pub fn factor(self) -> f64 {
        match self {
            SpinScale::J => 1.0,
            SpinScale::Pauli => 2.0,
        }
    }

    /// Pauli for a lone boson, `J` otherwise.
    pub fn default_for(n_bosons: usize) -> Self {
        if n_bosons == 1 {
            SpinScale::Pauli
        } else {
            SpinScale::J
        }
    }
}

/// Which energy is set to one (hbar = 1 always).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnitSystem {
    DeltaSUnits,
    GammaSUnits,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConventionFlags {
    pub spin_scale: SpinScale,
    pub unit_system: UnitSystem,
}

impl ConventionFlags {
    pub fn new(spin_scale: SpinScale, unit_system: UnitSystem) -> Self {
        Self {
            spin_scale,
            unit_system,
        }
    }

    pub fn validate(&self, ops: &OperatorSet) -> Result<(), AlgebraError> {
        if self.spin_scale == SpinScale::Pauli && ops.n_bosons != 1 {
            return Err(AlgebraError::PauliNeedsOneBoson(ops.n_bosons));
        }
        Ok(())
    }
}

/// `eta G_z^2 - gamma G_x - delta G_z`.
pub fn build_local_hamiltonian(
    ops: &OperatorSet,
    p: &HamiltonianParams,
    conv: &ConventionFlags,
) -> Result<CMatrix, AlgebraError> {
    conv.validate(ops)?;
    let gx = ops.scaled(Axis::X, conv.spin_scale);
    let gz = ops.scaled(Axis::Z, conv.spin_scale);
    let mut h = gz.matmul(&gz).scale_real(p.eta);
    h.axpy_real(-p.gamma, &gx);
    h.axpy_real(-p.delta, &gz);
    Ok(h)
}

/// `H_S (x) I + I (x) H_A + alpha G_z^S (x) G_z^A`, system factor first.
pub fn build_joint_hamiltonian(
    hs: &CMatrix,
    ha: &CMatrix,
    ops_s: &OperatorSet,
    ops_a: &OperatorSet,
    alpha: f64,
    conv_s: &ConventionFlags,
    conv_a: &ConventionFlags,
) -> Result<CMatrix, AlgebraError> {
    if hs.rows() != ops_s.dim() || !hs.is_square() {
        return Err(AlgebraError::DimensionMismatch(format!(
            "system Hamiltonian is {}x{}, operators have dim {}",
            hs.rows(),
            hs.cols(),
            ops_s.dim()
        )));
    }
    if ha.rows() != ops_a.dim() || !ha.is_square() {
        return Err(AlgebraError::DimensionMismatch(format!(
            "ancilla Hamiltonian is {}x{}, operators have dim {}",
            ha.rows(),
            ha.cols(),
            ops_a.dim()
        )));
    }
    let mut h = uncoupled_hamiltonian(hs, ha);
    if alpha != 0.0 {
        h.axpy_real(
            alpha,
            &coupling_operator(ops_s, ops_a, Axis::Z, Axis::Z, conv_s, conv_a)?,
        );
    }
    Ok(h)
}

/// `H_S (x) I + I (x) H_A`.
pub fn uncoupled_hamiltonian(hs: &CMatrix, ha: &CMatrix) -> CMatrix {
    let mut h = kron(hs, &CMatrix::identity(ha.rows()));
    h += &kron(&CMatrix::identity(hs.rows()), ha);
    h
}

/// `G_a^S (x) G_b^A` with each side scaled per its convention.
pub fn coupling_operator(
    ops_s: &OperatorSet,
    ops_a: &OperatorSet,
    axis_s: Axis,
    axis_a: Axis,
    conv_s: &ConventionFlags,
    conv_a: &ConventionFlags,
) -> Result<CMatrix, AlgebraError> {
    conv_s.validate(ops_s)?;
    conv_a.validate(ops_a)?;
    Ok(kron(
        &ops_s.scaled(axis_s, conv_s.spin_scale),
        &ops_a.scaled(axis_a, conv_a.spin_scale),
    ))
}

/// `sum_ij alpha_ij J_i (x) J_j`, Hermitian part taken.
///
/// Rows of `alpha` index the system axis and columns the ancilla axis, in
/// the order x, y, z.
pub fn build_general_coupling(
    ops_s: &OperatorSet,
    ops_a: &OperatorSet,
    alpha: &[[f64; 3]; 3],
) -> CMatrix {
    let dim = ops_s.dim() * ops_a.dim();
    let mut m = CMatrix::zeros(dim, dim);
    for (i, ax_s) in Axis::ALL.iter().enumerate() {
        for (j, ax_a) in Axis::ALL.iter().enumerate() {
            if alpha[i][j] != 0.0 {
                m.axpy_real(
                    alpha[i][j],
                    &kron(ops_s.component(*ax_s), ops_a.component(*ax_a)),
                );
            }
        }
    }
    m.hermitian_part()
}
