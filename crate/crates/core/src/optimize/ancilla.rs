//! Parameterization of the learned ancilla state by an unconstrained
//! complex factor `F`.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::OptimizeError;
use crate::dynamics::DensityMatrix;
use crate::linalg::{hermitian_eig, CMatrix};
use crate::model::AncillaInit;

/// Restriction placed on the learned ancilla state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AncillaConstraint {
    #[default]
    None,
    /// Keep only the diagonal of `F F^H` and renormalize.
    Diagonal,
    /// `rho_A = diag(softmax(Re F_kk))`.
    DiagonalSoftmax,
}

/// `F F^H / tr(F F^H)`.
pub fn ancilla_state(factor: &CMatrix) -> Result<DensityMatrix, OptimizeError> {
    let r = factor.matmul(&factor.adjoint());
    let tr = r.trace().re;
    if !(tr > 0.0) || !tr.is_finite() {
        return Err(OptimizeError::DegenerateAncilla);
    }
    let mut r = r.scale_real(1.0 / tr);
    r.symmetrize();
    Ok(DensityMatrix::new_unchecked(r))
}

/// Zeroes the off-diagonal entries and renormalizes the diagonal.
pub fn project_diagonal(rho: &DensityMatrix) -> Result<DensityMatrix, OptimizeError> {
    let d: Vec<f64> = rho.matrix().diag().iter().map(|z| z.re.max(0.0)).collect();
    let s: f64 = d.iter().sum();
    if !(s > 0.0) {
        return Err(OptimizeError::DegenerateAncilla);
    }
    let d: Vec<f64> = d.iter().map(|x| x / s).collect();
    Ok(DensityMatrix::new_unchecked(CMatrix::from_real_diag(&d)))
}

fn softmax(w: &[f64]) -> Vec<f64> {
    let m = w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = w.iter().map(|x| (x - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.iter().map(|x| x / s).collect()
}

fn logits(factor: &CMatrix) -> Vec<f64> {
    factor.diag().iter().map(|z| z.re).collect()
}

/// Ancilla state seen by the dynamics for a given factor and constraint.
pub fn constrained_ancilla(
    factor: &CMatrix,
    constraint: AncillaConstraint,
) -> Result<DensityMatrix, OptimizeError> {
    match constraint {
        AncillaConstraint::None => ancilla_state(factor),
        AncillaConstraint::Diagonal => project_diagonal(&ancilla_state(factor)?),
        AncillaConstraint::DiagonalSoftmax => Ok(DensityMatrix::new_unchecked(
            CMatrix::from_real_diag(&softmax(&logits(factor))),
        )),
    }
}

/// Chain rule from the ancilla sensitivity `S` (with `P = Tr(S rho_A)`) to
/// the factor entries. Entry `(i, j)` of the result holds
/// `dP/d Re F_ij + i dP/d Im F_ij`.
pub fn factor_gradient(factor: &CMatrix, sens: &CMatrix, constraint: AncillaConstraint) -> CMatrix {
    let n = factor.rows();
    match constraint {
        AncillaConstraint::DiagonalSoftmax => {
            let p = softmax(&logits(factor));
            let total: f64 = (0..n).map(|k| p[k] * sens[(k, k)].re).sum();
            let mut g = CMatrix::zeros(n, n);
            for k in 0..n {
                g[(k, k)] = C64::new(p[k] * (sens[(k, k)].re - total), 0.0);
            }
            g
        }
        AncillaConstraint::None | AncillaConstraint::Diagonal => {
            let s_eff = if constraint == AncillaConstraint::Diagonal {
                CMatrix::from_real_diag(&sens.diag().iter().map(|z| z.re).collect::<Vec<_>>())
            } else {
                sens.hermitian_part()
            };
            let raw = factor.matmul(&factor.adjoint());
            let s = raw.trace().re;
            let p = s_eff.inner_re(&raw) / s;
            // X = (S F - P F) / s; d/dRe = 2 Re X, d/dIm = 2 Im X
            let mut x = s_eff.matmul(factor);
            x.axpy_real(-p, factor);
            x.scale_real(2.0 / s)
        }
    }
}

/// Factor reproducing a requested starting state; `random` supplies the
/// Gaussian matrix for [`AncillaInit::Random`].
pub fn initial_factor(
    init: &AncillaInit,
    dim: usize,
    random: impl FnOnce() -> CMatrix,
) -> Result<CMatrix, OptimizeError> {
    let basis = |k: usize| {
        let mut f = CMatrix::zeros(dim, dim);
        f[(k, k)] = C64::new(1.0, 0.0);
        f
    };
    Ok(match init {
        AncillaInit::Random => random(),
        AncillaInit::AllLeft => basis(dim - 1),
        AncillaInit::AllRight => basis(0),
        AncillaInit::Number(k) => basis(*k),
        AncillaInit::Vector(v) => {
            CMatrix::from_fn(
                dim,
                dim,
                |i, j| if j == 0 { v[i] } else { C64::new(0.0, 0.0) },
            )
        }
        AncillaInit::Density(rho) => {
            let eig = hermitian_eig(rho)?;
            let v = &eig.vectors;
            CMatrix::from_fn(dim, dim, |i, k| v[(i, k)] * eig.values[k].max(0.0).sqrt())
        }
    })
}
