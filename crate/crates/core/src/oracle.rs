//! Closed-form tunneling probabilities for the analytically solvable
//! single-boson scenarios and the dephasing steady state.
//!
//! These are plain scalar formulas with no dependency on the simulator, so
//! they act as an independent check of it.

use num_complex::Complex64 as C64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("ancilla amplitudes are not normalized (norm^2 = {0})")]
    NotNormalized(f64),
    #[error("N = {n} has no finite resonant coupling for k = {k} (N = 2k)")]
    NoFiniteCoupling { n: usize, k: usize },
    #[error("index k = {k} out of range for N = {n}")]
    IndexOutOfRange { n: usize, k: usize },
    #[error("need at least one boson")]
    NoBosons,
}

/// Pure ancilla state in the number basis, `coeffs[k] = <k|psi_A>`.
#[derive(Debug, Clone, PartialEq)]
pub struct AncillaAmplitudes {
    coeffs: Vec<C64>,
}

impl AncillaAmplitudes {
    pub fn new(coeffs: Vec<C64>) -> Result<Self, OracleError> {
        let norm: f64 = coeffs.iter().map(|z| z.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(OracleError::NotNormalized(norm));
        }
        Ok(Self { coeffs })
    }

    /// `|k>` for an ancilla of `n` bosons.
    pub fn number_state(n: usize, k: usize) -> Self {
        let mut coeffs = vec![C64::new(0.0, 0.0); n + 1];
        coeffs[k] = C64::new(1.0, 0.0);
        Self { coeffs }
    }

    pub fn n_bosons(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    fn weights(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(k, z)| (k, z.norm_sqr()))
    }
}

/// `gamma^2/omega^2 sin^2(omega t)`, `omega = sqrt(delta^2 + gamma^2)`.
/// Zero when both energies vanish.
pub fn p_two_level(delta: f64, gamma: f64, t: f64) -> f64 {
    let omega2 = delta * delta + gamma * gamma;
    if omega2 == 0.0 {
        return 0.0;
    }
    gamma * gamma / omega2 * (omega2.sqrt() * t).sin().powi(2)
}

/// Eigenvalue `(N - 2k)/2` of the ancilla `J_z`.
fn jz_eigenvalue(n: usize, k: usize) -> f64 {
    (n as f64 - 2.0 * k as f64) / 2.0
}

/// One boson in an asymmetric trap (`Delta_S = Delta_A = 1`) coupled by
/// `alpha sigma_z (x) J_z` to a frozen ancilla of `n_a` bosons in `psi`:
/// `sum_k |<k|psi>|^2 gamma^2/omega_k^2 sin^2(omega_k t)` with
/// `omega_k = sqrt((1 - alpha (N-2k)/2)^2 + gamma^2)`.
pub fn p_asymmetric_with_ancilla(gamma: f64, alpha: f64, psi: &AncillaAmplitudes, t: f64) -> f64 {
    let n = psi.n_bosons();
    psi.weights()
        .map(|(k, w)| w * p_two_level(1.0 - alpha * jz_eigenvalue(n, k), gamma, t))
        .sum()
}

/// One boson in a symmetric trap (`gamma_S = 1`) coupled by
/// `alpha sigma_x (x) J_z`: `sum_k |<k|psi>|^2 sin^2(omega_k t)` with
/// `omega_k = |1 - alpha (N-2k)/2|`.
pub fn p_symmetric_with_ancilla(alpha: f64, psi: &AncillaAmplitudes, t: f64) -> f64 {
    let n = psi.n_bosons();
    psi.weights()
        .map(|(k, w)| {
            let omega = (1.0 - alpha * jz_eigenvalue(n, k)).abs();
            w * (omega * t).sin().powi(2)
        })
        .sum()
}

/// Coupling that cancels the asymmetry on ancilla branch `k`:
/// `alpha = 2 / (N - 2k)`.
pub fn optimal_coupling_asymmetric(n_a: usize, k: usize) -> Result<f64, OracleError> {
    if k > n_a {
        return Err(OracleError::IndexOutOfRange { n: n_a, k });
    }
    if n_a == 2 * k {
        return Err(OracleError::NoFiniteCoupling { n: n_a, k });
    }
    Ok(2.0 / (n_a as f64 - 2.0 * k as f64))
}

/// Long-time tunneling probability under dephasing, `1/(N_S + 1)`.
pub fn stationary_probability(n_s: usize) -> Result<f64, OracleError> {
    if n_s == 0 {
        return Err(OracleError::NoBosons);
    }
    Ok(1.0 / (n_s as f64 + 1.0))
}
