//! Fixtures shared by the criterion benchmarks in `benches/`.

use bosetunnel::experiments::{parse_config, ScenarioConfig};
use bosetunnel::linalg::CMatrix;
use num_complex::Complex64;

/// Fully learnable scenario with `n_s` system and `n_a` ancilla bosons,
/// dephasing `lambda` on both sides (zero for closed dynamics).
pub fn scenario(n_s: usize, n_a: usize, lambda: f64) -> ScenarioConfig {
    let src = format!(
        r#"
[scenario]
name = "bench"
seed = 1
[system]
n = {n_s}
gamma = 1.0
delta = 1.0
[ancilla]
n = {n_a}
eta = {{ value = 1.0, learnable = true }}
gamma = {{ value = 1.0, learnable = true }}
delta = {{ value = 1.0, learnable = true }}
learnable_state = true
[coupling]
alpha = {{ value = 1.0, learnable = true }}
[noise]
lambda_s = {lambda}
lambda_a = {lambda}
[optimizer]
dt = 0.02
"#
    );
    parse_config(&src).expect("benchmark scenario is valid")
}

/// Deterministic dense Hermitian matrix.
pub fn hermitian(dim: usize) -> CMatrix {
    let m = CMatrix::from_fn(dim, dim, |i, j| {
        let x = ((i * 31 + j * 17) % 13) as f64 / 13.0 - 0.5;
        let y = ((i * 7 + j * 29) % 11) as f64 / 11.0 - 0.5;
        Complex64::new(x, y)
    });
    m.hermitian_part()
}
