use super::{OptConfig, OptState, ParamKey};

const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const EPS: f64 = 1e-8;

/// One bias-corrected Adam update of the coordinates in `layout`.
pub fn adam_step(state: &mut OptState, layout: &[ParamKey], grad: &[f64], cfg: &OptConfig) {
    debug_assert_eq!(layout.len(), grad.len());
    state.step += 1;
    let t = state.step as i32;
    let c1 = 1.0 - BETA1.powi(t);
    let c2 = 1.0 - BETA2.powi(t);
    for (i, (&key, &g)) in layout.iter().zip(grad).enumerate() {
        let m = BETA1 * state.adam_m[i] + (1.0 - BETA1) * g;
        let v = BETA2 * state.adam_v[i] + (1.0 - BETA2) * g * g;
        state.adam_m[i] = m;
        state.adam_v[i] = v;
        let update = cfg.learning_rate * (m / c1) / ((v / c2).sqrt() + EPS);
        state.set(key, state.get(key) - update);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::CMatrix;

    fn state(n: usize) -> OptState {
        OptState {
            eta_a: 1.0,
            gamma_a: 1.0,
            delta_a: 1.0,
            alpha: 0.0,
            alpha_matrix: [[0.0; 3]; 3],
            t_raw: 0.5,
            ancilla_factor: CMatrix::identity(2),
            adam_m: vec![0.0; n],
            adam_v: vec![0.0; n],
            step: 0,
        }
    }

    const LAYOUT: [ParamKey; 3] = [ParamKey::Alpha, ParamKey::TimeRaw, ParamKey::FactorIm(0, 1)];

    #[test]
    fn zero_gradient_changes_nothing() {
        let mut s = state(3);
        let before = s.vector(&LAYOUT);
        adam_step(&mut s, &LAYOUT, &[0.0; 3], &OptConfig::default());
        assert_eq!(s.vector(&LAYOUT), before);
        assert_eq!(s.step, 1);
    }

    #[test]
    fn first_step_has_learning_rate_size() {
        for g in [1e-4, 0.3, -7.0, 1e5] {
            let mut s = state(3);
            adam_step(&mut s, &LAYOUT, &[g, 0.0, 0.0], &OptConfig::default());
            let moved = s.alpha;
            assert!((moved.abs() - 0.01).abs() < 1e-5, "g = {g}: moved {moved}");
            assert_eq!(moved.signum(), -g.signum());
        }
    }

    #[test]
    fn repeated_steps_descend_monotonically() {
        let mut s = state(3);
        let mut last = s.alpha;
        for _ in 0..5 {
            adam_step(&mut s, &LAYOUT, &[2.0, 0.0, 0.0], &OptConfig::default());
            assert!(s.alpha < last);
            last = s.alpha;
        }
    }
}
