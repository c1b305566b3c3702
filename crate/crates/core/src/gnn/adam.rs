use super::model::ModelParams;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            lr: 0.01,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// First and second moment estimates, shaped like the model.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub config: AdamConfig,
    pub m: ModelParams,
    pub v: ModelParams,
    pub t: u64,
}

impl AdamState {
    pub fn new(params: &ModelParams, config: AdamConfig) -> Self {
        AdamState {
            config,
            m: params.zeros_like(),
            v: params.zeros_like(),
            t: 0,
        }
    }
}

/// One bias-corrected Adam update over flat slices. `t` is the step number
/// after incrementing (1 on the first step).
pub fn adam_update(params: &mut [f64], grads: &[f64], m: &mut [f64], v: &mut [f64], t: u64, cfg: &AdamConfig) {
    let bc1 = 1.0 - libm::pow(cfg.beta1, t as f64);
    let bc2 = 1.0 - libm::pow(cfg.beta2, t as f64);
    for i in 0..params.len() {
        let g = grads[i];
        m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
        v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
        let m_hat = m[i] / bc1;
        let v_hat = v[i] / bc2;
        params[i] -= cfg.lr * m_hat / (libm::sqrt(v_hat) + cfg.eps);
    }
}

pub fn adam_step(params: &mut ModelParams, grads: &ModelParams, state: &mut AdamState) -> Result<()> {
    if !(state.config.lr > 0.0) {
        return Err(Error::params("Adam learning rate must be positive"));
    }
    let cfg = state.config;
    let grad_blocks = grads.blocks();
    let mut p_blocks = params.blocks_mut();
    let mut m_blocks = state.m.blocks_mut();
    let mut v_blocks = state.v.blocks_mut();
    if p_blocks.len() != grad_blocks.len() || p_blocks.len() != m_blocks.len() || p_blocks.len() != v_blocks.len() {
        return Err(Error::shape("Adam: parameter block count mismatch"));
    }
    for i in 0..p_blocks.len() {
        let shape = p_blocks[i].shape();
        if grad_blocks[i].shape() != shape || m_blocks[i].shape() != shape || v_blocks[i].shape() != shape {
            return Err(Error::shape(alloc::format!(
                "Adam: block {i} is {shape:?}, gradient {:?}",
                grad_blocks[i].shape()
            )));
        }
    }
    state.t += 1;
    for i in 0..p_blocks.len() {
        adam_update(
            p_blocks[i].as_mut_slice(),
            grad_blocks[i].as_slice(),
            m_blocks[i].as_mut_slice(),
            v_blocks[i].as_mut_slice(),
            state.t,
            &cfg,
        );
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gnn::{LayerKind, Matrix, ModelConfig};

    #[test]
    fn first_step_moves_by_lr() {
        let cfg = AdamConfig {
            lr: 0.1,
            ..AdamConfig::default()
        };
        let (mut w, mut m, mut v) = ([2.0], [0.0], [0.0]);
        adam_update(&mut w, &[1.0], &mut m, &mut v, 1, &cfg);
        assert!((w[0] - 1.9).abs() < 1e-7, "{}", w[0]);
    }

    #[test]
    fn zero_gradient_is_a_no_op() {
        let mut p = ModelParams::init(LayerKind::Gat, ModelConfig::default(), 1).unwrap();
        let before = p.clone();
        let mut state = AdamState::new(&p, AdamConfig::default());
        adam_step(&mut p, &before.zeros_like(), &mut state).unwrap();
        assert_eq!(p, before);
        assert_eq!(state.t, 1);
    }

    #[test]
    fn descends_a_quadratic() {
        let cfg = AdamConfig {
            lr: 0.1,
            ..AdamConfig::default()
        };
        let (mut w, mut m, mut v) = ([3.0], [0.0], [0.0]);
        let mut last = w[0] * w[0];
        for t in 1..=2 {
            let g = [2.0 * w[0]];
            adam_update(&mut w, &g, &mut m, &mut v, t, &cfg);
            let f = w[0] * w[0];
            assert!(f < last);
            last = f;
        }
    }

    #[test]
    fn shape_mismatch() {
        let mut p = ModelParams::init(LayerKind::Gcn, ModelConfig::default(), 1).unwrap();
        let mut g = p.zeros_like();
        g.head_w = Matrix::zeros(1, 1);
        let mut state = AdamState::new(&p, AdamConfig::default());
        assert!(matches!(adam_step(&mut p, &g, &mut state), Err(Error::Shape(_))));
        assert_eq!(state.t, 0);
    }
}
