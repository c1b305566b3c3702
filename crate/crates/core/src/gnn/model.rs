//! Two message-passing layers, ReLU + dropout after each, softmax-mean
//! readout, linear head, cross-entropy loss, and the exact reverse pass
//! through all of it.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng as _;

use super::layers::{layer_backward, layer_forward, GraphContext, LayerCache, LayerKind, LayerWeights};
use super::matrix::{dot, Matrix};
use super::readout::{apply_dropout, cross_entropy, head_logits, pool_softmax_mean, softmax};
use crate::error::{Error, Result};
use crate::observation::FEATURE_COLUMNS;
use crate::rng::{derive_seed, rng_from_seed, Rng};
use crate::topology::Topology;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelConfig {
    pub d_in: usize,
    pub d_hidden: usize,
    pub dropout: f64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            d_in: FEATURE_COLUMNS,
            d_hidden: 32,
            dropout: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub kind: LayerKind,
    pub config: ModelConfig,
    pub layer1: LayerWeights,
    pub layer2: LayerWeights,
    /// `d_hidden x 2`
    pub head_w: Matrix,
    /// `1 x 2`
    pub head_b: Matrix,
}

fn glorot(rows: usize, cols: usize, fan_in: usize, fan_out: usize, rng: &mut Rng) -> Matrix {
    let limit = libm::sqrt(6.0 / (fan_in + fan_out) as f64);
    Matrix::from_fn(rows, cols, |_, _| rng.random_range(-limit..=limit))
}

fn init_layer(kind: LayerKind, d_in: usize, d_out: usize, rng: &mut Rng) -> LayerWeights {
    match kind {
        LayerKind::Gcn => LayerWeights::Gcn {
            w: glorot(d_in, d_out, d_in, d_out, rng),
        },
        LayerKind::GraphSage => LayerWeights::Sage {
            w_self: glorot(d_in, d_out, d_in, d_out, rng),
            w_neigh: glorot(d_in, d_out, d_in, d_out, rng),
        },
        LayerKind::Gat => LayerWeights::Gat {
            w: glorot(d_in, d_out, d_in, d_out, rng),
            attn: glorot(1, 2 * d_out, 2 * d_out, 1, rng),
        },
    }
}

impl ModelParams {
    /// Glorot-uniform weights, zero head bias.
    pub fn init(kind: LayerKind, config: ModelConfig, seed: u64) -> Result<Self> {
        if config.d_in == 0 || config.d_hidden == 0 {
            return Err(Error::params("model dimensions must be positive"));
        }
        if !(0.0..1.0).contains(&config.dropout) {
            return Err(Error::params(format!("dropout {} outside [0, 1)", config.dropout)));
        }
        let mut rng = rng_from_seed(seed);
        let layer1 = init_layer(kind, config.d_in, config.d_hidden, &mut rng);
        let layer2 = init_layer(kind, config.d_hidden, config.d_hidden, &mut rng);
        let head_w = glorot(config.d_hidden, 2, config.d_hidden, 2, &mut rng);
        Ok(ModelParams {
            kind,
            config,
            layer1,
            layer2,
            head_w,
            head_b: Matrix::zeros(1, 2),
        })
    }

    /// Same shapes, all zeros. Gradients and Adam moments use this layout.
    pub fn zeros_like(&self) -> Self {
        ModelParams {
            kind: self.kind,
            config: self.config,
            layer1: self.layer1.zeros_like(),
            layer2: self.layer2.zeros_like(),
            head_w: self.head_w.zeros_like(),
            head_b: self.head_b.zeros_like(),
        }
    }

    /// Weight blocks in declared order: layer 1, layer 2, head weights, head bias.
    pub fn blocks(&self) -> Vec<&Matrix> {
        let mut out = self.layer1.blocks();
        out.extend(self.layer2.blocks());
        out.push(&self.head_w);
        out.push(&self.head_b);
        out
    }

    pub fn blocks_mut(&mut self) -> Vec<&mut Matrix> {
        let mut out = self.layer1.blocks_mut();
        out.extend(self.layer2.blocks_mut());
        out.push(&mut self.head_w);
        out.push(&mut self.head_b);
        out
    }

    pub fn block_names(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for (prefix, layer) in [("layer1", &self.layer1), ("layer2", &self.layer2)] {
            out.extend(layer.block_names().iter().map(|b| format!("{prefix}.{b}")));
        }
        out.push("head.w".into());
        out.push("head.b".into());
        out
    }

    pub fn parameter_count(&self) -> usize {
        self.blocks().iter().map(|b| b.as_slice().len()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.blocks().iter().all(|b| b.is_finite())
    }

    /// Checks block shapes against `kind` and `config`.
    pub fn validate(&self) -> Result<()> {
        let ModelConfig { d_in, d_hidden, .. } = self.config;
        let expected = Self::init(self.kind, self.config, 0)?;
        for ((name, have), want) in self.block_names().iter().zip(self.blocks()).zip(expected.blocks()) {
            if have.shape() != want.shape() {
                return Err(Error::shape(format!(
                    "{name} is {:?}, expected {:?} for d_in={d_in}, d_hidden={d_hidden}",
                    have.shape(),
                    want.shape()
                )));
            }
        }
        if self.layer1.kind() != self.kind || self.layer2.kind() != self.kind {
            return Err(Error::shape("layer weights do not match the model's layer kind"));
        }
        for (name, block) in self.block_names().iter().zip(self.blocks()) {
            if block.as_slice().iter().any(|v| !v.is_finite()) {
                return Err(Error::input(format!("{name} holds a non-finite weight")));
            }
        }
        Ok(())
    }

    /// `self += s * other`, block by block.
    pub fn add_scaled(&mut self, other: &ModelParams, s: f64) -> Result<()> {
        let theirs = other.blocks();
        let mut ours = self.blocks_mut();
        if ours.len() != theirs.len() {
            return Err(Error::shape("parameter block count mismatch"));
        }
        for (a, b) in ours.iter_mut().zip(theirs) {
            if a.shape() != b.shape() {
                return Err(Error::shape(format!("block {:?} vs {:?}", a.shape(), b.shape())));
            }
            for (x, y) in a.as_mut_slice().iter_mut().zip(b.as_slice()) {
                *x += s * y;
            }
        }
        Ok(())
    }
}

/// Everything the reverse pass needs from one forward evaluation.
#[derive(Debug, Clone)]
pub struct ForwardPass {
    pub logits: [f64; 2],
    pub pooled: Vec<f64>,
    node_softmax: Matrix,
    z1: Matrix,
    cache1: LayerCache,
    mask1: Option<Vec<f64>>,
    /// layer-2 input: ReLU(z1) after dropout
    h1: Matrix,
    z2: Matrix,
    cache2: LayerCache,
    mask2: Option<Vec<f64>>,
}

fn activate(z: &Matrix, p: f64, seed: Option<u64>) -> Result<(Matrix, Option<Vec<f64>>)> {
    let mut h = z.clone();
    h.relu_in_place();
    match seed {
        Some(s) => apply_dropout(&h, p, s, true),
        None => Ok((h, None)),
    }
}

/// Gradient through dropout and ReLU back to the pre-activation.
fn deactivate(grad_out: &Matrix, z: &Matrix, mask: Option<&[f64]>) -> Matrix {
    let mut g = grad_out.clone();
    for (i, (gi, &zi)) in g.as_mut_slice().iter_mut().zip(z.as_slice()).enumerate() {
        if zi <= 0.0 {
            *gi = 0.0;
        } else if let Some(m) = mask {
            *gi *= m[i];
        }
    }
    g
}

/// Runs the model. `dropout_seed = None` is inference mode.
pub fn forward(params: &ModelParams, ctx: &GraphContext<'_>, x: &Matrix, dropout_seed: Option<u64>) -> Result<ForwardPass> {
    let p = params.config.dropout;
    let seed1 = dropout_seed.map(|s| derive_seed(s, "dropout", 1));
    let seed2 = dropout_seed.map(|s| derive_seed(s, "dropout", 2));

    let (z1, cache1) = layer_forward(&params.layer1, ctx, x)?;
    let (h1, mask1) = activate(&z1, p, seed1)?;
    let (z2, cache2) = layer_forward(&params.layer2, ctx, &h1)?;
    let (h2, mask2) = activate(&z2, p, seed2)?;
    let (pooled, node_softmax) = pool_softmax_mean(&h2)?;
    let logits = head_logits(&pooled, &params.head_w, &params.head_b)?;
    Ok(ForwardPass {
        logits,
        pooled,
        node_softmax,
        z1,
        cache1,
        mask1,
        h1,
        z2,
        cache2,
        mask2,
    })
}

/// Gradients of `cross_entropy(logits, label)` for every parameter block.
pub fn backward(
    params: &ModelParams,
    ctx: &GraphContext<'_>,
    x: &Matrix,
    pass: &ForwardPass,
    label: usize,
) -> Result<ModelParams> {
    if label > 1 {
        return Err(Error::params(format!("class label {label} is not 0 or 1")));
    }
    let probs = softmax(&pass.logits);
    let grad_logits = [probs[0] - if label == 0 { 1.0 } else { 0.0 }, probs[1] - if label == 1 { 1.0 } else { 0.0 }];

    let d = params.head_w.rows();
    let mut head_w = Matrix::zeros(d, 2);
    let mut grad_pooled = alloc::vec![0.0; d];
    for i in 0..d {
        head_w[(i, 0)] = pass.pooled[i] * grad_logits[0];
        head_w[(i, 1)] = pass.pooled[i] * grad_logits[1];
        grad_pooled[i] = params.head_w[(i, 0)] * grad_logits[0] + params.head_w[(i, 1)] * grad_logits[1];
    }
    let head_b = Matrix::from_vec(1, 2, grad_logits.to_vec())?;

    // d(mean softmax)/dh: every node receives grad_pooled / n through its own softmax
    let n = pass.node_softmax.rows();
    let inv_n = 1.0 / n as f64;
    let mut grad_h2 = Matrix::zeros(n, d);
    for v in 0..n {
        let s = pass.node_softmax.row(v);
        let centered = dot(s, &grad_pooled);
        for (g, (&si, &gp)) in grad_h2.row_mut(v).iter_mut().zip(s.iter().zip(&grad_pooled)) {
            *g = si * (gp - centered) * inv_n;
        }
    }

    let grad_z2 = deactivate(&grad_h2, &pass.z2, pass.mask2.as_deref());
    let (layer2, grad_h1) = layer_backward(&params.layer2, ctx, &pass.h1, &pass.cache2, &grad_z2, true)?;
    let grad_h1 = grad_h1.ok_or_else(|| Error::shape("layer 2 returned no input gradient"))?;
    let grad_z1 = deactivate(&grad_h1, &pass.z1, pass.mask1.as_deref());
    let (layer1, _) = layer_backward(&params.layer1, ctx, x, &pass.cache1, &grad_z1, false)?;

    Ok(ModelParams {
        kind: params.kind,
        config: params.config,
        layer1,
        layer2,
        head_w,
        head_b,
    })
}

/// Inference-mode logits for one graph.
pub fn predict_logits(params: &ModelParams, topology: &Topology, x: &Matrix) -> Result<[f64; 2]> {
    let ctx = GraphContext::new(topology, params.kind);
    Ok(forward(params, &ctx, x, None)?.logits)
}

/// Inference-mode loss for one graph.
pub fn loss(params: &ModelParams, topology: &Topology, x: &Matrix, label: usize) -> Result<f64> {
    Ok(cross_entropy(&predict_logits(params, topology, x)?, label))
}

/// Loss and gradients for one graph; dropout is active iff a seed is given.
pub fn loss_and_gradient(
    params: &ModelParams,
    topology: &Topology,
    x: &Matrix,
    label: usize,
    dropout_seed: Option<u64>,
) -> Result<(f64, ModelParams)> {
    let ctx = GraphContext::new(topology, params.kind);
    let pass = forward(params, &ctx, x, dropout_seed)?;
    let grads = backward(params, &ctx, x, &pass, label)?;
    Ok((cross_entropy(&pass.logits, label), grads))
}
