//! Central finite-difference check of the analytic gradients.

use alloc::string::String;
use alloc::vec::Vec;

use super::layers::GraphContext;
use super::matrix::Matrix;
use super::model::{forward, loss_and_gradient, ModelParams};
use rand::Rng as _;

use super::layers::LayerKind;
use super::model::ModelConfig;
use crate::error::Result;
use crate::observation::{extract_features, FeatureScaling, NodeLabel, NodeLabelAssignment};
use crate::rng::{derive_seed, rng_from_seed};
use crate::topology::{generate_ba, Topology};

/// Coordinates probed per parameter block (all of them for smaller blocks).
pub const COORDS_PER_BLOCK: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub max_relative_error: f64,
    /// Worst relative error per block, in [`ModelParams::blocks`] order.
    pub per_block: Vec<(String, f64)>,
}

/// `|a - b| / max(1e-8, |a| + |b|)`
pub fn relative_discrepancy(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / (analytic.abs() + numeric.abs()).max(1e-8)
}

/// Compares analytic gradients (dropout off) against central differences with
/// step `h` on a seeded subsample of coordinates from every block.
pub fn grad_check_report(
    params: &ModelParams,
    topology: &Topology,
    x: &Matrix,
    label: usize,
    h: f64,
    seed: u64,
) -> Result<GradCheckReport> {
    let (_, grads) = loss_and_gradient(params, topology, x, label, None)?;
    let ctx = GraphContext::new(topology, params.kind);
    let mut rng = rng_from_seed(seed);
    let names = params.block_names();
    let mut probe = params.clone();
    let mut per_block = Vec::new();
    let mut worst = 0.0f64;
    for (b, name) in names.into_iter().enumerate() {
        let len = params.blocks()[b].as_slice().len();
        let coords: Vec<usize> = if len <= COORDS_PER_BLOCK {
            (0..len).collect()
        } else {
            rand::seq::index::sample(&mut rng, len, COORDS_PER_BLOCK).into_vec()
        };
        let mut block_worst = 0.0f64;
        for i in coords {
            let original = params.blocks()[b].as_slice()[i];
            probe.blocks_mut()[b].as_mut_slice()[i] = original + h;
            let up = logit_gap(&probe, &ctx, x, label)?;
            probe.blocks_mut()[b].as_mut_slice()[i] = original - h;
            let down = logit_gap(&probe, &ctx, x, label)?;
            probe.blocks_mut()[b].as_mut_slice()[i] = original;
            let numeric = loss_difference(up, down) / (2.0 * h);
            let analytic = grads.blocks()[b].as_slice()[i];
            block_worst = block_worst.max(relative_discrepancy(analytic, numeric));
        }
        worst = worst.max(block_worst);
        per_block.push((name, block_worst));
    }
    Ok(GradCheckReport {
        max_relative_error: worst,
        per_block,
    })
}

/// `logit[other] - logit[label]`, taken straight from the pooled vector so
/// the two large logits never get subtracted.
fn logit_gap(params: &ModelParams, ctx: &GraphContext<'_>, x: &Matrix, label: usize) -> Result<f64> {
    let pass = forward(params, ctx, x, None)?;
    let other = 1 - label;
    let (w, b) = (&params.head_w, &params.head_b);
    let mut gap = b[(0, other)] - b[(0, label)];
    for (i, &p) in pass.pooled.iter().enumerate() {
        gap += p * (w[(i, other)] - w[(i, label)]);
    }
    Ok(gap)
}

/// Two-class cross-entropy is `softplus(gap)`; this is
/// `softplus(up) - softplus(down)` without cancelling two values near ln 2.
fn loss_difference(up: f64, down: f64) -> f64 {
    let sigma_down = if down >= 0.0 {
        1.0 / (1.0 + libm::exp(-down))
    } else {
        let e = libm::exp(down);
        e / (1.0 + e)
    };
    libm::log1p(sigma_down * libm::expm1(up - down))
}

pub fn grad_check(params: &ModelParams, topology: &Topology, x: &Matrix, label: usize, h: f64) -> Result<f64> {
    grad_check_report(params, topology, x, label, h, 0).map(|r| r.max_relative_error)
}

/// Nodes in the graphs drawn by [`random_case`].
pub const CASE_NODES: usize = 6;

/// A seeded check case: a small BA graph (m = 2), uniformly random node
/// labels, raw count features and a random graph label.
pub fn random_case(seed: u64) -> Result<(Topology, Matrix, usize)> {
    let topology = generate_ba(CASE_NODES, 2, derive_seed(seed, "topology", 0))?;
    let mut rng = rng_from_seed(derive_seed(seed, "labels", 0));
    let labels = (0..CASE_NODES)
        .map(|_| NodeLabel::ALL[rng.random_range(0..NodeLabel::ALL.len())])
        .collect();
    let assignment = NodeLabelAssignment {
        labels,
        observer_set: Vec::new(),
    };
    let x = extract_features(&topology, &assignment)?.to_matrix(FeatureScaling::Raw);
    let label = rng.random_range(0..2);
    Ok((topology, x, label))
}

/// Freshly initialized model of `kind` (default widths, dropout off) checked on
/// [`random_case`]`(seed)`.
pub fn check_random_case(kind: LayerKind, seed: u64, h: f64) -> Result<GradCheckReport> {
    let (topology, x, label) = random_case(seed)?;
    let config = ModelConfig {
        dropout: 0.0,
        ..ModelConfig::default()
    };
    let params = ModelParams::init(kind, config, derive_seed(seed, "init", 0))?;
    grad_check_report(&params, &topology, &x, label, h, derive_seed(seed, "coords", 0))
}
