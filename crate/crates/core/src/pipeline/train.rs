use alloc::format;
use alloc::vec::Vec;

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::exec::BatchMap;
use crate::gnn::{adam_step, loss, loss_and_gradient, AdamConfig, AdamState, LayerKind, ModelConfig, ModelParams};
use crate::observation::FeatureScaling;
use crate::pipeline::GraphSample;
use crate::rng::{derive_seed, rng_from_seed};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub model: ModelConfig,
    pub adam: AdamConfig,
    pub epochs: usize,
    pub batch_size: usize,
    /// Stop after this many epochs without improvement of the monitored loss.
    pub patience: Option<usize>,
    pub scaling: FeatureScaling,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            model: ModelConfig::default(),
            adam: AdamConfig::default(),
            epochs: 100,
            batch_size: 32,
            patience: Some(10),
            scaling: FeatureScaling::Raw,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    /// Parameters from the epoch with the lowest monitored loss.
    pub params: ModelParams,
    /// Mean training loss (dropout active) per epoch.
    pub loss_curve: Vec<f64>,
    /// Mean inference-mode validation loss per epoch, when a validation set
    /// was given.
    pub validation_curve: Vec<f64>,
    pub best_epoch: Option<usize>,
}

fn mean_loss<E: BatchMap>(params: &ModelParams, set: &[&GraphSample], scaling: FeatureScaling, exec: &E) -> Result<f64> {
    let losses = exec.map_indexed(set.len(), |i| {
        let s = set[i];
        loss(params, &s.topology, &s.features.to_matrix(scaling), s.graph_label.class_index())
    });
    let mut total = 0.0;
    for l in losses {
        total += l?;
    }
    Ok(total / set.len() as f64)
}

/// Mini-batch Adam on the mean per-graph cross-entropy.
///
/// Early stopping monitors the validation loss if `validation` is given and
/// the epoch training loss otherwise.
pub fn train_model<E: BatchMap>(
    train: &[&GraphSample],
    validation: Option<&[&GraphSample]>,
    kind: LayerKind,
    cfg: &TrainConfig,
    exec: &E,
) -> Result<TrainOutcome> {
    if train.is_empty() {
        return Err(Error::input("empty training set"));
    }
    if cfg.batch_size == 0 {
        return Err(Error::params("batch size must be positive"));
    }
    let d_in = cfg.model.d_in;
    if let Some(bad) = train.iter().find(|s| s.features.rows() > 0 && s.features.row(0).len() != d_in) {
        return Err(Error::shape(format!(
            "sample {} has {} feature columns, model expects {d_in}",
            bad.index,
            bad.features.row(0).len()
        )));
    }
    let mut params = ModelParams::init(kind, cfg.model, derive_seed(cfg.seed, "init", 0))?;
    let mut adam = AdamState::new(&params, cfg.adam);
    let mut best = params.clone();
    let mut best_loss = f64::INFINITY;
    let mut best_epoch = None;
    let mut loss_curve = Vec::with_capacity(cfg.epochs);
    let mut validation_curve = Vec::new();
    let mut order: Vec<usize> = (0..train.len()).collect();
    let validation = validation.filter(|v| !v.is_empty());

    for epoch in 0..cfg.epochs {
        order.sort_unstable();
        order.shuffle(&mut rng_from_seed(derive_seed(cfg.seed, "shuffle", epoch as u64)));
        let mut epoch_loss = 0.0;
        for (b, batch) in order.chunks(cfg.batch_size).enumerate() {
            let results = exec.map_indexed(batch.len(), |j| {
                let s = train[batch[j]];
                let dropout_seed = derive_seed(cfg.seed, "dropout", (epoch * train.len() + batch[j]) as u64);
                loss_and_gradient(
                    &params,
                    &s.topology,
                    &s.features.to_matrix(cfg.scaling),
                    s.graph_label.class_index(),
                    Some(dropout_seed),
                )
            });
            let mut grad = params.zeros_like();
            let inv = 1.0 / batch.len() as f64;
            for (j, r) in results.into_iter().enumerate() {
                let (l, g) = r?;
                if !l.is_finite() || !g.is_finite() {
                    return Err(Error::NonFiniteLoss {
                        epoch,
                        batch: b,
                        detail: format!(
                            "sample {} gave loss {l}; lr={}, init seed={}, d_hidden={}; \
                             try a lower learning rate or normalized features",
                            train[batch[j]].index, cfg.adam.lr, cfg.seed, cfg.model.d_hidden
                        ),
                    });
                }
                epoch_loss += l;
                grad.add_scaled(&g, inv)?;
            }
            adam_step(&mut params, &grad, &mut adam)?;
            if !params.is_finite() {
                return Err(Error::NonFiniteLoss {
                    epoch,
                    batch: b,
                    detail: format!("parameters became non-finite after Adam step (lr={})", cfg.adam.lr),
                });
            }
        }
        let epoch_loss = epoch_loss / train.len() as f64;
        loss_curve.push(epoch_loss);

        let monitored = match validation {
            Some(v) => {
                let l = mean_loss(&params, v, cfg.scaling, exec)?;
                validation_curve.push(l);
                l
            }
            None => epoch_loss,
        };
        if monitored < best_loss {
            best_loss = monitored;
            best = params.clone();
            best_epoch = Some(epoch);
        } else if let (Some(p), Some(be)) = (cfg.patience, best_epoch) {
            if epoch - be >= p {
                break;
            }
        }
    }
    Ok(TrainOutcome {
        params: if best_epoch.is_some() { best } else { params },
        loss_curve,
        validation_curve,
        best_epoch,
    })
}
