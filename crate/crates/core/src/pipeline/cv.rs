use alloc::vec::Vec;

use crate::error::Result;
use crate::exec::BatchMap;
use crate::gnn::LayerKind;
use crate::pipeline::{evaluate, stratified_folds, train_model, GraphLabel, GraphSample, TrainConfig};
use crate::rng::derive_seed;

#[derive(Debug, Clone, PartialEq)]
pub struct CvResult {
    pub fold_accuracies: Vec<f64>,
    pub mean_accuracy: f64,
}

/// Stratified k-fold driver. `fit_and_score(fold, train_idx, held_out_idx)`
/// returns the held-out accuracy of a model fitted on `train_idx`.
pub fn kfold_cv_with<F>(labels: &[GraphLabel], k: usize, seed: u64, mut fit_and_score: F) -> Result<CvResult>
where
    F: FnMut(usize, &[usize], &[usize]) -> Result<f64>,
{
    let folds = stratified_folds(labels, k, seed)?;
    let mut fold_accuracies = Vec::with_capacity(k);
    for (f, held_out) in folds.iter().enumerate() {
        let rest: Vec<usize> = folds
            .iter()
            .enumerate()
            .filter(|&(g, _)| g != f)
            .flat_map(|(_, idx)| idx.iter().copied())
            .collect();
        fold_accuracies.push(fit_and_score(f, &rest, held_out)?);
    }
    let mean_accuracy = fold_accuracies.iter().sum::<f64>() / k as f64;
    Ok(CvResult {
        fold_accuracies,
        mean_accuracy,
    })
}

/// k-fold cross-validation of [`train_model`]: every fold starts from a fresh
/// initialization and early-stops on its held-out fold.
pub fn kfold_cv<E: BatchMap>(
    train: &[&GraphSample],
    k: usize,
    kind: LayerKind,
    cfg: &TrainConfig,
    seed: u64,
    exec: &E,
) -> Result<CvResult> {
    let labels: Vec<GraphLabel> = train.iter().map(|s| s.graph_label).collect();
    kfold_cv_with(&labels, k, seed, |fold, fit_idx, held_idx| {
        let fit: Vec<&GraphSample> = fit_idx.iter().map(|&i| train[i]).collect();
        let held: Vec<&GraphSample> = held_idx.iter().map(|&i| train[i]).collect();
        let fold_cfg = TrainConfig {
            seed: derive_seed(cfg.seed, "fold", fold as u64),
            ..*cfg
        };
        let model = train_model(&fit, Some(&held), kind, &fold_cfg, exec)?;
        let metrics = evaluate(&model.params, &held, cfg.scaling, exec)?;
        Ok(metrics.accuracy.unwrap_or(0.0))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::pipeline::{EvalMetrics, GraphLabel::*};

    #[test]
    fn constant_predictor_scores_half() {
        let labels: Vec<_> = (0..100).map(|i| if i % 2 == 0 { NoAttack } else { AttackPresent }).collect();
        let cv = kfold_cv_with(&labels, 5, 9, |_, fit, held| {
            assert_eq!(fit.len() + held.len(), 100);
            let truth: Vec<_> = held.iter().map(|&i| labels[i]).collect();
            let preds = alloc::vec![NoAttack; held.len()];
            Ok(EvalMetrics::from_predictions(&truth, &preds).accuracy.unwrap())
        })
        .unwrap();
        assert_eq!(cv.fold_accuracies.len(), 5);
        assert_eq!(cv.mean_accuracy, 0.5);
    }

    #[test]
    fn too_few_samples() {
        let labels = [NoAttack, AttackPresent, NoAttack];
        assert!(matches!(
            kfold_cv_with(&labels, 5, 0, |_, _, _| Ok(1.0)),
            Err(Error::InvalidParameters(_))
        ));
    }
}
