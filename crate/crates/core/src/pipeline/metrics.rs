use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::exec::BatchMap;
use crate::gnn::{predict_logits, ModelParams};
use crate::observation::FeatureScaling;
use crate::pipeline::{GraphLabel, GraphSample};

/// Confusion counts with "no attack" as the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub tn: usize,
}

impl ConfusionCounts {
    pub fn record(&mut self, truth: GraphLabel, predicted: GraphLabel) {
        match (truth.is_positive(), predicted.is_positive()) {
            (true, true) => self.tp += 1,
            (false, true) => self.fp += 1,
            (true, false) => self.fn_ += 1,
            (false, false) => self.tn += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }
}

/// Ratios are `None` where their denominator is zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalMetrics {
    pub counts: ConfusionCounts,
    pub accuracy: Option<f64>,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

impl EvalMetrics {
    pub fn from_counts(counts: ConfusionCounts) -> Self {
        let ConfusionCounts { tp, fp, fn_, tn } = counts;
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        let f1 = match (precision, recall) {
            (Some(p), Some(r)) if p + r > 0.0 => Some(2.0 * p * r / (p + r)),
            _ => None,
        };
        EvalMetrics {
            counts,
            accuracy: ratio(tp + tn, tp + fp + fn_ + tn),
            precision,
            recall,
            f1,
        }
    }

    pub fn from_predictions(truth: &[GraphLabel], predicted: &[GraphLabel]) -> Self {
        let mut counts = ConfusionCounts::default();
        for (&t, &p) in truth.iter().zip(predicted) {
            counts.record(t, p);
        }
        Self::from_counts(counts)
    }
}

/// Argmax of the logits; a tie predicts an attack.
pub fn predict(logits: &[f64; 2]) -> GraphLabel {
    if logits[1] > logits[0] {
        GraphLabel::NoAttack
    } else {
        GraphLabel::AttackPresent
    }
}

pub fn evaluate<E: BatchMap>(
    params: &ModelParams,
    test: &[&GraphSample],
    scaling: FeatureScaling,
    exec: &E,
) -> Result<EvalMetrics> {
    if test.is_empty() {
        return Err(Error::input("empty test set"));
    }
    let predicted: Vec<GraphLabel> = exec
        .map_indexed(test.len(), |i| {
            let s = test[i];
            predict_logits(params, &s.topology, &s.features.to_matrix(scaling)).map(|l| predict(&l))
        })
        .into_iter()
        .collect::<Result<_>>()?;
    let truth: Vec<GraphLabel> = test.iter().map(|s| s.graph_label).collect();
    Ok(EvalMetrics::from_predictions(&truth, &predicted))
}
