//! Dataset construction, stratified splitting, training and evaluation.

mod cv;
mod dataset;
mod metrics;
mod split;
mod train;

pub use crate::propagation::GraphLabel;
pub use cv::{kfold_cv, kfold_cv_with, CvResult};
pub use dataset::{build_dataset, build_dataset_on, build_sample, class_plan, DatasetSpec, GraphSample};
pub use metrics::{evaluate, predict, ConfusionCounts, EvalMetrics};
pub use split::{split_dataset, stratified_folds, Split};
pub use train::{train_model, TrainConfig, TrainOutcome};
