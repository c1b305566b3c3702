//! Graph neural network built from dense and CSR primitives.

mod adam;
mod adjacency;
mod gradcheck;
mod layers;
mod matrix;
mod model;
mod readout;

pub use adam::{adam_step, adam_update, AdamConfig, AdamState};
pub use adjacency::{normalize_adjacency, NormalizedAdjacency};
pub use gradcheck::{
    check_random_case, grad_check, grad_check_report, random_case, relative_discrepancy, GradCheckReport, CASE_NODES,
    COORDS_PER_BLOCK,
};
pub use layers::{
    gat_forward, gat_forward_with_attention, gcn_forward, layer_backward, layer_forward, sage_forward, Attention,
    GraphContext, LayerCache, LayerKind, LayerWeights, LEAKY_SLOPE,
};
pub use matrix::Matrix;
pub use model::{backward, forward, loss, loss_and_gradient, predict_logits, ForwardPass, ModelConfig, ModelParams};
pub use readout::{apply_dropout, cross_entropy, head_logits, pool_softmax_mean, readout_classify, softmax};
