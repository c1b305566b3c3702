//! Detecting double-spend attempts from a handful of observed mempools.
//!
//! The crate simulates first-seen gossip of a payment transaction and a
//! conflicting attack transaction over Barabási-Albert peer graphs, turns a
//! random subset of observed mempools into node features, and trains a small
//! graph neural network (GCN, GraphSAGE or GAT) to decide whether the payment
//! reached every node.
//!
//! Everything here is `no_std` + `alloc`. File formats, parallel execution and
//! the command line live in the `dsgnn` companion crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod error;
pub mod exec;
pub mod gnn;
pub mod observation;
pub mod pipeline;
pub mod propagation;
pub mod rng;
pub mod topology;

pub use error::{Error, Result};
pub use exec::{BatchMap, Sequential};
pub use gnn::{AdamConfig, AdamState, LayerKind, Matrix, ModelConfig, ModelParams};
pub use observation::{FeatureMatrix, NodeLabel, NodeLabelAssignment};
pub use pipeline::{DatasetSpec, EvalMetrics, GraphLabel, GraphSample, TrainConfig};
pub use propagation::{PropagationOutcome, Scenario, ScenarioParams, TxHold};
pub use topology::{DegreeStats, Topology};
