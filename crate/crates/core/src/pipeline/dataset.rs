use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::exec::BatchMap;
use crate::observation::{assign_labels, extract_features, select_observers, FeatureMatrix, NodeLabel};
use crate::pipeline::GraphLabel;
use crate::propagation::{run_propagation, ScenarioParams, ScenarioSampler};
use crate::rng::{derive_seed, rng_from_seed};
use crate::topology::{generate_ba, Topology, DEFAULT_BA_M};

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSpec {
    pub node_count: usize,
    pub observer_count: usize,
    pub total_samples: usize,
    pub positive_fraction: f64,
    pub ba_m: usize,
    pub master_seed: u64,
    pub scenario: ScenarioSampler,
    /// Reuse one topology for every sample instead of regenerating.
    pub shared_topology: bool,
}

impl Default for DatasetSpec {
    fn default() -> Self {
        DatasetSpec {
            node_count: 14_000,
            observer_count: 250,
            total_samples: 1000,
            positive_fraction: 0.5,
            ba_m: DEFAULT_BA_M,
            master_seed: 0,
            scenario: ScenarioSampler::default(),
            shared_topology: false,
        }
    }
}

impl DatasetSpec {
    pub fn validate(&self) -> Result<()> {
        if self.total_samples < 2 {
            return Err(Error::params("need at least 2 samples"));
        }
        if !(self.positive_fraction > 0.0 && self.positive_fraction < 1.0) {
            return Err(Error::params("positive_fraction must lie in (0, 1)"));
        }
        if self.observer_count == 0 || self.observer_count > self.node_count {
            return Err(Error::params("observer count must be in 1..=node_count"));
        }
        if self.ba_m == 0 || self.node_count <= self.ba_m {
            return Err(Error::params("need node_count > ba_m >= 1"));
        }
        Ok(())
    }

    pub fn shared_topology_seed(&self) -> u64 {
        derive_seed(self.master_seed, "topology", u64::MAX)
    }
}

/// One training example.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphSample {
    pub index: usize,
    /// Sample index that owns the topology (0 for every sample in shared mode).
    pub topology_id: usize,
    pub topology: Arc<Topology>,
    pub scenario: ScenarioParams,
    pub pay_holder_count: usize,
    pub observers: Vec<usize>,
    pub node_labels: Vec<NodeLabel>,
    pub features: FeatureMatrix,
    pub graph_label: GraphLabel,
    pub sample_seed: u64,
}

/// Which sample indices are positive: exactly `round(total * fraction)`
/// positives (clamped to keep both classes present), in shuffled positions.
pub fn class_plan(spec: &DatasetSpec) -> Vec<bool> {
    let total = spec.total_samples;
    let positives = (libm::round(total as f64 * spec.positive_fraction) as usize).clamp(1, total - 1);
    let mut plan = vec![false; total];
    plan[..positives].fill(true);
    plan.shuffle(&mut rng_from_seed(derive_seed(spec.master_seed, "classes", 0)));
    plan
}

/// Builds sample `index`. Everything is derived from `spec.master_seed` and
/// the index, so samples can be produced independently and in any order.
pub fn build_sample(spec: &DatasetSpec, index: usize, positive: bool, shared: Option<&Arc<Topology>>) -> Result<GraphSample> {
    let sample_seed = derive_seed(spec.master_seed, "sample", index as u64);
    let (topology, topology_id) = match shared {
        Some(t) => (Arc::clone(t), 0),
        None => (
            Arc::new(generate_ba(spec.node_count, spec.ba_m, derive_seed(sample_seed, "topology", 0))?),
            index,
        ),
    };
    let mut rng = rng_from_seed(derive_seed(sample_seed, "scenario", 0));
    let scenario = spec
        .scenario
        .sample(&topology, !positive, &mut rng, derive_seed(sample_seed, "gossip", 0))?;
    let outcome = run_propagation(&topology, &scenario)?;
    let observers = select_observers(spec.node_count, spec.observer_count, derive_seed(sample_seed, "observers", 0))?;
    let assignment = assign_labels(&outcome, &observers)?;
    let features = extract_features(&topology, &assignment)?;
    Ok(GraphSample {
        index,
        topology_id,
        topology,
        scenario,
        pay_holder_count: outcome.pay_holder_count,
        observers: assignment.observer_set,
        node_labels: assignment.labels,
        features,
        graph_label: outcome.graph_label,
        sample_seed,
    })
}

pub fn build_dataset<E: BatchMap>(spec: &DatasetSpec, exec: &E) -> Result<Vec<GraphSample>> {
    spec.validate()?;
    let plan = class_plan(spec);
    let shared = if spec.shared_topology {
        Some(Arc::new(generate_ba(spec.node_count, spec.ba_m, spec.shared_topology_seed())?))
    } else {
        None
    };
    exec.map_indexed(spec.total_samples, |i| build_sample(spec, i, plan[i], shared.as_ref()))
        .into_iter()
        .collect()
}

/// Every sample runs on `topology`; `spec.node_count` must match it.
pub fn build_dataset_on<E: BatchMap>(spec: &DatasetSpec, topology: Arc<Topology>, exec: &E) -> Result<Vec<GraphSample>> {
    spec.validate()?;
    if topology.node_count() != spec.node_count {
        return Err(Error::params(alloc::format!(
            "topology has {} nodes, spec asks for {}",
            topology.node_count(),
            spec.node_count
        )));
    }
    let plan = class_plan(spec);
    exec.map_indexed(spec.total_samples, |i| build_sample(spec, i, plan[i], Some(&topology)))
        .into_iter()
        .collect()
}
