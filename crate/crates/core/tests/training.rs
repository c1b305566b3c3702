use std::sync::Arc;

use dsgnn_core::observation::{FeatureMatrix, FEATURE_COLUMNS};
use dsgnn_core::pipeline::{evaluate, train_model, GraphLabel, GraphSample, TrainConfig};
use dsgnn_core::propagation::{Scenario, ScenarioParams};
use dsgnn_core::topology::generate_ba;
use dsgnn_core::{Error, LayerKind, Sequential};

/// Graphs whose class is written into one feature column: column 0 is hot for
/// NoAttack samples, column 2 for AttackPresent ones.
fn separable_set(count: usize) -> Vec<GraphSample> {
    (0..count)
        .map(|i| {
            let n = 10;
            let topology = Arc::new(generate_ba(n, 2, i as u64).unwrap());
            let label = if i % 2 == 0 { GraphLabel::NoAttack } else { GraphLabel::AttackPresent };
            let hot = if label == GraphLabel::NoAttack { 0 } else { 2 };
            let mut data = vec![0u32; n * FEATURE_COLUMNS];
            for v in 0..n {
                data[v * FEATURE_COLUMNS + hot] = 1 + (v % 3) as u32;
                data[v * FEATURE_COLUMNS + 1] = topology.degree(v) as u32;
            }
            GraphSample {
                index: i,
                topology_id: i,
                topology,
                scenario: ScenarioParams {
                    scenario: Scenario::NoAttack,
                    pay_origin: 0,
                    latency_mean: 1.0,
                    seed: 0,
                },
                pay_holder_count: n,
                observers: Vec::new(),
                node_labels: Vec::new(),
                features: FeatureMatrix::from_raw(n, data).unwrap(),
                graph_label: label,
                sample_seed: i as u64,
            }
        })
        .collect()
}

#[test]
fn separable_toy_set_is_learned() {
    let data = separable_set(40);
    let refs: Vec<&GraphSample> = data.iter().collect();
    for kind in LayerKind::ALL {
        let cfg = TrainConfig {
            epochs: 50,
            batch_size: 8,
            patience: None,
            seed: 3,
            ..TrainConfig::default()
        };
        let out = train_model(&refs, None, kind, &cfg, &Sequential).unwrap();
        let metrics = evaluate(&out.params, &refs, cfg.scaling, &Sequential).unwrap();
        assert_eq!(metrics.accuracy, Some(1.0), "{kind}: {:?}", out.loss_curve);
        assert!(out.loss_curve.last().unwrap() < &out.loss_curve[0], "{kind}");
    }
}

#[test]
fn zero_epochs_returns_initialization() {
    let data = separable_set(4);
    let refs: Vec<&GraphSample> = data.iter().collect();
    let cfg = TrainConfig {
        epochs: 0,
        ..TrainConfig::default()
    };
    let out = train_model(&refs, None, LayerKind::Gcn, &cfg, &Sequential).unwrap();
    assert!(out.loss_curve.is_empty());
    assert_eq!(out.best_epoch, None);
    let again = train_model(&refs, None, LayerKind::Gcn, &cfg, &Sequential).unwrap();
    assert_eq!(out.params, again.params);
}

#[test]
fn training_is_deterministic() {
    let data = separable_set(12);
    let refs: Vec<&GraphSample> = data.iter().collect();
    let cfg = TrainConfig {
        epochs: 5,
        batch_size: 4,
        ..TrainConfig::default()
    };
    for kind in LayerKind::ALL {
        let a = train_model(&refs, Some(&refs[..4]), kind, &cfg, &Sequential).unwrap();
        let b = train_model(&refs, Some(&refs[..4]), kind, &cfg, &Sequential).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.validation_curve.len(), a.loss_curve.len());
    }
}

#[test]
fn patience_stops_early() {
    let data = separable_set(8);
    let refs: Vec<&GraphSample> = data.iter().collect();
    // validation labels are the opposite of training: its loss can only grow
    let flipped: Vec<GraphSample> = data
        .iter()
        .cloned()
        .map(|mut s| {
            s.graph_label = match s.graph_label {
                GraphLabel::NoAttack => GraphLabel::AttackPresent,
                GraphLabel::AttackPresent => GraphLabel::NoAttack,
            };
            s
        })
        .collect();
    let flipped: Vec<&GraphSample> = flipped.iter().collect();
    let cfg = TrainConfig {
        epochs: 500,
        batch_size: 8,
        patience: Some(2),
        ..TrainConfig::default()
    };
    let out = train_model(&refs, Some(&flipped), LayerKind::Gcn, &cfg, &Sequential).unwrap();
    assert!(out.loss_curve.len() < 500);
    let best = out.best_epoch.unwrap();
    assert!(out.loss_curve.len() - 1 - best <= 2);
}

#[test]
fn divergent_learning_rate_is_reported() {
    let data = separable_set(8);
    let refs: Vec<&GraphSample> = data.iter().collect();
    let mut cfg = TrainConfig {
        epochs: 50,
        ..TrainConfig::default()
    };
    cfg.adam.lr = 1e300;
    match train_model(&refs, None, LayerKind::Gcn, &cfg, &Sequential) {
        Err(Error::NonFiniteLoss { detail, .. }) => assert!(detail.contains("lr="), "{detail}"),
        other => panic!("expected a non-finite loss error, got {other:?}"),
    }
}

#[test]
fn bad_inputs_rejected() {
    let cfg = TrainConfig::default();
    assert!(matches!(train_model(&[], None, LayerKind::Gat, &cfg, &Sequential), Err(Error::InvalidInput(_))));
    let data = separable_set(2);
    let refs: Vec<&GraphSample> = data.iter().collect();
    let zero_batch = TrainConfig { batch_size: 0, ..cfg };
    assert!(matches!(train_model(&refs, None, LayerKind::Gat, &zero_batch, &Sequential), Err(Error::InvalidParameters(_))));
}
