//! Resolved run configuration.
//!
//! Values come from built-in defaults, then a `key = value` config file, then
//! command-line flags, each layer overriding the previous one. The fully
//! resolved result is written next to every artifact and can be fed back
//! with `--config` to regenerate it.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use dsgnn_core::gnn::{AdamConfig, LayerKind, ModelConfig};
use dsgnn_core::observation::FeatureScaling;
use dsgnn_core::pipeline::{DatasetSpec, TrainConfig};
use dsgnn_core::propagation::ScenarioSampler;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: String,
    pub seed: u64,
    /// `None` = every available core.
    pub workers: Option<usize>,

    pub nodes: usize,
    pub ba_m: usize,
    pub observers: usize,
    pub samples: usize,
    pub positive_fraction: f64,
    pub latency_mean: f64,
    pub delay_factor: f64,
    pub path_length_sources: usize,
    pub shared_topology: bool,

    pub layer: LayerKind,
    pub hidden: usize,
    pub dropout: f64,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub patience: Option<usize>,
    pub scaling: FeatureScaling,
    pub train_fraction: f64,
    pub folds: usize,
    pub cross_validate: bool,
    pub grad_step: f64,

    pub observer_counts: Vec<usize>,
    pub layers: Vec<LayerKind>,

    pub topology: Option<PathBuf>,
    pub dataset: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn defaults(command: &str) -> Self {
        let spec = DatasetSpec::default();
        let train = TrainConfig::default();
        RunConfig {
            command: command.to_string(),
            seed: 0,
            workers: None,
            nodes: spec.node_count,
            ba_m: spec.ba_m,
            observers: spec.observer_count,
            samples: spec.total_samples,
            positive_fraction: spec.positive_fraction,
            latency_mean: spec.scenario.latency_mean,
            delay_factor: spec.scenario.delay_factor,
            path_length_sources: spec.scenario.path_length_sources,
            shared_topology: spec.shared_topology,
            layer: LayerKind::Gat,
            hidden: train.model.d_hidden,
            dropout: train.model.dropout,
            lr: train.adam.lr,
            beta1: train.adam.beta1,
            beta2: train.adam.beta2,
            epsilon: train.adam.eps,
            epochs: train.epochs,
            batch_size: train.batch_size,
            patience: train.patience,
            scaling: train.scaling,
            train_fraction: 0.7,
            folds: 5,
            cross_validate: false,
            grad_step: 1e-5,
            observer_counts: vec![10, 50, 100, 150, 200, 250],
            layers: LayerKind::ALL.to_vec(),
            topology: None,
            dataset: None,
            model: None,
            out: None,
        }
    }

    /// Sets one key from its text form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
            value
                .parse()
                .map_err(|_| Error::Config(format!("bad value `{value}` for `{key}`")))
        }
        fn optional<T: std::str::FromStr>(key: &str, value: &str, none: &str) -> Result<Option<T>> {
            if value == none {
                Ok(None)
            } else {
                parse(key, value).map(Some)
            }
        }
        fn list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
            let items: Vec<T> = value
                .split(',')
                .map(|v| parse(key, v.trim()))
                .collect::<Result<_>>()?;
            if items.is_empty() {
                return Err(Error::Config(format!("`{key}` needs at least one entry")));
            }
            Ok(items)
        }
        let path = |v: &str| Some(PathBuf::from(v));
        match key {
            "command" => {
                if value != self.command {
                    return Err(Error::Config(format!(
                        "config was resolved for `{value}`, not `{}`",
                        self.command
                    )));
                }
            }
            "seed" => self.seed = parse(key, value)?,
            "workers" => self.workers = optional(key, value, "auto")?,
            "nodes" => self.nodes = parse(key, value)?,
            "ba_m" => self.ba_m = parse(key, value)?,
            "observers" => self.observers = parse(key, value)?,
            "samples" => self.samples = parse(key, value)?,
            "positive_fraction" => self.positive_fraction = parse(key, value)?,
            "latency_mean" => self.latency_mean = parse(key, value)?,
            "delay_factor" => self.delay_factor = parse(key, value)?,
            "path_length_sources" => self.path_length_sources = parse(key, value)?,
            "shared_topology" => self.shared_topology = parse(key, value)?,
            "layer" => self.layer = parse(key, value)?,
            "hidden" => self.hidden = parse(key, value)?,
            "dropout" => self.dropout = parse(key, value)?,
            "lr" => self.lr = parse(key, value)?,
            "beta1" => self.beta1 = parse(key, value)?,
            "beta2" => self.beta2 = parse(key, value)?,
            "epsilon" => self.epsilon = parse(key, value)?,
            "epochs" => self.epochs = parse(key, value)?,
            "batch_size" => self.batch_size = parse(key, value)?,
            "patience" => self.patience = optional(key, value, "none")?,
            "scaling" => self.scaling = parse(key, value)?,
            "train_fraction" => self.train_fraction = parse(key, value)?,
            "folds" => self.folds = parse(key, value)?,
            "cross_validate" => self.cross_validate = parse(key, value)?,
            "grad_step" => self.grad_step = parse(key, value)?,
            "observer_counts" => self.observer_counts = list(key, value)?,
            "layers" => self.layers = list(key, value)?,
            "topology" => self.topology = path(value),
            "dataset" => self.dataset = path(value),
            "model" => self.model = path(value),
            "out" => self.out = path(value),
            other => return Err(Error::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    /// Applies a config file: `key = value` per line, `#` comments.
    pub fn apply_text(&mut self, text: &str, origin: &Path) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(origin, i + 1, "expected `key = value`"))?;
            self.set(k.trim(), v.trim()).map_err(|e| Error::parse(origin, i + 1, e.to_string()))?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        self.apply_text(&text, path)
    }

    /// Every key with its resolved value, in a fixed order.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        fn join<T: ToString>(v: &[T]) -> String {
            v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
        }
        let path = |p: &Option<PathBuf>| p.as_ref().map_or(String::new(), |p| p.display().to_string());
        let mut e = vec![
            ("command", self.command.clone()),
            ("seed", self.seed.to_string()),
            ("workers", self.workers.map_or("auto".into(), |w| w.to_string())),
            ("nodes", self.nodes.to_string()),
            ("ba_m", self.ba_m.to_string()),
            ("observers", self.observers.to_string()),
            ("samples", self.samples.to_string()),
            ("positive_fraction", self.positive_fraction.to_string()),
            ("latency_mean", self.latency_mean.to_string()),
            ("delay_factor", self.delay_factor.to_string()),
            ("path_length_sources", self.path_length_sources.to_string()),
            ("shared_topology", self.shared_topology.to_string()),
            ("layer", self.layer.to_string()),
            ("hidden", self.hidden.to_string()),
            ("dropout", self.dropout.to_string()),
            ("lr", self.lr.to_string()),
            ("beta1", self.beta1.to_string()),
            ("beta2", self.beta2.to_string()),
            ("epsilon", self.epsilon.to_string()),
            ("epochs", self.epochs.to_string()),
            ("batch_size", self.batch_size.to_string()),
            ("patience", self.patience.map_or("none".into(), |p| p.to_string())),
            ("scaling", self.scaling.to_string()),
            ("train_fraction", self.train_fraction.to_string()),
            ("folds", self.folds.to_string()),
            ("cross_validate", self.cross_validate.to_string()),
            ("grad_step", self.grad_step.to_string()),
            ("observer_counts", join(&self.observer_counts)),
            ("layers", join(&self.layers)),
        ];
        for (k, p) in [
            ("topology", &self.topology),
            ("dataset", &self.dataset),
            ("model", &self.model),
            ("out", &self.out),
        ] {
            if p.is_some() {
                e.push((k, path(p)));
            }
        }
        e
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("# resolved dsgnn configuration\n");
        for (k, v) in self.entries() {
            writeln!(out, "{k} = {v}").unwrap();
        }
        out
    }

    pub fn dataset_spec(&self) -> DatasetSpec {
        DatasetSpec {
            node_count: self.nodes,
            observer_count: self.observers,
            total_samples: self.samples,
            positive_fraction: self.positive_fraction,
            ba_m: self.ba_m,
            master_seed: self.seed,
            scenario: ScenarioSampler {
                latency_mean: self.latency_mean,
                delay_factor: self.delay_factor,
                path_length_sources: self.path_length_sources,
            },
            shared_topology: self.shared_topology,
        }
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            model: ModelConfig {
                d_hidden: self.hidden,
                dropout: self.dropout,
                ..ModelConfig::default()
            },
            adam: AdamConfig {
                lr: self.lr,
                beta1: self.beta1,
                beta2: self.beta2,
                eps: self.epsilon,
            },
            epochs: self.epochs,
            batch_size: self.batch_size,
            patience: self.patience,
            scaling: self.scaling,
            seed: self.seed,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip() {
        let mut c = RunConfig::defaults("train");
        c.set("layer", "sage").unwrap();
        c.set("patience", "none").unwrap();
        c.set("workers", "3").unwrap();
        c.set("lr", "0.003").unwrap();
        c.set("dataset", "data/d.txt").unwrap();
        let mut back = RunConfig::defaults("train");
        back.apply_text(&c.to_text(), Path::new("cfg")).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn later_layers_win() {
        let mut c = RunConfig::defaults("build-dataset");
        c.apply_text("observers = 25\n# comment\nnodes = 1400 # trailing\n", Path::new("cfg"))
            .unwrap();
        c.set("observers", "50").unwrap();
        assert_eq!((c.nodes, c.observers, c.samples), (1400, 50, 1000));
    }

    #[test]
    fn bad_entries_name_the_line() {
        let mut c = RunConfig::defaults("train");
        for (text, line) in [("epochs = 3\nbogus = 1\n", 2), ("lr 0.1\n", 1), ("\n\nlayer = gin\n", 3)] {
            match c.apply_text(text, Path::new("cfg")) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line),
                other => panic!("{text:?}: {other:?}"),
            }
        }
        assert!(c.set("command", "report").is_err());
    }
}
