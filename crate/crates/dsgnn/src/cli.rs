//! Command-line driver. Each subcommand resolves a [`RunConfig`], does its
//! work, and writes the resolved configuration next to its main output as
//! `<out>.config`.

use std::ffi::OsString;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use dsgnn_core::gnn::{check_random_case, LayerKind};
use dsgnn_core::pipeline::{build_dataset, build_dataset_on, evaluate, kfold_cv, split_dataset, train_model, GraphLabel, GraphSample};
use dsgnn_core::topology::generate_ba;

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::exec::Rayon;
use crate::format::checkpoint::{load_checkpoint, save_checkpoint, Checkpoint};
use crate::format::dataset::{load_dataset, save_dataset};
use crate::format::topology::{load_topology, save_topology};
use crate::report::{comparison_table, loss_curve_csv, metrics_report, TableColumn};

/// Gradient checks at or above this relative error fail.
pub const GRAD_CHECK_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Parser)]
#[command(name = "dsgnn", version, about = "Double-spend detection with graph neural networks on simulated gossip")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a Barabási-Albert topology as an edge list.
    GenTopology {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        nodes: Option<usize>,
        #[arg(long)]
        ba_m: Option<usize>,
    },
    /// Simulate propagation, label observers and write the dataset file.
    BuildDataset {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        spec: SpecFlags,
        /// Observer nodes per sample.
        #[arg(long)]
        observers: Option<usize>,
        /// Run every sample on this saved topology instead of generating graphs.
        #[arg(long)]
        topology: Option<PathBuf>,
    },
    /// Fit a model on the training split of a dataset.
    Train {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        model: ModelFlags,
        #[arg(long)]
        dataset: Option<PathBuf>,
        /// gcn, sage or gat.
        #[arg(long)]
        layer: Option<LayerKind>,
        #[arg(long)]
        train_fraction: Option<f64>,
    },
    /// Score a checkpoint on the held-out split of its dataset.
    Evaluate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        dataset: Option<PathBuf>,
        #[arg(long)]
        model: Option<PathBuf>,
        /// Also cross-validate the checkpoint's training setup on the training split.
        #[arg(long)]
        cross_validate: bool,
        #[arg(long)]
        folds: Option<usize>,
    },
    /// Compare analytic gradients with central differences on a random small graph.
    GradCheck {
        #[command(flatten)]
        common: Common,
        /// gcn, sage or gat.
        #[arg(long)]
        layer: Option<LayerKind>,
        #[arg(long)]
        grad_step: Option<f64>,
    },
    /// Cross-validate and test every layer kind for several observer counts.
    Report {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        spec: SpecFlags,
        #[command(flatten)]
        model: ModelFlags,
        /// Comma-separated observer counts, one dataset each.
        #[arg(long)]
        observer_counts: Option<String>,
        /// Comma-separated layer kinds: gcn, sage, gat.
        #[arg(long)]
        layers: Option<String>,
        #[arg(long)]
        train_fraction: Option<f64>,
        #[arg(long)]
        folds: Option<usize>,
    },
}

#[derive(Debug, Args)]
struct Common {
    /// `key = value` file applied before the flags.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; defaults to every available core.
    #[arg(long)]
    workers: Option<usize>,
    /// Main output file; the resolved config goes to `<out>.config`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SpecFlags {
    /// Nodes per graph.
    #[arg(long)]
    nodes: Option<usize>,
    /// Edges each new node attaches with.
    #[arg(long)]
    ba_m: Option<usize>,
    /// Graphs in the dataset.
    #[arg(long)]
    samples: Option<usize>,
    /// Share of samples without an attack.
    #[arg(long)]
    positive_fraction: Option<f64>,
    /// Mean per-hop delivery delay.
    #[arg(long)]
    latency_mean: Option<f64>,
    /// Attack head start bound, in latency × ceil(mean path length); 0 broadcasts both at once.
    #[arg(long)]
    delay_factor: Option<f64>,
    /// BFS sources for the mean path length estimate.
    #[arg(long)]
    path_length_sources: Option<usize>,
    /// Reuse one topology for every sample.
    #[arg(long)]
    shared_topology: bool,
}

#[derive(Debug, Args)]
struct ModelFlags {
    #[arg(long)]
    hidden: Option<usize>,
    #[arg(long)]
    dropout: Option<f64>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    beta1: Option<f64>,
    #[arg(long)]
    beta2: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    /// Epochs without improvement before stopping, or `none`.
    #[arg(long)]
    patience: Option<String>,
    /// `raw` or `normalized`.
    #[arg(long)]
    scaling: Option<String>,
}

/// Collects `(key, value)` overrides from flags that were actually given.
#[derive(Default)]
struct Overrides(Vec<(&'static str, String)>);

impl Overrides {
    fn opt<T: Display>(&mut self, key: &'static str, v: &Option<T>) -> &mut Self {
        if let Some(v) = v {
            self.0.push((key, v.to_string()));
        }
        self
    }

    fn path(&mut self, key: &'static str, v: &Option<PathBuf>) -> &mut Self {
        if let Some(v) = v {
            self.0.push((key, v.display().to_string()));
        }
        self
    }

    fn flag(&mut self, key: &'static str, on: bool) -> &mut Self {
        if on {
            self.0.push((key, "true".into()));
        }
        self
    }

    fn common(&mut self, c: &Common) -> &mut Self {
        self.opt("seed", &c.seed).opt("workers", &c.workers).path("out", &c.out)
    }

    fn spec(&mut self, s: &SpecFlags) -> &mut Self {
        self.opt("nodes", &s.nodes)
            .opt("ba_m", &s.ba_m)
            .opt("samples", &s.samples)
            .opt("positive_fraction", &s.positive_fraction)
            .opt("latency_mean", &s.latency_mean)
            .opt("delay_factor", &s.delay_factor)
            .opt("path_length_sources", &s.path_length_sources)
            .flag("shared_topology", s.shared_topology)
    }

    fn model(&mut self, m: &ModelFlags) -> &mut Self {
        self.opt("hidden", &m.hidden)
            .opt("dropout", &m.dropout)
            .opt("lr", &m.lr)
            .opt("beta1", &m.beta1)
            .opt("beta2", &m.beta2)
            .opt("epsilon", &m.epsilon)
            .opt("epochs", &m.epochs)
            .opt("batch_size", &m.batch_size)
            .opt("patience", &m.patience)
            .opt("scaling", &m.scaling)
    }
}

fn resolve(name: &str, common: &Common, overrides: &Overrides) -> Result<RunConfig> {
    let mut cfg = RunConfig::defaults(name);
    if let Some(path) = &common.config {
        cfg.apply_file(path)?;
    }
    for (k, v) in &overrides.0 {
        cfg.set(k, v)?;
    }
    Ok(cfg)
}

fn required<'a>(p: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path> {
    p.as_deref().ok_or_else(|| Error::Config(format!("missing --{flag} (or `{flag}` in the config file)")))
}

/// `<path>.<suffix>` alongside the main artifact.
pub fn sidecar(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".");
    s.push(suffix);
    PathBuf::from(s)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn persist_config(cfg: &RunConfig, out: &Path) -> Result<()> {
    write_text(&sidecar(out, "config"), &cfg.to_text())
}

fn split_refs(samples: &[GraphSample], fraction: f64, seed: u64) -> Result<(Vec<&GraphSample>, Vec<&GraphSample>)> {
    let labels: Vec<GraphLabel> = samples.iter().map(|s| s.graph_label).collect();
    let split = split_dataset(&labels, fraction, seed)?;
    Ok((
        split.train.iter().map(|&i| &samples[i]).collect(),
        split.test.iter().map(|&i| &samples[i]).collect(),
    ))
}

fn execute(cli: Cli, stdout: &mut dyn std::io::Write) -> Result<()> {
    let say = |stdout: &mut dyn std::io::Write, line: String| -> Result<()> {
        writeln!(stdout, "{line}").map_err(|e| Error::io(Path::new("<stdout>"), e))
    };
    match cli.command {
        Command::GenTopology { common, nodes, ba_m } => {
            let mut o = Overrides::default();
            o.common(&common).opt("nodes", &nodes).opt("ba_m", &ba_m);
            let cfg = resolve("gen-topology", &common, &o)?;
            let out = required(&cfg.out, "out")?;
            let t = generate_ba(cfg.nodes, cfg.ba_m, cfg.seed)?;
            save_topology(&t, out)?;
            persist_config(&cfg, out)?;
            say(stdout, format!("wrote {} ({} nodes, {} edges)", out.display(), t.node_count(), t.edge_count()))
        }
        Command::BuildDataset {
            common,
            spec,
            observers,
            topology,
        } => {
            let mut o = Overrides::default();
            o.common(&common).spec(&spec).opt("observers", &observers).path("topology", &topology);
            let mut cfg = resolve("build-dataset", &common, &o)?;
            let out = required(&cfg.out, "out")?.to_path_buf();
            let out = out.as_path();
            let pool = Rayon::new(cfg.workers)?;
            let samples = match cfg.topology.clone() {
                Some(path) => {
                    let t = load_topology(&path)?;
                    cfg.nodes = t.node_count();
                    cfg.shared_topology = true;
                    if let Some(m) = t.ba_m() {
                        cfg.ba_m = m;
                    }
                    build_dataset_on(&cfg.dataset_spec(), Arc::new(t), &pool)?
                }
                None => build_dataset(&cfg.dataset_spec(), &pool)?,
            };
            let spec = cfg.dataset_spec();
            save_dataset(&spec, &samples, out)?;
            persist_config(&cfg, out)?;
            let positives = samples.iter().filter(|s| s.graph_label.is_positive()).count();
            say(
                stdout,
                format!("wrote {} ({} samples, {positives} no-attack)", out.display(), samples.len()),
            )
        }
        Command::Train {
            common,
            model,
            dataset,
            layer,
            train_fraction,
        } => {
            let mut o = Overrides::default();
            o.common(&common)
                .model(&model)
                .path("dataset", &dataset)
                .opt("layer", &layer)
                .opt("train_fraction", &train_fraction);
            let cfg = resolve("train", &common, &o)?;
            let out = required(&cfg.out, "out")?;
            let data = load_dataset(required(&cfg.dataset, "dataset")?)?;
            let (train, _) = split_refs(&data.samples, cfg.train_fraction, cfg.seed)?;
            let pool = Rayon::new(cfg.workers)?;
            let tc = cfg.train_config();
            let outcome = train_model(&train, None, cfg.layer, &tc, &pool)?;
            save_checkpoint(
                &Checkpoint {
                    params: outcome.params.clone(),
                    train: tc,
                    train_fraction: cfg.train_fraction,
                    split_seed: cfg.seed,
                },
                out,
            )?;
            write_text(&sidecar(out, "loss.csv"), &loss_curve_csv(&outcome))?;
            persist_config(&cfg, out)?;
            let last = outcome.loss_curve.last().map_or("n/a".to_string(), |l| format!("{l:.4}"));
            say(
                stdout,
                format!(
                    "wrote {} ({} on {} samples, {} epochs, final train loss {last})",
                    out.display(),
                    cfg.layer.display_name(),
                    train.len(),
                    outcome.loss_curve.len()
                ),
            )
        }
        Command::Evaluate {
            common,
            dataset,
            model,
            cross_validate,
            folds,
        } => {
            let mut o = Overrides::default();
            o.common(&common)
                .path("dataset", &dataset)
                .path("model", &model)
                .flag("cross_validate", cross_validate)
                .opt("folds", &folds);
            let cfg = resolve("evaluate", &common, &o)?;
            let out = required(&cfg.out, "out")?;
            let ckpt = load_checkpoint(required(&cfg.model, "model")?)?;
            let data = load_dataset(required(&cfg.dataset, "dataset")?)?;
            let (train, test) = split_refs(&data.samples, ckpt.train_fraction, ckpt.split_seed)?;
            let pool = Rayon::new(cfg.workers)?;
            let metrics = evaluate(&ckpt.params, &test, ckpt.train.scaling, &pool)?;
            let cv = if cfg.cross_validate {
                Some(kfold_cv(&train, cfg.folds, ckpt.params.kind, &ckpt.train, ckpt.split_seed, &pool)?)
            } else {
                None
            };
            let report = metrics_report(ckpt.params.kind, &metrics, cv.as_ref());
            write_text(out, &report)?;
            persist_config(&cfg, out)?;
            say(stdout, report.trim_end().to_string())
        }
        Command::GradCheck {
            common,
            layer,
            grad_step,
        } => {
            let mut o = Overrides::default();
            o.common(&common).opt("layer", &layer).opt("grad_step", &grad_step);
            let cfg = resolve("grad-check", &common, &o)?;
            let report = check_random_case(cfg.layer, cfg.seed, cfg.grad_step)?;
            let mut text = String::new();
            for (name, err) in &report.per_block {
                text.push_str(&format!("{name} {err:e}\n"));
            }
            text.push_str(&format!("max_relative_error {:e}\n", report.max_relative_error));
            if let Some(out) = &cfg.out {
                write_text(out, &text)?;
                persist_config(&cfg, out)?;
            }
            say(stdout, text.trim_end().to_string())?;
            if report.max_relative_error.is_nan() || report.max_relative_error >= GRAD_CHECK_TOLERANCE {
                return Err(Error::CheckFailed(format!(
                    "{} max relative error {:e} >= {GRAD_CHECK_TOLERANCE:e}",
                    cfg.layer, report.max_relative_error
                )));
            }
            Ok(())
        }
        Command::Report {
            common,
            spec,
            model,
            observer_counts,
            layers,
            train_fraction,
            folds,
        } => {
            let mut o = Overrides::default();
            o.common(&common)
                .spec(&spec)
                .model(&model)
                .opt("observer_counts", &observer_counts)
                .opt("layers", &layers)
                .opt("train_fraction", &train_fraction)
                .opt("folds", &folds);
            let cfg = resolve("report", &common, &o)?;
            let out = required(&cfg.out, "out")?;
            let pool = Rayon::new(cfg.workers)?;
            let tc = cfg.train_config();
            let mut columns = Vec::new();
            for &k in &cfg.observer_counts {
                let mut spec = cfg.dataset_spec();
                spec.observer_count = k;
                let samples = build_dataset(&spec, &pool)?;
                let (train, test) = split_refs(&samples, cfg.train_fraction, cfg.seed)?;
                for &kind in &cfg.layers {
                    let cv = if cfg.folds >= 2 {
                        Some(kfold_cv(&train, cfg.folds, kind, &tc, cfg.seed, &pool)?)
                    } else {
                        None
                    };
                    let fitted = train_model(&train, None, kind, &tc, &pool)?;
                    let test = evaluate(&fitted.params, &test, tc.scaling, &pool)?;
                    columns.push(TableColumn {
                        observers: k,
                        kind,
                        cv,
                        test,
                    });
                }
            }
            let table = comparison_table(&columns);
            write_text(out, &table)?;
            persist_config(&cfg, out)?;
            say(stdout, table.trim_end().to_string())
        }
    }
}

/// Runs the CLI on `args` (including the program name) and returns the exit
/// status. Errors go to `stderr` as a single `error: <kind>: <message>` line.
pub fn run<I, T>(args: I, stdout: &mut dyn std::io::Write, stderr: &mut dyn std::io::Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand) {
                let _ = write!(stdout, "{}", e.render());
                return if e.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand { 2 } else { 0 };
            }
            let rendered = e.render().to_string();
            let first = rendered.lines().next().unwrap_or("invalid arguments");
            let _ = writeln!(stderr, "{}", Error::Usage(first.trim_start_matches("error: ").to_string()).one_line());
            return 2;
        }
    };
    match execute(cli, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "{}", e.one_line());
            1
        }
    }
}
