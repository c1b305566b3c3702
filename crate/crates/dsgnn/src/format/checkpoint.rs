//! Versioned text checkpoint: layer kind, widths, the training setup that
//! produced it, then every parameter block in declaration order with its
//! shape. Values use Rust's shortest round-trip float formatting, so a
//! load gives back the identical bits.

use std::io::{BufRead, Write};
use std::path::Path;

use dsgnn_core::gnn::{AdamConfig, LayerKind, ModelConfig, ModelParams};
use dsgnn_core::pipeline::TrainConfig;

use crate::error::{Error, Result};
use crate::format::{create, open};

const MAGIC: &str = "dsgnn-checkpoint v1";

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub params: ModelParams,
    pub train: TrainConfig,
    /// Train/test split the model was fitted on, so evaluation can find the
    /// held-out part of the same dataset.
    pub train_fraction: f64,
    pub split_seed: u64,
}

pub fn write_checkpoint<W: Write>(c: &Checkpoint, mut w: W) -> std::io::Result<()> {
    let p = &c.params;
    let t = &c.train;
    writeln!(w, "{MAGIC}")?;
    writeln!(w, "kind {}", p.kind)?;
    writeln!(
        w,
        "model d_in={} d_hidden={} dropout={}",
        p.config.d_in, p.config.d_hidden, p.config.dropout
    )?;
    writeln!(
        w,
        "train lr={} beta1={} beta2={} epsilon={} epochs={} batch_size={} patience={} scaling={} seed={} \
         train_fraction={} split_seed={}",
        t.adam.lr,
        t.adam.beta1,
        t.adam.beta2,
        t.adam.eps,
        t.epochs,
        t.batch_size,
        t.patience.map_or("none".to_string(), |p| p.to_string()),
        t.scaling,
        t.seed,
        c.train_fraction,
        c.split_seed
    )?;
    for (name, block) in p.block_names().iter().zip(p.blocks()) {
        writeln!(w, "block {name} {} {}", block.rows(), block.cols())?;
        let values: Vec<String> = block.as_slice().iter().map(|v| v.to_string()).collect();
        writeln!(w, "{}", values.join(" "))?;
    }
    writeln!(w, "end")?;
    w.flush()
}

fn key_values<'a>(line: &'a str, prefix: &str, path: &Path, line_no: usize) -> Result<Vec<(&'a str, &'a str)>> {
    let rest = line
        .strip_prefix(prefix)
        .ok_or_else(|| Error::parse(path, line_no, format!("expected `{prefix}` line")))?;
    rest.split_whitespace()
        .map(|tok| {
            tok.split_once('=')
                .ok_or_else(|| Error::parse(path, line_no, format!("expected key=value, got `{tok}`")))
        })
        .collect()
}

fn lookup<T: std::str::FromStr>(kv: &[(&str, &str)], key: &str, path: &Path, line_no: usize) -> Result<T> {
    let raw = kv
        .iter()
        .find(|(k, _)| *k == key)
        .map(|(_, v)| *v)
        .ok_or_else(|| Error::parse(path, line_no, format!("missing `{key}`")))?;
    raw.parse()
        .map_err(|_| Error::parse(path, line_no, format!("bad value `{raw}` for `{key}`")))
}

pub fn read_checkpoint<R: BufRead>(r: R, path: &Path) -> Result<Checkpoint> {
    let lines: Vec<String> = r.lines().collect::<std::io::Result<_>>().map_err(|e| Error::io(path, e))?;
    let line = |i: usize| lines.get(i).map(String::as_str).ok_or_else(|| Error::parse(path, i + 1, "unexpected end of file"));
    if line(0)? != MAGIC {
        return Err(Error::parse(path, 1, format!("not a checkpoint (expected `{MAGIC}`)")));
    }
    let kind: LayerKind = line(1)?
        .strip_prefix("kind ")
        .ok_or_else(|| Error::parse(path, 2, "expected `kind` line"))?
        .parse()
        .map_err(|e: dsgnn_core::Error| Error::parse(path, 2, e.to_string()))?;
    let m = key_values(line(2)?, "model ", path, 3)?;
    let config = ModelConfig {
        d_in: lookup(&m, "d_in", path, 3)?,
        d_hidden: lookup(&m, "d_hidden", path, 3)?,
        dropout: lookup(&m, "dropout", path, 3)?,
    };
    let t = key_values(line(3)?, "train ", path, 4)?;
    let patience: String = lookup(&t, "patience", path, 4)?;
    let patience = match patience.as_str() {
        "none" => None,
        p => Some(p.parse().map_err(|_| Error::parse(path, 4, format!("bad patience `{p}`")))?),
    };
    let train = TrainConfig {
        model: config,
        adam: AdamConfig {
            lr: lookup(&t, "lr", path, 4)?,
            beta1: lookup(&t, "beta1", path, 4)?,
            beta2: lookup(&t, "beta2", path, 4)?,
            eps: lookup(&t, "epsilon", path, 4)?,
        },
        epochs: lookup(&t, "epochs", path, 4)?,
        batch_size: lookup(&t, "batch_size", path, 4)?,
        patience,
        scaling: lookup(&t, "scaling", path, 4)?,
        seed: lookup(&t, "seed", path, 4)?,
    };
    let train_fraction = lookup(&t, "train_fraction", path, 4)?;
    let split_seed = lookup(&t, "split_seed", path, 4)?;

    let mut params = ModelParams::init(kind, config, 0).map_err(|e| Error::parse(path, 3, e.to_string()))?;
    let names = params.block_names();
    let mut at = 4;
    for (name, block) in names.iter().zip(params.blocks_mut()) {
        let header = line(at)?;
        let expected = format!("block {name} {} {}", block.rows(), block.cols());
        if header != expected {
            return Err(Error::parse(path, at + 1, format!("expected `{expected}`, got `{header}`")));
        }
        let values: Vec<f64> = line(at + 1)?
            .split_whitespace()
            .map(|v| v.parse().map_err(|_| Error::parse(path, at + 2, format!("bad value `{v}`"))))
            .collect::<Result<_>>()?;
        if values.len() != block.as_slice().len() {
            return Err(Error::parse(
                path,
                at + 2,
                format!("{} values for block {name} of {} entries", values.len(), block.as_slice().len()),
            ));
        }
        block.as_mut_slice().copy_from_slice(&values);
        at += 2;
    }
    if line(at)? != "end" || lines.len() != at + 1 {
        return Err(Error::parse(path, at + 1, "expected `end` as the last line"));
    }
    params.validate().map_err(|e| Error::parse(path, at + 1, e.to_string()))?;
    Ok(Checkpoint {
        params,
        train,
        train_fraction,
        split_seed,
    })
}

pub fn save_checkpoint(c: &Checkpoint, path: &Path) -> Result<()> {
    write_checkpoint(c, create(path)?).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    read_checkpoint(open(path)?, path)
}
