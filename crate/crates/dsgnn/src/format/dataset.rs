//! Line-oriented dataset file.
//!
//! The first line echoes the [`DatasetSpec`]; every further line is one
//! sample as space-separated `key=value` fields. Generator topologies are
//! stored as a reference `ba:<n>:<m>:<seed>` and regenerated on load; other
//! graphs are inlined as `edges=<n>:<u>-<v>,...`. Node labels use one
//! character per node: `0` (observer without pay), `h` (non-observer), `1`
//! (observer with pay). Loading re-derives labels and features from the
//! stored pieces and rejects any record that disagrees with itself.

use std::collections::hash_map::Entry;
use std::collections::HashMap;
use std::io::{BufRead, Write};
use std::path::Path;
use std::sync::Arc;

use dsgnn_core::observation::{extract_features, FeatureMatrix, NodeLabel, NodeLabelAssignment, FEATURE_COLUMNS};
use dsgnn_core::pipeline::{DatasetSpec, GraphLabel, GraphSample};
use dsgnn_core::propagation::{graph_label_of, Scenario, ScenarioParams, ScenarioSampler};
use dsgnn_core::topology::generate_ba;
use dsgnn_core::Topology;

use crate::error::{Error, Result};
use crate::format::{create, open};

const MAGIC: &str = "dsgnn-dataset v1";

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub spec: DatasetSpec,
    pub samples: Vec<GraphSample>,
}

pub fn label_name(l: GraphLabel) -> &'static str {
    match l {
        GraphLabel::NoAttack => "no-attack",
        GraphLabel::AttackPresent => "attack-present",
    }
}

fn node_char(l: NodeLabel) -> char {
    match l {
        NodeLabel::ObserverWithoutPay => '0',
        NodeLabel::NonObserver => 'h',
        NodeLabel::ObserverWithPay => '1',
    }
}

fn join<T: ToString>(items: impl IntoIterator<Item = T>, sep: &str) -> String {
    items.into_iter().map(|x| x.to_string()).collect::<Vec<_>>().join(sep)
}

pub fn write_spec<W: Write>(spec: &DatasetSpec, w: &mut W) -> std::io::Result<()> {
    writeln!(
        w,
        "{MAGIC} nodes={} observers={} samples={} positive_fraction={} ba_m={} master_seed={} \
         latency_mean={} delay_factor={} path_length_sources={} shared_topology={}",
        spec.node_count,
        spec.observer_count,
        spec.total_samples,
        spec.positive_fraction,
        spec.ba_m,
        spec.master_seed,
        spec.scenario.latency_mean,
        spec.scenario.delay_factor,
        spec.scenario.path_length_sources,
        spec.shared_topology
    )
}

/// Canonical reference for a topology: a generator reference when the graph
/// is exactly what the generator produces for its recorded seed.
fn topology_field(t: &Topology) -> std::result::Result<String, dsgnn_core::Error> {
    if let Some(m) = t.ba_m() {
        if generate_ba(t.node_count(), m, t.seed())? == *t {
            return Ok(format!("topology=ba:{}:{m}:{}", t.node_count(), t.seed()));
        }
    }
    Ok(format!(
        "edges={}:{}",
        t.node_count(),
        join(t.edges().map(|(u, v)| format!("{u}-{v}")), ",")
    ))
}

pub fn write_sample<W: Write>(s: &GraphSample, topology: &str, w: &mut W) -> std::io::Result<()> {
    let (attack_origin, attack_delay) = match s.scenario.scenario {
        Scenario::NoAttack => ("-".to_string(), "-".to_string()),
        Scenario::Attack {
            attack_origin,
            attack_delay,
        } => (attack_origin.to_string(), attack_delay.to_string()),
    };
    writeln!(
        w,
        "sample index={} topology_id={} {topology} label={} sample_seed={} pay_origin={} attack_origin={attack_origin} \
         attack_delay={attack_delay} latency_mean={} gossip_seed={} pay_holders={} observers={} node_labels={} features={}",
        s.index,
        s.topology_id,
        label_name(s.graph_label),
        s.sample_seed,
        s.scenario.pay_origin,
        s.scenario.latency_mean,
        s.scenario.seed,
        s.pay_holder_count,
        join(&s.observers, ","),
        s.node_labels.iter().map(|&l| node_char(l)).collect::<String>(),
        join(s.features.as_slice(), ",")
    )
}

pub fn write_dataset<W: Write>(spec: &DatasetSpec, samples: &[GraphSample], mut w: W) -> Result<()> {
    let io = |e| Error::io(Path::new("<dataset>"), e);
    write_spec(spec, &mut w).map_err(io)?;
    let mut refs: HashMap<*const Topology, String> = HashMap::new();
    for s in samples {
        let key = Arc::as_ptr(&s.topology);
        if let Entry::Vacant(slot) = refs.entry(key) {
            slot.insert(topology_field(&s.topology)?);
        }
        write_sample(s, &refs[&key], &mut w).map_err(io)?;
    }
    w.flush().map_err(io)
}

pub fn save_dataset(spec: &DatasetSpec, samples: &[GraphSample], path: &Path) -> Result<()> {
    write_dataset(spec, samples, create(path)?).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })
}

pub fn load_dataset(path: &Path) -> Result<Dataset> {
    read_dataset(open(path)?, path)
}

/// `key=value` fields of one record.
struct Fields<'a> {
    map: HashMap<&'a str, &'a str>,
    path: &'a Path,
    line: usize,
}

impl<'a> Fields<'a> {
    fn new(text: &'a str, path: &'a Path, line: usize) -> Result<Self> {
        let mut map = HashMap::new();
        for token in text.split_whitespace() {
            let (k, v) = token
                .split_once('=')
                .ok_or_else(|| Error::parse(path, line, format!("expected key=value, got `{token}`")))?;
            if map.insert(k, v).is_some() {
                return Err(Error::parse(path, line, format!("duplicate field `{k}`")));
            }
        }
        Ok(Fields { map, path, line })
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::parse(self.path, self.line, msg)
    }

    fn raw(&self, key: &str) -> Result<&'a str> {
        self.map.get(key).copied().ok_or_else(|| self.err(format!("missing field `{key}`")))
    }

    fn get<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        let v = self.raw(key)?;
        v.parse().map_err(|_| self.err(format!("bad value `{v}` for `{key}`")))
    }

    fn list<T: std::str::FromStr>(&self, key: &str) -> Result<Vec<T>> {
        let v = self.raw(key)?;
        if v.is_empty() {
            return Ok(Vec::new());
        }
        v.split(',')
            .map(|x| x.parse().map_err(|_| self.err(format!("bad entry `{x}` in `{key}`"))))
            .collect()
    }
}

fn parse_spec(line: &str, path: &Path) -> Result<DatasetSpec> {
    let rest = line
        .strip_prefix(MAGIC)
        .ok_or_else(|| Error::parse(path, 1, format!("not a dataset file (expected `{MAGIC}`)")))?;
    let f = Fields::new(rest, path, 1)?;
    let spec = DatasetSpec {
        node_count: f.get("nodes")?,
        observer_count: f.get("observers")?,
        total_samples: f.get("samples")?,
        positive_fraction: f.get("positive_fraction")?,
        ba_m: f.get("ba_m")?,
        master_seed: f.get("master_seed")?,
        scenario: ScenarioSampler {
            latency_mean: f.get("latency_mean")?,
            delay_factor: f.get("delay_factor")?,
            path_length_sources: f.get("path_length_sources")?,
        },
        shared_topology: f.get("shared_topology")?,
    };
    spec.validate().map_err(|e| Error::parse(path, 1, e.to_string()))?;
    Ok(spec)
}

type TopologyCache = HashMap<(usize, usize, u64), Arc<Topology>>;

fn parse_topology(f: &Fields<'_>, cache: &mut TopologyCache) -> Result<Arc<Topology>> {
    if let Ok(reference) = f.raw("topology") {
        let parts: Vec<&str> = reference.split(':').collect();
        let bad = || f.err(format!("bad topology reference `{reference}`"));
        if parts.len() != 4 || parts[0] != "ba" {
            return Err(bad());
        }
        let n: usize = parts[1].parse().map_err(|_| bad())?;
        let m: usize = parts[2].parse().map_err(|_| bad())?;
        let seed: u64 = parts[3].parse().map_err(|_| bad())?;
        if let Some(t) = cache.get(&(n, m, seed)) {
            return Ok(Arc::clone(t));
        }
        let t = Arc::new(generate_ba(n, m, seed).map_err(|e| f.err(e.to_string()))?);
        cache.insert((n, m, seed), Arc::clone(&t));
        return Ok(t);
    }
    let inline = f.raw("edges")?;
    let (n, list) = inline.split_once(':').ok_or_else(|| f.err("edges must be `<n>:<u>-<v>,...`"))?;
    let n: usize = n.parse().map_err(|_| f.err(format!("bad node count `{n}`")))?;
    let mut edges = Vec::new();
    for pair in list.split(',').filter(|p| !p.is_empty()) {
        let (u, v) = pair.split_once('-').ok_or_else(|| f.err(format!("bad edge `{pair}`")))?;
        let parse = |s: &str| s.parse::<u32>().map_err(|_| f.err(format!("bad edge `{pair}`")));
        let (u, v) = (parse(u)?, parse(v)?);
        if u >= v || v as usize >= n {
            return Err(f.err(format!("bad edge `{pair}` for {n} nodes")));
        }
        edges.push((u, v));
    }
    Ok(Arc::new(Topology::from_edges(n, &edges).map_err(|e| f.err(e.to_string()))?))
}

fn parse_sample(f: &Fields<'_>, spec: &DatasetSpec, cache: &mut TopologyCache) -> Result<GraphSample> {
    let topology = parse_topology(f, cache)?;
    let n = topology.node_count();
    if n != spec.node_count {
        return Err(f.err(format!("sample has {n} nodes, spec says {}", spec.node_count)));
    }
    let graph_label = match f.raw("label")? {
        "no-attack" => GraphLabel::NoAttack,
        "attack-present" => GraphLabel::AttackPresent,
        other => return Err(f.err(format!("unknown label `{other}`"))),
    };
    let scenario = match (f.raw("attack_origin")?, f.raw("attack_delay")?) {
        ("-", "-") => Scenario::NoAttack,
        _ => Scenario::Attack {
            attack_origin: f.get("attack_origin")?,
            attack_delay: f.get("attack_delay")?,
        },
    };
    let node_labels: Vec<NodeLabel> = f
        .raw("node_labels")?
        .chars()
        .map(|c| match c {
            '0' => Ok(NodeLabel::ObserverWithoutPay),
            'h' => Ok(NodeLabel::NonObserver),
            '1' => Ok(NodeLabel::ObserverWithPay),
            other => Err(f.err(format!("unknown node label `{other}`"))),
        })
        .collect::<Result<_>>()?;
    if node_labels.len() != n {
        return Err(f.err(format!("{} node labels for {n} nodes", node_labels.len())));
    }
    let observers: Vec<usize> = f.list("observers")?;
    let observed = |v: usize| observers.binary_search(&v).is_ok();
    if observers.windows(2).any(|w| w[0] >= w[1]) || observers.last().is_some_and(|&v| v >= n) {
        return Err(f.err("observers must be sorted, distinct and in range"));
    }
    if (0..n).any(|v| observed(v) == (node_labels[v] == NodeLabel::NonObserver)) {
        return Err(f.err("node labels disagree with the observer set"));
    }
    let pay_holder_count: usize = f.get("pay_holders")?;
    if pay_holder_count > n || graph_label_of(pay_holder_count, n) != graph_label {
        return Err(f.err("label disagrees with pay_holders"));
    }
    let values: Vec<u32> = f.list("features")?;
    if values.len() != n * FEATURE_COLUMNS {
        return Err(f.err(format!("{} feature values for {n} nodes", values.len())));
    }
    let features = FeatureMatrix::from_raw(n, values)?;
    let assignment = NodeLabelAssignment {
        labels: node_labels,
        observer_set: observers,
    };
    if extract_features(&topology, &assignment)? != features {
        return Err(f.err("features disagree with topology and node labels"));
    }
    Ok(GraphSample {
        index: f.get("index")?,
        topology_id: f.get("topology_id")?,
        topology,
        scenario: ScenarioParams {
            scenario,
            pay_origin: f.get("pay_origin")?,
            latency_mean: f.get("latency_mean")?,
            seed: f.get("gossip_seed")?,
        },
        pay_holder_count,
        observers: assignment.observer_set,
        node_labels: assignment.labels,
        features,
        graph_label,
        sample_seed: f.get("sample_seed")?,
    })
}

pub fn read_dataset<R: BufRead>(r: R, path: &Path) -> Result<Dataset> {
    let mut lines = r.lines();
    let header = match lines.next() {
        Some(l) => l.map_err(|e| Error::io(path, e))?,
        None => return Err(Error::parse(path, 1, "empty dataset file")),
    };
    let spec = parse_spec(&header, path)?;
    let mut cache = TopologyCache::new();
    let mut samples = Vec::with_capacity(spec.total_samples);
    for (i, line) in lines.enumerate() {
        let line_no = i + 2;
        let line = line.map_err(|e| Error::io(path, e))?;
        let body = line
            .strip_prefix("sample ")
            .ok_or_else(|| Error::parse(path, line_no, "expected a `sample` record"))?;
        let fields = Fields::new(body, path, line_no)?;
        samples.push(parse_sample(&fields, &spec, &mut cache)?);
    }
    if samples.len() != spec.total_samples {
        return Err(Error::parse(
            path,
            samples.len() + 1,
            format!("{} samples, header promises {}", samples.len(), spec.total_samples),
        ));
    }
    Ok(Dataset { spec, samples })
}

#[cfg(test)]
mod tests {
    use super::*;
    use dsgnn_core::pipeline::build_dataset;
    use dsgnn_core::Sequential;

    fn spec(shared: bool) -> DatasetSpec {
        DatasetSpec {
            node_count: 80,
            observer_count: 9,
            total_samples: 6,
            ba_m: 3,
            master_seed: 21,
            shared_topology: shared,
            ..DatasetSpec::default()
        }
    }

    fn to_bytes(spec: &DatasetSpec, samples: &[GraphSample]) -> Vec<u8> {
        let mut out = Vec::new();
        write_dataset(spec, samples, &mut out).unwrap();
        out
    }

    #[test]
    fn round_trip_is_exact() {
        for shared in [false, true] {
            let spec = spec(shared);
            let samples = build_dataset(&spec, &Sequential).unwrap();
            let bytes = to_bytes(&spec, &samples);
            let back = read_dataset(&bytes[..], Path::new("mem")).unwrap();
            assert_eq!(back.spec, spec);
            assert_eq!(back.samples, samples);
            assert_eq!(to_bytes(&back.spec, &back.samples), bytes);
            if shared {
                assert!(Arc::ptr_eq(&back.samples[0].topology, &back.samples[5].topology));
            }
        }
    }

    #[test]
    fn hand_made_topologies_are_inlined() {
        let spec = spec(false);
        let mut samples = build_dataset(&spec, &Sequential).unwrap();
        let t = &samples[0].topology;
        let edges: Vec<(u32, u32)> = t.edges().collect();
        samples[0].topology = Arc::new(Topology::from_edges(t.node_count(), &edges).unwrap());
        let bytes = to_bytes(&spec, &samples);
        let text = String::from_utf8(bytes.clone()).unwrap();
        assert!(text.lines().nth(1).unwrap().contains(" edges=80:0-3,"));
        assert_eq!(read_dataset(&bytes[..], Path::new("mem")).unwrap().samples, samples);
    }

    #[test]
    fn tampered_records_are_rejected() {
        let spec = spec(false);
        let samples = build_dataset(&spec, &Sequential).unwrap();
        let text = String::from_utf8(to_bytes(&spec, &samples)).unwrap();
        let flip_label = text.replacen("label=no-attack", "label=attack-present", 1);
        let bad_feature = text.replacen("features=", "features=9", 1);
        let truncated: String = text.lines().take(3).map(|l| format!("{l}\n")).collect();
        for (name, bad) in [("label", flip_label), ("feature", bad_feature), ("count", truncated)] {
            assert!(
                matches!(read_dataset(bad.as_bytes(), Path::new("d")), Err(Error::Parse { .. })),
                "{name}"
            );
        }
    }
}
