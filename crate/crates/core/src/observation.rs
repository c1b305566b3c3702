//! Observer selection, three-valued node labels and label-count features.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::gnn::Matrix;
use crate::propagation::{PropagationOutcome, TxHold};
use crate::rng::rng_from_seed;
use crate::topology::Topology;

/// What the detector knows about a node's mempool.
///
/// Variants are ordered by their numeric value (0.0, 0.5, 1.0), which is also
/// the feature column order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[repr(u8)]
pub enum NodeLabel {
    ObserverWithoutPay = 0,
    NonObserver = 1,
    ObserverWithPay = 2,
}

impl NodeLabel {
    pub const ALL: [NodeLabel; 3] = [
        NodeLabel::ObserverWithoutPay,
        NodeLabel::NonObserver,
        NodeLabel::ObserverWithPay,
    ];

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn value(self) -> f64 {
        match self {
            NodeLabel::ObserverWithoutPay => 0.0,
            NodeLabel::NonObserver => 0.5,
            NodeLabel::ObserverWithPay => 1.0,
        }
    }

    pub fn from_value(value: f64) -> Option<Self> {
        match value {
            0.0 => Some(NodeLabel::ObserverWithoutPay),
            0.5 => Some(NodeLabel::NonObserver),
            1.0 => Some(NodeLabel::ObserverWithPay),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeLabelAssignment {
    pub labels: Vec<NodeLabel>,
    /// Sorted ascending.
    pub observer_set: Vec<usize>,
}

/// Picks `k` distinct observers uniformly without replacement, sorted.
pub fn select_observers(n: usize, k: usize, seed: u64) -> Result<Vec<usize>> {
    if k == 0 || k > n {
        return Err(Error::params(alloc::format!(
            "observer count must be in 1..={n}, got {k}"
        )));
    }
    let mut rng = rng_from_seed(seed);
    let mut picked = rand::seq::index::sample(&mut rng, n, k).into_vec();
    picked.sort_unstable();
    Ok(picked)
}

pub fn assign_labels(outcome: &PropagationOutcome, observers: &[usize]) -> Result<NodeLabelAssignment> {
    let n = outcome.holds.len();
    let mut labels = vec![NodeLabel::NonObserver; n];
    let mut observer_set = observers.to_vec();
    observer_set.sort_unstable();
    observer_set.dedup();
    for &v in &observer_set {
        let hold = outcome
            .holds
            .get(v)
            .ok_or_else(|| Error::params(alloc::format!("observer {v} out of range")))?;
        labels[v] = match hold {
            TxHold::Pay => NodeLabel::ObserverWithPay,
            TxHold::Attack => NodeLabel::ObserverWithoutPay,
        };
    }
    Ok(NodeLabelAssignment { labels, observer_set })
}

pub const FEATURE_COLUMNS: usize = 12;

/// Column of the 1-hop count for neighbor label `l`.
#[inline]
pub fn one_hop_column(l: NodeLabel) -> usize {
    l.index()
}

/// Column of the 2-hop count for (neighbor label, label one hop further).
#[inline]
pub fn two_hop_column(near: NodeLabel, far: NodeLabel) -> usize {
    3 + 3 * near.index() + far.index()
}

/// Per-node label counts, `FEATURE_COLUMNS` per row, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureMatrix {
    rows: usize,
    data: Vec<u32>,
}

/// How raw counts become model inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FeatureScaling {
    #[default]
    Raw,
    /// 1-hop columns divided by their sum (the degree), 2-hop columns by
    /// theirs. All-zero groups stay zero.
    DegreeNormalized,
}

impl FeatureScaling {
    pub fn name(self) -> &'static str {
        match self {
            FeatureScaling::Raw => "raw",
            FeatureScaling::DegreeNormalized => "normalized",
        }
    }
}

impl core::str::FromStr for FeatureScaling {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "raw" => Ok(FeatureScaling::Raw),
            "normalized" => Ok(FeatureScaling::DegreeNormalized),
            other => Err(Error::params(alloc::format!("unknown feature scaling `{other}`"))),
        }
    }
}

impl core::fmt::Display for FeatureScaling {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.name())
    }
}

impl FeatureMatrix {
    pub fn from_raw(rows: usize, data: Vec<u32>) -> Result<Self> {
        if data.len() != rows * FEATURE_COLUMNS {
            return Err(Error::shape(alloc::format!(
                "feature data has {} values, expected {rows} x {FEATURE_COLUMNS}",
                data.len()
            )));
        }
        Ok(FeatureMatrix { rows, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn row(&self, v: usize) -> &[u32] {
        &self.data[v * FEATURE_COLUMNS..(v + 1) * FEATURE_COLUMNS]
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.data
    }

    pub fn to_matrix(&self, scaling: FeatureScaling) -> Matrix {
        let mut m = Matrix::zeros(self.rows, FEATURE_COLUMNS);
        for v in 0..self.rows {
            let src = self.row(v);
            let dst = m.row_mut(v);
            match scaling {
                FeatureScaling::Raw => {
                    for (d, &s) in dst.iter_mut().zip(src) {
                        *d = f64::from(s);
                    }
                }
                FeatureScaling::DegreeNormalized => {
                    for (lo, hi) in [(0, 3), (3, FEATURE_COLUMNS)] {
                        let total: u64 = src[lo..hi].iter().map(|&c| u64::from(c)).sum();
                        if total > 0 {
                            for c in lo..hi {
                                dst[c] = f64::from(src[c]) / total as f64;
                            }
                        }
                    }
                }
            }
        }
        m
    }
}

/// Counts, for every node `v`, neighbor labels and (neighbor, next-hop) label
/// pairs over non-backtracking 2-walks `v -> u -> w` with `w != v`. A `w`
/// reachable through several `u` is counted once per walk.
pub fn extract_features(t: &Topology, a: &NodeLabelAssignment) -> Result<FeatureMatrix> {
    let n = t.node_count();
    if a.labels.len() != n {
        return Err(Error::shape(alloc::format!(
            "label assignment covers {} nodes, topology has {n}",
            a.labels.len()
        )));
    }
    // neighbor label histogram per node; the 2-hop counts of v through u are
    // u's histogram minus the walk back to v
    let mut around = vec![[0u32; 3]; n];
    for (u, counts) in around.iter_mut().enumerate() {
        for &w in t.neighbors(u) {
            counts[a.labels[w as usize].index()] += 1;
        }
    }
    let mut data = vec![0u32; n * FEATURE_COLUMNS];
    for v in 0..n {
        let row = &mut data[v * FEATURE_COLUMNS..(v + 1) * FEATURE_COLUMNS];
        let own = a.labels[v].index();
        row[..3].copy_from_slice(&around[v]);
        for &u in t.neighbors(v) {
            let u = u as usize;
            let near = a.labels[u].index();
            let base = 3 + 3 * near;
            for far in 0..3 {
                row[base + far] += around[u][far];
            }
            if u != v {
                row[base + own] -= 1;
            }
        }
    }
    FeatureMatrix::from_raw(n, data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::propagation::GraphLabel;
    use NodeLabel::*;

    fn outcome(holds: Vec<TxHold>) -> PropagationOutcome {
        let pay = holds.iter().filter(|&&h| h == TxHold::Pay).count();
        PropagationOutcome {
            graph_label: crate::propagation::graph_label_of(pay, holds.len()),
            pay_holder_count: pay,
            holds,
            quiescence_time: 0.0,
        }
    }

    fn labels(ls: &[NodeLabel]) -> NodeLabelAssignment {
        NodeLabelAssignment {
            labels: ls.to_vec(),
            observer_set: ls
                .iter()
                .enumerate()
                .filter(|(_, &l)| l != NonObserver)
                .map(|(i, _)| i)
                .collect(),
        }
    }

    #[test]
    fn observer_selection() {
        let obs = select_observers(14_000, 250, 3).unwrap();
        assert_eq!(obs.len(), 250);
        assert!(obs.windows(2).all(|w| w[0] < w[1]));
        assert!(obs.iter().all(|&v| v < 14_000));
        assert_eq!(obs, select_observers(14_000, 250, 3).unwrap());

        assert_eq!(select_observers(5, 5, 99).unwrap(), vec![0, 1, 2, 3, 4]);
        assert!(matches!(select_observers(5, 6, 0), Err(Error::InvalidParameters(_))));
        assert!(matches!(select_observers(5, 0, 0), Err(Error::InvalidParameters(_))));
    }

    #[test]
    fn label_assignment() {
        let o = outcome(vec![TxHold::Pay; 10]);
        assert_eq!(o.graph_label, GraphLabel::NoAttack);
        let a = assign_labels(&o, &[7, 0]).unwrap();
        assert_eq!(a.observer_set, vec![0, 7]);
        for (v, l) in a.labels.iter().enumerate() {
            let expected = if v == 0 || v == 7 { ObserverWithPay } else { NonObserver };
            assert_eq!(*l, expected);
        }

        let mut holds = vec![TxHold::Pay; 5];
        holds[3] = TxHold::Attack;
        let a = assign_labels(&outcome(holds), &[3]).unwrap();
        assert_eq!(a.labels[3].value(), 0.0);
        assert_eq!(a.labels[0].value(), 0.5);
    }

    #[test]
    fn path_features() {
        // a - b - c with labels 1.0, 0.5, 0.0
        let t = Topology::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let f = extract_features(&t, &labels(&[ObserverWithPay, NonObserver, ObserverWithoutPay])).unwrap();
        assert_eq!(f.row(1), &[1, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0]);
        let mut a_row = [0u32; 12];
        a_row[1] = 1;
        a_row[two_hop_column(NonObserver, ObserverWithoutPay)] = 1;
        assert_eq!(f.row(0), &a_row);
    }

    #[test]
    fn single_edge_has_no_two_hop() {
        let t = Topology::from_edges(2, &[(0, 1)]).unwrap();
        let f = extract_features(&t, &labels(&[ObserverWithPay, ObserverWithoutPay])).unwrap();
        assert_eq!(f.row(0), &[1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0]);
        assert_eq!(f.row(1), &[0, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0]);
    }

    #[test]
    fn uniform_labels_collapse() {
        let t = crate::topology::generate_ba(60, 3, 1).unwrap();
        let f = extract_features(&t, &labels(&vec![NonObserver; 60])).unwrap();
        for v in 0..60 {
            let deg = t.degree(v) as u32;
            let walks: u32 = t.neighbors(v).iter().map(|&u| t.degree(u as usize) as u32 - 1).sum();
            let mut expected = [0u32; 12];
            expected[1] = deg;
            expected[two_hop_column(NonObserver, NonObserver)] = walks;
            assert_eq!(f.row(v), &expected);
        }
    }

    #[test]
    fn normalized_rows() {
        let t = Topology::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let f = extract_features(&t, &labels(&[ObserverWithPay, NonObserver, ObserverWithoutPay])).unwrap();
        let m = f.to_matrix(FeatureScaling::DegreeNormalized);
        assert_eq!(&m.row(1)[..3], &[0.5, 0.0, 0.5]);
        assert!(m.row(1)[3..].iter().all(|&x| x == 0.0));
        let s: f64 = m.row(0)[3..].iter().sum();
        assert_eq!(s, 1.0);
    }

    #[test]
    fn shape_mismatch() {
        let t = Topology::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        assert!(matches!(
            extract_features(&t, &labels(&[NonObserver; 2])),
            Err(Error::Shape(_))
        ));
    }
}
