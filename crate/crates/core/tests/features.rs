use dsgnn_core::observation::{extract_features, two_hop_column, NodeLabel, NodeLabelAssignment, FEATURE_COLUMNS};
use dsgnn_core::rng::rng_from_seed;
use dsgnn_core::topology::Topology;
use proptest::prelude::*;
use rand::Rng;

/// Walks v → u → w over an adjacency matrix, skipping only w = v.
fn naive_features(n: usize, adj: &[Vec<bool>], labels: &[NodeLabel]) -> Vec<u32> {
    let mut out = vec![0u32; n * FEATURE_COLUMNS];
    for v in 0..n {
        let row = &mut out[v * FEATURE_COLUMNS..(v + 1) * FEATURE_COLUMNS];
        for u in 0..n {
            if !adj[v][u] {
                continue;
            }
            row[labels[u].index()] += 1;
            for w in 0..n {
                if adj[u][w] && w != v {
                    row[two_hop_column(labels[u], labels[w])] += 1;
                }
            }
        }
    }
    out
}

fn build(n: usize, edges: &[(u32, u32)], labels: Vec<NodeLabel>) -> (Topology, Vec<Vec<bool>>, NodeLabelAssignment) {
    let mut adj = vec![vec![false; n]; n];
    let mut clean = Vec::new();
    for &(a, b) in edges {
        if a != b && !adj[a as usize][b as usize] {
            adj[a as usize][b as usize] = true;
            adj[b as usize][a as usize] = true;
            clean.push((a, b));
        }
    }
    let t = Topology::from_edges(n, &clean).unwrap();
    let assignment = NodeLabelAssignment {
        labels,
        observer_set: Vec::new(),
    };
    (t, adj, assignment)
}

fn random_graph(seed: u64) -> (Topology, Vec<Vec<bool>>, NodeLabelAssignment) {
    let mut rng = rng_from_seed(seed);
    let n = rng.random_range(1..=50usize);
    let density: f64 = rng.random_range(0.0..0.5);
    let mut edges = Vec::new();
    for a in 0..n as u32 {
        for b in a + 1..n as u32 {
            if rng.random::<f64>() < density {
                edges.push((a, b));
            }
        }
    }
    let labels = (0..n).map(|_| NodeLabel::ALL[rng.random_range(0..3)]).collect();
    build(n, &edges, labels)
}

#[test]
fn matches_walk_enumeration_on_100_graphs() {
    for seed in 0..100 {
        let (t, adj, a) = random_graph(seed);
        let fast = extract_features(&t, &a).unwrap();
        assert_eq!(fast.as_slice(), naive_features(t.node_count(), &adj, &a.labels), "seed {seed}");
    }
}

#[test]
fn triangle_walks_count() {
    // in a triangle every 2-walk that does not return is a legitimate walk
    let labels = vec![NodeLabel::ObserverWithPay; 3];
    let (t, adj, a) = build(3, &[(0, 1), (1, 2), (0, 2)], labels);
    let f = extract_features(&t, &a).unwrap();
    let hi = NodeLabel::ObserverWithPay;
    assert_eq!(f.row(0)[hi.index()], 2);
    assert_eq!(f.row(0)[two_hop_column(hi, hi)], 2);
    assert_eq!(f.as_slice(), naive_features(3, &adj, &a.labels));
}

fn arb_case() -> impl Strategy<Value = (usize, Vec<(u32, u32)>, Vec<u8>)> {
    (1usize..=50).prop_flat_map(|n| {
        (
            Just(n),
            prop::collection::vec((0..n as u32, 0..n as u32), 0..=3 * n),
            prop::collection::vec(0u8..3, n),
        )
    })
}

proptest! {
    #[test]
    fn fast_extraction_equals_oracle((n, edges, raw) in arb_case()) {
        let labels = raw.iter().map(|&i| NodeLabel::ALL[i as usize]).collect();
        let (t, adj, a) = build(n, &edges, labels);
        let f = extract_features(&t, &a).unwrap();
        prop_assert_eq!(f.as_slice(), &naive_features(n, &adj, &a.labels)[..]);
        for v in 0..n {
            let row = f.row(v);
            let one_hop: u32 = row[..3].iter().sum();
            prop_assert_eq!(one_hop as usize, t.degree(v));
        }
    }

    #[test]
    fn relabeling_nodes_permutes_rows((n, edges, raw) in arb_case(), shift in 0usize..50) {
        let labels: Vec<NodeLabel> = raw.iter().map(|&i| NodeLabel::ALL[i as usize]).collect();
        let (t, _, a) = build(n, &edges, labels.clone());
        let perm: Vec<usize> = (0..n).map(|v| (v * 7 + shift) % n).collect();
        let injective = { let mut p = perm.clone(); p.sort_unstable(); p.dedup(); p.len() == n };
        prop_assume!(injective);
        let moved: Vec<(u32, u32)> = edges.iter().map(|&(x, y)| (perm[x as usize] as u32, perm[y as usize] as u32)).collect();
        let mut moved_labels = labels.clone();
        for v in 0..n {
            moved_labels[perm[v]] = labels[v];
        }
        let (t2, _, a2) = build(n, &moved, moved_labels);
        let f = extract_features(&t, &a).unwrap();
        let f2 = extract_features(&t2, &a2).unwrap();
        for v in 0..n {
            prop_assert_eq!(f.row(v), f2.row(perm[v]));
        }
    }
}
