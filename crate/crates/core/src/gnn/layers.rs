//! GCN, GraphSAGE and single-head GAT message passing with exact backward
//! passes.
//!
//! Layers here produce pre-activations; the model applies ReLU and dropout.
//! The free functions [`gcn_forward`], [`sage_forward`] and [`gat_forward`]
//! are the standalone `ReLU(layer(x))` operations.

use alloc::vec;
use alloc::vec::Vec;

use super::adjacency::{normalize_adjacency, NormalizedAdjacency};
use super::matrix::{axpy, dot, Matrix};
use crate::error::{Error, Result};
use crate::topology::Topology;

pub const LEAKY_SLOPE: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LayerKind {
    Gcn,
    GraphSage,
    Gat,
}

impl LayerKind {
    pub const ALL: [LayerKind; 3] = [LayerKind::Gcn, LayerKind::GraphSage, LayerKind::Gat];

    pub fn name(self) -> &'static str {
        match self {
            LayerKind::Gcn => "gcn",
            LayerKind::GraphSage => "sage",
            LayerKind::Gat => "gat",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            LayerKind::Gcn => "GCN",
            LayerKind::GraphSage => "GraphSAGE",
            LayerKind::Gat => "GAT",
        }
    }
}

impl core::str::FromStr for LayerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gcn" => Ok(LayerKind::Gcn),
            "sage" | "graphsage" => Ok(LayerKind::GraphSage),
            "gat" => Ok(LayerKind::Gat),
            other => Err(Error::params(alloc::format!("unknown layer kind `{other}`"))),
        }
    }
}

impl core::fmt::Display for LayerKind {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.name())
    }
}

/// Weights of one message-passing layer.
#[derive(Debug, Clone, PartialEq)]
pub enum LayerWeights {
    Gcn { w: Matrix },
    Sage { w_self: Matrix, w_neigh: Matrix },
    /// `attn` is `1 x 2d`: the first half scores the center node, the second
    /// half the neighbor.
    Gat { w: Matrix, attn: Matrix },
}

impl LayerWeights {
    pub fn kind(&self) -> LayerKind {
        match self {
            LayerWeights::Gcn { .. } => LayerKind::Gcn,
            LayerWeights::Sage { .. } => LayerKind::GraphSage,
            LayerWeights::Gat { .. } => LayerKind::Gat,
        }
    }

    pub fn blocks(&self) -> Vec<&Matrix> {
        match self {
            LayerWeights::Gcn { w } => vec![w],
            LayerWeights::Sage { w_self, w_neigh } => vec![w_self, w_neigh],
            LayerWeights::Gat { w, attn } => vec![w, attn],
        }
    }

    pub fn blocks_mut(&mut self) -> Vec<&mut Matrix> {
        match self {
            LayerWeights::Gcn { w } => vec![w],
            LayerWeights::Sage { w_self, w_neigh } => vec![w_self, w_neigh],
            LayerWeights::Gat { w, attn } => vec![w, attn],
        }
    }

    pub fn block_names(&self) -> &'static [&'static str] {
        match self {
            LayerWeights::Gcn { .. } => &["w"],
            LayerWeights::Sage { .. } => &["w_self", "w_neigh"],
            LayerWeights::Gat { .. } => &["w", "attn"],
        }
    }

    pub fn zeros_like(&self) -> Self {
        match self {
            LayerWeights::Gcn { w } => LayerWeights::Gcn { w: w.zeros_like() },
            LayerWeights::Sage { w_self, w_neigh } => LayerWeights::Sage {
                w_self: w_self.zeros_like(),
                w_neigh: w_neigh.zeros_like(),
            },
            LayerWeights::Gat { w, attn } => LayerWeights::Gat {
                w: w.zeros_like(),
                attn: attn.zeros_like(),
            },
        }
    }

    pub fn input_dim(&self) -> usize {
        match self {
            LayerWeights::Gcn { w } | LayerWeights::Gat { w, .. } => w.rows(),
            LayerWeights::Sage { w_self, .. } => w_self.rows(),
        }
    }

    pub fn output_dim(&self) -> usize {
        match self {
            LayerWeights::Gcn { w } | LayerWeights::Gat { w, .. } => w.cols(),
            LayerWeights::Sage { w_self, .. } => w_self.cols(),
        }
    }

    fn check(&self, x: &Matrix) -> Result<()> {
        if x.cols() != self.input_dim() {
            return Err(Error::shape(alloc::format!(
                "layer expects {} input columns, got {}",
                self.input_dim(),
                x.cols()
            )));
        }
        match self {
            LayerWeights::Sage { w_self, w_neigh } if w_self.shape() != w_neigh.shape() => Err(
                Error::shape(alloc::format!("sage blocks {:?} vs {:?}", w_self.shape(), w_neigh.shape())),
            ),
            LayerWeights::Gat { w, attn } if attn.shape() != (1, 2 * w.cols()) => Err(Error::shape(
                alloc::format!("attention vector {:?}, expected (1, {})", attn.shape(), 2 * w.cols()),
            )),
            _ => Ok(()),
        }
    }
}

/// Per-graph structures shared by both layers of a forward pass.
#[derive(Debug, Clone)]
pub struct GraphContext<'a> {
    pub topology: &'a Topology,
    pub adjacency: Option<NormalizedAdjacency>,
}

impl<'a> GraphContext<'a> {
    pub fn new(topology: &'a Topology, kind: LayerKind) -> Self {
        let adjacency = (kind == LayerKind::Gcn).then(|| normalize_adjacency(topology));
        GraphContext { topology, adjacency }
    }

    fn adjacency(&self) -> Result<&NormalizedAdjacency> {
        self.adjacency
            .as_ref()
            .ok_or_else(|| Error::input("GCN layer needs a normalized adjacency"))
    }
}

/// Intermediates kept for the backward pass.
#[derive(Debug, Clone)]
pub enum LayerCache {
    Gcn {
        /// `Â x`
        propagated: Matrix,
    },
    Sage {
        neighbor_mean: Matrix,
    },
    Gat {
        projected: Matrix,
        attention: Attention,
    },
}

/// Attention coefficients over `{v} ∪ N(v)`, self entry first, stored flat.
#[derive(Debug, Clone, PartialEq)]
pub struct Attention {
    offsets: Vec<usize>,
    members: Vec<u32>,
    /// raw scores before LeakyReLU
    scores: Vec<f64>,
    alpha: Vec<f64>,
}

impl Attention {
    /// `(member, alpha)` pairs for node `v`, self first.
    pub fn row(&self, v: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.offsets[v]..self.offsets[v + 1];
        self.members[span.clone()]
            .iter()
            .zip(&self.alpha[span])
            .map(|(&u, &a)| (u as usize, a))
    }
}

#[inline]
fn leaky(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        LEAKY_SLOPE * x
    }
}

fn mean_aggregate(t: &Topology, x: &Matrix) -> Matrix {
    let mut out = Matrix::zeros(x.rows(), x.cols());
    for v in 0..t.node_count() {
        let nbrs = t.neighbors(v);
        if nbrs.is_empty() {
            continue;
        }
        let inv = 1.0 / nbrs.len() as f64;
        let o = out.row_mut(v);
        for &u in nbrs {
            axpy(o, inv, x.row(u as usize));
        }
    }
    out
}

fn mean_aggregate_transpose(t: &Topology, grad_mean: &Matrix) -> Matrix {
    let mut out = Matrix::zeros(grad_mean.rows(), grad_mean.cols());
    for v in 0..t.node_count() {
        let nbrs = t.neighbors(v);
        if nbrs.is_empty() {
            continue;
        }
        let inv = 1.0 / nbrs.len() as f64;
        let g = grad_mean.row(v);
        for &u in nbrs {
            axpy(out.row_mut(u as usize), inv, g);
        }
    }
    out
}

fn gat_attention(t: &Topology, projected: &Matrix, attn: &Matrix) -> Attention {
    let n = t.node_count();
    let d = projected.cols();
    let (a_center, a_neigh) = attn.as_slice().split_at(d);
    let s_center: Vec<f64> = (0..n).map(|v| dot(a_center, projected.row(v))).collect();
    let s_neigh: Vec<f64> = (0..n).map(|v| dot(a_neigh, projected.row(v))).collect();

    let mut offsets = Vec::with_capacity(n + 1);
    let mut members = Vec::new();
    let mut scores = Vec::new();
    let mut alpha = Vec::new();
    offsets.push(0);
    for v in 0..n {
        let start = members.len();
        members.push(v as u32);
        members.extend_from_slice(t.neighbors(v));
        for &u in &members[start..] {
            scores.push(s_center[v] + s_neigh[u as usize]);
        }
        let hood = &members[start..];
        let logits = &scores[start..];
        let mut top = 0;
        for (k, &e) in logits.iter().enumerate() {
            if leaky(e) > leaky(logits[top]) {
                top = k;
            }
        }
        let (e_top, s_top) = (logits[top], s_neigh[hood[top] as usize]);
        let mut total = 0.0;
        for (&e, &u) in logits.iter().zip(hood) {
            // when both scores sit on the same LeakyReLU piece the center
            // term cancels exactly; keep it out of the arithmetic
            let shifted = if (e > 0.0) == (e_top > 0.0) {
                let slope = if e > 0.0 { 1.0 } else { LEAKY_SLOPE };
                slope * (s_neigh[u as usize] - s_top)
            } else {
                leaky(e) - leaky(e_top)
            };
            let w = libm::exp(shifted);
            alpha.push(w);
            total += w;
        }
        for a in &mut alpha[start..] {
            *a /= total;
        }
        offsets.push(members.len());
    }
    Attention {
        offsets,
        members,
        scores,
        alpha,
    }
}

/// Pre-activation output of one layer plus its cache.
pub fn layer_forward(weights: &LayerWeights, ctx: &GraphContext<'_>, x: &Matrix) -> Result<(Matrix, LayerCache)> {
    weights.check(x)?;
    if x.rows() != ctx.topology.node_count() {
        return Err(Error::shape(alloc::format!(
            "{} feature rows for {} nodes",
            x.rows(),
            ctx.topology.node_count()
        )));
    }
    match weights {
        LayerWeights::Gcn { w } => {
            let propagated = ctx.adjacency()?.mul_dense(x)?;
            let z = propagated.matmul(w)?;
            Ok((z, LayerCache::Gcn { propagated }))
        }
        LayerWeights::Sage { w_self, w_neigh } => {
            let neighbor_mean = mean_aggregate(ctx.topology, x);
            let mut z = x.matmul(w_self)?;
            z.add_assign(&neighbor_mean.matmul(w_neigh)?)?;
            Ok((z, LayerCache::Sage { neighbor_mean }))
        }
        LayerWeights::Gat { w, attn } => {
            let projected = x.matmul(w)?;
            let attention = gat_attention(ctx.topology, &projected, attn);
            let mut z = Matrix::zeros(x.rows(), w.cols());
            for v in 0..x.rows() {
                let o = z.row_mut(v);
                for (u, a) in attention.row(v) {
                    axpy(o, a, projected.row(u));
                }
            }
            Ok((z, LayerCache::Gat { projected, attention }))
        }
    }
}

/// Gradients of the layer weights and (optionally) of its input, given the
/// gradient of the pre-activation output.
pub fn layer_backward(
    weights: &LayerWeights,
    ctx: &GraphContext<'_>,
    x: &Matrix,
    cache: &LayerCache,
    grad_z: &Matrix,
    need_input_grad: bool,
) -> Result<(LayerWeights, Option<Matrix>)> {
    match (weights, cache) {
        (LayerWeights::Gcn { w }, LayerCache::Gcn { propagated }) => {
            let grad_w = propagated.matmul_tn(grad_z)?;
            let grad_x = if need_input_grad {
                // Â is symmetric
                let grad_prop = grad_z.matmul_nt(w)?;
                Some(ctx.adjacency()?.mul_dense(&grad_prop)?)
            } else {
                None
            };
            Ok((LayerWeights::Gcn { w: grad_w }, grad_x))
        }
        (LayerWeights::Sage { w_self, w_neigh }, LayerCache::Sage { neighbor_mean }) => {
            let grads = LayerWeights::Sage {
                w_self: x.matmul_tn(grad_z)?,
                w_neigh: neighbor_mean.matmul_tn(grad_z)?,
            };
            let grad_x = if need_input_grad {
                let mut g = grad_z.matmul_nt(w_self)?;
                let grad_mean = grad_z.matmul_nt(w_neigh)?;
                g.add_assign(&mean_aggregate_transpose(ctx.topology, &grad_mean))?;
                Some(g)
            } else {
                None
            };
            Ok((grads, grad_x))
        }
        (LayerWeights::Gat { w, attn }, LayerCache::Gat { projected, attention }) => {
            let n = x.rows();
            let d = w.cols();
            let (a_center, a_neigh) = attn.as_slice().split_at(d);
            let mut grad_proj = Matrix::zeros(n, d);
            let mut grad_s_center = vec![0.0; n];
            let mut grad_s_neigh = vec![0.0; n];
            let mut grad_alpha: Vec<f64> = Vec::new();
            for v in 0..n {
                let span = attention.offsets[v]..attention.offsets[v + 1];
                let g_out = grad_z.row(v);
                grad_alpha.clear();
                for (u, a) in attention.row(v) {
                    grad_alpha.push(dot(g_out, projected.row(u)));
                    axpy(grad_proj.row_mut(u), a, g_out);
                }
                let alpha = &attention.alpha[span.clone()];
                let weighted: f64 = alpha.iter().zip(&grad_alpha).map(|(a, g)| a * g).sum();
                for (k, idx) in span.enumerate() {
                    let grad_logit = alpha[k] * (grad_alpha[k] - weighted);
                    let slope = if attention.scores[idx] > 0.0 { 1.0 } else { LEAKY_SLOPE };
                    let grad_score = grad_logit * slope;
                    grad_s_center[v] += grad_score;
                    grad_s_neigh[attention.members[idx] as usize] += grad_score;
                }
            }
            let mut grad_attn = Matrix::zeros(1, 2 * d);
            {
                let (gc, gn) = grad_attn.as_mut_slice().split_at_mut(d);
                for v in 0..n {
                    axpy(gc, grad_s_center[v], projected.row(v));
                    axpy(gn, grad_s_neigh[v], projected.row(v));
                }
            }
            for v in 0..n {
                let row = grad_proj.row_mut(v);
                axpy(row, grad_s_center[v], a_center);
                axpy(row, grad_s_neigh[v], a_neigh);
            }
            let grads = LayerWeights::Gat {
                w: x.matmul_tn(&grad_proj)?,
                attn: grad_attn,
            };
            let grad_x = if need_input_grad {
                Some(grad_proj.matmul_nt(w)?)
            } else {
                None
            };
            Ok((grads, grad_x))
        }
        _ => Err(Error::shape("layer cache does not match layer kind")),
    }
}

/// `ReLU(Â x w)`
pub fn gcn_forward(adjacency: &NormalizedAdjacency, x: &Matrix, w: &Matrix) -> Result<Matrix> {
    if x.cols() != w.rows() {
        return Err(Error::shape(alloc::format!("x {:?} vs w {:?}", x.shape(), w.shape())));
    }
    let mut h = adjacency.mul_dense(x)?.matmul(w)?;
    h.relu_in_place();
    Ok(h)
}

/// `ReLU(x w_self + mean_{N(v)}(x) w_neigh)`; isolated nodes aggregate zero.
pub fn sage_forward(t: &Topology, x: &Matrix, w_self: &Matrix, w_neigh: &Matrix) -> Result<Matrix> {
    let weights = LayerWeights::Sage {
        w_self: w_self.clone(),
        w_neigh: w_neigh.clone(),
    };
    let ctx = GraphContext::new(t, LayerKind::GraphSage);
    let (mut h, _) = layer_forward(&weights, &ctx, x)?;
    h.relu_in_place();
    Ok(h)
}

/// Single-head attention over `{v} ∪ N(v)`, then ReLU.
pub fn gat_forward(t: &Topology, x: &Matrix, w: &Matrix, attn: &Matrix) -> Result<Matrix> {
    gat_forward_with_attention(t, x, w, attn).map(|(h, _)| h)
}

pub fn gat_forward_with_attention(
    t: &Topology,
    x: &Matrix,
    w: &Matrix,
    attn: &Matrix,
) -> Result<(Matrix, Attention)> {
    let weights = LayerWeights::Gat {
        w: w.clone(),
        attn: attn.clone(),
    };
    let ctx = GraphContext::new(t, LayerKind::Gat);
    let (mut h, cache) = layer_forward(&weights, &ctx, x)?;
    h.relu_in_place();
    match cache {
        LayerCache::Gat { attention, .. } => Ok((h, attention)),
        _ => unreachable!("GAT layer returned a non-GAT cache"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::generate_ba;

    fn rel_close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
    }

    fn pseudo(r: usize, c: usize, salt: f64) -> f64 {
        libm::sin((r * 31 + c * 17) as f64 + salt) * 1.3
    }

    #[test]
    fn gcn_single_node_and_zero_weights() {
        let t = Topology::from_edges(1, &[]).unwrap();
        let a = normalize_adjacency(&t);
        let x = Matrix::from_vec(1, 2, vec![1.0, -2.0]).unwrap();
        assert_eq!(gcn_forward(&a, &x, &Matrix::identity(2)).unwrap().as_slice(), &[1.0, 0.0]);

        let t = generate_ba(10, 2, 1).unwrap();
        let x = Matrix::from_fn(10, 3, |r, c| pseudo(r, c, 0.1));
        let h = gcn_forward(&normalize_adjacency(&t), &x, &Matrix::zeros(3, 4)).unwrap();
        assert!(h.as_slice().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn gcn_matches_dense_oracle() {
        let t = Topology::from_edges(4, &[(0, 1), (1, 2), (1, 3), (2, 3)]).unwrap();
        let x = Matrix::from_fn(4, 3, |r, c| pseudo(r, c, 0.4));
        let w = Matrix::from_fn(3, 5, |r, c| pseudo(r, c, 2.0));
        // dense Â built independently from degree counts
        let deg: Vec<f64> = (0..4).map(|v| t.degree(v) as f64 + 1.0).collect();
        let a_hat = Matrix::from_fn(4, 4, |r, c| {
            if r == c || t.has_edge(r, c) {
                1.0 / (deg[r] * deg[c]).sqrt()
            } else {
                0.0
            }
        });
        let mut expected = a_hat.matmul(&x).unwrap().matmul(&w).unwrap();
        expected.relu_in_place();
        let h = gcn_forward(&normalize_adjacency(&t), &x, &w).unwrap();
        for (a, b) in h.as_slice().iter().zip(expected.as_slice()) {
            assert!(rel_close(*a, *b, 1e-12), "{a} vs {b}");
        }
    }

    #[test]
    fn sage_closed_forms() {
        let t = Topology::from_edges(1, &[]).unwrap();
        let x = Matrix::from_vec(1, 2, vec![3.0, -1.0]).unwrap();
        let h = sage_forward(&t, &x, &Matrix::identity(2), &Matrix::identity(2)).unwrap();
        assert_eq!(h.as_slice(), &[3.0, 0.0]);

        let k2 = Topology::from_edges(2, &[(0, 1)]).unwrap();
        let x = Matrix::from_vec(2, 2, vec![0.7, -0.2, 0.7, -0.2]).unwrap();
        let ws = Matrix::from_fn(2, 3, |r, c| pseudo(r, c, 1.0));
        let wn = Matrix::from_fn(2, 3, |r, c| pseudo(r, c, 5.0));
        let mut sum = ws.clone();
        sum.add_assign(&wn).unwrap();
        let mut expected = Matrix::from_vec(1, 2, vec![0.7, -0.2]).unwrap().matmul(&sum).unwrap();
        expected.relu_in_place();
        let h = sage_forward(&k2, &x, &ws, &wn).unwrap();
        for v in 0..2 {
            for (a, b) in h.row(v).iter().zip(expected.row(0)) {
                assert!((a - b).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn sage_matches_naive_loop() {
        let t = Topology::from_edges(5, &[(0, 1), (0, 2), (2, 3), (1, 2)]).unwrap();
        let x = Matrix::from_fn(5, 3, |r, c| pseudo(r, c, 0.9));
        let ws = Matrix::from_fn(3, 4, |r, c| pseudo(r, c, 3.0));
        let wn = Matrix::from_fn(3, 4, |r, c| pseudo(r, c, 7.0));
        let h = sage_forward(&t, &x, &ws, &wn).unwrap();
        for v in 0..5 {
            let nbrs: Vec<usize> = (0..5).filter(|&u| t.has_edge(v, u)).collect();
            for j in 0..4 {
                let mut acc = 0.0;
                for i in 0..3 {
                    acc += ws[(i, j)] * x[(v, i)];
                }
                if !nbrs.is_empty() {
                    for i in 0..3 {
                        let mean: f64 = nbrs.iter().map(|&u| x[(u, i)]).sum::<f64>() / nbrs.len() as f64;
                        acc += wn[(i, j)] * mean;
                    }
                }
                let expected = acc.max(0.0);
                assert!((h[(v, j)] - expected).abs() <= 1e-12 * expected.abs().max(1.0));
            }
        }
    }

    #[test]
    fn gat_isolated_and_uniform() {
        let t = Topology::from_edges(1, &[]).unwrap();
        let x = Matrix::from_vec(1, 2, vec![0.5, -1.5]).unwrap();
        let w = Matrix::from_fn(2, 3, |r, c| pseudo(r, c, 0.3));
        let attn = Matrix::from_fn(1, 6, |r, c| pseudo(r, c, 9.0));
        let (h, att) = gat_forward_with_attention(&t, &x, &w, &attn).unwrap();
        assert_eq!(att.row(0).collect::<Vec<_>>(), vec![(0, 1.0)]);
        let mut expected = x.matmul(&w).unwrap();
        expected.relu_in_place();
        assert_eq!(h, expected);

        let t = generate_ba(12, 2, 4).unwrap();
        let x = Matrix::from_fn(12, 2, |r, c| pseudo(r, c, 0.1));
        let (_, att) = gat_forward_with_attention(&t, &x, &w, &Matrix::zeros(1, 6)).unwrap();
        for v in 0..12 {
            let expected = 1.0 / (t.degree(v) as f64 + 1.0);
            for (_, a) in att.row(v) {
                assert!((a - expected).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn gat_matches_naive_oracle() {
        let t = Topology::from_edges(4, &[(0, 1), (0, 2), (0, 3), (2, 3)]).unwrap();
        let x = Matrix::from_fn(4, 3, |r, c| pseudo(r, c, 1.7));
        let w = Matrix::from_fn(3, 2, |r, c| pseudo(r, c, 0.2));
        let attn = Matrix::from_fn(1, 4, |r, c| pseudo(r, c, 4.4));
        let (h, att) = gat_forward_with_attention(&t, &x, &w, &attn).unwrap();
        let wx = |v: usize| -> [f64; 2] {
            let mut o = [0.0; 2];
            for (j, oj) in o.iter_mut().enumerate() {
                for i in 0..3 {
                    *oj += x[(v, i)] * w[(i, j)];
                }
            }
            o
        };
        for v in 0..4 {
            let hood: Vec<usize> = (0..4).filter(|&u| u == v || t.has_edge(v, u)).collect();
            let logits: Vec<f64> = hood
                .iter()
                .map(|&u| {
                    let (zv, zu) = (wx(v), wx(u));
                    let e = attn[(0, 0)] * zv[0] + attn[(0, 1)] * zv[1] + attn[(0, 2)] * zu[0] + attn[(0, 3)] * zu[1];
                    if e > 0.0 { e } else { 0.2 * e }
                })
                .collect();
            let denom: f64 = logits.iter().map(|l| l.exp()).sum();
            let alphas: Vec<f64> = logits.iter().map(|l| l.exp() / denom).collect();
            assert!((att.row(v).map(|(_, a)| a).sum::<f64>() - 1.0).abs() < 1e-12);
            for j in 0..2 {
                let out: f64 = hood.iter().zip(&alphas).map(|(&u, a)| a * wx(u)[j]).sum();
                let expected = out.max(0.0);
                assert!(rel_close(h[(v, j)], expected, 1e-12) || (h[(v, j)] - expected).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn shape_errors() {
        let t = generate_ba(6, 2, 1).unwrap();
        let x = Matrix::zeros(6, 3);
        let w = Matrix::zeros(4, 2);
        assert!(matches!(gcn_forward(&normalize_adjacency(&t), &x, &w), Err(Error::Shape(_))));
        assert!(matches!(sage_forward(&t, &x, &w, &w), Err(Error::Shape(_))));
        assert!(matches!(
            gat_forward(&t, &x, &Matrix::zeros(3, 2), &Matrix::zeros(1, 3)),
            Err(Error::Shape(_))
        ));
    }
}
