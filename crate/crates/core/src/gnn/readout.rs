use alloc::vec;
use alloc::vec::Vec;

use rand::Rng as _;

use super::matrix::Matrix;
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

/// Numerically stable softmax of one row.
pub fn softmax(x: &[f64]) -> Vec<f64> {
    let max = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = x.iter().map(|&v| libm::exp(v - max)).collect();
    let total: f64 = out.iter().sum();
    for o in &mut out {
        *o /= total;
    }
    out
}

/// Graph-level vector: softmax over each node's embedding, averaged over nodes.
pub fn pool_softmax_mean(h: &Matrix) -> Result<(Vec<f64>, Matrix)> {
    if h.rows() == 0 {
        return Err(Error::input("cannot read out an empty graph"));
    }
    let mut node_softmax = Matrix::zeros(h.rows(), h.cols());
    let mut pooled = vec![0.0; h.cols()];
    for v in 0..h.rows() {
        let s = softmax(h.row(v));
        for (p, &x) in pooled.iter_mut().zip(&s) {
            *p += x;
        }
        node_softmax.row_mut(v).copy_from_slice(&s);
    }
    let inv = 1.0 / h.rows() as f64;
    for p in &mut pooled {
        *p *= inv;
    }
    Ok((pooled, node_softmax))
}

/// Fully connected head: `pooled · w + b` with `w: d x 2`, `b: 1 x 2`.
pub fn head_logits(pooled: &[f64], w: &Matrix, b: &Matrix) -> Result<[f64; 2]> {
    if w.rows() != pooled.len() || w.cols() != 2 || b.shape() != (1, 2) {
        return Err(Error::shape(alloc::format!(
            "head {:?} + {:?} for a {}-dim pooled vector",
            w.shape(),
            b.shape(),
            pooled.len()
        )));
    }
    let mut logits = [b[(0, 0)], b[(0, 1)]];
    for (i, &p) in pooled.iter().enumerate() {
        logits[0] += p * w[(i, 0)];
        logits[1] += p * w[(i, 1)];
    }
    Ok(logits)
}

/// Softmax-mean readout followed by the head.
pub fn readout_classify(h: &Matrix, head_w: &Matrix, head_b: &Matrix) -> Result<[f64; 2]> {
    let (pooled, _) = pool_softmax_mean(h)?;
    head_logits(&pooled, head_w, head_b)
}

/// Negative log-probability of `label` under `softmax(logits)`.
pub fn cross_entropy(logits: &[f64; 2], label: usize) -> f64 {
    let max = logits[0].max(logits[1]);
    let lse = max + libm::log(libm::exp(logits[0] - max) + libm::exp(logits[1] - max));
    lse - logits[label]
}

/// Inverted dropout. Returns the output and the per-element multiplier
/// (0 or `1 / (1 - p)`) so the backward pass can replay it.
pub fn apply_dropout(h: &Matrix, p: f64, seed: u64, training: bool) -> Result<(Matrix, Option<Vec<f64>>)> {
    if !(0.0..1.0).contains(&p) {
        return Err(Error::params(alloc::format!("dropout probability {p} outside [0, 1)")));
    }
    if !training || p == 0.0 {
        return Ok((h.clone(), None));
    }
    let keep_scale = 1.0 / (1.0 - p);
    let mut rng = rng_from_seed(seed);
    let mask: Vec<f64> = (0..h.as_slice().len())
        .map(|_| if rng.random::<f64>() < p { 0.0 } else { keep_scale })
        .collect();
    let mut out = h.clone();
    for (o, m) in out.as_mut_slice().iter_mut().zip(&mask) {
        *o *= m;
    }
    Ok((out, Some(mask)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_readout() {
        let h = Matrix::zeros(1, 2);
        let (pooled, _) = pool_softmax_mean(&h).unwrap();
        assert_eq!(pooled, vec![0.5, 0.5]);
        let logits = readout_classify(&h, &Matrix::identity(2), &Matrix::zeros(1, 2)).unwrap();
        assert_eq!(logits, [0.5, 0.5]);
    }

    #[test]
    fn bias_only_head() {
        let h = Matrix::from_fn(7, 4, |r, c| (r as f64 - c as f64) * 0.3);
        let b = Matrix::from_vec(1, 2, vec![1.25, -3.5]).unwrap();
        assert_eq!(readout_classify(&h, &Matrix::zeros(4, 2), &b).unwrap(), [1.25, -3.5]);
    }

    #[test]
    fn opposite_embeddings_pool_to_half() {
        let e1 = 1.0f64.exp() / (1.0f64.exp() + (-1.0f64).exp());
        assert!((e1 - 0.8808).abs() < 1e-4);
        let h = Matrix::from_vec(2, 2, vec![1.0, -1.0, -1.0, 1.0]).unwrap();
        let (pooled, soft) = pool_softmax_mean(&h).unwrap();
        assert!((soft[(0, 0)] - e1).abs() < 1e-15);
        assert!((soft[(0, 1)] - (1.0 - e1)).abs() < 1e-15);
        assert!((pooled[0] - 0.5).abs() < 1e-15 && (pooled[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn empty_graph_rejected() {
        assert!(matches!(pool_softmax_mean(&Matrix::zeros(0, 3)), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn cross_entropy_values() {
        assert!((cross_entropy(&[0.0, 0.0], 0) - 2f64.ln()).abs() < 1e-15);
        assert!((cross_entropy(&[0.0, 0.0], 1) - 2f64.ln()).abs() < 1e-15);
        let tiny = cross_entropy(&[100.0, -100.0], 0);
        assert!(tiny.is_finite() && (0.0..1e-80).contains(&tiny));
        let expected = (1.0 + (-2.0f64).exp()).ln();
        assert!((cross_entropy(&[1.0, 3.0], 1) - expected).abs() < 1e-15);
        assert!((expected - 0.1269).abs() < 1e-4);
    }

    #[test]
    fn dropout_modes() {
        let h = Matrix::from_fn(3, 3, |r, c| (r * 3 + c) as f64);
        assert_eq!(apply_dropout(&h, 0.0, 1, true).unwrap().0, h);
        assert_eq!(apply_dropout(&h, 0.9, 1, false).unwrap().0, h);
        assert!(matches!(apply_dropout(&h, 1.0, 1, true), Err(Error::InvalidParameters(_))));

        let ones = Matrix::from_vec(1, 1_000_000, vec![1.0; 1_000_000]).unwrap();
        let (out, _) = apply_dropout(&ones, 0.5, 77, true).unwrap();
        let mean = out.as_slice().iter().sum::<f64>() / 1e6;
        assert!((mean - 1.0).abs() < 0.01, "{mean}");
    }
}
