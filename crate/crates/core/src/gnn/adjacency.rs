use alloc::vec::Vec;

use super::matrix::{axpy, Matrix};
use crate::error::{Error, Result};
use crate::topology::Topology;

/// Sparse symmetric matrix `D̂^{-1/2} (A + I) D̂^{-1/2}` in CSR form.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedAdjacency {
    n: usize,
    offsets: Vec<usize>,
    cols: Vec<u32>,
    values: Vec<f64>,
}

pub fn normalize_adjacency(t: &Topology) -> NormalizedAdjacency {
    let n = t.node_count();
    let inv_sqrt: Vec<f64> = (0..n)
        .map(|v| 1.0 / libm::sqrt((t.degree(v) + 1) as f64))
        .collect();
    let mut offsets = Vec::with_capacity(n + 1);
    let mut cols = Vec::with_capacity(n + 2 * t.edge_count());
    let mut values = Vec::with_capacity(cols.capacity());
    offsets.push(0);
    for v in 0..n {
        // self-loop first, then neighbors in ascending order
        cols.push(v as u32);
        values.push(inv_sqrt[v] * inv_sqrt[v]);
        for &u in t.neighbors(v) {
            cols.push(u);
            values.push(inv_sqrt[v] * inv_sqrt[u as usize]);
        }
        offsets.push(cols.len());
    }
    NormalizedAdjacency {
        n,
        offsets,
        cols,
        values,
    }
}

impl NormalizedAdjacency {
    pub fn size(&self) -> usize {
        self.n
    }

    /// Stored entries of row `r` as `(column, value)` pairs.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.offsets[r]..self.offsets[r + 1];
        self.cols[span.clone()]
            .iter()
            .zip(&self.values[span])
            .map(|(&c, &v)| (c as usize, v))
    }

    /// Entry `(r, c)`; accumulates if the pair is stored more than once.
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.row(r).filter(|&(cc, _)| cc == c).map(|(_, v)| v).sum()
    }

    /// `self * x`
    pub fn mul_dense(&self, x: &Matrix) -> Result<Matrix> {
        if x.rows() != self.n {
            return Err(Error::shape(alloc::format!(
                "adjacency {n}x{n} times {:?}",
                x.shape(),
                n = self.n
            )));
        }
        let mut out = Matrix::zeros(self.n, x.cols());
        for r in 0..self.n {
            let span = self.offsets[r]..self.offsets[r + 1];
            let o = out.row_mut(r);
            for (&c, &w) in self.cols[span.clone()].iter().zip(&self.values[span]) {
                axpy(o, w, x.row(c as usize));
            }
        }
        Ok(out)
    }
}
