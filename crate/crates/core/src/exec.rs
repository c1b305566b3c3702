//! Pluggable execution for embarrassingly parallel maps.
//!
//! The core runs everything through [`BatchMap`]. Implementations must return
//! results in input order so reductions downstream stay deterministic.

use alloc::vec::Vec;

pub trait BatchMap: Sync {
    fn map_indexed<R, F>(&self, len: usize, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync + Send;
}

/// Runs every item on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl BatchMap for Sequential {
    fn map_indexed<R, F>(&self, len: usize, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync + Send,
    {
        (0..len).map(f).collect()
    }
}
