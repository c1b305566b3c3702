use dsgnn_core::BatchMap;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// [`BatchMap`] over a dedicated rayon pool. Results come back in index
/// order, so output does not depend on the worker count.
pub struct Rayon {
    pool: rayon::ThreadPool,
}

impl Rayon {
    /// `None` uses every available core.
    pub fn new(workers: Option<usize>) -> Result<Self> {
        if workers == Some(0) {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers.unwrap_or(0))
            .build()
            .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
        Ok(Rayon { pool })
    }

    pub fn workers(&self) -> usize {
        self.pool.current_num_threads()
    }
}

impl BatchMap for Rayon {
    fn map_indexed<R, F>(&self, len: usize, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync + Send,
    {
        self.pool.install(|| (0..len).into_par_iter().map(f).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use dsgnn_core::Sequential;

    #[test]
    fn order_matches_sequential() {
        let pool = Rayon::new(Some(4)).unwrap();
        assert_eq!(pool.workers(), 4);
        let f = |i: usize| (i * 31 % 7, i);
        assert_eq!(pool.map_indexed(1000, f), Sequential.map_indexed(1000, f));
        assert!(Rayon::new(Some(0)).is_err());
    }
}
