//! Deterministic fan-out over a fixed rayon pool.

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Runs closures either inline or on a dedicated rayon pool.
pub enum Executor {
    Inline,
    Pool(rayon::ThreadPool),
}

impl Executor {
    pub fn new(threads: usize) -> Result<Self> {
        if threads <= 1 {
            return Ok(Executor::Inline);
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map(Executor::Pool)
            .map_err(|e| Error::InvalidArgument(format!("cannot start thread pool: {e}")))
    }

    /// Applies `f` to every item, returning results in input order.
    pub fn map<T: Sync, R: Send>(&self, items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
        match self {
            Executor::Inline => items.iter().map(f).collect(),
            Executor::Pool(pool) => pool.install(|| items.par_iter().map(f).collect()),
        }
    }
}

