//! Thread-count selection and cooperative cancellation for the row-parallel
//! samplers. Output never depends on which of these is chosen.

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Parallelism {
    /// Plain single-threaded loop, no thread pool involved.
    Serial,
    /// A dedicated pool with this many workers.
    Threads(usize),
    /// Rayon's global pool (hardware parallelism).
    #[default]
    Global,
}

impl Parallelism {
    /// `1` means serial, anything else a dedicated pool; `None` the global pool.
    pub fn from_threads(threads: Option<usize>) -> Self {
        match threads {
            Some(0) | None => Parallelism::Global,
            Some(1) => Parallelism::Serial,
            Some(n) => Parallelism::Threads(n),
        }
    }
}

/// Applies `f` to consecutive `chunk`-sized pieces of `data` (the last may be
/// shorter) and sums the per-chunk counts. The first error wins.
pub(crate) fn map_chunks<T, F>(parallelism: Parallelism, data: &mut [T], chunk: usize, f: F) -> Result<u64>
where
    T: Send,
    F: Fn(usize, &mut [T]) -> Result<u64> + Sync,
{
    let par = |data: &mut [T]| {
        data.par_chunks_mut(chunk)
            .enumerate()
            .map(|(idx, piece)| f(idx, piece))
            .try_reduce(|| 0, |a, b| Ok(a + b))
    };
    match parallelism {
        Parallelism::Serial => data
            .chunks_mut(chunk)
            .enumerate()
            .map(|(idx, piece)| f(idx, piece))
            .sum(),
        Parallelism::Global => par(data),
        Parallelism::Threads(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::ThreadPool(e.to_string()))?;
            pool.install(|| par(data))
        }
    }
}

/// Shared flag checked between rows.
#[derive(Debug, Clone, Default)]
pub struct CancelToken(Arc<AtomicBool>);

impl CancelToken {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn cancel(&self) {
        self.0.store(true, Ordering::Relaxed);
    }

    pub fn is_cancelled(&self) -> bool {
        self.0.load(Ordering::Relaxed)
    }
}
