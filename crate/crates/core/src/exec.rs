//! Data-parallel execution with a sequential fallback.
//!
//! Every parallel entry point in the crate takes an [`Executor`]. Work is
//! always split into index-addressed items whose results are written back in
//! index order, so the output never depends on the number of workers. When the
//! `parallel` feature is disabled every executor runs sequentially.

use std::fmt;
#[cfg(feature = "parallel")]
use std::sync::Arc;

#[derive(Clone)]
pub struct Executor {
    #[cfg(feature = "parallel")]
    pool: Option<Arc<rayon::ThreadPool>>,
    workers: usize,
}

impl fmt::Debug for Executor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Executor").field("workers", &self.workers).finish()
    }
}

impl Default for Executor {
    fn default() -> Self {
        Self::with_workers(0)
    }
}

impl Executor {
    pub fn sequential() -> Self {
        Executor {
            #[cfg(feature = "parallel")]
            pool: None,
            workers: 1,
        }
    }

    /// `0` uses every available core, `1` is sequential.
    pub fn with_workers(workers: usize) -> Self {
        #[cfg(feature = "parallel")]
        {
            let workers = if workers == 0 {
                std::thread::available_parallelism().map_or(1, |n| n.get())
            } else {
                workers
            };
            if workers <= 1 {
                return Self::sequential();
            }
            match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
                Ok(pool) => Executor { pool: Some(Arc::new(pool)), workers },
                Err(e) => {
                    log::warn!("thread pool unavailable ({e}); running sequentially");
                    Self::sequential()
                }
            }
        }
        #[cfg(not(feature = "parallel"))]
        {
            let _ = workers;
            Self::sequential()
        }
    }

    pub fn workers(&self) -> usize {
        self.workers
    }

    pub fn is_parallel(&self) -> bool {
        self.workers > 1
    }

    /// Evaluates `f(i)` for `i in 0..len` and returns the results in index order.
    pub fn map<T, F>(&self, len: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Send + Sync,
    {
        #[cfg(feature = "parallel")]
        if let Some(pool) = &self.pool {
            use rayon::prelude::*;
            return pool.install(|| (0..len).into_par_iter().map(&f).collect());
        }
        (0..len).map(f).collect()
    }

    /// Splits `out` into chunks of `chunk` items and calls `f(offset, chunk)` on each.
    pub fn for_each_chunk<T, F>(&self, out: &mut [T], chunk: usize, f: F)
    where
        T: Send,
        F: Fn(usize, &mut [T]) + Send + Sync,
    {
        let chunk = chunk.max(1);
        #[cfg(feature = "parallel")]
        if let Some(pool) = &self.pool {
            use rayon::prelude::*;
            pool.install(|| {
                out.par_chunks_mut(chunk)
                    .enumerate()
                    .for_each(|(i, c)| f(i * chunk, c))
            });
            return;
        }
        for (i, c) in out.chunks_mut(chunk).enumerate() {
            f(i * chunk, c);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_preserves_order() {
        for workers in [1, 2, 4] {
            let ex = Executor::with_workers(workers);
            let v = ex.map(1000, |i| i * i);
            assert!(v.iter().enumerate().all(|(i, &x)| x == i * i));
        }
    }

    #[test]
    fn chunks_cover_everything() {
        let ex = Executor::with_workers(3);
        let mut out = vec![0usize; 1001];
        ex.for_each_chunk(&mut out, 64, |off, c| {
            for (j, x) in c.iter_mut().enumerate() {
                *x = off + j;
            }
        });
        assert!(out.iter().enumerate().all(|(i, &x)| x == i));
    }
}
