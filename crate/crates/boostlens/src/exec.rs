use boostlens_core::Executor;
use rayon::prelude::*;

/// Rayon-backed executor on a private pool. Results come back in index
/// order, so output does not depend on the worker count.
pub struct Threads {
    pool: rayon::ThreadPool,
}

impl Threads {
    /// `threads == 0` lets rayon pick (one per core).
    pub fn new(threads: usize) -> Result<Self, rayon::ThreadPoolBuildError> {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build()?;
        Ok(Self { pool })
    }

    pub fn workers(&self) -> usize {
        self.pool.current_num_threads()
    }
}

impl Executor for Threads {
    fn map<T, F>(&self, len: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        self.pool
            .install(|| (0..len).into_par_iter().map(&f).collect())
    }
}
