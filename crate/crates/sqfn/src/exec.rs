use rayon::prelude::*;
use rayon::{ThreadPool, ThreadPoolBuilder};
use sqfn_core::Executor;

/// Runs the core's parallel loops on a dedicated rayon pool.
pub struct Pool {
    pool: ThreadPool,
}

impl Pool {
    /// `jobs = None` uses every available core.
    pub fn new(jobs: Option<usize>) -> Result<Self, rayon::ThreadPoolBuildError> {
        let mut b = ThreadPoolBuilder::new();
        if let Some(j) = jobs {
            b = b.num_threads(j.max(1));
        }
        Ok(Self { pool: b.build()? })
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }
}

impl Executor for Pool {
    fn map(&self, len: usize, f: &(dyn Fn(usize) -> f64 + Sync)) -> Vec<f64> {
        self.pool
            .install(|| (0..len).into_par_iter().map(f).collect())
    }
}
