//! Data-parallel map over independent work items, with a sequential path
//! that is always available and is the only one without the `parallel`
//! feature.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Execution {
    Sequential,
    /// Rayon pool; `workers = 0` means one thread per core.
    #[default]
    Parallel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Par {
    pub execution: Execution,
    pub workers: usize,
}

impl Par {
    pub const SEQUENTIAL: Par = Par { execution: Execution::Sequential, workers: 1 };

    pub fn new(execution: Execution, workers: usize) -> Self {
        Self { execution, workers }
    }

    pub fn is_parallel(&self) -> bool {
        cfg!(feature = "parallel") && self.execution == Execution::Parallel && self.workers != 1
    }

    /// `(0..n).map(f)` with results in index order regardless of execution mode.
    pub fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            use rayon::prelude::*;
            let run = || (0..n).into_par_iter().map(&f).collect();
            if self.workers == 0 {
                return run();
            }
            match rayon::ThreadPoolBuilder::new().num_threads(self.workers).build() {
                Ok(pool) => return pool.install(run),
                Err(_) => return (0..n).map(&f).collect(),
            }
        }
        (0..n).map(f).collect()
    }
}
