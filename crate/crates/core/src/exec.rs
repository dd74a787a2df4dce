//! Sequential or data-parallel evaluation of independent work items.
//!
//! Results are always written to fixed positions, so the output does not
//! depend on the number of workers. Without the `parallel` feature the
//! parallel mode silently runs sequentially.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Environment variable that caps the worker count.
pub const THREADS_ENV: &str = "ECHO2D_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// Fill `data` row by row, calling `f(row_index, row)`.
    pub fn fill_rows<T, F>(self, data: &mut [T], row_len: usize, f: F)
    where
        T: Send,
        F: Fn(usize, &mut [T]) + Sync + Send,
    {
        assert!(row_len > 0 && data.len().is_multiple_of(row_len));
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => {
                use rayon::prelude::*;
                data.par_chunks_mut(row_len)
                    .enumerate()
                    .for_each(|(i, row)| f(i, row));
            }
            _ => data
                .chunks_mut(row_len)
                .enumerate()
                .for_each(|(i, row)| f(i, row)),
        }
    }

    /// Order-preserving map.
    pub fn map<T, U, F>(self, items: &[T], f: F) -> Vec<U>
    where
        T: Sync,
        U: Send,
        F: Fn(&T) -> U + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => {
                use rayon::prelude::*;
                items.par_iter().map(f).collect()
            }
            _ => items.iter().map(f).collect(),
        }
    }
}

/// Worker cap from `ECHO2D_THREADS`, if set.
pub fn threads_from_env() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(Error::Config(format!("{THREADS_ENV}: {e}"))),
        Ok(v) => parse_threads(&v).map(Some),
    }
}

fn parse_threads(v: &str) -> Result<usize> {
    match v.trim().parse::<usize>() {
        Ok(n) if n > 0 => Ok(n),
        _ => Err(Error::Config(format!(
            "{THREADS_ENV} must be a positive integer, got {v:?}"
        ))),
    }
}

/// Size the global worker pool. Has no effect without the `parallel`
/// feature, or if the pool was already initialised.
pub fn init_thread_pool(threads: Option<usize>) {
    #[cfg(feature = "parallel")]
    if let Some(n) = threads {
        // a second initialisation attempt is harmless and ignored
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    #[cfg(not(feature = "parallel"))]
    let _ = threads;
}
