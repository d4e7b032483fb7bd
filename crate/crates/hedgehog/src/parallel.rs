//! Row-parallel escape fields.
//!
//! Rows are classified independently and assembled in order, so the result
//! does not depend on the thread count. `HEDGEHOG_THREADS` caps the pool.

use std::sync::OnceLock;

use hedgehog_core::compacta::{disk_engine, AdmissibleDomain, EscapeEngine, EscapeField, GridSpec, Region};
use hedgehog_core::{InverseMode, Real, TruncatedGerm};
use rayon::prelude::*;
use rayon::ThreadPool;

use crate::error::Result;

pub const THREADS_ENV: &str = "HEDGEHOG_THREADS";

fn pool() -> &'static ThreadPool {
    static POOL: OnceLock<ThreadPool> = OnceLock::new();
    POOL.get_or_init(|| {
        let threads = std::env::var(THREADS_ENV)
            .ok()
            .and_then(|s| s.trim().parse::<usize>().ok())
            .unwrap_or(0);
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("thread pool")
    })
}

pub fn field<T: Real, R: Region + Sync>(engine: &EscapeEngine<T, R>, grid: &GridSpec) -> Result<EscapeField> {
    let rows = pool().install(|| {
        (0..grid.resolution)
            .into_par_iter()
            .map(|row| engine.classify_row(grid, row))
            .collect::<Vec<_>>()
    });
    Ok(engine.assemble(grid, rows)?)
}

pub fn escape_field<T: Real>(
    f: &TruncatedGerm<T>,
    domain: &AdmissibleDomain,
    grid: &GridSpec,
    mode: InverseMode,
) -> Result<EscapeField> {
    field(&disk_engine(f, domain, grid, mode)?, grid)
}
