//! Evaluation strategy for embarrassingly parallel loops.
//!
//! The core never spawns threads. Loops over cone cells and sample points go
//! through an [`Executor`]; results always come back in index order, and every
//! reduction over them is done sequentially by the caller, so the output does
//! not depend on the executor.

use alloc::vec::Vec;

pub trait Executor: Sync {
    /// Evaluates `f(0), …, f(len - 1)` and returns the values in index order.
    fn map(&self, len: usize, f: &(dyn Fn(usize) -> f64 + Sync)) -> Vec<f64>;
}

/// Runs everything on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn map(&self, len: usize, f: &(dyn Fn(usize) -> f64 + Sync)) -> Vec<f64> {
        (0..len).map(f).collect()
    }
}
