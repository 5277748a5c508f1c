//! Numerical core for Wilson's intrinsic square function and the Morrey-type
//! norm inequalities it satisfies.
//!
//! Everything here is pure computation on uniform grids in one or two
//! dimensions, so the crate is `no_std` and only needs `alloc`. File formats,
//! the command-line tool and the thread pool live in the `sqfn` crate.
//!
//! Module map:
//!
//! - [`grid`]: grids, sampled functions, balls, regions and node quadrature.
//! - [`weights`]: weight diagnostics (`A_p`, `A_1`, doubling, `A_∞` fits,
//!   the Hardy–Littlewood maximal function).
//! - [`morrey`]: weighted Lebesgue, weighted Morrey and generalized Morrey
//!   norms, strong and weak.
//! - [`lipopt`]: the discretized Hölder test class as a polytope and the
//!   dense simplex solver that maximizes pairings over it.
//! - [`intrinsic`]: `A_α`, `S_α`, the vector-valued square function and the
//!   far-field majorant.
//! - [`verifier`]: scenario generation and the inequality ratio harness.
#![cfg_attr(not(test), no_std)]
#![forbid(unsafe_code)]
// `!(x > 0.0)` is the NaN-rejecting form used throughout.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

mod error;
pub mod exec;
pub mod grid;
pub mod intrinsic;
pub mod lipopt;
mod math;
pub mod morrey;
pub mod verifier;
pub mod weights;

pub use error::{Error, Result};
pub use exec::{Executor, Sequential};
pub use grid::{Ball, FunctionFamily, Grid, GridFunction, Point, Region};
