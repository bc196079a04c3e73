//! Numerical laboratory for alloy-type random Schrödinger operators on
//! boxes and punctured boxes.
//!
//! The crate discretizes `H = -Δ + V_0 + λ Σ_k ω_k u(· - k)` with finite
//! differences, counts eigenvalues exactly through matrix inertia, and runs
//! the disorder-averaged experiments built on those counts.

// `!(x > 0.0)` is used deliberately so that NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// banded and triangular kernels read clearer with explicit indices
#![allow(clippy::needless_range_loop)]

pub mod disorder;
pub mod error;
pub mod estimators;
pub mod grid;
pub mod localization;
pub mod spectra;

pub use error::{Error, Result};

/// Seed used by shipped configurations when none is given.
pub const DEFAULT_SEED: u64 = 20_160_817;
