//! Sumudu neural operator.
//!
//! Signals are decomposed by least-squares polynomial regression on a
//! normalized grid; the monomial coefficients are scaled by `n!` (the Sumudu
//! image of a power series), mixed across channels by learnable per-mode
//! matrices, mapped back and re-evaluated on any grid spanning the same
//! domain.
//!
//! Layout:
//! - [`polycore`]: grids, Vandermonde regression, Sumudu coefficient maps.
//! - [`nn`]: tensors, a small reverse-mode tape, Adam, relative L2 loss,
//!   named-tensor archives.
//! - [`model`]: the operator network and checkpoints.
//! - [`datagen`]: ODE/PDE benchmark data.
//! - [`trainer`]: normalization and the training loop.
//! - [`evalbench`]: metrics, zero-shot super-resolution, FFT baseline and
//!   timing harness.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod datagen;
pub mod error;
pub mod evalbench;
pub mod model;
pub mod nn;
pub mod polycore;
pub mod trainer;

pub use error::{Error, Result};
