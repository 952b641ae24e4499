//! Heat-kernel embeddings of compact metric measure spaces.
//!
//! The crate evaluates spectral heat kernels with certified truncation, the
//! embeddings `x -> p(x, ., t)` into `L^2` and their finite-dimensional
//! truncations, and the pull-back metrics `g_t` together with the two
//! small-time rescalings and their limits. Model spaces (interval, circle,
//! flat torus) are exact; point clouds go through graph Laplacians.

// NaN-rejecting guards are written as `!(x > 0.0)` on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod embedding;
pub mod error;
pub mod graph;
pub mod heatkernel;
pub mod pullback;
pub mod quadrature;
pub mod registry;
pub mod spaces;
pub mod spectrum;

pub use error::{Error, Result};
