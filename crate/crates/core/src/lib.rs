//! Robust estimation of sparse Gaussian parameters under Huber contamination.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod acceptance;
pub mod baselines;
pub mod bench;
pub mod contamination;
pub mod error;
pub mod filter;
pub mod goodness;
pub mod io;
pub mod linalg;
pub mod mean;
pub mod oracle;
pub mod pca;
pub mod regression;
pub mod rng;

pub use error::{Error, Result};
