//! Link scheduling for device-to-device networks by classifying graph
//! embeddings of links on the manifold of symmetric positive definite
//! matrices.
//!
//! - [`sim`]: network layouts, path loss, fading, and the sum-rate objective
//! - [`spd`]: SPD matrices, matrix logarithms, the log-Euclidean metric, and
//!   the Gaussian kernel on it
//! - [`embed`]: per-link graph Laplacian embeddings into SPD matrices
//! - [`sched`]: exhaustive and heuristic activation baselines
//! - [`svm`]: SMO training, bandwidth cross validation, model persistence,
//!   and schedule prediction
//! - [`harness`]: dataset files, the benchmark pipeline, and CSV reports
//! - [`cli`]: the `gksched` command-line front end

// validation guards use negated comparisons on purpose: !(x > 0.0) rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod embed;
pub mod error;
pub mod harness;
pub mod sched;
pub mod sim;
pub mod spd;
pub mod svm;

pub use error::{Error, Result};
