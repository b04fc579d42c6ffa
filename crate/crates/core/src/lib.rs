//! Pooled and distributed estimation of tail indices and extreme quantiles
//! across several heavy-tailed samples.
//!
//! The crate is organised bottom-up:
//!
//! * [`tail`]: Hill and Weissman estimators and second-order parameters for
//!   one sample.
//! * [`dependence`]: the empirical tail copula between two co-observed samples.
//! * [`pooling`]: weighted combination of marginal fits (naive,
//!   variance-optimal, AMSE-optimal, bias-reduced) and pooled quantiles.
//! * [`inference`]: homogeneity and homoskedasticity tests, confidence
//!   intervals.
//! * [`distributed`]: aggregation from per-machine summaries only.
//! * [`filtering`]: pooling on externally supplied residuals.
//! * [`simulation`]: generative models and the Monte Carlo harness.
//! * [`numerics`]: the special functions the above need.
//! * [`analysis`], [`io`]: in-memory pipelines and file formats used by the
//!   command-line tool.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod dependence;
pub mod distributed;
pub mod error;
pub mod filtering;
pub mod inference;
pub mod io;
pub mod linalg;
pub mod numerics;
pub mod parallel;
pub mod pooling;
pub mod simulation;
pub mod tail;

pub use error::{Error, Result};
pub use nalgebra::{DMatrix, DVector};
