//! Rule extraction from trained feedforward networks.
//!
//! The pipeline grows a three-layer network one hidden node at a time, prunes
//! connections and inputs by magnitude under an accuracy floor, discretizes the
//! hidden activations with a single-pass clustering, and extracts order
//! insensitive if-then rules with the REx covering algorithm.
//!
//! Modules follow the stages:
//!
//! - [`dataset`]: the four bundled benchmarks, normalization, splits, input bins
//! - [`network`]: tanh/logistic network with masks and backpropagation
//! - [`trainer`]: constructive growth and pruning with retraining
//! - [`clusterer`]: hidden-activation discretization
//! - [`rex`]: rule generation, pruning, default rule, layer merging
//! - [`pipeline`]: experiment configs, seeded runs, reports

// `!(x > 0.0)` is deliberate throughout validation: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod clusterer;
pub mod dataset;
pub mod error;
pub mod network;
pub mod pipeline;
pub mod rex;
pub mod trainer;

pub use error::{Error, Result};
