//! Digital simulation of information-scrambling experiments.

// positivity checks are written as !(x > 0.0) so that NaN is rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod ensembles;
pub mod error;
pub mod floquet;
pub mod hpr;
pub mod noise;
pub mod otoc;
pub mod rng;
pub mod spectrum;
pub mod statevector;
pub mod tpq;

pub use error::{Error, Result};
