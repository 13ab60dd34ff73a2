// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod error;
pub mod fractal;
pub mod io;
pub mod metrics;
pub mod rng;
pub mod sim;
pub mod traffic;

pub use error::{Error, Result};
