#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod cnn;
pub mod config;
pub mod data;
pub mod device;
pub mod embedding;
pub mod error;
pub mod metrics;
pub mod model;
pub mod sampler;
pub mod seed;
pub mod sweep;
pub mod topology;
pub mod trainer;

pub use error::{Error, Result};
