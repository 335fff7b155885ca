//! Hybrid-parallel reinforcement learning for active flow control.

// `!(x > 0.0)` rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
mod binio;
pub mod cli;
pub mod config;
pub mod coupling;
pub mod env;
pub mod error;
pub mod orchestrator;
pub mod ppo;
pub mod rng;

pub use error::{Error, Result};
