//! Graph classification by fragment embeddings, optimal-transport distances
//! and metric-distribution features.

pub mod classify;
pub mod dataset;
pub mod embed;
pub mod error;
pub mod harness;
pub mod metric;
pub mod mining;
pub mod ot;
mod par;

pub use par::current_num_threads;

pub use error::{Error, Result};
