//! Simulator and toolchain for a flexible-VRF vector processor running
//! GCN-style sparse–dense matrix multiplication.

pub mod config;
pub mod error;
pub mod experiment;
pub mod graph;
pub mod grow;
pub mod isa;
pub mod machine;
pub mod metrics;
pub mod preprocess;

pub use error::{Error, Result};
