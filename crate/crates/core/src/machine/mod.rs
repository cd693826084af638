//! Functional executor and cycle-level timing model of the vector processor.

mod exec;
mod timing;

pub use exec::execute_functional;
pub use timing::{format_trace, simulate_timing, TraceEntry};
