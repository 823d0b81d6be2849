//! Criterion benchmarks for the core library; see benches/core_ops.rs.
