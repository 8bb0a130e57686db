//! Criterion benchmarks for the curvebound solvers; see `benches/solvers.rs`.
