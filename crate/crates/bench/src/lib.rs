//! Criterion benchmarks for the capsym kernels; see `benches/kernels.rs`.
