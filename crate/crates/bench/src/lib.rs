//! Criterion benchmarks for the ranking methods live in `benches/`.
