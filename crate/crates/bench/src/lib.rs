//! Benchmark-only crate; the timed workloads live in `benches/`.
