//! Criterion benchmarks for the `flagzoom` kernels; see `benches/`.
