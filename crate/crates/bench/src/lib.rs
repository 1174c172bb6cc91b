//! Criterion benchmarks for the spectral kernels live in `benches/`.
