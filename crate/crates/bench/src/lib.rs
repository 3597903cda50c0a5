//! Benchmarks for manifold-ess live in `benches/`.
