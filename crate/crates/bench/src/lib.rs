//! Criterion benchmarks for `gcirc-core`; see `benches/`.
