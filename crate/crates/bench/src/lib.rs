//! Criterion benchmarks for the waveqed pipeline; see `benches/`.
