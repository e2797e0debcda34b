//! Benchmark-only crate: see `benches/core_paths.rs` for the criterion
//! benchmarks covering batch code lengths, sequential coding, change-point
//! detection, and the capacity oracles. There is no library surface.
