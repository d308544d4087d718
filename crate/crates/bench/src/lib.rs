//! Benchmark-only crate; see `benches/pricing.rs` and `benches/solve.rs`.
