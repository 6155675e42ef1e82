//! Research-group assessment: peer-review quality profiles, normalised
//! citation impact, size-scaled (absolute) measures, critical-mass size
//! classes and the correlation analysis that compares them.
//!
//! The pipeline runs `ingest` → `metrics` → `stats`, with `synth` producing
//! synthetic cohorts for the same analysis and `export` writing the results.

#[cfg(feature = "cli")]
pub mod cli;
pub mod export;
pub mod ingest;
pub mod metrics;
pub mod model;
pub mod stats;
pub mod synth;
