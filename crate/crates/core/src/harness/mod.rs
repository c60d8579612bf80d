pub mod config;
pub mod dataset;
pub mod run;
pub mod synth;

pub use config::{DataSpec, RunConfig, SchemeName, SchemeSpec, VerifySpec};
pub use dataset::{ingest, rank_truncate, Dataset, IngestOptions, SourceKind, Transform};
pub use synth::{generate, Generator};
