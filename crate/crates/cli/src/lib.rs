//! Pipeline orchestration: configuration ingestion, staged execution with
//! artifact persistence, and reporting.
//!
//! Stages run in order: collect, synthesize, ism design, compose, simulate,
//! verify. A failed composition retries data collection with a fresh seed
//! and a longer horizon (and walks the decay-rate/weight grids) up to a
//! retry budget before reporting failure. Identical subsystems share one
//! collection and one solve by default; every artifact records the hashes
//! of its inputs.

pub mod config;
pub mod pipeline;
pub mod report;

pub use config::{IsmMode, IsmSection, PipelineConfig, SynthesisSection, VerifySection};
pub use pipeline::{run_pipeline, PipelineOptions, PipelineRun};
pub use report::{render_table, Summary};

/// Process exit codes: usage or configuration errors are 1, infeasible
/// synthesis or composition is 2, verification failures are 3.
pub fn exit_code_for(err: &netism::Error) -> i32 {
    match err {
        netism::Error::Infeasible { .. } | netism::Error::CompositionInfeasible { .. } => 2,
        netism::Error::Validation(_)
        | netism::Error::Provenance { .. }
        | netism::Error::Divergence { .. } => 3,
        _ => 1,
    }
}
