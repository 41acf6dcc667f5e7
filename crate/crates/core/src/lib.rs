//! Deontic ethics knowledge bases and the expert-versus-KB comparison
//! pipeline.
//!
//! - [`kb`]: decision trees whose leaves carry deontic verdicts.
//! - [`observation`]: observation datasets, mapping labels, votes, groupings.
//! - [`pipeline`]: raw / no-out-of-scope / no-redundancy scoring and metrics.
//! - [`report`]: text, CSV and JSON renderings of the metrics table.

pub mod kb;
pub mod observation;
pub mod pipeline;
pub mod report;
pub mod sigfig;

pub use kb::{DeonticVerdict, KbError, KbTree, PathStatement, Provenance};
pub use observation::{Dataset, MappingLabel, MappingSet, ObservationError, SourceSet};
pub use pipeline::{
    run_pipeline, Bundle, LabelCounts, MergeConfig, MetricsTable, PipelineError, Stage,
};
