//! Three-stage comparison of two observation sets: raw labels, after the
//! scope vote, and after collapsing redundant items.

mod config;
mod labels;
mod metrics;
mod run;
mod stages;

use thiserror::Error;

use crate::observation::ObservationError;

pub use config::{BroadLinkThreshold, MergeConfig};
pub use labels::{group_label, LabelCounts};
pub use metrics::{compute_metrics, Gains, MetricsComparison, MetricsRow, Ratios};
pub use run::{run_pipeline, Bundle, BundleManifest, MetricsTable, StageReport, MANIFEST_FILE};
pub use stages::{
    apply_scope_votes, merge_redundant, raw_counts, AuditEntry, AuditReason, Exclusion,
    ExclusionReason, MergeOutcome, ResolvedItem, ScopeVoteOutcome, SideResult, Stage, StageResult,
};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{context}: unknown item `{id}`")]
    UnknownItem { context: &'static str, id: String },
    #[error("cannot resolve the label of an empty group")]
    EmptyGroupLabels,
    #[error("{0}")]
    Contract(String),
    #[error("{0}")]
    InvalidConfig(String),
    #[error("{path}: {cause}")]
    Document {
        path: String,
        cause: ObservationError,
    },
    #[error("{path}: malformed bundle manifest: {cause}")]
    Manifest {
        path: String,
        cause: serde_json::Error,
    },
    #[error("cannot read {path}: {cause}")]
    Io { path: String, cause: std::io::Error },
}
