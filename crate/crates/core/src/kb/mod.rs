//! Deontic decision-tree knowledge bases: loading, validation, provenance
//! filtering and path rendering.

mod document;
mod tree;
mod verdict;

use std::collections::BTreeSet;

use thiserror::Error;

pub use document::{
    validate_tree, BranchDocument, KbDocument, LeafDocument, NodeDocument, Provenance, Violation,
};
pub use tree::{
    load_tree, load_tree_file, validate_json, Branch, KbLeaf, KbNode, KbTree, PathSegment,
    PathStatement, ANSWER_PLACEHOLDER,
};
pub use verdict::{resolve_verdict, DeonticVerdict};

#[derive(Debug, Error)]
pub enum KbError {
    #[error("malformed KB document: {0}")]
    Parse(serde_json::Error),
    #[error("invalid KB tree: {}", join_violations(.0))]
    Validation(Vec<Violation>),
    #[error("unknown leaf `{0}`")]
    UnknownLeaf(String),
    #[error("no leaf survives the provenance filter")]
    EmptyResult,
    #[error("cannot read {path}: {cause}")]
    Io { path: String, cause: std::io::Error },
}

fn join_violations(v: &[Violation]) -> String {
    v.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

pub fn render_path(tree: &KbTree, leaf_id: &str) -> Result<PathStatement, KbError> {
    tree.render_path(leaf_id)
}

pub fn enumerate_leaves(
    tree: &KbTree,
    verdict_filter: Option<DeonticVerdict>,
) -> Vec<PathStatement> {
    tree.enumerate_leaves(verdict_filter)
}

pub fn filter_by_provenance(
    tree: &KbTree,
    allowed: &BTreeSet<Provenance>,
) -> Result<KbTree, KbError> {
    tree.filter_by_provenance(allowed)
}
