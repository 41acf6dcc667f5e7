use serde::{Deserialize, Serialize};

use crate::observation::MappingLabel;

use super::PipelineError;

/// Per-kind label tallies for one side at one stage.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelCounts {
    pub unique: u64,
    pub plus_alpha: u64,
    pub shared: u64,
    pub out_of_scope: u64,
}

impl LabelCounts {
    pub fn new(unique: u64, plus_alpha: u64, shared: u64, out_of_scope: u64) -> Self {
        LabelCounts {
            unique,
            plus_alpha,
            shared,
            out_of_scope,
        }
    }

    pub fn from_labels<I: IntoIterator<Item = MappingLabel>>(labels: I) -> Self {
        let mut counts = LabelCounts::default();
        for label in labels {
            counts.add(label);
        }
        counts
    }

    pub fn add(&mut self, label: MappingLabel) {
        match label {
            MappingLabel::Unique => self.unique += 1,
            MappingLabel::PlusAlpha => self.plus_alpha += 1,
            MappingLabel::Shared => self.shared += 1,
            MappingLabel::OutOfScope => self.out_of_scope += 1,
        }
    }

    pub fn get(&self, label: MappingLabel) -> u64 {
        match label {
            MappingLabel::Unique => self.unique,
            MappingLabel::PlusAlpha => self.plus_alpha,
            MappingLabel::Shared => self.shared,
            MappingLabel::OutOfScope => self.out_of_scope,
        }
    }

    /// ∈S = ℵ + +α + ∅
    pub fn in_scope(&self) -> u64 {
        self.unique + self.plus_alpha + self.shared
    }

    /// G = ∈S + ∉S
    pub fn total(&self) -> u64 {
        self.in_scope() + self.out_of_scope
    }
}

/// Final label for a set of redundant items.
///
/// Resolution over the whole multiset, not a pairwise fold (the pairwise
/// algebra is not associative):
/// any +α wins; ℵ together with ∅ gives +α; then ∅; then ∉S; ℵ last.
pub fn group_label(labels: &[MappingLabel]) -> Result<MappingLabel, PipelineError> {
    if labels.is_empty() {
        return Err(PipelineError::EmptyGroupLabels);
    }
    let has = |l: MappingLabel| labels.contains(&l);
    let label = if has(MappingLabel::PlusAlpha)
        || (has(MappingLabel::Unique) && has(MappingLabel::Shared))
    {
        MappingLabel::PlusAlpha
    } else if has(MappingLabel::Shared) {
        MappingLabel::Shared
    } else if has(MappingLabel::OutOfScope) {
        MappingLabel::OutOfScope
    } else {
        MappingLabel::Unique
    };
    Ok(label)
}
