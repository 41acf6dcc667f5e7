use std::collections::BTreeSet;
use std::fmt;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

/// Which analysis produced a dataset: the expert critique (`E`) or the
/// knowledge-base tool (`T`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SourceSet {
    E,
    T,
}

impl SourceSet {
    pub fn other(self) -> SourceSet {
        match self {
            SourceSet::E => SourceSet::T,
            SourceSet::T => SourceSet::E,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SourceSet::E => "E",
            SourceSet::T => "T",
        }
    }
}

impl fmt::Display for SourceSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

fn is_false(b: &bool) -> bool {
    !*b
}

/// One identifiable ethics point. Items are expected to be maximally
/// subdivided: one observation per item.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservationItem {
    pub id: String,
    pub source_set: SourceSet,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kb_leaf_ref: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent_id: Option<String>,
    /// Excluded items stay in the dataset for bookkeeping but are removed
    /// from every count.
    #[serde(default, skip_serializing_if = "is_false")]
    pub excluded: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub annotation: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Dataset {
    pub name: String,
    pub source_set: SourceSet,
    /// Identifier of the analysed research paper.
    pub subject_paper: String,
    /// The critique the items were transcribed from, when there is one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub critique: Option<String>,
    pub items: Vec<ObservationItem>,
}

impl Dataset {
    pub fn item(&self, id: &str) -> Option<&ObservationItem> {
        self.items.iter().find(|i| i.id == id)
    }

    pub fn contains(&self, id: &str) -> bool {
        self.items.iter().any(|i| i.id == id)
    }

    /// Number of items that take part in counting.
    pub fn counted_len(&self) -> usize {
        self.items.iter().filter(|i| !i.excluded).count()
    }

    pub fn excluded_ids(&self) -> BTreeSet<String> {
        self.items
            .iter()
            .filter(|i| i.excluded)
            .map(|i| i.id.clone())
            .collect()
    }
}

/// Label given by the labeler to a primary-set item relative to the
/// secondary set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MappingLabel {
    /// In scope with no counterpart in the secondary set (ℵ).
    Unique,
    /// Overlaps a secondary item and adds an articulable difference (+α).
    PlusAlpha,
    /// Overlaps a secondary item with no articulable difference (∅).
    Shared,
    /// Not about ethics (∉S).
    OutOfScope,
}

impl MappingLabel {
    pub const ALL: [MappingLabel; 4] = [
        MappingLabel::Unique,
        MappingLabel::PlusAlpha,
        MappingLabel::Shared,
        MappingLabel::OutOfScope,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            MappingLabel::Unique => "ℵ",
            MappingLabel::PlusAlpha => "+α",
            MappingLabel::Shared => "∅",
            MappingLabel::OutOfScope => "∉S",
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            MappingLabel::Unique => "unique",
            MappingLabel::PlusAlpha => "plus_alpha",
            MappingLabel::Shared => "shared",
            MappingLabel::OutOfScope => "out_of_scope",
        }
    }

    pub fn is_in_scope(self) -> bool {
        self != MappingLabel::OutOfScope
    }

    /// ℵ and +α award points; ∅ and ∉S do not.
    pub fn awards_points(self) -> bool {
        matches!(self, MappingLabel::Unique | MappingLabel::PlusAlpha)
    }
}

impl fmt::Display for MappingLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MappingRecord {
    pub primary_item: String,
    pub label: MappingLabel,
    #[serde(default)]
    pub secondary_refs: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rationale: Option<String>,
}

/// Wire form of a [`MappingSet`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MappingDocument {
    pub primary_set: SourceSet,
    pub secondary_set: SourceSet,
    pub records: Vec<MappingRecord>,
}

/// Labels for every item of a primary dataset, referencing a secondary one.
/// Built by [`super::load_mapping`], which checks totality and references.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MappingSet {
    pub(crate) primary_set: SourceSet,
    pub(crate) records: IndexMap<String, MappingRecord>,
    pub(crate) excluded: BTreeSet<String>,
    pub(crate) secondary_size: usize,
}

impl MappingSet {
    pub fn primary_set(&self) -> SourceSet {
        self.primary_set
    }

    pub fn secondary_set(&self) -> SourceSet {
        self.primary_set.other()
    }

    pub fn record(&self, id: &str) -> Option<&MappingRecord> {
        self.records.get(id)
    }

    /// All records in document order, excluded items included.
    pub fn records(&self) -> impl Iterator<Item = &MappingRecord> {
        self.records.values()
    }

    /// Records that take part in counting.
    pub fn counted_records(&self) -> impl Iterator<Item = &MappingRecord> {
        self.records
            .values()
            .filter(|r| !self.excluded.contains(&r.primary_item))
    }

    pub fn is_excluded(&self, id: &str) -> bool {
        self.excluded.contains(id)
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Counted size of the secondary dataset, used for broad-link thresholds.
    pub fn secondary_size(&self) -> usize {
        self.secondary_size
    }

    /// Replaces the label of an existing record. Returns the previous label.
    pub(crate) fn relabel(&mut self, id: &str, label: MappingLabel) -> Option<MappingLabel> {
        self.records
            .get_mut(id)
            .map(|r| std::mem::replace(&mut r.label, label))
    }

    pub fn to_document(&self) -> MappingDocument {
        MappingDocument {
            primary_set: self.primary_set,
            secondary_set: self.primary_set.other(),
            records: self.records.values().cloned().collect(),
        }
    }

    /// Builds a mapping set without a backing dataset. Intended for tests and
    /// generated data; every record is counted.
    pub fn from_records(
        primary_set: SourceSet,
        records: impl IntoIterator<Item = MappingRecord>,
        secondary_size: usize,
    ) -> Self {
        MappingSet {
            primary_set,
            records: records
                .into_iter()
                .map(|r| (r.primary_item.clone(), r))
                .collect(),
            excluded: BTreeSet::new(),
            secondary_size,
        }
    }
}

/// Three independent in-scope judgements for one item. `true` means in scope.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScopeVoteRecord {
    pub item_id: String,
    pub votes: [bool; 3],
}

impl ScopeVoteRecord {
    pub fn new(item_id: impl Into<String>, votes: [bool; 3]) -> Self {
        ScopeVoteRecord {
            item_id: item_id.into(),
            votes,
        }
    }

    pub fn in_scope_votes(&self) -> usize {
        self.votes.iter().filter(|v| **v).count()
    }

    /// Three voters, so the majority is always defined.
    pub fn majority_in_scope(&self) -> bool {
        self.in_scope_votes() >= 2
    }
}

/// Wire form of a vote list. `votes` is a list so that a wrong number of
/// votes surfaces as a contract error rather than a parse error.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VotesDocument {
    pub source_set: SourceSet,
    pub records: Vec<VoteRecordDocument>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VoteRecordDocument {
    pub item_id: String,
    pub votes: Vec<bool>,
}

/// Sets of same-dataset items that express one observation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RedundancyGrouping {
    pub dataset: SourceSet,
    pub groups: Vec<Vec<String>>,
}

impl RedundancyGrouping {
    pub fn empty(dataset: SourceSet) -> Self {
        RedundancyGrouping {
            dataset,
            groups: Vec::new(),
        }
    }
}
