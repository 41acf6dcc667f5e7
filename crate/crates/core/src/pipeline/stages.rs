use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::observation::{
    MappingLabel, MappingSet, RedundancyGrouping, ScopeVoteRecord, SourceSet,
};

use super::labels::{group_label, LabelCounts};
use super::{MergeConfig, PipelineError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Raw,
    NoOutOfScope,
    NoRedundancy,
}

impl Stage {
    pub const ALL: [Stage; 3] = [Stage::Raw, Stage::NoOutOfScope, Stage::NoRedundancy];

    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Raw => "raw",
            Stage::NoOutOfScope => "no_out_of_scope",
            Stage::NoRedundancy => "no_redundancy",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            Stage::Raw => "Raw Score",
            Stage::NoOutOfScope => "No ∉S",
            Stage::NoRedundancy => "No Redundancy",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.title())
    }
}

/// A counted unit after a stage: either a single item or a collapsed group.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResolvedItem {
    pub id: String,
    pub label: MappingLabel,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub members: Vec<String>,
    /// Every member label was excluded and the full multiset was used.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub flagged_for_review: bool,
}

/// One side (E or T) of one stage.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SideResult {
    pub side: SourceSet,
    pub counts: LabelCounts,
    pub items: Vec<ResolvedItem>,
}

impl SideResult {
    fn from_items(side: SourceSet, items: Vec<ResolvedItem>) -> Self {
        SideResult {
            side,
            counts: LabelCounts::from_labels(items.iter().map(|i| i.label)),
            items,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageResult {
    pub stage: Stage,
    pub e: SideResult,
    pub t: SideResult,
}

impl StageResult {
    pub fn side(&self, side: SourceSet) -> &SideResult {
        match side {
            SourceSet::E => &self.e,
            SourceSet::T => &self.t,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExclusionReason {
    /// The item sits in more than one redundancy group.
    MultipleGroups { groups: usize },
    /// The item references at least `limit` secondary items.
    BroadLink { refs: usize, limit: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exclusion {
    pub item: String,
    pub reasons: Vec<ExclusionReason>,
}

/// Why a unit ended a stage with its label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AuditReason {
    /// Label as assigned by the labeler.
    Mapped,
    NoVote,
    /// Majority voted in scope; labeler's in-scope label kept.
    VotedInScope {
        in_scope_votes: usize,
    },
    /// Majority voted out of scope.
    VotedOutOfScope {
        in_scope_votes: usize,
    },
    /// Majority voted in scope but the labeler's ∉S stands.
    LabelerOutOfScopeKept {
        in_scope_votes: usize,
    },
    Ungrouped,
    Merged {
        members: Vec<String>,
        contributing: Vec<String>,
        excluded: Vec<Exclusion>,
        fallback: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditEntry {
    pub stage: Stage,
    pub side: SourceSet,
    pub item: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub previous: Option<MappingLabel>,
    pub label: MappingLabel,
    pub reason: AuditReason,
}

/// Label tallies over all counted primary items.
pub fn raw_counts(mapping: &MappingSet) -> LabelCounts {
    LabelCounts::from_labels(mapping.counted_records().map(|r| r.label))
}

pub(crate) fn resolved_side(mapping: &MappingSet) -> SideResult {
    SideResult::from_items(
        mapping.primary_set(),
        mapping
            .counted_records()
            .map(|r| ResolvedItem {
                id: r.primary_item.clone(),
                label: r.label,
                members: vec![],
                flagged_for_review: false,
            })
            .collect(),
    )
}

pub(crate) fn raw_audit(mapping: &MappingSet) -> Vec<AuditEntry> {
    mapping
        .counted_records()
        .map(|r| AuditEntry {
            stage: Stage::Raw,
            side: mapping.primary_set(),
            item: r.primary_item.clone(),
            previous: None,
            label: r.label,
            reason: AuditReason::Mapped,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScopeVoteOutcome {
    pub mapping: MappingSet,
    pub audit: Vec<AuditEntry>,
}

/// Applies the three-rater scope vote. An item ends out of scope iff the
/// majority voted it out or the labeler already labelled it ∉S; otherwise it
/// keeps the labeler's label.
pub fn apply_scope_votes(
    mapping: &MappingSet,
    votes: &[ScopeVoteRecord],
) -> Result<ScopeVoteOutcome, PipelineError> {
    let mut by_item: HashMap<&str, &ScopeVoteRecord> = HashMap::with_capacity(votes.len());
    for vote in votes {
        if mapping.record(&vote.item_id).is_none() {
            return Err(PipelineError::UnknownItem {
                context: "votes",
                id: vote.item_id.clone(),
            });
        }
        by_item.insert(vote.item_id.as_str(), vote);
    }

    let mut out = mapping.clone();
    let mut audit = Vec::with_capacity(mapping.len());
    for record in mapping.counted_records() {
        let labeler = record.label;
        let (label, reason) = match by_item.get(record.primary_item.as_str()) {
            None => (labeler, AuditReason::NoVote),
            Some(v) => {
                let in_scope_votes = v.in_scope_votes();
                match (labeler, v.majority_in_scope()) {
                    (MappingLabel::OutOfScope, true) => (
                        MappingLabel::OutOfScope,
                        AuditReason::LabelerOutOfScopeKept { in_scope_votes },
                    ),
                    (_, false) => (
                        MappingLabel::OutOfScope,
                        AuditReason::VotedOutOfScope { in_scope_votes },
                    ),
                    (l, true) => (l, AuditReason::VotedInScope { in_scope_votes }),
                }
            }
        };
        if label != labeler {
            out.relabel(&record.primary_item, label);
        }
        audit.push(AuditEntry {
            stage: Stage::NoOutOfScope,
            side: mapping.primary_set(),
            item: record.primary_item.clone(),
            previous: Some(labeler),
            label,
            reason,
        });
    }
    Ok(ScopeVoteOutcome {
        mapping: out,
        audit,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MergeOutcome {
    pub side: SideResult,
    pub audit: Vec<AuditEntry>,
}

/// Collapses every redundancy group into one unit.
///
/// A member's label is left out of its group's resolution when the member
/// sits in several groups or references at least the broad-link limit of
/// secondary items. If that leaves nothing, the full multiset is used and the
/// group is flagged. Ungrouped items pass through.
pub fn merge_redundant(
    mapping: &MappingSet,
    grouping: &RedundancyGrouping,
    config: &MergeConfig,
) -> Result<MergeOutcome, PipelineError> {
    config.validate()?;
    if grouping.dataset != mapping.primary_set() {
        return Err(PipelineError::Contract(format!(
            "grouping is for {} but the mapping's primary set is {}",
            grouping.dataset,
            mapping.primary_set()
        )));
    }
    let limit = config.broad_link_limit(mapping.secondary_size());

    let mut membership: HashMap<&str, Vec<usize>> = HashMap::new();
    for (g, group) in grouping.groups.iter().enumerate() {
        if group.is_empty() {
            return Err(PipelineError::Contract(format!("group {} is empty", g + 1)));
        }
        for id in group {
            if mapping.record(id).is_none() {
                return Err(PipelineError::UnknownItem {
                    context: "grouping",
                    id: id.clone(),
                });
            }
            if mapping.is_excluded(id) {
                return Err(PipelineError::Contract(format!(
                    "group {} contains excluded item `{id}`",
                    g + 1
                )));
            }
            let entry = membership.entry(id.as_str()).or_default();
            if !entry.contains(&g) {
                entry.push(g);
            }
        }
    }

    let mut resolved_groups = Vec::with_capacity(grouping.groups.len());
    for (g, group) in grouping.groups.iter().enumerate() {
        let mut contributing = Vec::new();
        let mut excluded = Vec::new();
        for id in group {
            let record = mapping.record(id).expect("checked above");
            let mut reasons = Vec::new();
            let groups = membership[id.as_str()].len();
            if groups > 1 {
                reasons.push(ExclusionReason::MultipleGroups { groups });
            }
            if record.secondary_refs.len() >= limit {
                reasons.push(ExclusionReason::BroadLink {
                    refs: record.secondary_refs.len(),
                    limit,
                });
            }
            if reasons.is_empty() {
                contributing.push(id.clone());
            } else {
                excluded.push(Exclusion {
                    item: id.clone(),
                    reasons,
                });
            }
        }
        let fallback = contributing.is_empty();
        let voters: &[String] = if fallback { group } else { &contributing };
        let labels: Vec<MappingLabel> = voters
            .iter()
            .map(|id| mapping.record(id).expect("checked").label)
            .collect();
        let label = group_label(&labels)?;
        resolved_groups.push((
            ResolvedItem {
                id: format!("group-{}", g + 1),
                label,
                members: group.clone(),
                flagged_for_review: fallback,
            },
            AuditReason::Merged {
                members: group.clone(),
                contributing,
                excluded,
                fallback,
            },
        ));
    }

    // units in record order; a group appears where its earliest member does
    let mut items = Vec::new();
    let mut audit = Vec::new();
    let mut emitted = HashSet::new();
    let side = mapping.primary_set();
    for record in mapping.counted_records() {
        match membership.get(record.primary_item.as_str()) {
            None => {
                items.push(ResolvedItem {
                    id: record.primary_item.clone(),
                    label: record.label,
                    members: vec![],
                    flagged_for_review: false,
                });
                audit.push(AuditEntry {
                    stage: Stage::NoRedundancy,
                    side,
                    item: record.primary_item.clone(),
                    previous: Some(record.label),
                    label: record.label,
                    reason: AuditReason::Ungrouped,
                });
            }
            Some(groups) => {
                for &g in groups {
                    if emitted.insert(g) {
                        let (item, reason) = resolved_groups[g].clone();
                        audit.push(AuditEntry {
                            stage: Stage::NoRedundancy,
                            side,
                            item: item.id.clone(),
                            previous: None,
                            label: item.label,
                            reason,
                        });
                        items.push(item);
                    }
                }
            }
        }
    }

    Ok(MergeOutcome {
        side: SideResult::from_items(side, items),
        audit,
    })
}
