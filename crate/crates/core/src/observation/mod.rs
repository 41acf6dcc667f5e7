//! Observation datasets, mapping labels, scope votes and redundancy
//! groupings, with cross-reference checked loaders.

mod types;

use std::collections::{HashMap, HashSet};

use serde::Serialize;
use thiserror::Error;

pub use types::{
    Dataset, MappingDocument, MappingLabel, MappingRecord, MappingSet, ObservationItem,
    RedundancyGrouping, ScopeVoteRecord, SourceSet, VoteRecordDocument, VotesDocument,
};

#[derive(Debug, Error)]
pub enum ObservationError {
    #[error("malformed {document} document: {cause}")]
    Parse {
        document: &'static str,
        cause: serde_json::Error,
    },
    #[error("{document}: unknown item `{id}`")]
    CrossRef { document: &'static str, id: String },
    #[error("{document}: {message}")]
    Contract {
        document: &'static str,
        message: String,
    },
}

impl ObservationError {
    fn contract(document: &'static str, message: impl Into<String>) -> Self {
        ObservationError::Contract {
            document,
            message: message.into(),
        }
    }
}

fn parse<T: serde::de::DeserializeOwned>(
    document: &'static str,
    json: &str,
) -> Result<T, ObservationError> {
    serde_json::from_str(json).map_err(|cause| ObservationError::Parse { document, cause })
}

pub fn load_dataset(json: &str) -> Result<Dataset, ObservationError> {
    let dataset: Dataset = parse("dataset", json)?;
    check_dataset(&dataset)?;
    Ok(dataset)
}

/// Checks the invariants [`load_dataset`] enforces on an in-memory dataset.
pub fn check_dataset(dataset: &Dataset) -> Result<(), ObservationError> {
    const DOC: &str = "dataset";
    let mut ids = HashSet::new();
    for item in &dataset.items {
        if !ids.insert(item.id.as_str()) {
            return Err(ObservationError::contract(
                DOC,
                format!("duplicate item id `{}`", item.id),
            ));
        }
        if item.source_set != dataset.source_set {
            return Err(ObservationError::contract(
                DOC,
                format!(
                    "item `{}` belongs to {} but the dataset is {}",
                    item.id, item.source_set, dataset.source_set
                ),
            ));
        }
        if item.kb_leaf_ref.is_some() && item.source_set != SourceSet::T {
            return Err(ObservationError::contract(
                DOC,
                format!("item `{}`: only T items may reference KB leaves", item.id),
            ));
        }
    }
    let parents: HashMap<&str, &str> = dataset
        .items
        .iter()
        .filter_map(|i| i.parent_id.as_deref().map(|p| (i.id.as_str(), p)))
        .collect();
    for (child, parent) in &parents {
        if !ids.contains(parent) {
            return Err(ObservationError::CrossRef {
                document: DOC,
                id: (*parent).to_string(),
            });
        }
        // walk up; a chain longer than the item count must revisit an item
        let mut cursor = *child;
        for _ in 0..=dataset.items.len() {
            match parents.get(cursor) {
                Some(p) if *p == *child => {
                    return Err(ObservationError::contract(
                        DOC,
                        format!("parent cycle through `{child}`"),
                    ));
                }
                Some(p) => cursor = p,
                None => break,
            }
        }
    }
    Ok(())
}

/// Loads a mapping from `primary` to `secondary`. Every primary item must
/// have exactly one record and every reference must name a secondary item.
pub fn load_mapping(
    json: &str,
    primary: &Dataset,
    secondary: &Dataset,
) -> Result<MappingSet, ObservationError> {
    let doc: MappingDocument = parse("mapping", json)?;
    mapping_from_document(doc, primary, secondary)
}

pub fn mapping_from_document(
    doc: MappingDocument,
    primary: &Dataset,
    secondary: &Dataset,
) -> Result<MappingSet, ObservationError> {
    const DOC: &str = "mapping";
    if doc.primary_set == doc.secondary_set {
        return Err(ObservationError::contract(
            DOC,
            "primary and secondary sets must differ",
        ));
    }
    if doc.primary_set != primary.source_set || doc.secondary_set != secondary.source_set {
        return Err(ObservationError::contract(
            DOC,
            format!(
                "mapping goes {}→{} but datasets are {}→{}",
                doc.primary_set, doc.secondary_set, primary.source_set, secondary.source_set
            ),
        ));
    }

    let mut records = indexmap::IndexMap::with_capacity(doc.records.len());
    for record in doc.records {
        if !primary.contains(&record.primary_item) {
            return Err(ObservationError::CrossRef {
                document: DOC,
                id: record.primary_item,
            });
        }
        check_record(&record)?;
        if let Some(bad) = record
            .secondary_refs
            .iter()
            .find(|r| !secondary.contains(r))
        {
            return Err(ObservationError::CrossRef {
                document: DOC,
                id: bad.clone(),
            });
        }
        if records.contains_key(&record.primary_item) {
            return Err(ObservationError::contract(
                DOC,
                format!("item `{}` has more than one record", record.primary_item),
            ));
        }
        records.insert(record.primary_item.clone(), record);
    }
    if let Some(missing) = primary.items.iter().find(|i| !records.contains_key(&i.id)) {
        return Err(ObservationError::contract(
            DOC,
            format!("item `{}` has no record", missing.id),
        ));
    }

    Ok(MappingSet {
        primary_set: doc.primary_set,
        records,
        excluded: primary.excluded_ids(),
        secondary_size: secondary.counted_len(),
    })
}

/// +α and ∅ must point at something in the secondary set; ℵ must not.
pub fn check_record(record: &MappingRecord) -> Result<(), ObservationError> {
    match record.label {
        MappingLabel::PlusAlpha | MappingLabel::Shared if record.secondary_refs.is_empty() => {
            Err(ObservationError::contract(
                "mapping",
                format!(
                    "item `{}` is labelled {} but references nothing",
                    record.primary_item, record.label
                ),
            ))
        }
        MappingLabel::Unique if !record.secondary_refs.is_empty() => {
            Err(ObservationError::contract(
                "mapping",
                format!(
                    "item `{}` is labelled ℵ but references secondary items",
                    record.primary_item
                ),
            ))
        }
        _ => Ok(()),
    }
}

pub fn load_votes(json: &str, dataset: &Dataset) -> Result<Vec<ScopeVoteRecord>, ObservationError> {
    const DOC: &str = "votes";
    let doc: VotesDocument = parse(DOC, json)?;
    if doc.source_set != dataset.source_set {
        return Err(ObservationError::contract(
            DOC,
            format!(
                "votes are for {} but the dataset is {}",
                doc.source_set, dataset.source_set
            ),
        ));
    }
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(doc.records.len());
    for record in doc.records {
        if !dataset.contains(&record.item_id) {
            return Err(ObservationError::CrossRef {
                document: DOC,
                id: record.item_id,
            });
        }
        if !seen.insert(record.item_id.clone()) {
            return Err(ObservationError::contract(
                DOC,
                format!("item `{}` is voted on twice", record.item_id),
            ));
        }
        let votes: [bool; 3] = record.votes.as_slice().try_into().map_err(|_| {
            ObservationError::contract(
                DOC,
                format!(
                    "item `{}` has {} votes, exactly 3 are required",
                    record.item_id,
                    record.votes.len()
                ),
            )
        })?;
        out.push(ScopeVoteRecord {
            item_id: record.item_id,
            votes,
        });
    }
    Ok(out)
}

pub fn votes_to_document(source_set: SourceSet, votes: &[ScopeVoteRecord]) -> VotesDocument {
    VotesDocument {
        source_set,
        records: votes
            .iter()
            .map(|v| VoteRecordDocument {
                item_id: v.item_id.clone(),
                votes: v.votes.to_vec(),
            })
            .collect(),
    }
}

pub fn load_grouping(
    json: &str,
    dataset: &Dataset,
) -> Result<RedundancyGrouping, ObservationError> {
    let grouping: RedundancyGrouping = parse("grouping", json)?;
    check_grouping(&grouping, dataset)?;
    Ok(grouping)
}

pub fn check_grouping(
    grouping: &RedundancyGrouping,
    dataset: &Dataset,
) -> Result<(), ObservationError> {
    const DOC: &str = "grouping";
    if grouping.dataset != dataset.source_set {
        return Err(ObservationError::contract(
            DOC,
            format!(
                "grouping is for {} but the dataset is {}",
                grouping.dataset, dataset.source_set
            ),
        ));
    }
    for (n, group) in grouping.groups.iter().enumerate() {
        if group.len() < 2 {
            return Err(ObservationError::contract(
                DOC,
                format!("group {} has fewer than 2 members", n + 1),
            ));
        }
        let mut members = HashSet::new();
        for id in group {
            let Some(item) = dataset.item(id) else {
                return Err(ObservationError::CrossRef {
                    document: DOC,
                    id: id.clone(),
                });
            };
            if item.excluded {
                return Err(ObservationError::contract(
                    DOC,
                    format!("group {} contains excluded item `{id}`", n + 1),
                ));
            }
            if !members.insert(id.as_str()) {
                return Err(ObservationError::contract(
                    DOC,
                    format!("group {} lists `{id}` twice", n + 1),
                ));
            }
        }
    }
    Ok(())
}

/// CSV rendering of a dataset with columns `id,source_set,text,parent_id`.
pub fn dataset_to_csv(dataset: &Dataset) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record(["id", "source_set", "text", "parent_id"])
        .expect("in-memory write");
    for item in &dataset.items {
        writer
            .write_record([
                item.id.as_str(),
                item.source_set.as_str(),
                item.text.as_str(),
                item.parent_id.as_deref().unwrap_or(""),
            ])
            .expect("in-memory write");
    }
    String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("utf-8 input")
}

/// A parent and all of its children carry point-awarding labels, a case the
/// flat labeling scheme counts twice.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HierarchyWarning {
    pub parent: String,
    pub children: Vec<String>,
}

/// Informational check: warns for every parent item that, together with all
/// of its children, is labelled ℵ or +α.
pub fn hierarchy_check(dataset: &Dataset, labels: &MappingSet) -> Vec<HierarchyWarning> {
    let scoring = |id: &str| {
        !labels.is_excluded(id) && labels.record(id).is_some_and(|r| r.label.awards_points())
    };
    let mut warnings = Vec::new();
    for parent in &dataset.items {
        let children: Vec<&str> = dataset
            .items
            .iter()
            .filter(|i| i.parent_id.as_deref() == Some(parent.id.as_str()) && !i.excluded)
            .map(|i| i.id.as_str())
            .collect();
        if children.is_empty() || !scoring(&parent.id) {
            continue;
        }
        if children.iter().all(|c| scoring(c)) {
            warnings.push(HierarchyWarning {
                parent: parent.id.clone(),
                children: children.into_iter().map(String::from).collect(),
            });
        }
    }
    warnings
}

#[cfg(test)]
mod tests {
    use super::*;

    fn item(id: &str, set: SourceSet, parent: Option<&str>) -> ObservationItem {
        ObservationItem {
            id: id.into(),
            source_set: set,
            text: format!("observation {id}"),
            kb_leaf_ref: None,
            parent_id: parent.map(String::from),
            excluded: false,
            annotation: None,
        }
    }

    fn dataset(set: SourceSet, items: Vec<ObservationItem>) -> Dataset {
        Dataset {
            name: "d".into(),
            source_set: set,
            subject_paper: "p".into(),
            critique: None,
            items,
        }
    }

    fn record(id: &str, label: MappingLabel, refs: &[&str]) -> MappingRecord {
        MappingRecord {
            primary_item: id.into(),
            label,
            secondary_refs: refs.iter().map(|s| s.to_string()).collect(),
            rationale: None,
        }
    }

    #[test]
    fn empty_dataset_is_valid() {
        let d = load_dataset(r#"{"name":"x","source_set":"T","subject_paper":"p","items":[]}"#)
            .unwrap();
        assert!(d.items.is_empty());
    }

    #[test]
    fn parent_cycle_is_rejected() {
        let d = dataset(
            SourceSet::E,
            vec![
                item("a", SourceSet::E, Some("b")),
                item("b", SourceSet::E, Some("a")),
            ],
        );
        assert!(matches!(
            check_dataset(&d),
            Err(ObservationError::Contract { .. })
        ));
    }

    #[test]
    fn unknown_parent_is_a_cross_ref_error() {
        let d = dataset(SourceSet::E, vec![item("a", SourceSet::E, Some("zz"))]);
        assert!(matches!(
            check_dataset(&d),
            Err(ObservationError::CrossRef { .. })
        ));
    }

    #[test]
    fn plus_alpha_without_refs_is_a_contract_error() {
        let e = dataset(SourceSet::E, vec![item("E1", SourceSet::E, None)]);
        let t = dataset(SourceSet::T, vec![item("T1", SourceSet::T, None)]);
        let json = r#"{"primary_set":"E","secondary_set":"T","records":[{"primary_item":"E1","label":"plus_alpha","secondary_refs":[]}]}"#;
        assert!(matches!(
            load_mapping(json, &e, &t),
            Err(ObservationError::Contract { .. })
        ));
    }

    #[test]
    fn mapping_must_cover_every_item_once() {
        let e = dataset(
            SourceSet::E,
            vec![
                item("E1", SourceSet::E, None),
                item("E2", SourceSet::E, None),
            ],
        );
        let t = dataset(SourceSet::T, vec![item("T1", SourceSet::T, None)]);
        let partial = r#"{"primary_set":"E","secondary_set":"T","records":[{"primary_item":"E1","label":"unique"}]}"#;
        assert!(matches!(
            load_mapping(partial, &e, &t),
            Err(ObservationError::Contract { .. })
        ));
        let bad_ref = r#"{"primary_set":"E","secondary_set":"T","records":[
            {"primary_item":"E1","label":"shared","secondary_refs":["T9"]},
            {"primary_item":"E2","label":"unique"}]}"#;
        assert!(matches!(
            load_mapping(bad_ref, &e, &t),
            Err(ObservationError::CrossRef { .. })
        ));
    }

    #[test]
    fn two_votes_is_a_contract_error() {
        let e = dataset(SourceSet::E, vec![item("E1", SourceSet::E, None)]);
        let json = r#"{"source_set":"E","records":[{"item_id":"E1","votes":[true,false]}]}"#;
        assert!(matches!(
            load_votes(json, &e),
            Err(ObservationError::Contract { .. })
        ));
        let json = r#"{"source_set":"E","records":[{"item_id":"E1","votes":[true,false,false]}]}"#;
        let votes = load_votes(json, &e).unwrap();
        assert!(!votes[0].majority_in_scope());
    }

    #[test]
    fn singleton_group_is_rejected() {
        let e = dataset(
            SourceSet::E,
            vec![
                item("E1", SourceSet::E, None),
                item("E2", SourceSet::E, None),
            ],
        );
        let json = r#"{"dataset":"E","groups":[["E1"]]}"#;
        assert!(matches!(
            load_grouping(json, &e),
            Err(ObservationError::Contract { .. })
        ));
        let json = r#"{"dataset":"E","groups":[["E1","E3"]]}"#;
        assert!(matches!(
            load_grouping(json, &e),
            Err(ObservationError::CrossRef { .. })
        ));
    }

    #[test]
    fn hierarchy_flat_dataset_has_no_warnings() {
        let e = dataset(SourceSet::E, vec![item("E1", SourceSet::E, None)]);
        let m =
            MappingSet::from_records(SourceSet::E, [record("E1", MappingLabel::Unique, &[])], 0);
        assert!(hierarchy_check(&e, &m).is_empty());
    }

    #[test]
    fn hierarchy_warns_when_parent_and_children_all_score() {
        let e = dataset(
            SourceSet::E,
            vec![
                item("P", SourceSet::E, None),
                item("C1", SourceSet::E, Some("P")),
                item("C2", SourceSet::E, Some("P")),
            ],
        );
        let all_unique = MappingSet::from_records(
            SourceSet::E,
            ["P", "C1", "C2"].map(|id| record(id, MappingLabel::Unique, &[])),
            0,
        );
        assert_eq!(
            hierarchy_check(&e, &all_unique),
            vec![HierarchyWarning {
                parent: "P".into(),
                children: vec!["C1".into(), "C2".into()]
            }]
        );

        let shared_parent = MappingSet::from_records(
            SourceSet::E,
            [
                record("P", MappingLabel::Shared, &["T1"]),
                record("C1", MappingLabel::Unique, &[]),
                record("C2", MappingLabel::Unique, &[]),
            ],
            1,
        );
        assert!(hierarchy_check(&e, &shared_parent).is_empty());
    }

    #[test]
    fn csv_export_quotes_text() {
        let mut d = dataset(
            SourceSet::T,
            vec![
                item("T1", SourceSet::T, None),
                item("T2", SourceSet::T, Some("T1")),
            ],
        );
        d.items[0].text = "Collecting data, \"quoted\"".into();
        let csv = dataset_to_csv(&d);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("id,source_set,text,parent_id"));
        assert_eq!(
            lines.next(),
            Some("T1,T,\"Collecting data, \"\"quoted\"\"\",")
        );
        assert_eq!(lines.next(), Some("T2,T,observation T2,T1"));
    }
}
