//! Walkthrough sessions as a pure state machine over one (filtered) tree.
//!
//! Every mutation is an [`SessionEvent`]; a session is the fold of its event
//! log, so the HTTP layer and the on-disk replay share one code path.

use std::collections::BTreeSet;

use chrono::{DateTime, Utc};
use ethkb_core::kb::{resolve_verdict, KbError, KbTree, PathStatement};
use ethkb_core::observation::{Dataset, ObservationItem, SourceSet};
use ethkb_core::{DeonticVerdict, Provenance};
use serde::{Deserialize, Serialize};

use crate::error::ServiceError;

pub const DEFAULT_SUBJECT_PAPER: &str = "unspecified";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrailStep {
    pub node_id: String,
    pub branch_index: usize,
    pub answer: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Finding {
    pub statement: PathStatement,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub annotation: Option<String>,
    pub recorded_at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Session {
    pub id: String,
    pub tree_id: String,
    pub tree_version: String,
    pub filter: BTreeSet<Provenance>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subject_paper: Option<String>,
    pub cursor: String,
    pub trail: Vec<TrailStep>,
    pub findings: Vec<Finding>,
    pub created_at: DateTime<Utc>,
    pub updated_at: DateTime<Utc>,
}

/// One line of a session log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum SessionEvent {
    Created {
        session_id: String,
        tree_id: String,
        tree_version: String,
        filter: BTreeSet<Provenance>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        subject_paper: Option<String>,
        at: DateTime<Utc>,
    },
    Answered {
        branch_index: usize,
        at: DateTime<Utc>,
    },
    SteppedBack {
        at: DateTime<Utc>,
    },
    FindingRecorded {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        annotation: Option<String>,
        at: DateTime<Utc>,
    },
}

/// Restricts `tree` to the allowed provenances.
pub fn filtered_tree(
    tree_id: &str,
    tree: &KbTree,
    filter: &BTreeSet<Provenance>,
) -> Result<KbTree, ServiceError> {
    tree.filter_by_provenance(filter).map_err(|e| match e {
        KbError::EmptyResult => ServiceError::EmptyFilter(tree_id.to_string()),
        other => ServiceError::InvalidTree {
            id: tree_id.to_string(),
            violations: vec![other.to_string()],
        },
    })
}

/// Walks `trail` from the root and returns the id it ends on.
pub fn replay_cursor(tree: &KbTree, trail: &[TrailStep]) -> Result<String, ServiceError> {
    let mut cursor = tree.root().to_string();
    for step in trail {
        let node = tree
            .node(&cursor)
            .ok_or_else(|| ServiceError::AtLeaf(cursor.clone()))?;
        if node.id != step.node_id {
            return Err(ServiceError::BadRequest(format!(
                "trail step at `{}` but cursor is `{cursor}`",
                step.node_id
            )));
        }
        let branch =
            node.branches
                .get(step.branch_index)
                .ok_or_else(|| ServiceError::InvalidBranch {
                    node: node.id.clone(),
                    index: step.branch_index,
                    count: node.branches.len(),
                })?;
        cursor = branch.child.clone();
    }
    Ok(cursor)
}

impl Session {
    /// Starts a session from its creation event. `tree` is the filtered tree.
    pub fn create(event: &SessionEvent, tree: &KbTree) -> Result<Session, ServiceError> {
        let SessionEvent::Created {
            session_id,
            tree_id,
            tree_version,
            filter,
            subject_paper,
            at,
        } = event
        else {
            return Err(ServiceError::BadRequest(
                "a session log must start with a creation event".into(),
            ));
        };
        Ok(Session {
            id: session_id.clone(),
            tree_id: tree_id.clone(),
            tree_version: tree_version.clone(),
            filter: filter.clone(),
            subject_paper: subject_paper.clone(),
            cursor: tree.root().to_string(),
            trail: Vec::new(),
            findings: Vec::new(),
            created_at: *at,
            updated_at: *at,
        })
    }

    /// Applies one mutation. On error the session is left untouched.
    pub fn apply(&mut self, tree: &KbTree, event: &SessionEvent) -> Result<(), ServiceError> {
        match event {
            SessionEvent::Created { .. } => {
                return Err(ServiceError::BadRequest("session already exists".into()));
            }
            SessionEvent::Answered { branch_index, .. } => {
                let node = tree
                    .node(&self.cursor)
                    .ok_or_else(|| ServiceError::AtLeaf(self.cursor.clone()))?;
                let branch = node.branches.get(*branch_index).ok_or_else(|| {
                    ServiceError::InvalidBranch {
                        node: node.id.clone(),
                        index: *branch_index,
                        count: node.branches.len(),
                    }
                })?;
                self.trail.push(TrailStep {
                    node_id: node.id.clone(),
                    branch_index: *branch_index,
                    answer: branch.answer_text.clone(),
                });
                self.cursor = branch.child.clone();
            }
            SessionEvent::SteppedBack { .. } => {
                let step = self.trail.pop().ok_or(ServiceError::AtRoot)?;
                self.cursor = step.node_id;
            }
            SessionEvent::FindingRecorded { annotation, at } => {
                if !tree.is_leaf(&self.cursor) {
                    return Err(ServiceError::NotAtLeaf(self.cursor.clone()));
                }
                if !self
                    .findings
                    .iter()
                    .any(|f| f.statement.leaf_id == self.cursor)
                {
                    let statement = tree
                        .render_path(&self.cursor)
                        .expect("cursor is a leaf of this tree");
                    self.findings.push(Finding {
                        statement,
                        annotation: annotation.clone(),
                        recorded_at: *at,
                    });
                }
            }
        }
        self.updated_at = event_time(event);
        Ok(())
    }

    /// Rebuilds a session from its full log.
    pub fn replay(tree: &KbTree, events: &[SessionEvent]) -> Result<Session, ServiceError> {
        let (first, rest) = events
            .split_first()
            .ok_or_else(|| ServiceError::BadRequest("empty session log".into()))?;
        let mut session = Session::create(first, tree)?;
        for event in rest {
            session.apply(tree, event)?;
        }
        Ok(session)
    }

    pub fn view(&self, tree: &KbTree) -> SessionView {
        let view = match tree.node(&self.cursor) {
            Some(node) => View::Question {
                node_id: node.id.clone(),
                question: node.question_text.clone(),
                branches: node
                    .branches
                    .iter()
                    .enumerate()
                    .map(|(index, b)| BranchView {
                        index,
                        answer: b.answer_text.clone(),
                    })
                    .collect(),
            },
            None => {
                let statement = tree
                    .render_path(&self.cursor)
                    .expect("cursor is a leaf of this tree");
                let resolved = resolve_verdict(statement.verdict);
                View::Verdict {
                    leaf_id: statement.leaf_id.clone(),
                    verdict: statement.verdict,
                    verdict_name: statement.verdict.display_name().to_string(),
                    resolution: resolution_text(&resolved),
                    resolved,
                    recorded: self
                        .findings
                        .iter()
                        .any(|f| f.statement.leaf_id == self.cursor),
                    statement,
                }
            }
        };
        SessionView {
            can_go_back: !self.trail.is_empty(),
            session: self.clone(),
            view,
        }
    }

    /// The findings as a T-side observation dataset, one item per leaf.
    pub fn export(&self) -> Dataset {
        Dataset {
            name: format!("walkthrough-{}", self.id),
            source_set: SourceSet::T,
            subject_paper: self
                .subject_paper
                .clone()
                .unwrap_or_else(|| DEFAULT_SUBJECT_PAPER.to_string()),
            critique: None,
            items: self
                .findings
                .iter()
                .enumerate()
                .map(|(i, f)| ObservationItem {
                    id: format!("T{}", i + 1),
                    source_set: SourceSet::T,
                    text: f.statement.rendered_text.clone(),
                    kb_leaf_ref: Some(f.statement.leaf_id.clone()),
                    parent_id: None,
                    excluded: false,
                    annotation: f.annotation.clone(),
                })
                .collect(),
        }
    }
}

fn event_time(event: &SessionEvent) -> DateTime<Utc> {
    match event {
        SessionEvent::Created { at, .. }
        | SessionEvent::Answered { at, .. }
        | SessionEvent::SteppedBack { at }
        | SessionEvent::FindingRecorded { at, .. } => *at,
    }
}

fn resolution_text(resolved: &BTreeSet<DeonticVerdict>) -> String {
    resolved
        .iter()
        .map(|v| v.display_name())
        .collect::<Vec<_>>()
        .join(" or ")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BranchView {
    pub index: usize,
    pub answer: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum View {
    Question {
        node_id: String,
        question: String,
        branches: Vec<BranchView>,
    },
    Verdict {
        leaf_id: String,
        verdict: DeonticVerdict,
        verdict_name: String,
        /// Settled verdicts this one can resolve to.
        resolved: BTreeSet<DeonticVerdict>,
        resolution: String,
        statement: PathStatement,
        recorded: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionView {
    pub session: Session,
    pub view: View,
    pub can_go_back: bool,
}

#[cfg(test)]
mod tests {
    use super::*;
    use ethkb_core::kb::load_tree;
    use ethkb_core::observation::{check_dataset, load_dataset};

    const MINI: &str = r#"{
        "name": "mini", "version": "1", "root": "q",
        "nodes": [
            {"id": "q", "question": "Does the action collect device identifiers?", "branches": [
                {"answer": "MAC addresses", "child": "mac"},
                {"answer": "More detail", "child": "q2"}
            ]},
            {"id": "q2", "question": "Which kind?", "branches": [
                {"answer": "Serial numbers", "child": "serial"},
                {"answer": "Nothing", "child": "none"}
            ]}
        ],
        "leaves": [
            {"id": "mac", "verdict": "gray", "statement": "Collecting {answer} of devices", "provenance": "literature", "refs": []},
            {"id": "serial", "verdict": "recommended", "statement": "Hashing {answer}", "provenance": "literature", "refs": []},
            {"id": "none", "verdict": "permitted", "statement": "Scanning without identifiers", "provenance": "literature", "refs": []}
        ]
    }"#;

    fn at(s: i64) -> DateTime<Utc> {
        DateTime::from_timestamp(s, 0).unwrap()
    }

    fn start(tree: &KbTree) -> Session {
        let created = SessionEvent::Created {
            session_id: "s1".into(),
            tree_id: "mini".into(),
            tree_version: "1".into(),
            filter: BTreeSet::from(Provenance::ALL),
            subject_paper: None,
            at: at(0),
        };
        Session::create(&created, tree).unwrap()
    }

    fn answer(i: usize) -> SessionEvent {
        SessionEvent::Answered {
            branch_index: i,
            at: at(1),
        }
    }

    #[test]
    fn new_session_is_at_root() {
        let tree = load_tree(MINI).unwrap();
        let s = start(&tree);
        assert_eq!(s.cursor, "q");
        assert!(
            matches!(s.view(&tree).view, View::Question { ref question, .. } if question.starts_with("Does"))
        );
    }

    #[test]
    fn answering_to_gray_leaf_shows_resolution() {
        let tree = load_tree(MINI).unwrap();
        let mut s = start(&tree);
        s.apply(&tree, &answer(0)).unwrap();
        let View::Verdict {
            statement,
            resolved,
            resolution,
            ..
        } = s.view(&tree).view
        else {
            panic!()
        };
        assert_eq!(
            statement.rendered_text,
            "Collecting MAC addresses of devices is a Gray action"
        );
        assert_eq!(
            resolved,
            BTreeSet::from([DeonticVerdict::Permitted, DeonticVerdict::Prohibited])
        );
        assert_eq!(resolution, "Permitted or Prohibited");
    }

    #[test]
    fn invalid_branch_and_at_leaf() {
        let tree = load_tree(MINI).unwrap();
        let mut s = start(&tree);
        assert!(matches!(
            s.apply(&tree, &answer(7)),
            Err(ServiceError::InvalidBranch { count: 2, .. })
        ));
        s.apply(&tree, &answer(0)).unwrap();
        assert!(matches!(
            s.apply(&tree, &answer(0)),
            Err(ServiceError::AtLeaf(_))
        ));
    }

    #[test]
    fn back_at_root_is_an_error_and_back_restores_view() {
        let tree = load_tree(MINI).unwrap();
        let mut s = start(&tree);
        let back = SessionEvent::SteppedBack { at: at(2) };
        assert!(matches!(s.apply(&tree, &back), Err(ServiceError::AtRoot)));
        s.apply(&tree, &answer(1)).unwrap();
        let first = s.view(&tree).view;
        s.apply(&tree, &back).unwrap();
        assert_eq!(s.cursor, "q");
        s.apply(&tree, &answer(1)).unwrap();
        assert_eq!(s.view(&tree).view, first);
    }

    #[test]
    fn findings_are_deduplicated_and_exported() {
        let tree = load_tree(MINI).unwrap();
        let mut s = start(&tree);
        let record = SessionEvent::FindingRecorded {
            annotation: None,
            at: at(3),
        };
        assert!(matches!(
            s.apply(&tree, &record),
            Err(ServiceError::NotAtLeaf(_))
        ));
        s.apply(&tree, &answer(0)).unwrap();
        s.apply(&tree, &record).unwrap();
        s.apply(&tree, &record).unwrap();
        s.apply(&tree, &SessionEvent::SteppedBack { at: at(4) })
            .unwrap();
        s.apply(&tree, &answer(1)).unwrap();
        s.apply(&tree, &answer(0)).unwrap();
        s.apply(&tree, &record).unwrap();
        let ds = s.export();
        assert_eq!(ds.items.len(), 2);
        assert_eq!(ds.items[1].text, "Hashing Serial numbers is Recommended");
        assert_eq!(ds.items[1].kb_leaf_ref.as_deref(), Some("serial"));
        check_dataset(&ds).unwrap();
        let text = serde_json::to_string(&ds).unwrap();
        assert_eq!(load_dataset(&text).unwrap(), ds);
    }

    #[test]
    fn empty_export_is_valid() {
        let tree = load_tree(MINI).unwrap();
        let ds = start(&tree).export();
        assert!(ds.items.is_empty());
        check_dataset(&ds).unwrap();
    }

    #[test]
    fn replay_reproduces_cursor() {
        let tree = load_tree(MINI).unwrap();
        let mut s = start(&tree);
        let mut log = vec![SessionEvent::Created {
            session_id: "s1".into(),
            tree_id: "mini".into(),
            tree_version: "1".into(),
            filter: BTreeSet::from(Provenance::ALL),
            subject_paper: None,
            at: at(0),
        }];
        for e in [
            answer(1),
            answer(0),
            SessionEvent::FindingRecorded {
                annotation: Some("note".into()),
                at: at(5),
            },
        ] {
            s.apply(&tree, &e).unwrap();
            log.push(e);
        }
        assert_eq!(Session::replay(&tree, &log).unwrap(), s);
        assert_eq!(replay_cursor(&tree, &s.trail).unwrap(), s.cursor);
    }
}
