//! On-disk KB document schema and structural validation.
//!
//! A document is the JSON form of a tree before any invariant has been
//! checked. [`validate_tree`] is total: it reports every violation it can find
//! instead of stopping at the first one.

use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::verdict::DeonticVerdict;

/// Where a leaf's practice was sourced from.
///
/// A practice supported by both the literature and a standard is tagged
/// `Literature`; `Standards` means the leaf derives from standards alone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Literature,
    Standards,
}

impl Provenance {
    pub const ALL: [Provenance; 2] = [Provenance::Literature, Provenance::Standards];

    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Literature => "literature",
            Provenance::Standards => "standards",
        }
    }
}

impl std::str::FromStr for Provenance {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "literature" => Ok(Provenance::Literature),
            "standards" => Ok(Provenance::Standards),
            other => Err(format!("unknown provenance `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KbDocument {
    pub name: String,
    pub version: String,
    pub root: String,
    #[serde(default)]
    pub nodes: Vec<NodeDocument>,
    #[serde(default)]
    pub leaves: Vec<LeafDocument>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeDocument {
    pub id: String,
    pub question: String,
    #[serde(default)]
    pub branches: Vec<BranchDocument>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BranchDocument {
    pub answer: String,
    pub child: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LeafDocument {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdict: Option<DeonticVerdict>,
    pub statement: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
    #[serde(default)]
    pub refs: Vec<String>,
}

/// A broken tree invariant, naming the offending id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum Violation {
    UnknownRoot {
        id: String,
    },
    DuplicateId {
        id: String,
    },
    /// A node and a leaf share an id.
    IdCollision {
        id: String,
    },
    DuplicateBranch {
        node: String,
        answer: String,
    },
    EmptyBranches {
        node: String,
    },
    DanglingChild {
        node: String,
        child: String,
    },
    Cycle {
        node: String,
    },
    SharedChild {
        id: String,
        parents: Vec<String>,
    },
    /// A parentless node or leaf other than the declared root.
    MultipleRoots {
        id: String,
    },
    /// Has a parent, but no path from the root reaches it.
    Unreachable {
        id: String,
    },
    MissingVerdict {
        leaf: String,
    },
    MissingProvenance {
        leaf: String,
    },
}

impl Violation {
    pub fn rule(&self) -> &'static str {
        match self {
            Violation::UnknownRoot { .. } => "unknown_root",
            Violation::DuplicateId { .. } => "duplicate_id",
            Violation::IdCollision { .. } => "id_collision",
            Violation::DuplicateBranch { .. } => "duplicate_branch",
            Violation::EmptyBranches { .. } => "empty_branches",
            Violation::DanglingChild { .. } => "dangling_child",
            Violation::Cycle { .. } => "cycle",
            Violation::SharedChild { .. } => "shared_child",
            Violation::MultipleRoots { .. } => "multiple_roots",
            Violation::Unreachable { .. } => "unreachable",
            Violation::MissingVerdict { .. } => "missing_verdict",
            Violation::MissingProvenance { .. } => "missing_provenance",
        }
    }

    /// The id the violation is reported against.
    pub fn id(&self) -> &str {
        match self {
            Violation::UnknownRoot { id }
            | Violation::DuplicateId { id }
            | Violation::IdCollision { id }
            | Violation::SharedChild { id, .. }
            | Violation::MultipleRoots { id }
            | Violation::Unreachable { id } => id,
            Violation::DuplicateBranch { node, .. }
            | Violation::EmptyBranches { node }
            | Violation::DanglingChild { node, .. }
            | Violation::Cycle { node } => node,
            Violation::MissingVerdict { leaf } | Violation::MissingProvenance { leaf } => leaf,
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::UnknownRoot { id } => {
                write!(f, "{}: root `{id}` is not defined", self.rule())
            }
            Violation::DuplicateId { id } => {
                write!(f, "{}: `{id}` is defined more than once", self.rule())
            }
            Violation::IdCollision { id } => {
                write!(f, "{}: `{id}` is both a node and a leaf", self.rule())
            }
            Violation::DuplicateBranch { node, answer } => {
                write!(
                    f,
                    "{}: node `{node}` repeats answer \"{answer}\"",
                    self.rule()
                )
            }
            Violation::EmptyBranches { node } => {
                write!(f, "{}: node `{node}` has no branches", self.rule())
            }
            Violation::DanglingChild { node, child } => {
                write!(
                    f,
                    "{}: node `{node}` points at undefined `{child}`",
                    self.rule()
                )
            }
            Violation::Cycle { node } => write!(f, "{}: `{node}` is its own ancestor", self.rule()),
            Violation::SharedChild { id, parents } => {
                write!(
                    f,
                    "{}: `{id}` has several parents ({})",
                    self.rule(),
                    parents.join(", ")
                )
            }
            Violation::MultipleRoots { id } => {
                write!(
                    f,
                    "{}: `{id}` has no parent but is not the root",
                    self.rule()
                )
            }
            Violation::Unreachable { id } => {
                write!(f, "{}: `{id}` is not reachable from the root", self.rule())
            }
            Violation::MissingVerdict { leaf } => {
                write!(f, "{}: leaf `{leaf}` has no verdict", self.rule())
            }
            Violation::MissingProvenance { leaf } => {
                write!(f, "{}: leaf `{leaf}` has no provenance", self.rule())
            }
        }
    }
}

/// Checks every tree invariant on a document. Empty result means valid.
pub fn validate_tree(doc: &KbDocument) -> Vec<Violation> {
    let mut violations = Vec::new();

    let mut node_index: HashMap<&str, &NodeDocument> = HashMap::new();
    for node in &doc.nodes {
        if node_index.contains_key(node.id.as_str()) {
            violations.push(Violation::DuplicateId {
                id: node.id.clone(),
            });
        } else {
            node_index.insert(node.id.as_str(), node);
        }
    }
    let mut leaf_ids: HashSet<&str> = HashSet::new();
    for leaf in &doc.leaves {
        if !leaf_ids.insert(leaf.id.as_str()) {
            violations.push(Violation::DuplicateId {
                id: leaf.id.clone(),
            });
        } else if node_index.contains_key(leaf.id.as_str()) {
            violations.push(Violation::IdCollision {
                id: leaf.id.clone(),
            });
        }
    }
    let defined = |id: &str| node_index.contains_key(id) || leaf_ids.contains(id);

    if !defined(&doc.root) {
        violations.push(Violation::UnknownRoot {
            id: doc.root.clone(),
        });
    }

    // child id -> parent node ids, one entry per referencing branch
    let mut parents: HashMap<&str, Vec<&str>> = HashMap::new();
    let mut seen_nodes = HashSet::new();
    for node in &doc.nodes {
        if !seen_nodes.insert(node.id.as_str()) {
            continue;
        }
        if node.branches.is_empty() {
            violations.push(Violation::EmptyBranches {
                node: node.id.clone(),
            });
        }
        let mut answers = HashSet::new();
        for branch in &node.branches {
            if !answers.insert(branch.answer.as_str()) {
                violations.push(Violation::DuplicateBranch {
                    node: node.id.clone(),
                    answer: branch.answer.clone(),
                });
            }
            if !defined(&branch.child) {
                violations.push(Violation::DanglingChild {
                    node: node.id.clone(),
                    child: branch.child.clone(),
                });
                continue;
            }
            parents
                .entry(branch.child.as_str())
                .or_default()
                .push(node.id.as_str());
        }
    }

    let mut shared: Vec<(&str, &Vec<&str>)> = parents
        .iter()
        .filter(|(_, p)| p.len() > 1)
        .map(|(c, p)| (*c, p))
        .collect();
    shared.sort_by_key(|(c, _)| *c);
    for (child, ps) in shared {
        violations.push(Violation::SharedChild {
            id: child.to_string(),
            parents: ps.iter().map(|p| p.to_string()).collect(),
        });
    }

    violations.extend(find_cycles(doc, &node_index));

    if defined(&doc.root) {
        let reached = reachable(&doc.root, &node_index);
        let all_ids = doc
            .nodes
            .iter()
            .map(|n| n.id.as_str())
            .chain(doc.leaves.iter().map(|l| l.id.as_str()));
        let mut reported = HashSet::new();
        for id in all_ids {
            if id == doc.root || reached.contains(id) || !reported.insert(id) {
                continue;
            }
            if parents.contains_key(id) {
                violations.push(Violation::Unreachable { id: id.to_string() });
            } else {
                violations.push(Violation::MultipleRoots { id: id.to_string() });
            }
        }
    }

    for leaf in &doc.leaves {
        if leaf.verdict.is_none() {
            violations.push(Violation::MissingVerdict {
                leaf: leaf.id.clone(),
            });
        }
        if leaf.provenance.is_none() {
            violations.push(Violation::MissingProvenance {
                leaf: leaf.id.clone(),
            });
        }
    }

    violations
}

fn reachable<'a>(root: &'a str, nodes: &HashMap<&'a str, &'a NodeDocument>) -> HashSet<&'a str> {
    let mut seen = HashSet::from([root]);
    let mut stack = vec![root];
    while let Some(id) = stack.pop() {
        if let Some(node) = nodes.get(id) {
            for b in &node.branches {
                if seen.insert(b.child.as_str()) {
                    stack.push(b.child.as_str());
                }
            }
        }
    }
    seen
}

/// Iterative three-colour DFS over the node graph; one violation per node that
/// closes a back edge.
fn find_cycles(doc: &KbDocument, nodes: &HashMap<&str, &NodeDocument>) -> Vec<Violation> {
    #[derive(Clone, Copy, PartialEq)]
    enum Colour {
        White,
        Grey,
        Black,
    }
    let mut colour: HashMap<&str, Colour> = nodes.keys().map(|k| (*k, Colour::White)).collect();
    let mut found: Vec<String> = Vec::new();

    for start in doc.nodes.iter().map(|n| n.id.as_str()) {
        if colour[start] != Colour::White {
            continue;
        }
        let mut stack: Vec<(&str, usize)> = vec![(start, 0)];
        colour.insert(start, Colour::Grey);
        while let Some((id, next)) = stack.last_mut() {
            let node = nodes[*id];
            if *next == node.branches.len() {
                colour.insert(*id, Colour::Black);
                stack.pop();
                continue;
            }
            let child = node.branches[*next].child.as_str();
            *next += 1;
            match colour.get(child).copied() {
                Some(Colour::White) => {
                    colour.insert(child, Colour::Grey);
                    stack.push((child, 0));
                }
                Some(Colour::Grey) if !found.iter().any(|f| f == child) => {
                    found.push(child.to_string());
                }
                _ => {}
            }
        }
    }
    found
        .into_iter()
        .map(|node| Violation::Cycle { node })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn leaf(id: &str) -> LeafDocument {
        LeafDocument {
            id: id.into(),
            verdict: Some(DeonticVerdict::Permitted),
            statement: format!("Doing {id}"),
            provenance: Some(Provenance::Literature),
            refs: vec![],
        }
    }

    fn node(id: &str, branches: &[(&str, &str)]) -> NodeDocument {
        NodeDocument {
            id: id.into(),
            question: format!("{id}?"),
            branches: branches
                .iter()
                .map(|(a, c)| BranchDocument {
                    answer: (*a).into(),
                    child: (*c).into(),
                })
                .collect(),
        }
    }

    fn doc(root: &str, nodes: Vec<NodeDocument>, leaves: Vec<LeafDocument>) -> KbDocument {
        KbDocument {
            name: "t".into(),
            version: "1".into(),
            root: root.into(),
            nodes,
            leaves,
        }
    }

    #[test]
    fn valid_small_tree_has_no_violations() {
        let d = doc(
            "N1",
            vec![node("N1", &[("a", "L1"), ("b", "L2")])],
            vec![leaf("L1"), leaf("L2")],
        );
        assert!(validate_tree(&d).is_empty());
    }

    #[test]
    fn self_loop_is_a_cycle_only() {
        let d = doc(
            "N1",
            vec![node("N1", &[("again", "N1"), ("stop", "L1")])],
            vec![leaf("L1")],
        );
        assert_eq!(
            validate_tree(&d),
            vec![Violation::Cycle { node: "N1".into() }]
        );
    }

    #[test]
    fn detached_cycle_is_reported_with_unreachable_members() {
        let d = doc(
            "L0",
            vec![node("N1", &[("x", "N2")]), node("N2", &[("y", "N1")])],
            vec![leaf("L0")],
        );
        let v = validate_tree(&d);
        assert!(v.iter().any(|x| x.rule() == "cycle"));
        assert!(v.contains(&Violation::Unreachable { id: "N1".into() }));
        assert!(v.contains(&Violation::Unreachable { id: "N2".into() }));
    }

    #[test]
    fn duplicate_answer_slot_is_duplicate_branch() {
        let d = doc(
            "N1",
            vec![node("N1", &[("same", "L1"), ("same", "L2")])],
            vec![leaf("L1"), leaf("L2")],
        );
        assert_eq!(
            validate_tree(&d),
            vec![Violation::DuplicateBranch {
                node: "N1".into(),
                answer: "same".into()
            }]
        );
    }

    #[test]
    fn missing_provenance_is_named() {
        let mut l = leaf("L1");
        l.provenance = None;
        let d = doc("L1", vec![], vec![l]);
        assert_eq!(
            validate_tree(&d),
            vec![Violation::MissingProvenance { leaf: "L1".into() }]
        );
    }

    #[test]
    fn orphan_leaf_is_a_second_root() {
        let d = doc(
            "N1",
            vec![node("N1", &[("a", "L1")])],
            vec![leaf("L1"), leaf("L2")],
        );
        assert_eq!(
            validate_tree(&d),
            vec![Violation::MultipleRoots { id: "L2".into() }]
        );
    }

    #[test]
    fn shared_child_and_dangling_child() {
        let d = doc(
            "N1",
            vec![
                node("N1", &[("a", "N2"), ("b", "L1")]),
                node("N2", &[("c", "L1"), ("d", "L9")]),
            ],
            vec![leaf("L1")],
        );
        let v = validate_tree(&d);
        assert!(v.contains(&Violation::SharedChild {
            id: "L1".into(),
            parents: vec!["N1".into(), "N2".into()]
        }));
        assert!(v.contains(&Violation::DanglingChild {
            node: "N2".into(),
            child: "L9".into()
        }));
    }

    #[test]
    fn display_names_rule_and_id() {
        let v = Violation::Cycle { node: "N7".into() };
        let text = v.to_string();
        assert!(text.starts_with("cycle"));
        assert!(text.contains("N7"));
    }
}
