use std::collections::{BTreeSet, HashMap};
use std::path::Path;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::document::{
    BranchDocument, KbDocument, LeafDocument, NodeDocument, Provenance, Violation,
};
use super::verdict::DeonticVerdict;
use super::{validate_tree, KbError};

/// Placeholder in a leaf statement that is replaced by the answer chosen on
/// the branch leading to the leaf.
pub const ANSWER_PLACEHOLDER: &str = "{answer}";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Branch {
    pub answer_text: String,
    pub child: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KbNode {
    pub id: String,
    pub question_text: String,
    pub branches: Vec<Branch>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KbLeaf {
    pub id: String,
    pub verdict: DeonticVerdict,
    pub statement_fragment: String,
    pub provenance: Provenance,
    pub refs: Vec<String>,
}

/// A validated deontic decision tree. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KbTree {
    name: String,
    version: String,
    root: String,
    nodes: IndexMap<String, KbNode>,
    leaves: IndexMap<String, KbLeaf>,
    /// child id -> (parent node id, branch index)
    parents: HashMap<String, (String, usize)>,
}

/// One question answered on the way from the root to a leaf.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathSegment {
    pub node_id: String,
    pub question_text: String,
    pub answer_text: String,
}

/// The root-to-leaf path of a leaf, rendered as an action statement.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathStatement {
    pub leaf_id: String,
    pub segments: Vec<PathSegment>,
    pub verdict: DeonticVerdict,
    pub statement_fragment: String,
    pub rendered_text: String,
}

impl KbTree {
    /// Builds a tree from a document, rejecting it if any invariant fails.
    pub fn from_document(doc: KbDocument) -> Result<Self, KbError> {
        let violations = validate_tree(&doc);
        if !violations.is_empty() {
            return Err(KbError::Validation(violations));
        }

        let mut parents = HashMap::new();
        let mut nodes = IndexMap::with_capacity(doc.nodes.len());
        for node in doc.nodes {
            for (i, b) in node.branches.iter().enumerate() {
                parents.insert(b.child.clone(), (node.id.clone(), i));
            }
            let kb_node = KbNode {
                id: node.id.clone(),
                question_text: node.question,
                branches: node
                    .branches
                    .into_iter()
                    .map(|b| Branch {
                        answer_text: b.answer,
                        child: b.child,
                    })
                    .collect(),
            };
            nodes.insert(node.id, kb_node);
        }
        let mut leaves = IndexMap::with_capacity(doc.leaves.len());
        for leaf in doc.leaves {
            // validated above
            let (Some(verdict), Some(provenance)) = (leaf.verdict, leaf.provenance) else {
                unreachable!("validated leaf without verdict or provenance");
            };
            leaves.insert(
                leaf.id.clone(),
                KbLeaf {
                    id: leaf.id,
                    verdict,
                    statement_fragment: leaf.statement,
                    provenance,
                    refs: leaf.refs,
                },
            );
        }

        Ok(KbTree {
            name: doc.name,
            version: doc.version,
            root: doc.root,
            nodes,
            leaves,
            parents,
        })
    }

    pub fn to_document(&self) -> KbDocument {
        KbDocument {
            name: self.name.clone(),
            version: self.version.clone(),
            root: self.root.clone(),
            nodes: self
                .nodes
                .values()
                .map(|n| NodeDocument {
                    id: n.id.clone(),
                    question: n.question_text.clone(),
                    branches: n
                        .branches
                        .iter()
                        .map(|b| BranchDocument {
                            answer: b.answer_text.clone(),
                            child: b.child.clone(),
                        })
                        .collect(),
                })
                .collect(),
            leaves: self
                .leaves
                .values()
                .map(|l| LeafDocument {
                    id: l.id.clone(),
                    verdict: Some(l.verdict),
                    statement: l.statement_fragment.clone(),
                    provenance: Some(l.provenance),
                    refs: l.refs.clone(),
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("KB document serializes")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn version(&self) -> &str {
        &self.version
    }

    pub fn root(&self) -> &str {
        &self.root
    }

    pub fn node(&self, id: &str) -> Option<&KbNode> {
        self.nodes.get(id)
    }

    pub fn leaf(&self, id: &str) -> Option<&KbLeaf> {
        self.leaves.get(id)
    }

    pub fn nodes(&self) -> impl Iterator<Item = &KbNode> {
        self.nodes.values()
    }

    /// Leaves in document order.
    pub fn leaves(&self) -> impl Iterator<Item = &KbLeaf> {
        self.leaves.values()
    }

    pub fn leaf_count(&self) -> usize {
        self.leaves.len()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_leaf(&self, id: &str) -> bool {
        self.leaves.contains_key(id)
    }

    /// Parent node and branch index of `id`; `None` for the root.
    pub fn parent_of(&self, id: &str) -> Option<(&str, usize)> {
        self.parents.get(id).map(|(p, i)| (p.as_str(), *i))
    }

    /// Branch indices from the root down to `id`.
    pub fn branch_path(&self, id: &str) -> Vec<usize> {
        let mut path = Vec::new();
        let mut cursor = id;
        while let Some((parent, idx)) = self.parent_of(cursor) {
            path.push(idx);
            cursor = parent;
        }
        path.reverse();
        path
    }

    pub fn render_path(&self, leaf_id: &str) -> Result<PathStatement, KbError> {
        let leaf = self
            .leaves
            .get(leaf_id)
            .ok_or_else(|| KbError::UnknownLeaf(leaf_id.to_string()))?;

        let mut segments = Vec::new();
        let mut cursor = leaf_id;
        while let Some((parent, idx)) = self.parent_of(cursor) {
            let node = &self.nodes[parent];
            segments.push(PathSegment {
                node_id: node.id.clone(),
                question_text: node.question_text.clone(),
                answer_text: node.branches[idx].answer_text.clone(),
            });
            cursor = parent;
        }
        segments.reverse();

        let subject = match segments.last() {
            Some(last) => leaf
                .statement_fragment
                .replace(ANSWER_PLACEHOLDER, &last.answer_text),
            None => leaf.statement_fragment.clone(),
        };
        let rendered_text = format!("{subject} is {}", leaf.verdict.predicate());

        Ok(PathStatement {
            leaf_id: leaf.id.clone(),
            segments,
            verdict: leaf.verdict,
            statement_fragment: leaf.statement_fragment.clone(),
            rendered_text,
        })
    }

    /// One statement per leaf in document order, optionally restricted to a
    /// single verdict.
    pub fn enumerate_leaves(&self, verdict_filter: Option<DeonticVerdict>) -> Vec<PathStatement> {
        self.leaves
            .values()
            .filter(|l| verdict_filter.is_none_or(|v| l.verdict == v))
            .map(|l| self.render_path(&l.id).expect("leaf of this tree"))
            .collect()
    }

    /// Keeps exactly the leaves whose provenance is allowed and prunes every
    /// node left without a surviving descendant.
    pub fn filter_by_provenance(&self, allowed: &BTreeSet<Provenance>) -> Result<KbTree, KbError> {
        if self
            .leaves
            .values()
            .all(|l| allowed.contains(&l.provenance))
        {
            return Ok(self.clone());
        }
        let mut doc = self.to_document();
        doc.leaves
            .retain(|l| l.provenance.is_some_and(|p| allowed.contains(&p)));
        if doc.leaves.is_empty() {
            return Err(KbError::EmptyResult);
        }

        // Bottom-up pruning: repeat until no node loses a branch.
        loop {
            let alive: std::collections::HashSet<String> = doc
                .nodes
                .iter()
                .map(|n| n.id.clone())
                .chain(doc.leaves.iter().map(|l| l.id.clone()))
                .collect();
            let mut changed = false;
            for node in &mut doc.nodes {
                let before = node.branches.len();
                node.branches.retain(|b| alive.contains(&b.child));
                changed |= node.branches.len() != before;
            }
            let before = doc.nodes.len();
            doc.nodes.retain(|n| !n.branches.is_empty());
            changed |= doc.nodes.len() != before;
            if !changed {
                break;
            }
        }
        let root_alive = doc.nodes.iter().any(|n| n.id == doc.root)
            || doc.leaves.iter().any(|l| l.id == doc.root);
        if !root_alive {
            return Err(KbError::EmptyResult);
        }
        KbTree::from_document(doc)
    }
}

/// Parses and validates a KB document.
pub fn load_tree(json: &str) -> Result<KbTree, KbError> {
    let doc: KbDocument = serde_json::from_str(json).map_err(KbError::Parse)?;
    KbTree::from_document(doc)
}

pub fn load_tree_file(path: impl AsRef<Path>) -> Result<KbTree, KbError> {
    let text = std::fs::read_to_string(path.as_ref()).map_err(|e| KbError::Io {
        path: path.as_ref().display().to_string(),
        cause: e,
    })?;
    load_tree(&text)
}

/// Convenience used by callers that only need the violation list of a raw
/// document string. Parse failures are returned as errors.
pub fn validate_json(json: &str) -> Result<Vec<Violation>, KbError> {
    let doc: KbDocument = serde_json::from_str(json).map_err(KbError::Parse)?;
    Ok(validate_tree(&doc))
}
