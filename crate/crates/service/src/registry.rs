//! Trees available to sessions, keyed by file stem.

use std::collections::BTreeMap;
use std::io;
use std::path::Path;
use std::sync::Arc;

use ethkb_core::kb::{load_tree, KbError};
use ethkb_core::{KbTree, Provenance};
use serde::Serialize;

use crate::error::ServiceError;

#[derive(Debug, Clone)]
enum Entry {
    Valid(Arc<KbTree>),
    Invalid(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TreeSummary {
    pub id: String,
    pub valid: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub version: Option<String>,
    pub node_count: usize,
    pub leaf_count: usize,
    pub standards_leaf_count: usize,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub violations: Vec<String>,
}

#[derive(Debug, Clone, Default)]
pub struct TreeRegistry {
    entries: BTreeMap<String, Entry>,
}

impl TreeRegistry {
    /// Loads every `*.json` file directly under `dir`. Malformed trees are
    /// kept so they can be reported, but sessions cannot use them.
    pub fn load_dir(dir: impl AsRef<Path>) -> io::Result<Self> {
        let mut registry = TreeRegistry::default();
        for entry in std::fs::read_dir(dir.as_ref())? {
            let path = entry?.path();
            if !path.is_file() || path.extension().and_then(|e| e.to_str()) != Some("json") {
                continue;
            }
            let Some(id) = path.file_stem().and_then(|s| s.to_str()) else {
                continue;
            };
            let text = std::fs::read_to_string(&path)?;
            registry.insert_json(id, &text);
        }
        Ok(registry)
    }

    pub fn insert(&mut self, id: impl Into<String>, tree: KbTree) {
        self.entries.insert(id.into(), Entry::Valid(Arc::new(tree)));
    }

    pub fn insert_json(&mut self, id: &str, json: &str) {
        let entry = match load_tree(json) {
            Ok(tree) => Entry::Valid(Arc::new(tree)),
            Err(KbError::Validation(v)) => {
                Entry::Invalid(v.iter().map(ToString::to_string).collect())
            }
            Err(e) => Entry::Invalid(vec![e.to_string()]),
        };
        if let Entry::Invalid(v) = &entry {
            tracing::warn!(tree = id, violations = ?v, "tree rejected");
        }
        self.entries.insert(id.to_string(), entry);
    }

    pub fn get(&self, id: &str) -> Result<Arc<KbTree>, ServiceError> {
        match self.entries.get(id) {
            Some(Entry::Valid(tree)) => Ok(Arc::clone(tree)),
            Some(Entry::Invalid(violations)) => Err(ServiceError::InvalidTree {
                id: id.to_string(),
                violations: violations.clone(),
            }),
            None => Err(ServiceError::UnknownTree(id.to_string())),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn summaries(&self) -> Vec<TreeSummary> {
        self.entries
            .iter()
            .map(|(id, entry)| match entry {
                Entry::Valid(tree) => TreeSummary {
                    id: id.clone(),
                    valid: true,
                    name: Some(tree.name().to_string()),
                    version: Some(tree.version().to_string()),
                    node_count: tree.node_count(),
                    leaf_count: tree.leaf_count(),
                    standards_leaf_count: tree
                        .leaves()
                        .filter(|l| l.provenance == Provenance::Standards)
                        .count(),
                    violations: Vec::new(),
                },
                Entry::Invalid(violations) => TreeSummary {
                    id: id.clone(),
                    valid: false,
                    name: None,
                    version: None,
                    node_count: 0,
                    leaf_count: 0,
                    standards_leaf_count: 0,
                    violations: violations.clone(),
                },
            })
            .collect()
    }
}
