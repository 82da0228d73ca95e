//! Theory graph, keyword-context merging, session specs and exports.

mod export;
mod graph;
mod header;

use std::collections::BTreeMap;

use thiserror::Error;

pub use export::{
    decode_record, encode_record, matches_pattern, valid_name, DatabaseStore, ExportEntry,
    ExportError, ExportStore, MemoryStore,
};
pub use graph::{cyclic_nodes, topological_order, CycleError};
pub use header::{has_header, parse_header, HeaderError, TheoryHeader};

use crate::syntax::{KeywordConflict, KeywordTable};

/// Canonical merge of keyword contexts: set union, failing on a command
/// redeclared with different attributes.
pub fn merge_contexts<'a>(
    tables: impl IntoIterator<Item = &'a KeywordTable>,
) -> Result<KeywordTable, KeywordConflict> {
    tables
        .into_iter()
        .try_fold(KeywordTable::new(), |acc, t| acc.merge(t))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SessionSpec {
    pub name: String,
    pub parent: Option<String>,
    pub theories: Vec<crate::document::NodeName>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SessionError {
    #[error("duplicate session `{0}`")]
    Duplicate(String),
    #[error("session `{session}` refers to unknown parent `{parent}`")]
    UnknownParent { session: String, parent: String },
}

/// Sessions linked to at most one parent each. Parents must be added first,
/// so the links always form a tree.
#[derive(Clone, Debug, Default)]
pub struct SessionTree {
    specs: BTreeMap<String, SessionSpec>,
}

impl SessionTree {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, spec: SessionSpec) -> Result<(), SessionError> {
        if self.specs.contains_key(&spec.name) {
            return Err(SessionError::Duplicate(spec.name));
        }
        if let Some(parent) = &spec.parent {
            if !self.specs.contains_key(parent) {
                return Err(SessionError::UnknownParent {
                    session: spec.name.clone(),
                    parent: parent.clone(),
                });
            }
        }
        self.specs.insert(spec.name.clone(), spec);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&SessionSpec> {
        self.specs.get(name)
    }

    /// `name` followed by its ancestors up to the root.
    pub fn ancestry(&self, name: &str) -> Vec<&SessionSpec> {
        let mut out = Vec::new();
        let mut cur = self.specs.get(name);
        while let Some(spec) = cur {
            out.push(spec);
            cur = spec.parent.as_ref().and_then(|p| self.specs.get(p));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::CommandAttrs;

    #[test]
    fn merge_single_is_identity() {
        let t = KeywordTable::bootstrap();
        assert_eq!(merge_contexts([&t]).unwrap(), t);
    }

    #[test]
    fn merge_conflict_names_command() {
        let mut a = KeywordTable::new();
        a.add_command("load", CommandAttrs::load(None));
        let mut b = KeywordTable::new();
        b.add_command("load", CommandAttrs::default());
        let err = merge_contexts([&a, &b]).unwrap_err();
        assert_eq!(err.name, "load");
    }

    #[test]
    fn session_tree() {
        let mut tree = SessionTree::new();
        let spec = |name: &str, parent: Option<&str>| SessionSpec {
            name: name.into(),
            parent: parent.map(Into::into),
            theories: vec![],
        };
        tree.add(spec("Pure", None)).unwrap();
        tree.add(spec("HOL", Some("Pure"))).unwrap();
        assert!(matches!(
            tree.add(spec("X", Some("Nope"))),
            Err(SessionError::UnknownParent { .. })
        ));
        assert!(matches!(tree.add(spec("HOL", None)), Err(SessionError::Duplicate(_))));
        let names: Vec<&str> = tree.ancestry("HOL").iter().map(|s| s.name.as_str()).collect();
        assert_eq!(names, ["HOL", "Pure"]);
    }
}
