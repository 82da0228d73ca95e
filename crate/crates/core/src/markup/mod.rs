//! Markup trees over node text and snapshots that carry them across edits.

mod tree;

use std::sync::Arc;

pub use tree::{Element, MarkupError, MarkupNode, MarkupTree};

use crate::document::{transpose_range, Change, NodeName, VersionId};
use crate::message::Message;
use crate::text::TextRange;

/// Results anchored in some earlier version, plus the changes leading from
/// that version to the snapshot's text.
#[derive(Clone, Debug)]
pub struct Layer {
    pub base: VersionId,
    /// Start of the layer's content within the base text.
    pub offset: usize,
    pub markup: Arc<MarkupTree>,
    pub messages: Arc<[Message]>,
    pub pending: Arc<[Change]>,
}

impl Layer {
    fn place(&self, r: TextRange) -> Option<TextRange> {
        transpose_range(&self.pending, r.shift(self.offset))
    }
}

/// Read-only view of a node's markup in current-text offsets.
#[derive(Clone, Debug)]
pub struct Snapshot {
    version: VersionId,
    node: NodeName,
    text: Arc<str>,
    layers: Vec<Layer>,
}

impl Snapshot {
    pub fn new(version: VersionId, node: NodeName, text: Arc<str>, layers: Vec<Layer>) -> Self {
        Snapshot {
            version,
            node,
            text,
            layers,
        }
    }

    pub fn version(&self) -> VersionId {
        self.version
    }

    pub fn node(&self) -> &NodeName {
        &self.node
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    /// Markup intersecting `query` in current offsets, outermost first in
    /// document order. Elements whose anchoring text was edited away are
    /// left out.
    pub fn markup(
        &self,
        query: TextRange,
        filter: impl Fn(&str) -> bool,
    ) -> Vec<(TextRange, Element)> {
        let mut out: Vec<(TextRange, Element)> = self
            .layers
            .iter()
            .flat_map(|l| {
                l.markup
                    .flatten()
                    .into_iter()
                    .filter_map(move |(r, e)| Some((l.place(r)?, e)))
            })
            .filter(|(r, e)| r.intersects(&query) && filter(e.name()))
            .map(|(r, e)| (r, e.clone()))
            .collect();
        out.sort_by_key(|(r, _)| (r.start, std::cmp::Reverse(r.end)));
        out
    }

    /// Messages intersecting `query`, in current offsets, by position.
    pub fn messages(&self, query: TextRange) -> Vec<Message> {
        let mut out: Vec<Message> = self
            .layers
            .iter()
            .flat_map(|l| {
                l.messages.iter().filter_map(move |m| {
                    Some(Message {
                        range: l.place(m.range)?,
                        ..m.clone()
                    })
                })
            })
            .filter(|m| m.range.intersects(&query))
            .collect();
        out.sort_by_key(|m| (m.range.start, std::cmp::Reverse(m.range.end)));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn snap(tree: MarkupTree, pending: Vec<Change>, len: usize) -> Snapshot {
        let text: Arc<str> = Arc::from(" ".repeat(len));
        Snapshot::new(
            VersionId(2),
            NodeName::theory("A.thy").unwrap(),
            text,
            vec![Layer {
                base: VersionId(1),
                offset: 0,
                markup: Arc::new(tree),
                messages: Arc::from(Vec::new()),
                pending: Arc::from(pending),
            }],
        )
    }

    fn tree(len: usize, ranges: &[(usize, usize)]) -> MarkupTree {
        let mut t = MarkupTree::new(len);
        for (a, b) in ranges {
            t.add(TextRange::new(*a, *b), Element::new("m")).unwrap();
        }
        t
    }

    #[test]
    fn no_pending_matches_tree() {
        let t = tree(20, &[(0, 10), (5, 9)]);
        let s = snap(t.clone(), vec![], 20);
        let q = TextRange::new(0, 20);
        let direct: Vec<TextRange> = t.cumulate(q, |_| true).iter().map(|x| x.0).collect();
        let via: Vec<TextRange> = s.markup(q, |_| true).iter().map(|x| x.0).collect();
        assert_eq!(direct, via);
    }

    #[test]
    fn pending_insert_shifts() {
        let s = snap(tree(20, &[(5, 9)]), vec![Change::Insert { offset: 0, len: 2 }], 22);
        let got = s.markup(TextRange::new(0, 22), |_| true);
        assert_eq!(got[0].0, TextRange::new(7, 11));
    }

    #[test]
    fn pending_remove_drops_covered() {
        let s = snap(tree(20, &[(5, 9)]), vec![Change::Remove { offset: 4, len: 4 }], 16);
        assert!(s.markup(TextRange::new(0, 16), |_| true).is_empty());
    }
}
