use std::fmt;

use thiserror::Error;

use crate::text::TextRange;

/// A named annotation with string properties; keys are kept unique.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Element {
    name: String,
    properties: Vec<(String, String)>,
}

impl Element {
    pub fn new(name: impl Into<String>) -> Element {
        Element {
            name: name.into(),
            properties: Vec::new(),
        }
    }

    /// Set a property, replacing an existing value under the same key.
    pub fn with(mut self, key: impl Into<String>, value: impl Into<String>) -> Element {
        self.set(key, value);
        self
    }

    pub fn set(&mut self, key: impl Into<String>, value: impl Into<String>) {
        let key = key.into();
        let value = value.into();
        match self.properties.iter_mut().find(|(k, _)| *k == key) {
            Some(slot) => slot.1 = value,
            None => self.properties.push((key, value)),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn properties(&self) -> &[(String, String)] {
        &self.properties
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.properties
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)?;
        for (k, v) in &self.properties {
            write!(f, " {k}={v:?}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MarkupError {
    #[error("markup range {range} outside text of length {len}")]
    OutOfBounds { range: TextRange, len: usize },
    #[error("markup range {range} overlaps {existing} without nesting")]
    Overlap { range: TextRange, existing: TextRange },
    #[error("markup element without a name")]
    EmptyName,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MarkupNode {
    pub range: TextRange,
    pub element: Element,
    pub children: Vec<MarkupNode>,
}

/// Well-nested markup over a text of fixed length. Siblings are sorted and
/// pairwise disjoint; children lie within their parent.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MarkupTree {
    len: usize,
    roots: Vec<MarkupNode>,
}

impl MarkupTree {
    pub fn new(len: usize) -> Self {
        MarkupTree {
            len,
            roots: Vec::new(),
        }
    }

    pub fn text_len(&self) -> usize {
        self.len
    }

    pub fn roots(&self) -> &[MarkupNode] {
        &self.roots
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    /// Insert an element, descending into an enclosing node when there is
    /// one and adopting siblings the new range encloses. Equal ranges nest
    /// the newcomer inside.
    pub fn add(&mut self, range: TextRange, element: Element) -> Result<(), MarkupError> {
        if element.name.is_empty() {
            return Err(MarkupError::EmptyName);
        }
        if range.end > self.len {
            return Err(MarkupError::OutOfBounds {
                range,
                len: self.len,
            });
        }
        insert(&mut self.roots, range, element)
    }

    /// Pre-order (document order, outermost first) over every node whose
    /// range intersects `query` and whose name passes `filter`.
    pub fn cumulate<'a>(
        &'a self,
        query: TextRange,
        filter: impl Fn(&str) -> bool,
    ) -> Vec<(TextRange, &'a Element)> {
        let mut out = Vec::new();
        walk(&self.roots, &mut |n| {
            if n.range.intersects(&query) && filter(&n.element.name) {
                out.push((n.range, &n.element));
            }
        });
        out
    }

    /// Every node in pre-order.
    pub fn flatten(&self) -> Vec<(TextRange, &Element)> {
        let mut out = Vec::new();
        walk(&self.roots, &mut |n| out.push((n.range, &n.element)));
        out
    }

    pub fn count(&self) -> usize {
        let mut n = 0;
        walk(&self.roots, &mut |_| n += 1);
        n
    }

    /// Structural check of the nesting discipline.
    pub fn is_well_nested(&self) -> bool {
        fn level(nodes: &[MarkupNode], outer: TextRange) -> bool {
            nodes.windows(2).all(|w| w[0].range.end <= w[1].range.start)
                && nodes.iter().all(|n| {
                    outer.contains_range(&n.range) && level(&n.children, n.range)
                })
        }
        level(&self.roots, TextRange::new(0, self.len))
    }

    /// The same markup shifted right by `by`, over a text of length `len`.
    pub fn shifted(&self, by: usize, len: usize) -> MarkupTree {
        fn shift(nodes: &[MarkupNode], by: usize) -> Vec<MarkupNode> {
            nodes
                .iter()
                .map(|n| MarkupNode {
                    range: n.range.shift(by),
                    element: n.element.clone(),
                    children: shift(&n.children, by),
                })
                .collect()
        }
        assert!(self.len + by <= len);
        MarkupTree {
            len,
            roots: shift(&self.roots, by),
        }
    }
}

fn walk<'a>(nodes: &'a [MarkupNode], f: &mut impl FnMut(&'a MarkupNode)) {
    for n in nodes {
        f(n);
        walk(&n.children, f);
    }
}

fn disjoint(a: &TextRange, b: &TextRange) -> bool {
    a.end <= b.start || b.end <= a.start
}

fn insert(level: &mut Vec<MarkupNode>, range: TextRange, element: Element) -> Result<(), MarkupError> {
    if let Some(host) = level.iter_mut().find(|n| n.range.contains_range(&range)) {
        return insert(&mut host.children, range, element);
    }
    for n in level.iter() {
        if !range.contains_range(&n.range) && !disjoint(&n.range, &range) {
            return Err(MarkupError::Overlap {
                range,
                existing: n.range,
            });
        }
    }
    let (children, mut rest): (Vec<MarkupNode>, Vec<MarkupNode>) =
        std::mem::take(level).into_iter().partition(|n| range.contains_range(&n.range));
    let at = rest.partition_point(|n| (n.range.start, n.range.end) < (range.start, range.end));
    rest.insert(
        at,
        MarkupNode {
            range,
            element,
            children,
        },
    );
    *level = rest;
    Ok(())
}
