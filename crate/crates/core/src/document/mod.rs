//! Versioned document nodes, edits, and command spans with stable ids.

mod name;
mod transpose;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

pub use name::{normalize_path, NodeKind, NodeName, PathError};
pub use transpose::{diff, transpose, transpose_clamped, transpose_range, Change};

use crate::sessions::{has_header, parse_header, HeaderError, TheoryHeader};
use crate::syntax::{parse_spans, tokenize, Digest, KeywordConflict, KeywordTable, Token, TokenKind};
use crate::text::{byte_index, char_len, TextRange};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct VersionId(pub u64);

impl fmt::Display for VersionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SpanId(pub u64);

impl fmt::Display for SpanId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "s{}", self.0)
    }
}

/// Visible ranges of a node, sorted and disjoint, plus whether the node must
/// be checked completely regardless of visibility.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Perspective {
    pub visible: Vec<TextRange>,
    pub required: bool,
}

impl Perspective {
    pub fn new(visible: Vec<TextRange>, required: bool) -> Self {
        Perspective { visible, required }
    }

    pub fn full(len: usize, required: bool) -> Self {
        Perspective::new(vec![TextRange::new(0, len)], required)
    }

    pub fn is_visible(&self, r: &TextRange) -> bool {
        self.visible.iter().any(|v| v.intersects(r))
    }

    fn validate(&self, len: usize) -> Result<(), &'static str> {
        if self.visible.iter().any(|r| r.end > len) {
            return Err("visible range out of bounds");
        }
        if self.visible.windows(2).any(|w| w[0].end > w[1].start) {
            return Err("visible ranges not sorted and disjoint");
        }
        Ok(())
    }

    fn follow(&mut self, change: &Change) {
        self.visible = self
            .visible
            .iter()
            .filter_map(|r| {
                let start = change.map_clamped(r.start);
                let end = change.map_clamped(r.end);
                (r.is_empty() || end > start).then(|| TextRange::new(start, end))
            })
            .collect();
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Edit {
    Insert { offset: usize, text: String },
    Remove { offset: usize, text: String },
    Perspective(Perspective),
    SetNode(String),
}

impl Edit {
    pub fn insert(offset: usize, text: impl Into<String>) -> Edit {
        Edit::Insert {
            offset,
            text: text.into(),
        }
    }

    pub fn remove(offset: usize, text: impl Into<String>) -> Edit {
        Edit::Remove {
            offset,
            text: text.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EditError {
    #[error("{node}: offset {offset} out of bounds (length {len})")]
    OutOfBounds {
        node: NodeName,
        offset: usize,
        len: usize,
    },
    #[error("{node}: remove at {offset} expected {expected:?}, found {found:?}")]
    RemoveMismatch {
        node: NodeName,
        offset: usize,
        expected: String,
        found: String,
    },
    #[error("{node}: {reason}")]
    InvalidPerspective { node: NodeName, reason: &'static str },
    #[error("version {proposed} is not newer than {latest}")]
    StaleVersion { proposed: VersionId, latest: VersionId },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LookupError {
    #[error("unknown version {0}")]
    UnknownVersion(VersionId),
    #[error("unknown node {0}")]
    UnknownNode(NodeName),
    #[error("version {from} does not precede {to}")]
    NotAncestor { from: VersionId, to: VersionId },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpanKind {
    /// Material before the first command, including the theory header.
    Prelude,
    Command,
    /// The single implicit span of an auxiliary file with a registered format.
    Auxiliary,
}

/// A file referenced by a load command.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Attachment {
    /// Argument as written.
    pub path: String,
    /// `None` when the path does not resolve.
    pub node: Option<NodeName>,
    /// Digest and content of the blob, if the node exists.
    pub digest: Option<Digest>,
    pub content: Option<Arc<str>>,
}

#[derive(Clone, Debug)]
pub struct CommandSpan {
    pub id: SpanId,
    pub kind: SpanKind,
    /// Command name, or the format extension for auxiliary spans, `""` for
    /// the prelude.
    pub command: String,
    pub range: TextRange,
    pub source: Arc<str>,
    pub hash: Digest,
    /// Tokens with offsets relative to `range.start`.
    pub tokens: Arc<[Token]>,
    pub attachment: Option<Attachment>,
}

impl CommandSpan {
    fn same_content(&self, other: &CommandSpan) -> bool {
        self.kind == other.kind
            && self.hash == other.hash
            && self.attachment.as_ref().map(|a| (&a.node, a.digest))
                == other.attachment.as_ref().map(|a| (&a.node, a.digest))
    }

    /// Proper tokens after the command keyword.
    pub fn arguments(&self) -> impl Iterator<Item = &Token> {
        let skip = usize::from(self.kind == SpanKind::Command);
        self.tokens
            .iter()
            .filter(|t| !t.kind.is_improper())
            .skip(skip)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Import {
    pub name: String,
    pub range: TextRange,
    pub node: Option<NodeName>,
}

#[derive(Clone, Debug)]
pub struct Node {
    name: NodeName,
    text: Arc<str>,
    len: usize,
    digest: Digest,
    spans: Arc<[CommandSpan]>,
    perspective: Perspective,
    header: Option<Result<TheoryHeader, HeaderError>>,
    imports: Arc<[Import]>,
    declared: Arc<KeywordTable>,
    keywords: Arc<KeywordTable>,
    keyword_conflict: Option<KeywordConflict>,
    format: Option<String>,
}

impl Node {
    pub fn name(&self) -> &NodeName {
        &self.name
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn text_arc(&self) -> Arc<str> {
        self.text.clone()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn digest(&self) -> Digest {
        self.digest
    }

    pub fn spans(&self) -> &[CommandSpan] {
        &self.spans
    }

    pub fn span(&self, id: SpanId) -> Option<&CommandSpan> {
        self.spans.iter().find(|s| s.id == id)
    }

    pub fn perspective(&self) -> &Perspective {
        &self.perspective
    }

    pub fn header(&self) -> Option<&TheoryHeader> {
        self.header.as_ref().and_then(|h| h.as_ref().ok())
    }

    pub fn header_error(&self) -> Option<&HeaderError> {
        self.header.as_ref().and_then(|h| h.as_ref().err())
    }

    pub fn imports(&self) -> &[Import] {
        &self.imports
    }

    /// Keyword declarations of this node's own header.
    pub fn declared_keywords(&self) -> &KeywordTable {
        &self.declared
    }

    /// Keywords in force for this node: bootstrap, own and imported
    /// declarations.
    pub fn keywords(&self) -> &KeywordTable {
        &self.keywords
    }

    pub fn keyword_conflict(&self) -> Option<&KeywordConflict> {
        self.keyword_conflict.as_ref()
    }

    /// Registered format extension of an auxiliary node.
    pub fn format(&self) -> Option<&str> {
        self.format.as_deref()
    }

    pub fn is_theory(&self) -> bool {
        self.name.is_theory()
    }
}

#[derive(Clone, Debug)]
pub struct Version {
    id: VersionId,
    nodes: BTreeMap<NodeName, Arc<Node>>,
    /// Text changes relative to the preceding version.
    changes: BTreeMap<NodeName, Vec<Change>>,
    batch: Digest,
}

impl Version {
    pub fn id(&self) -> VersionId {
        self.id
    }

    pub fn node(&self, name: &NodeName) -> Option<&Arc<Node>> {
        self.nodes.get(name)
    }

    pub fn nodes(&self) -> impl Iterator<Item = &Arc<Node>> {
        self.nodes.values()
    }

    pub fn node_names(&self) -> impl Iterator<Item = &NodeName> {
        self.nodes.keys()
    }

    pub fn changes(&self, name: &NodeName) -> &[Change] {
        self.changes.get(name).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Resolved imports present in this version, per theory node.
    pub fn import_graph(&self) -> BTreeMap<NodeName, Vec<NodeName>> {
        self.nodes
            .values()
            .filter(|n| n.is_theory())
            .map(|n| {
                let deps = n
                    .imports
                    .iter()
                    .filter_map(|i| i.node.clone())
                    .filter(|d| self.nodes.contains_key(d))
                    .collect();
                (n.name.clone(), deps)
            })
            .collect()
    }
}

#[derive(Clone, Debug)]
pub struct DocumentConfig {
    pub keywords: KeywordTable,
    /// Extensions of auxiliary files that get an implicit span.
    pub formats: BTreeSet<String>,
    pub keep_versions: usize,
}

impl Default for DocumentConfig {
    fn default() -> Self {
        DocumentConfig {
            keywords: KeywordTable::bootstrap(),
            formats: BTreeSet::new(),
            keep_versions: 10,
        }
    }
}

/// Single-writer owner of the version history.
#[derive(Debug)]
pub struct DocumentState {
    config: DocumentConfig,
    versions: BTreeMap<VersionId, Arc<Version>>,
    latest: VersionId,
    next_span: u64,
}

struct Work {
    chars: Vec<char>,
    perspective: Perspective,
    changes: Vec<Change>,
}

impl DocumentState {
    pub fn new(config: DocumentConfig) -> Self {
        let v0 = Version {
            id: VersionId(0),
            nodes: BTreeMap::new(),
            changes: BTreeMap::new(),
            batch: Digest::of(b""),
        };
        DocumentState {
            config,
            versions: BTreeMap::from([(VersionId(0), Arc::new(v0))]),
            latest: VersionId(0),
            next_span: 0,
        }
    }

    pub fn config(&self) -> &DocumentConfig {
        &self.config
    }

    pub fn latest(&self) -> Arc<Version> {
        self.versions[&self.latest].clone()
    }

    pub fn version(&self, id: VersionId) -> Result<Arc<Version>, LookupError> {
        self.versions
            .get(&id)
            .cloned()
            .ok_or(LookupError::UnknownVersion(id))
    }

    pub fn version_ids(&self) -> impl Iterator<Item = VersionId> + '_ {
        self.versions.keys().copied()
    }

    pub fn apply_edits(&mut self, edits: &[(NodeName, Edit)]) -> Result<Arc<Version>, EditError> {
        let id = VersionId(self.latest.0 + 1);
        self.apply_edits_as(id, edits)
    }

    /// Apply a batch under a client-proposed id. Re-sending the batch that
    /// produced the latest version under the same id is a no-op.
    pub fn apply_edits_as(
        &mut self,
        id: VersionId,
        edits: &[(NodeName, Edit)],
    ) -> Result<Arc<Version>, EditError> {
        let batch = batch_digest(edits);
        let latest = self.latest();
        if id == latest.id && batch == latest.batch && id.0 > 0 {
            return Ok(latest);
        }
        if id <= latest.id {
            return Err(EditError::StaleVersion {
                proposed: id,
                latest: latest.id,
            });
        }
        let mut work: BTreeMap<NodeName, Work> = BTreeMap::new();
        for (name, edit) in edits {
            let w = work.entry(name.clone()).or_insert_with(|| match latest.node(name) {
                Some(n) => Work {
                    chars: n.text.chars().collect(),
                    perspective: n.perspective.clone(),
                    changes: Vec::new(),
                },
                None => Work {
                    chars: Vec::new(),
                    perspective: Perspective::default(),
                    changes: Vec::new(),
                },
            });
            apply_one(name, w, edit)?;
        }
        let version = self.build(id, &latest, work, batch);
        let version = Arc::new(version);
        self.versions.insert(id, version.clone());
        self.latest = id;
        Ok(version)
    }

    pub fn set_perspective(
        &mut self,
        node: &NodeName,
        visible: Vec<TextRange>,
        required: bool,
    ) -> Result<Arc<Version>, EditError> {
        self.apply_edits(&[(
            node.clone(),
            Edit::Perspective(Perspective::new(visible, required)),
        )])
    }

    /// Text changes of `node` between two versions, composed in order.
    pub fn changes_between(
        &self,
        from: VersionId,
        to: VersionId,
        node: &NodeName,
    ) -> Result<Vec<Change>, LookupError> {
        self.version(from)?;
        let target = self.version(to)?;
        if from > to {
            return Err(LookupError::NotAncestor { from, to });
        }
        if target.node(node).is_none() {
            return Err(LookupError::UnknownNode(node.clone()));
        }
        let mut out = Vec::new();
        for id in (from.0 + 1)..=to.0 {
            match self.versions.get(&VersionId(id)) {
                Some(v) => out.extend_from_slice(v.changes(node)),
                // Ids need not be contiguous; missing ids in range were never
                // created, while pruned ones are older than `from`.
                None => continue,
            }
        }
        Ok(out)
    }

    pub fn transpose_offset(
        &self,
        from: VersionId,
        to: VersionId,
        node: &NodeName,
        offset: usize,
    ) -> Result<Option<usize>, LookupError> {
        Ok(transpose(&self.changes_between(from, to, node)?, offset))
    }

    /// Drop all but the latest `keep` versions (at least one is kept).
    /// Returns the removed ids, oldest first.
    pub fn remove_versions(&mut self, keep: usize) -> Vec<VersionId> {
        let excess = self.versions.len().saturating_sub(keep.max(1));
        let removed: Vec<VersionId> = self.versions.keys().take(excess).copied().collect();
        for id in &removed {
            self.versions.remove(id);
        }
        removed
    }

    /// Prune according to the configured retention.
    pub fn prune(&mut self) -> Vec<VersionId> {
        self.remove_versions(self.config.keep_versions)
    }

    fn fresh_span(&mut self) -> SpanId {
        self.next_span += 1;
        SpanId(self.next_span)
    }

    fn build(
        &mut self,
        id: VersionId,
        prev: &Version,
        work: BTreeMap<NodeName, Work>,
        batch: Digest,
    ) -> Version {
        let mut nodes = prev.nodes.clone();
        let mut changes = BTreeMap::new();
        let mut text_changed = BTreeSet::new();

        // Auxiliary nodes first: theory spans depend on their digests.
        let (aux, thy): (Vec<_>, Vec<_>) = work.into_iter().partition(|(n, _)| !n.is_theory());
        for (name, w) in aux.into_iter().chain(thy) {
            let text: String = w.chars.iter().collect();
            let old = prev.node(&name);
            let same_text = old.is_some_and(|o| *o.text == *text);
            if same_text {
                let mut n = (**old.unwrap()).clone();
                n.perspective = w.perspective;
                nodes.insert(name, Arc::new(n));
                continue;
            }
            if !w.changes.is_empty() {
                changes.insert(name.clone(), w.changes);
            }
            text_changed.insert(name.clone());
            let node = self.shape(name.clone(), text, w.perspective);
            nodes.insert(name, Arc::new(node));
        }

        let aux_names: Vec<NodeName> = nodes.keys().filter(|n| !n.is_theory()).cloned().collect();
        for name in aux_names {
            if text_changed.contains(&name) {
                let old = prev.node(&name).cloned();
                let mut n = (*nodes[&name]).clone();
                self.segment(&mut n, old.as_deref(), &nodes, false);
                nodes.insert(name, Arc::new(n));
            }
        }

        let thy_names: Vec<NodeName> = nodes.keys().filter(|n| n.is_theory()).cloned().collect();
        for name in thy_names {
            let (keywords, conflict) = effective_keywords(&self.config.keywords, &nodes, &name);
            let current = nodes[&name].clone();
            let old = prev.node(&name).cloned();
            let keywords_changed = old.as_ref().is_none_or(|o| *o.keywords != keywords);
            let needs = text_changed.contains(&name)
                || keywords_changed
                || attachments_stale(&current, &nodes);
            if !needs {
                continue;
            }
            let mut n = (*current).clone();
            n.keywords = Arc::new(keywords);
            n.keyword_conflict = conflict;
            self.segment(&mut n, old.as_deref(), &nodes, keywords_changed);
            nodes.insert(name, Arc::new(n));
        }

        Version {
            id,
            nodes,
            changes,
            batch,
        }
    }

    /// Header, imports and own declarations; spans come later.
    fn shape(&self, name: NodeName, text: String, perspective: Perspective) -> Node {
        let len = char_len(&text);
        let digest = Digest::of_str(&text);
        let mut node = Node {
            format: None,
            header: None,
            imports: Arc::from(Vec::new()),
            declared: Arc::new(KeywordTable::new()),
            keywords: Arc::new(self.config.keywords.clone()),
            keyword_conflict: None,
            spans: Arc::from(Vec::new()),
            name,
            text: Arc::from(text),
            len,
            digest,
            perspective,
        };
        if !node.name.is_theory() {
            node.format = node
                .name
                .extension()
                .filter(|e| self.config.formats.contains(*e))
                .map(str::to_owned);
            return node;
        }
        let tokens = tokenize(&node.text, &self.config.keywords);
        let prelude: Vec<Token> = tokens.iter().take_while(|t| !t.is_command()).cloned().collect();
        if has_header(&prelude) {
            let header = parse_header(&prelude);
            if let Ok(h) = &header {
                node.imports = h
                    .imports
                    .iter()
                    .map(|(imp, range)| Import {
                        name: imp.clone(),
                        range: *range,
                        node: resolve_import(&node.name, imp),
                    })
                    .collect();
                node.declared = Arc::new(h.keywords.clone());
            }
            node.header = Some(header);
        }
        node
    }

    fn segment(
        &mut self,
        node: &mut Node,
        old: Option<&Node>,
        nodes: &BTreeMap<NodeName, Arc<Node>>,
        force_fresh: bool,
    ) {
        let mut spans: Vec<CommandSpan> = Vec::new();
        if node.is_theory() {
            let tokens = tokenize(&node.text, &node.keywords);
            for p in parse_spans(&tokens) {
                let kind = if p.is_prelude() {
                    SpanKind::Prelude
                } else {
                    SpanKind::Command
                };
                let attachment = node
                    .keywords
                    .command(&p.command)
                    .filter(|a| a.load)
                    .and_then(|attrs| load_attachment(&node.name, &p.tokens, attrs.extension.as_deref(), nodes));
                let tokens: Vec<Token> = p.relative_tokens().collect();
                spans.push(CommandSpan {
                    id: SpanId(0),
                    kind,
                    command: p.command,
                    range: p.range,
                    source: Arc::from(p.source),
                    hash: p.hash,
                    tokens: Arc::from(tokens),
                    attachment,
                });
            }
        } else if let (Some(fmt), false) = (&node.format, node.text.is_empty()) {
            spans.push(CommandSpan {
                id: SpanId(0),
                kind: SpanKind::Auxiliary,
                command: fmt.clone(),
                range: TextRange::new(0, node.len),
                source: node.text.clone(),
                hash: node.digest,
                tokens: Arc::from(Vec::new()),
                attachment: None,
            });
        }
        let old_spans: &[CommandSpan] = match (old, force_fresh) {
            (Some(o), false) => &o.spans,
            _ => &[],
        };
        let prefix = old_spans
            .iter()
            .zip(&spans)
            .take_while(|(a, b)| a.same_content(b))
            .count();
        let max_suffix = old_spans.len().min(spans.len()) - prefix;
        let suffix = old_spans
            .iter()
            .rev()
            .zip(spans.iter().rev())
            .take(max_suffix)
            .take_while(|(a, b)| a.same_content(b))
            .count();
        let n = spans.len();
        for (i, s) in spans.iter_mut().enumerate() {
            s.id = if i < prefix {
                old_spans[i].id
            } else if i >= n - suffix {
                old_spans[old_spans.len() - (n - i)].id
            } else {
                self.fresh_span()
            };
        }
        node.spans = Arc::from(spans);
    }
}

fn apply_one(name: &NodeName, w: &mut Work, edit: &Edit) -> Result<(), EditError> {
    let len = w.chars.len();
    let oob = |offset| EditError::OutOfBounds {
        node: name.clone(),
        offset,
        len,
    };
    match edit {
        Edit::Insert { offset, text } => {
            if *offset > len {
                return Err(oob(*offset));
            }
            let ins: Vec<char> = text.chars().collect();
            let change = Change::Insert {
                offset: *offset,
                len: ins.len(),
            };
            w.chars.splice(*offset..*offset, ins);
            record(w, change);
        }
        Edit::Remove { offset, text } => {
            let n = text.chars().count();
            if *offset > len {
                return Err(oob(*offset));
            }
            let end = (*offset + n).min(len);
            let found: String = w.chars[*offset..end].iter().collect();
            if found != *text {
                return Err(EditError::RemoveMismatch {
                    node: name.clone(),
                    offset: *offset,
                    expected: text.clone(),
                    found,
                });
            }
            w.chars.drain(*offset..end);
            record(w, Change::Remove { offset: *offset, len: n });
        }
        Edit::SetNode(text) => {
            let old: String = w.chars.iter().collect();
            for c in diff(&old, text) {
                record(w, c);
            }
            w.chars = text.chars().collect();
        }
        Edit::Perspective(p) => {
            p.validate(len).map_err(|reason| EditError::InvalidPerspective {
                node: name.clone(),
                reason,
            })?;
            w.perspective = p.clone();
        }
    }
    Ok(())
}

fn record(w: &mut Work, change: Change) {
    let empty = matches!(change, Change::Insert { len: 0, .. } | Change::Remove { len: 0, .. });
    if !empty {
        w.perspective.follow(&change);
        w.changes.push(change);
    }
}

fn batch_digest(edits: &[(NodeName, Edit)]) -> Digest {
    Digest::of_str(&format!("{edits:?}"))
}

/// `B` and `dir/B` name theory files `B.thy` relative to the importer.
pub fn resolve_import(importer: &NodeName, name: &str) -> Option<NodeName> {
    let path = if name.ends_with(".thy") {
        name.to_owned()
    } else {
        format!("{name}.thy")
    };
    importer.resolve(NodeKind::Theory, &path).ok()
}

fn load_attachment(
    owner: &NodeName,
    tokens: &[Token],
    extension: Option<&str>,
    nodes: &BTreeMap<NodeName, Arc<Node>>,
) -> Option<Attachment> {
    let arg = tokens.iter().filter(|t| !t.kind.is_improper()).nth(1).filter(|t| {
        matches!(
            t.kind,
            TokenKind::QuotedString | TokenKind::Cartouche | TokenKind::Identifier
        )
    })?;
    let mut path = arg.content();
    if let Some(ext) = extension {
        let file = path.rsplit('/').next().unwrap_or("");
        if !file.contains('.') {
            path = format!("{path}.{ext}");
        }
    }
    let node = owner.resolve(NodeKind::Auxiliary, &path).ok();
    let blob = node.as_ref().and_then(|n| nodes.get(n));
    Some(Attachment {
        path,
        digest: blob.map(|b| b.digest),
        content: blob.map(|b| b.text.clone()),
        node,
    })
}

fn attachments_stale(node: &Node, nodes: &BTreeMap<NodeName, Arc<Node>>) -> bool {
    node.spans.iter().filter_map(|s| s.attachment.as_ref()).any(|a| {
        let now = a.node.as_ref().and_then(|n| nodes.get(n)).map(|b| b.digest);
        now != a.digest
    })
}

/// Bootstrap plus the declarations of `name` and everything it transitively
/// imports, merged in name order. The first conflict is reported and the
/// conflicting table skipped.
fn effective_keywords(
    base: &KeywordTable,
    nodes: &BTreeMap<NodeName, Arc<Node>>,
    name: &NodeName,
) -> (KeywordTable, Option<KeywordConflict>) {
    let mut reach = BTreeSet::from([name.clone()]);
    let mut stack = vec![name.clone()];
    while let Some(n) = stack.pop() {
        for imp in nodes[&n].imports.iter().filter_map(|i| i.node.as_ref()) {
            if nodes.contains_key(imp) && reach.insert(imp.clone()) {
                stack.push(imp.clone());
            }
        }
    }
    let mut table = base.clone();
    let mut conflict = None;
    for n in &reach {
        match table.merge(&nodes[n].declared) {
            Ok(t) => table = t,
            Err(e) => {
                conflict.get_or_insert(e);
            }
        }
    }
    (table, conflict)
}

/// Character offset to byte offset within a node text.
pub fn byte_offset(text: &str, offset: usize) -> Option<usize> {
    byte_index(text, offset)
}
