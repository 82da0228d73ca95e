//! Typed messages and their chunk layout. The first chunk is the message
//! name; structured arguments are YXML text.

use thiserror::Error;

use super::yxml::{self, Tree, YxmlError};
use crate::checker::Output;
use crate::document::{Edit, NodeName, Perspective, SpanId, VersionId};
use crate::execution::{ExecId, Status};
use crate::markup::Element;
use crate::message::{Message, Phase, Severity};
use crate::pretty::Doc;
use crate::text::TextRange;

/// Bumped on incompatible wire changes.
pub const PROTOCOL_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ClientMessage {
    SessionStart,
    /// `version` is the client's proposal; `None` lets the server pick.
    NodeEdits {
        version: Option<VersionId>,
        edits: Vec<(NodeName, Edit)>,
    },
    BlobUpdate {
        node: NodeName,
        content: String,
    },
    DialogResult {
        id: String,
        result: String,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ServerMessage {
    SessionReady {
        protocol: u32,
    },
    Assigned {
        version: VersionId,
        execs: Vec<(NodeName, SpanId, ExecId)>,
    },
    /// Offsets are characters of `node` in `version`.
    Report {
        exec: ExecId,
        node: NodeName,
        version: VersionId,
        output: Output,
    },
    Status {
        exec: ExecId,
        status: Status,
    },
    RemovedVersions(Vec<VersionId>),
    Error(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WireError {
    #[error("empty message")]
    Empty,
    #[error("unknown message `{0}`")]
    UnknownMessage(String),
    #[error("`{name}` takes {expected} argument(s), got {found}")]
    Arity {
        name: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("`{0}` is not UTF-8")]
    Utf8(&'static str),
    #[error("bad {field}: `{value}`")]
    BadField { field: &'static str, value: String },
    #[error(transparent)]
    Yxml(#[from] YxmlError),
    #[error("markup element name `{0}` is reserved for layout")]
    ReservedName(String),
}

fn bad(field: &'static str, value: impl Into<String>) -> WireError {
    WireError::BadField {
        field,
        value: value.into(),
    }
}

fn text(field: &'static str, chunk: &[u8]) -> Result<String, WireError> {
    String::from_utf8(chunk.to_vec()).map_err(|_| WireError::Utf8(field))
}

fn number<T: std::str::FromStr>(field: &'static str, s: &str) -> Result<T, WireError> {
    s.parse().map_err(|_| bad(field, s))
}

fn prop<'a>(e: &'a Element, key: &'static str) -> Result<&'a str, WireError> {
    e.get(key).ok_or_else(|| bad(key, format!("missing in `{}`", e.name())))
}

fn node_name(s: &str) -> Result<NodeName, WireError> {
    NodeName::from_path(s).map_err(|_| bad("node", s))
}

fn arity(name: &'static str, args: &[Vec<u8>], expected: usize) -> Result<(), WireError> {
    if args.len() == expected {
        Ok(())
    } else {
        Err(WireError::Arity {
            name,
            expected,
            found: args.len(),
        })
    }
}

fn elements(trees: Vec<Tree>) -> impl Iterator<Item = (Element, Vec<Tree>)> {
    trees.into_iter().filter_map(|t| match t {
        Tree::Elem(e, body) => Some((e, body)),
        Tree::Text(_) => None,
    })
}

fn content(body: &[Tree]) -> String {
    body.iter().map(Tree::content).collect()
}

// Pretty-printing trees.

/// Layout as YXML trees: unmarked strings are text, marked strings are
/// their markup element around the text, and breaks and blocks are
/// `break` and `block` elements.
pub fn doc_to_trees(doc: &Doc) -> Result<Vec<Tree>, WireError> {
    let mut out = Vec::new();
    doc_into(doc, &mut out)?;
    Ok(out)
}

fn doc_into(doc: &Doc, out: &mut Vec<Tree>) -> Result<(), WireError> {
    match doc {
        Doc::Str { text, markup: None } => {
            if !text.is_empty() {
                out.push(Tree::text(text.clone()));
            }
        }
        Doc::Str { text, markup: Some(e) } => {
            if matches!(e.name(), "break" | "block") {
                return Err(WireError::ReservedName(e.name().to_owned()));
            }
            out.push(Tree::elem(e.clone(), vec![Tree::text(text.clone())]));
        }
        Doc::Break { spaces, indent } => out.push(Tree::elem(
            Element::new("break").with("width", spaces.to_string()).with("indent", indent.to_string()),
            vec![],
        )),
        Doc::Block {
            indent,
            consistent,
            body,
        } => {
            let mut inner = Vec::new();
            for d in body {
                doc_into(d, &mut inner)?;
            }
            out.push(Tree::elem(
                Element::new("block")
                    .with("indent", indent.to_string())
                    .with("consistent", if *consistent { "true" } else { "false" }),
                inner,
            ));
        }
    }
    Ok(())
}

pub fn trees_to_doc(trees: &[Tree]) -> Result<Doc, WireError> {
    let body = trees.iter().map(tree_to_doc).collect::<Result<Vec<_>, _>>()?;
    Ok(match <[Doc; 1]>::try_from(body) {
        Ok([d]) => d,
        Err(body) => Doc::block(0, body),
    })
}

fn tree_to_doc(t: &Tree) -> Result<Doc, WireError> {
    Ok(match t {
        Tree::Text(s) => Doc::Str {
            text: s.clone(),
            markup: None,
        },
        Tree::Elem(e, body) if e.name() == "break" => Doc::Break {
            spaces: number("width", prop(e, "width")?)?,
            indent: number("indent", prop(e, "indent")?)?,
        },
        Tree::Elem(e, body) if e.name() == "block" => Doc::Block {
            indent: number("indent", prop(e, "indent")?)?,
            consistent: number("consistent", prop(e, "consistent")?)?,
            body: body.iter().map(tree_to_doc).collect::<Result<_, _>>()?,
        },
        Tree::Elem(e, body) => Doc::Str {
            text: content(body),
            markup: Some(e.clone()),
        },
    })
}

/// Parse a serialized layout tree.
pub fn parse_doc(s: &str) -> Result<Doc, WireError> {
    trees_to_doc(&yxml::parse(s)?)
}

pub fn doc_string(doc: &Doc) -> Result<String, WireError> {
    Ok(yxml::to_string(&doc_to_trees(doc)?)?)
}

// Report payloads.

fn range_props(e: Element, r: TextRange) -> Element {
    e.with("start", r.start.to_string()).with("end", r.end.to_string())
}

fn range_of(e: &Element) -> Result<TextRange, WireError> {
    let start: usize = number("start", prop(e, "start")?)?;
    let end: usize = number("end", prop(e, "end")?)?;
    if start > end {
        return Err(bad("range", format!("{start}-{end}")));
    }
    Ok(TextRange::new(start, end))
}

pub fn output_to_tree(output: &Output) -> Result<Tree, WireError> {
    Ok(match output {
        Output::Message(m) => Tree::elem(
            range_props(
                Element::new("message")
                    .with("severity", m.severity.as_str())
                    .with("phase", m.phase.as_str()),
                m.range,
            ),
            doc_to_trees(&m.body)?,
        ),
        Output::Markup(r, e) => Tree::elem(range_props(Element::new("markup"), *r), vec![Tree::elem(e.clone(), vec![])]),
    })
}

pub fn tree_to_output(t: Tree) -> Result<Output, WireError> {
    let Tree::Elem(e, body) = t else { return Err(bad("payload", "text")) };
    let range = range_of(&e)?;
    match e.name() {
        "message" => Ok(Output::Message(Message {
            severity: Severity::parse(prop(&e, "severity")?).ok_or_else(|| bad("severity", prop(&e, "severity").unwrap_or("")))?,
            phase: Phase::parse(prop(&e, "phase")?).ok_or_else(|| bad("phase", prop(&e, "phase").unwrap_or("")))?,
            range,
            body: trees_to_doc(&body)?,
        })),
        "markup" => {
            let (inner, _) = elements(body).next().ok_or_else(|| bad("markup", "no element"))?;
            Ok(Output::Markup(range, inner))
        }
        other => Err(bad("payload", other)),
    }
}

// Edits.

fn edit_tree(node: &NodeName, edit: &Edit) -> Tree {
    let e = Element::new("edit").with("node", node.path());
    match edit {
        Edit::Insert { offset, text } => Tree::elem(
            e.with("kind", "insert").with("offset", offset.to_string()),
            vec![Tree::text(text.clone())],
        ),
        Edit::Remove { offset, text } => Tree::elem(
            e.with("kind", "remove").with("offset", offset.to_string()),
            vec![Tree::text(text.clone())],
        ),
        Edit::SetNode(text) => Tree::elem(e.with("kind", "set"), vec![Tree::text(text.clone())]),
        Edit::Perspective(p) => {
            let visible: Vec<String> = p.visible.iter().map(|r| format!("{}-{}", r.start, r.end)).collect();
            Tree::elem(
                e.with("kind", "perspective")
                    .with("visible", visible.join(","))
                    .with("required", p.required.to_string()),
                vec![],
            )
        }
    }
}

fn tree_edit(e: &Element, body: &[Tree]) -> Result<(NodeName, Edit), WireError> {
    if e.name() != "edit" {
        return Err(bad("edit", e.name()));
    }
    let node = node_name(prop(e, "node")?)?;
    let edit = match prop(e, "kind")? {
        "insert" => Edit::insert(number("offset", prop(e, "offset")?)?, content(body)),
        "remove" => Edit::remove(number("offset", prop(e, "offset")?)?, content(body)),
        "set" => Edit::SetNode(content(body)),
        "perspective" => {
            let visible = prop(e, "visible")?;
            let ranges = visible
                .split(',')
                .filter(|s| !s.is_empty())
                .map(|r| {
                    let (a, b) = r.split_once('-').ok_or_else(|| bad("visible", r))?;
                    Ok(TextRange::new(number("visible", a)?, number("visible", b)?))
                })
                .collect::<Result<Vec<_>, WireError>>()?;
            Edit::Perspective(Perspective::new(ranges, number("required", prop(e, "required")?)?))
        }
        other => return Err(bad("kind", other)),
    };
    Ok((node, edit))
}

// Whole messages.

impl ClientMessage {
    pub fn name(&self) -> &'static str {
        match self {
            ClientMessage::SessionStart => "session_start",
            ClientMessage::NodeEdits { .. } => "node_edits",
            ClientMessage::BlobUpdate { .. } => "blob_update",
            ClientMessage::DialogResult { .. } => "dialog_result",
        }
    }

    pub fn to_chunks(&self) -> Result<Vec<Vec<u8>>, WireError> {
        let mut out = vec![self.name().as_bytes().to_vec()];
        match self {
            ClientMessage::SessionStart => {}
            ClientMessage::NodeEdits { version, edits } => {
                out.push(version.map(|v| v.0.to_string()).unwrap_or_default().into_bytes());
                let trees: Vec<Tree> = edits.iter().map(|(n, e)| edit_tree(n, e)).collect();
                out.push(yxml::to_string(&trees)?.into_bytes());
            }
            ClientMessage::BlobUpdate { node, content } => {
                out.push(node.path().as_bytes().to_vec());
                out.push(content.as_bytes().to_vec());
            }
            ClientMessage::DialogResult { id, result } => {
                out.push(id.as_bytes().to_vec());
                out.push(result.as_bytes().to_vec());
            }
        }
        Ok(out)
    }

    pub fn from_chunks(chunks: &[Vec<u8>]) -> Result<ClientMessage, WireError> {
        let (name, args) = chunks.split_first().ok_or(WireError::Empty)?;
        match name.as_slice() {
            b"session_start" => {
                arity("session_start", args, 0)?;
                Ok(ClientMessage::SessionStart)
            }
            b"node_edits" => {
                arity("node_edits", args, 2)?;
                let v = text("version", &args[0])?;
                let version = if v.is_empty() { None } else { Some(VersionId(number("version", &v)?)) };
                let trees = yxml::parse(&text("edits", &args[1])?)?;
                let edits = elements(trees).map(|(e, b)| tree_edit(&e, &b)).collect::<Result<_, _>>()?;
                Ok(ClientMessage::NodeEdits { version, edits })
            }
            b"blob_update" => {
                arity("blob_update", args, 2)?;
                Ok(ClientMessage::BlobUpdate {
                    node: node_name(&text("node", &args[0])?)?,
                    content: text("content", &args[1])?,
                })
            }
            b"dialog_result" => {
                arity("dialog_result", args, 2)?;
                Ok(ClientMessage::DialogResult {
                    id: text("id", &args[0])?,
                    result: text("result", &args[1])?,
                })
            }
            other => Err(WireError::UnknownMessage(String::from_utf8_lossy(other).into_owned())),
        }
    }
}

impl ServerMessage {
    pub fn name(&self) -> &'static str {
        match self {
            ServerMessage::SessionReady { .. } => "session_ready",
            ServerMessage::Assigned { .. } => "assigned",
            ServerMessage::Report { .. } => "report",
            ServerMessage::Status { .. } => "status",
            ServerMessage::RemovedVersions(_) => "removed_versions",
            ServerMessage::Error(_) => "error",
        }
    }

    pub fn to_chunks(&self) -> Result<Vec<Vec<u8>>, WireError> {
        let mut out = vec![self.name().as_bytes().to_vec()];
        let mut push = |s: String| out.push(s.into_bytes());
        match self {
            ServerMessage::SessionReady { protocol } => push(protocol.to_string()),
            ServerMessage::Assigned { version, execs } => {
                push(version.0.to_string());
                let trees: Vec<Tree> = execs
                    .iter()
                    .map(|(n, s, e)| {
                        Tree::elem(
                            Element::new("exec")
                                .with("node", n.path())
                                .with("span", s.0.to_string())
                                .with("id", e.0.to_string()),
                            vec![],
                        )
                    })
                    .collect();
                push(yxml::to_string(&trees)?);
            }
            ServerMessage::Report {
                exec,
                node,
                version,
                output,
            } => {
                push(exec.0.to_string());
                push(node.path().to_owned());
                push(version.0.to_string());
                push(yxml::to_string(&[output_to_tree(output)?])?);
            }
            ServerMessage::Status { exec, status } => {
                push(exec.0.to_string());
                push(status.as_str().to_owned());
            }
            ServerMessage::RemovedVersions(vs) => {
                push(vs.iter().map(|v| v.0.to_string()).collect::<Vec<_>>().join(","))
            }
            ServerMessage::Error(s) => push(s.clone()),
        }
        Ok(out)
    }

    pub fn from_chunks(chunks: &[Vec<u8>]) -> Result<ServerMessage, WireError> {
        let (name, args) = chunks.split_first().ok_or(WireError::Empty)?;
        let args: Vec<String> = match name.as_slice() {
            b"session_ready" | b"assigned" | b"report" | b"status" | b"removed_versions" | b"error" => {
                args.iter().map(|a| text("argument", a)).collect::<Result<_, _>>()?
            }
            other => return Err(WireError::UnknownMessage(String::from_utf8_lossy(other).into_owned())),
        };
        let id = |s: &str| number("exec", s).map(ExecId);
        let ver = |s: &str| number("version", s).map(VersionId);
        let check = |name: &'static str, n: usize| {
            if args.len() == n {
                Ok(())
            } else {
                Err(WireError::Arity {
                    name,
                    expected: n,
                    found: args.len(),
                })
            }
        };
        match name.as_slice() {
            b"session_ready" => {
                check("session_ready", 1)?;
                Ok(ServerMessage::SessionReady {
                    protocol: number("protocol", &args[0])?,
                })
            }
            b"assigned" => {
                check("assigned", 2)?;
                let execs = elements(yxml::parse(&args[1])?)
                    .map(|(e, _)| {
                        Ok((
                            node_name(prop(&e, "node")?)?,
                            SpanId(number("span", prop(&e, "span")?)?),
                            id(prop(&e, "id")?)?,
                        ))
                    })
                    .collect::<Result<_, WireError>>()?;
                Ok(ServerMessage::Assigned {
                    version: ver(&args[0])?,
                    execs,
                })
            }
            b"report" => {
                check("report", 4)?;
                let tree = yxml::parse(&args[3])?.into_iter().next().ok_or_else(|| bad("payload", ""))?;
                Ok(ServerMessage::Report {
                    exec: id(&args[0])?,
                    node: node_name(&args[1])?,
                    version: ver(&args[2])?,
                    output: tree_to_output(tree)?,
                })
            }
            b"status" => {
                check("status", 2)?;
                Ok(ServerMessage::Status {
                    exec: id(&args[0])?,
                    status: Status::parse(&args[1]).ok_or_else(|| bad("status", &args[1]))?,
                })
            }
            b"removed_versions" => {
                check("removed_versions", 1)?;
                let vs = args[0].split(',').filter(|s| !s.is_empty()).map(ver).collect::<Result<_, _>>()?;
                Ok(ServerMessage::RemovedVersions(vs))
            }
            _ => {
                check("error", 1)?;
                Ok(ServerMessage::Error(args[0].clone()))
            }
        }
    }
}

impl From<crate::execution::Event> for ServerMessage {
    fn from(e: crate::execution::Event) -> Self {
        use crate::execution::Event;
        match e {
            Event::Assigned { version, execs } => ServerMessage::Assigned { version, execs },
            Event::Report {
                exec,
                node,
                version,
                output,
            } => ServerMessage::Report {
                exec,
                node,
                version,
                output,
            },
            Event::Status { exec, status } => ServerMessage::Status { exec, status },
            Event::RemovedVersions(vs) => ServerMessage::RemovedVersions(vs),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pretty::format_string;

    fn roundtrip_server(m: ServerMessage) {
        let chunks = m.to_chunks().unwrap();
        assert_eq!(ServerMessage::from_chunks(&chunks).unwrap(), m);
    }

    #[test]
    fn client_messages_roundtrip() {
        let a = NodeName::theory("A.thy").unwrap();
        let msgs = vec![
            ClientMessage::SessionStart,
            ClientMessage::NodeEdits {
                version: Some(VersionId(7)),
                edits: vec![
                    (a.clone(), Edit::insert(3, "lemma ⟨x⟩")),
                    (a.clone(), Edit::remove(0, "abc")),
                    (a.clone(), Edit::Perspective(Perspective::new(vec![TextRange::new(0, 4), TextRange::new(6, 9)], true))),
                    (a.clone(), Edit::Perspective(Perspective::new(vec![], false))),
                    (NodeName::auxiliary("x.ftl").unwrap(), Edit::SetNode(String::new())),
                ],
            },
            ClientMessage::NodeEdits {
                version: None,
                edits: vec![],
            },
            ClientMessage::BlobUpdate {
                node: NodeName::auxiliary("d/b.bib").unwrap(),
                content: "@book{x}".into(),
            },
            ClientMessage::DialogResult {
                id: "3".into(),
                result: "ok".into(),
            },
        ];
        for m in msgs {
            assert_eq!(ClientMessage::from_chunks(&m.to_chunks().unwrap()).unwrap(), m);
        }
    }

    #[test]
    fn server_messages_roundtrip() {
        let a = NodeName::theory("A.thy").unwrap();
        roundtrip_server(ServerMessage::SessionReady { protocol: 1 });
        roundtrip_server(ServerMessage::Assigned {
            version: VersionId(2),
            execs: vec![(a.clone(), SpanId(4), ExecId(9))],
        });
        roundtrip_server(ServerMessage::Status {
            exec: ExecId(9),
            status: Status::Cancelled,
        });
        roundtrip_server(ServerMessage::RemovedVersions(vec![VersionId(1), VersionId(2)]));
        roundtrip_server(ServerMessage::RemovedVersions(vec![]));
        roundtrip_server(ServerMessage::Error("x".into()));
        roundtrip_server(ServerMessage::Report {
            exec: ExecId(1),
            node: a.clone(),
            version: VersionId(3),
            output: Output::Markup(TextRange::new(2, 5), Element::new("active").with("label", "fix")),
        });
    }

    #[test]
    fn message_payload_keeps_layout() {
        let m = Message::new(Severity::Error, Phase::Semantics, TextRange::new(1, 4), "false: 2 + 3 = 6 does not hold");
        let chunks = ServerMessage::Report {
            exec: ExecId(1),
            node: NodeName::theory("A.thy").unwrap(),
            version: VersionId(1),
            output: Output::Message(m.clone()),
        }
        .to_chunks()
        .unwrap();
        let ServerMessage::Report {
            output: Output::Message(back),
            ..
        } = ServerMessage::from_chunks(&chunks).unwrap()
        else {
            panic!("not a message report")
        };
        assert_eq!((back.severity, back.phase, back.range), (m.severity, m.phase, m.range));
        for w in [5, 10, 80] {
            assert_eq!(format_string(&back.body, w), format_string(&m.body, w));
        }
    }

    #[test]
    fn doc_serialization_is_readable() {
        let d = Doc::block(2, vec![Doc::text("a"), Doc::brk(1, 0), Doc::marked(Element::new("b"), "c")]);
        let s = doc_string(&d).unwrap();
        assert_eq!(
            s,
            "\u{5}\u{6}block\u{6}indent=2\u{6}consistent=false\u{5}a\
             \u{5}\u{6}break\u{6}width=1\u{6}indent=0\u{5}\u{5}\u{6}\u{5}\
             \u{5}\u{6}b\u{5}c\u{5}\u{6}\u{5}\u{5}\u{6}\u{5}"
        );
        assert_eq!(parse_doc(&s).unwrap(), d);
        assert!(matches!(
            doc_string(&Doc::marked(Element::new("break"), "x")),
            Err(WireError::ReservedName(_))
        ));
    }

    #[test]
    fn unknown_names_and_arity() {
        assert_eq!(
            ClientMessage::from_chunks(&[b"nope".to_vec()]),
            Err(WireError::UnknownMessage("nope".into()))
        );
        assert!(matches!(
            ClientMessage::from_chunks(&[b"blob_update".to_vec()]),
            Err(WireError::Arity { found: 0, .. })
        ));
        assert_eq!(ClientMessage::from_chunks(&[]), Err(WireError::Empty));
    }
}
