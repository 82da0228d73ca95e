//! Demo semantics for theory nodes: integer definitions and lemmas threaded
//! through the command sequence, imports merged at the header.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use super::arith::{eval, judge, parse_claim, Claim, Expr, Rel, Verdict};
use super::{Cancel, Output, Registry, Report, Sink};
use crate::document::{CommandSpan, Import, Node, SpanKind};
use crate::markup::Element;
use crate::message::{Message, Phase, Severity};
use crate::syntax::{Token, TokenKind, CARTOUCHE_BODY_OFFSET};
use crate::text::TextRange;

/// Everything a command may depend on from the commands before it.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Context {
    pub theory: String,
    pub defs: BTreeMap<String, i64>,
    pub exports: BTreeSet<String>,
    /// A header (or its absence) has been reported.
    pub started: bool,
    pub ended: bool,
}

impl Context {
    /// Context of a node whose first span is a command, not a header.
    pub fn headerless(node: &Node) -> Context {
        Context {
            theory: node.name().stem().to_owned(),
            ..Context::default()
        }
    }
}

/// What an import contributes to the importer's header.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ImportContext {
    Ready(Arc<Context>),
    /// Import name does not denote a theory file.
    Unresolved,
    /// Theory file not part of the document.
    Missing,
    Cyclic,
    /// The imported theory has not finished checking.
    Unavailable,
}

const DOCUMENT_COMMANDS: [&str; 6] = [
    "text",
    "chapter",
    "section",
    "subsection",
    "subsubsection",
    "paragraph",
];

/// Result of checking one span: its report and the context after it.
pub type Step = (Report, Arc<Context>);

#[derive(Clone, Debug, Default)]
pub struct TheoryChecker {
    registry: Registry,
}

struct Out<'a> {
    sink: Sink<'a>,
    report: Report,
}

impl Out<'_> {
    fn emit(&mut self, o: Output) {
        (self.sink)(o.clone());
        self.report.push(o);
    }

    fn msg(&mut self, severity: Severity, phase: Phase, range: TextRange, body: impl Into<String>) {
        self.emit(Output::Message(Message::new(severity, phase, range, body)));
    }

    fn error(&mut self, range: TextRange, body: impl Into<String>) {
        self.msg(Severity::Error, Phase::Semantics, range, body);
    }

    fn writeln(&mut self, range: TextRange, body: impl Into<String>) {
        self.msg(Severity::Writeln, Phase::Semantics, range, body);
    }

    fn markup(&mut self, range: TextRange, el: Element) {
        self.emit(Output::Markup(range, el));
    }
}

/// Token markup and lexical errors. `false` if there were errors.
fn syntax(tokens: &[Token], out: &mut Out<'_>) -> bool {
    let mut ok = true;
    for t in tokens {
        let name = match t.kind {
            TokenKind::CommandKeyword => "command",
            TokenKind::Keyword => "keyword",
            TokenKind::QuotedString => "string",
            TokenKind::Cartouche => "cartouche",
            TokenKind::Comment => "comment",
            TokenKind::Error => {
                ok = false;
                let what = if t.source.starts_with('"') {
                    "unterminated string"
                } else if t.source.starts_with("(*") {
                    "unterminated comment"
                } else if t.source.starts_with("\\<open>") {
                    "unterminated cartouche"
                } else {
                    "malformed input"
                };
                out.msg(Severity::Error, Phase::Syntax, t.range, what);
                continue;
            }
            _ => continue,
        };
        out.markup(t.range, Element::new(name));
    }
    ok
}

/// Source of an embedded text argument and the offset of its first
/// character. Strings with escapes have no faithful offsets and are refused.
fn embedded(t: &Token) -> Option<(String, usize)> {
    match t.kind {
        TokenKind::Cartouche => Some((t.content(), t.range.start + CARTOUCHE_BODY_OFFSET)),
        TokenKind::QuotedString if !t.source.contains('\\') => Some((t.content(), t.range.start + 1)),
        _ => None,
    }
}

/// Claim in a command's arguments: either one string or cartouche, or the
/// bare tokens after the command keyword.
fn claim_of(span: &CommandSpan) -> Result<Claim, (TextRange, String)> {
    let args: Vec<&Token> = span.arguments().collect();
    let whole = TextRange::new(0, span.range.len());
    if args.is_empty() {
        return Err((whole, format!("`{}` needs a claim", span.command)));
    }
    if let [one] = args.as_slice() {
        if let Some((src, base)) = embedded(one) {
            return parse_claim(&src, base).map_err(|e| (e.range, e.message));
        }
    }
    let masked: String = span
        .tokens
        .iter()
        .flat_map(|t| {
            let blank = t.is_command() || t.kind == TokenKind::Comment;
            t.source.chars().map(move |c| if blank && c != '\n' { ' ' } else { c })
        })
        .collect();
    parse_claim(&masked, 0).map_err(|e| (e.range, e.message))
}

impl TheoryChecker {
    /// `registry` checks files attached to load commands.
    pub fn new(registry: Registry) -> Self {
        TheoryChecker { registry }
    }

    /// The prelude: header, keyword merge and imported contexts.
    pub fn check_prelude(
        &self,
        node: &Node,
        span: &CommandSpan,
        imports: &[(Import, ImportContext)],
        cancel: &Cancel,
        sink: Sink<'_>,
    ) -> Option<Step> {
        if cancel.is_cancelled() {
            return None;
        }
        let mut out = Out {
            sink,
            report: Report::default(),
        };
        let mut ctx = Context::headerless(node);
        ctx.started = true;
        let lexical_ok = syntax(&span.tokens, &mut out);
        let whole = TextRange::new(0, span.range.len());
        match (node.header(), node.header_error()) {
            (_, Some(e)) => out.msg(Severity::Error, Phase::Syntax, e.range, e.message.clone()),
            (Some(h), None) => {
                for r in &h.keyword_ranges {
                    out.markup(*r, Element::new("header"));
                }
                out.markup(h.name_range, Element::new("theory").with("name", h.name.as_str()));
                ctx.theory = h.name.clone();
                if h.name != node.name().stem() {
                    out.error(
                        h.name_range,
                        format!("theory `{}` must live in file `{}.thy`", h.name, h.name),
                    );
                }
                let rest: Vec<&Token> = span
                    .tokens
                    .iter()
                    .filter(|t| t.range.start >= h.end && !t.kind.is_improper())
                    .collect();
                if let (Some(a), Some(b)) = (rest.first(), rest.last()) {
                    out.msg(
                        Severity::Error,
                        Phase::Syntax,
                        TextRange::new(a.range.start, b.range.end),
                        "unexpected material after `begin`",
                    );
                }
            }
            (None, None) => {
                if lexical_ok && span.tokens.iter().any(|t| !t.kind.is_improper()) {
                    out.msg(Severity::Error, Phase::Syntax, whole, "missing theory header");
                }
            }
        }
        if let Some(c) = node.keyword_conflict() {
            out.error(whole, c.to_string());
        }
        for (imp, state) in imports {
            match state {
                ImportContext::Ready(other) => {
                    for (name, v) in &other.defs {
                        match ctx.defs.get(name) {
                            Some(w) if w != v => out.error(
                                imp.range,
                                format!("imports disagree on `{name}` ({w} vs {v})"),
                            ),
                            _ => {
                                ctx.defs.insert(name.clone(), *v);
                            }
                        }
                    }
                }
                ImportContext::Unresolved => {
                    out.error(imp.range, format!("`{}` does not name a theory file", imp.name))
                }
                ImportContext::Missing => out.error(
                    imp.range,
                    format!("imported theory `{}` is not part of the document", imp.name),
                ),
                ImportContext::Cyclic => out.error(imp.range, format!("cyclic import of `{}`", imp.name)),
                ImportContext::Unavailable => out.error(
                    imp.range,
                    format!("imported theory `{}` did not finish checking", imp.name),
                ),
            }
        }
        Some((out.report, Arc::new(ctx)))
    }

    /// One command in the context left by its predecessor. Output ranges
    /// are relative to the span start.
    pub fn check_command(
        &self,
        node: &Node,
        span: &CommandSpan,
        before: &Context,
        cancel: &Cancel,
        sink: Sink<'_>,
    ) -> Option<Step> {
        debug_assert_eq!(span.kind, SpanKind::Command);
        if cancel.is_cancelled() {
            return None;
        }
        let mut out = Out {
            sink,
            report: Report::default(),
        };
        let mut ctx = before.clone();
        let whole = TextRange::new(0, span.range.len());
        let head = span.tokens.iter().find(|t| t.is_command()).map_or(whole, |t| t.range);
        if !syntax(&span.tokens, &mut out) {
            return Some((out.report, Arc::new(ctx)));
        }
        if !ctx.started {
            ctx.started = true;
            out.msg(Severity::Error, Phase::Syntax, head, "missing theory header");
        }
        if ctx.ended {
            out.error(head, "command after `end`");
            return Some((out.report, Arc::new(ctx)));
        }
        let args: Vec<&Token> = span.arguments().collect();
        let name = span.command.as_str();
        match name {
            "definition" => self.definition(span, &mut ctx, &mut out),
            "lemma" => self.lemma(span, &ctx, &mut out),
            "ML" => match args.as_slice() {
                [t] if t.kind == TokenKind::Cartouche => out.markup(t.range, Element::new("ML")),
                _ => out.error(head, "`ML` expects one cartouche"),
            },
            "export_text" => match args.as_slice() {
                [n, body] if matches!(n.kind, TokenKind::Identifier | TokenKind::QuotedString)
                    && matches!(body.kind, TokenKind::QuotedString | TokenKind::Cartouche) =>
                {
                    let entry = n.content();
                    if !crate::sessions::valid_name(&entry) {
                        out.error(n.range, format!("`{entry}` is not a valid export name"));
                    } else if !ctx.exports.insert(entry.clone()) {
                        out.error(n.range, format!("export `{entry}` already defined"));
                    } else {
                        out.report.exports.push((entry.clone(), body.content().into_bytes()));
                        out.writeln(n.range, format!("exported `{entry}`"));
                    }
                }
                _ => out.error(head, "`export_text` expects a name and a text"),
            },
            "end" => {
                if let Some(t) = args.first() {
                    out.error(TextRange::new(t.range.start, whole.end), "unexpected material after `end`");
                }
                ctx.ended = true;
            }
            _ if DOCUMENT_COMMANDS.contains(&name) => match args.as_slice() {
                [t] if matches!(t.kind, TokenKind::QuotedString | TokenKind::Cartouche) => {
                    out.markup(t.range, Element::new("document").with("kind", name))
                }
                _ => out.error(head, format!("`{name}` expects a single text argument")),
            },
            _ if node.keywords().command(name).is_some_and(|a| a.load) => {
                if !self.load(span, &args, head, cancel, &mut out) {
                    return None;
                }
            }
            _ => out.msg(
                Severity::Warning,
                Phase::Semantics,
                head,
                format!("command `{name}` has no semantics here"),
            ),
        }
        Some((out.report, Arc::new(ctx)))
    }

    fn definition(&self, span: &CommandSpan, ctx: &mut Context, out: &mut Out<'_>) {
        let whole = TextRange::new(0, span.range.len());
        let claim = match claim_of(span) {
            Ok(c) => c,
            Err((r, m)) => return out.error(r, m),
        };
        let (Expr::Var(name, at), Some((Rel::Eq, rhs))) = (&claim.lhs, &claim.rel) else {
            return out.error(whole, "a definition has the form `name = expression`");
        };
        if ctx.defs.contains_key(name) {
            return out.error(*at, format!("`{name}` is already defined"));
        }
        let defs = &ctx.defs;
        match eval(rhs, &|x| defs.get(x).copied()) {
            Ok(v) => {
                out.writeln(whole, format!("defined {name} = {v}"));
                out.markup(*at, Element::new("defined").with("value", v.to_string()));
                ctx.defs.insert(name.clone(), v);
            }
            Err(e) => out.error(e.range, e.message),
        }
    }

    fn lemma(&self, span: &CommandSpan, ctx: &Context, out: &mut Out<'_>) {
        let whole = TextRange::new(0, span.range.len());
        let claim = match claim_of(span) {
            Ok(c) => c,
            Err((r, m)) => return out.error(r, m),
        };
        if claim.rel.is_none() {
            return out.error(whole, "a lemma must be a comparison");
        }
        match judge(&claim, &|x| ctx.defs.get(x).copied()) {
            Ok(Verdict::Holds { .. }) => out.writeln(whole, "checked"),
            Ok(Verdict::Fails { lhs, rhs, rel }) => {
                out.error(whole, format!("false: {lhs} {} {rhs} does not hold", rel.as_str()));
                if let Some((Rel::Eq, Expr::Num(_, at))) = &claim.rel {
                    out.markup(
                        *at,
                        Element::new("active")
                            .with("label", "fix arithmetic")
                            .with("replace", lhs.to_string()),
                    );
                }
            }
            Ok(Verdict::Value(_)) => unreachable!("comparison checked above"),
            Err(e) => out.error(e.range, e.message),
        }
    }

    /// `false` if cancelled while checking the attached file.
    fn load(
        &self,
        span: &CommandSpan,
        args: &[&Token],
        head: TextRange,
        cancel: &Cancel,
        out: &mut Out<'_>,
    ) -> bool {
        let Some(att) = &span.attachment else {
            out.error(head, format!("`{}` needs a file argument", span.command));
            return true;
        };
        let at = args.first().map_or(head, |t| t.range);
        let Some(blob) = &att.node else {
            out.error(at, format!("bad file path `{}`", att.path));
            return true;
        };
        let Some(content) = &att.content else {
            out.error(at, format!("file `{}` is not loaded", att.path));
            return true;
        };
        out.markup(at, Element::new("file").with("path", blob.path()));
        out.writeln(at, format!("loaded `{}`", att.path));
        let Some(outcome) = self.registry.check_file(blob, content, cancel, &super::discard) else {
            return true;
        };
        let Some(r) = outcome.report() else { return false };
        let errors = r.messages.iter().filter(|m| m.is_error()).count();
        if errors > 0 {
            let s = if errors == 1 { "" } else { "s" };
            out.error(at, format!("`{}` has {errors} error{s}", att.path));
        }
        true
    }
}
