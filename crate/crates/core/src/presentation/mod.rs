//! Shallow presentation of node sources as LaTeX or HTML.
//!
//! Document commands become headings and text blocks, markdown item lines
//! become list environments, embedded comments become comment macros,
//! symbols are looked up in a [`SymbolTable`], antiquotations are replaced
//! by handler output, and all other source is escaped verbatim.

mod antiquote;
mod symbols;
mod writer;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

pub use antiquote::{argument, Antiquotations, Handler};
pub use symbols::{SymbolEntry, SymbolTable};
pub use writer::{escape_html, escape_latex, render, unescape_html, unescape_latex};

use crate::syntax::{
    tokenize, unquote, KeywordTable, SymbolKind, Token, TokenKind, CARTOUCHE_BODY_OFFSET, CLOSE,
    COMMENT, OPEN,
};
use crate::text::TextRange;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Latex,
    Html,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "latex" => Ok(Format::Latex),
            "html" => Ok(Format::Html),
            _ => Err(format!("unknown format `{s}` (expected latex or html)")),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Latex => "latex",
            Format::Html => "html",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Heading {
    Chapter,
    Section,
    Subsection,
    Subsubsection,
    Paragraph,
}

impl Heading {
    fn of_command(name: &str) -> Option<Heading> {
        Some(match name {
            "chapter" => Heading::Chapter,
            "section" => Heading::Section,
            "subsection" => Heading::Subsection,
            "subsubsection" => Heading::Subsubsection,
            "paragraph" => Heading::Paragraph,
            _ => return None,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ListKind {
    Itemize,
    Enumerate,
    Description,
}

impl ListKind {
    fn of_symbol(source: &str) -> Option<ListKind> {
        match source {
            "\\<^item>" => Some(ListKind::Itemize),
            "\\<^enum>" => Some(ListKind::Enumerate),
            "\\<^descr>" => Some(ListKind::Description),
            _ => None,
        }
    }
}

/// Format-neutral presentation events. Begin/end pairs nest properly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Event {
    BeginHeading(Heading),
    EndHeading,
    BeginText,
    EndText,
    /// Separates paragraphs inside a text block.
    Paragraph,
    BeginList(ListKind),
    EndList(ListKind),
    BeginItem,
    EndItem,
    /// Label of a description item; directly follows `BeginItem`.
    BeginLabel,
    EndLabel,
    BeginComment,
    EndComment,
    BeginFormal,
    EndFormal,
    /// Source text, escaped by the writer.
    Text(String),
    /// Source of a named or control symbol.
    Symbol(String),
    /// Antiquotation output, inlined unchanged.
    Raw(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PresentError {
    #[error("unterminated cartouche at offset {offset}")]
    UnterminatedCartouche { offset: usize },
    #[error("unterminated string at offset {offset}")]
    UnterminatedString { offset: usize },
    #[error("unterminated comment at offset {offset}")]
    UnterminatedComment { offset: usize },
    #[error("unterminated antiquotation at offset {offset}")]
    UnterminatedAntiquotation { offset: usize },
    #[error("unknown antiquotation `{name}` at {range}; registered: {}", .known.join(", "))]
    UnknownAntiquotation {
        name: String,
        range: TextRange,
        known: Vec<String>,
    },
    #[error("antiquotation `{name}` at {range} failed: {message}")]
    Antiquotation {
        name: String,
        range: TextRange,
        message: String,
    },
    #[error("antiquotation `{0}` is already registered")]
    DuplicateAntiquotation(String),
}

/// Commands whose argument is document text rather than formal source.
fn is_document_command(name: &str) -> bool {
    Heading::of_command(name).is_some() || matches!(name, "text" | "txt")
}

struct Builder<'a> {
    chars: Vec<char>,
    handlers: &'a Antiquotations,
    format: Format,
    events: Vec<Event>,
    formal_open: bool,
}

impl Builder<'_> {
    fn text(&mut self, s: &str) {
        if s.is_empty() {
            return;
        }
        if let Some(Event::Text(t)) = self.events.last_mut() {
            t.push_str(s);
        } else {
            self.events.push(Event::Text(s.to_owned()));
        }
    }

    fn open_formal(&mut self) {
        if !self.formal_open {
            self.events.push(Event::BeginFormal);
            self.formal_open = true;
        }
    }

    fn close_formal(&mut self) {
        if self.formal_open {
            self.events.push(Event::EndFormal);
            self.formal_open = false;
        }
    }

    /// Symbols of `chars[range]` as text and symbol events.
    fn symbols(&mut self, from: usize, to: usize) {
        let mut i = from;
        while i < to {
            let (kind, len) = crate::syntax::scan_symbol(&self.chars, i);
            let len = len.min(to - i);
            let src: String = self.chars[i..i + len].iter().collect();
            match kind {
                SymbolKind::Named | SymbolKind::Control => self.events.push(Event::Symbol(src)),
                _ => self.text(&src),
            }
            i += len;
        }
    }

    fn at(&self, i: usize, lit: &str) -> bool {
        lit.chars().enumerate().all(|(k, c)| self.chars.get(i + k) == Some(&c))
    }

    /// End (exclusive) of an antiquotation starting at `i` with `@{`.
    fn antiquotation_end(&self, i: usize, to: usize) -> Option<usize> {
        let mut depth = 0usize;
        let mut cartouche = 0usize;
        let mut string = false;
        let mut j = i + 1;
        while j < to {
            let c = self.chars[j];
            if string {
                match c {
                    '\\' => j += 1,
                    '"' => string = false,
                    _ => {}
                }
            } else if self.at(j, OPEN) {
                cartouche += 1;
                j += OPEN.chars().count();
                continue;
            } else if self.at(j, CLOSE) && cartouche > 0 {
                cartouche -= 1;
                j += CLOSE.chars().count();
                continue;
            } else if cartouche == 0 {
                match c {
                    '"' => string = true,
                    '{' => depth += 1,
                    '}' => {
                        depth -= 1;
                        if depth == 0 {
                            return Some(j + 1);
                        }
                    }
                    _ => {}
                }
            }
            j += 1;
        }
        None
    }

    /// Inline document text: symbols and antiquotations. `base` maps
    /// indices into `chars` to source offsets; both coincide except inside
    /// quoted strings, whose unescaped content is presented.
    fn inline(&mut self, from: usize, to: usize) -> Result<(), PresentError> {
        let mut i = from;
        let mut plain = from;
        while i < to {
            if self.at(i, "@{") {
                self.symbols(plain, i);
                let end = self
                    .antiquotation_end(i, to)
                    .ok_or(PresentError::UnterminatedAntiquotation { offset: i })?;
                let inner: String = self.chars[i + 2..end - 1].iter().collect();
                let name_len = inner
                    .find(|c: char| !(c.is_alphanumeric() || c == '_' || c == '.'))
                    .unwrap_or(inner.len());
                let (name, args) = inner.split_at(name_len);
                let range = TextRange::new(i, end);
                let handler = self.handlers.get(name).ok_or_else(|| PresentError::UnknownAntiquotation {
                    name: name.to_owned(),
                    range,
                    known: self.handlers.names(),
                })?;
                let out = handler(args, self.format).map_err(|message| PresentError::Antiquotation {
                    name: name.to_owned(),
                    range,
                    message,
                })?;
                self.events.push(Event::Raw(out));
                i = end;
                plain = end;
                continue;
            }
            i += crate::syntax::scan_symbol(&self.chars, i).1;
        }
        self.symbols(plain, to.min(i));
        Ok(())
    }

    /// End of the cartouche opening at `i`, if it closes before `to`.
    fn cartouche_end(&self, i: usize, to: usize) -> Option<usize> {
        let mut depth = 0usize;
        let mut j = i;
        while j < to {
            if self.at(j, OPEN) {
                depth += 1;
            } else if self.at(j, CLOSE) {
                depth -= 1;
                if depth == 0 {
                    return Some(j + CLOSE.chars().count());
                }
            }
            j += crate::syntax::scan_symbol(&self.chars, j).1;
        }
        None
    }

    /// A text block body with markdown item lines.
    fn markdown(&mut self, from: usize, to: usize) -> Result<(), PresentError> {
        let mut lists: Vec<ListKind> = Vec::new();
        let mut pending_par = false;
        let mut emitted = false;
        let mut line_start = from;
        while line_start <= to {
            let line_end = (line_start..to).find(|&k| self.chars[k] == '\n').unwrap_or(to);
            let last = line_end == to;
            let mut k = line_start;
            while k < line_end && self.chars[k].is_whitespace() {
                k += 1;
            }
            if k == line_end {
                close_lists(&mut self.events, &mut lists, 0);
                pending_par |= emitted;
            } else {
                if pending_par {
                    self.events.push(Event::Paragraph);
                    pending_par = false;
                }
                let mut kinds = Vec::new();
                while let Some(kind) = self.item_symbol(k, line_end) {
                    kinds.push(kind.0);
                    k += kind.1;
                }
                if kinds.is_empty() {
                    self.symbols(line_start, k);
                } else {
                    enter_item(&mut self.events, &mut lists, &kinds);
                    while k < line_end && self.chars[k] == ' ' {
                        k += 1;
                    }
                    if kinds.last() == Some(&ListKind::Description) && self.at(k, OPEN) {
                        if let Some(end) = self.cartouche_end(k, line_end) {
                            self.events.push(Event::BeginLabel);
                            self.inline(k + CARTOUCHE_BODY_OFFSET, end - CLOSE.chars().count())?;
                            self.events.push(Event::EndLabel);
                            k = end;
                            while k < line_end && self.chars[k] == ' ' {
                                k += 1;
                            }
                        }
                    }
                }
                self.inline(k, line_end)?;
                emitted = true;
            }
            if last {
                break;
            }
            if !lists.is_empty() || emitted && !pending_par {
                self.text("\n");
            }
            line_start = line_end + 1;
        }
        close_lists(&mut self.events, &mut lists, 0);
        Ok(())
    }

    fn item_symbol(&self, i: usize, to: usize) -> Option<(ListKind, usize)> {
        if i >= to {
            return None;
        }
        let (kind, len) = crate::syntax::scan_symbol(&self.chars, i);
        if kind != SymbolKind::Control || i + len > to {
            return None;
        }
        let src: String = self.chars[i..i + len].iter().collect();
        ListKind::of_symbol(&src).map(|k| (k, len))
    }

    /// Body range of a document command argument token.
    fn argument_body(&self, tok: &Token) -> (usize, usize) {
        match tok.kind {
            TokenKind::Cartouche => (
                tok.range.start + CARTOUCHE_BODY_OFFSET,
                tok.range.end - CLOSE.chars().count(),
            ),
            _ => (tok.range.start + 1, tok.range.end - 1),
        }
    }

    fn comment(&mut self, tok: &Token) -> Result<(), PresentError> {
        let rel = tok.source.find(OPEN).map(|b| tok.source[..b].chars().count());
        let Some(rel) = rel else {
            self.text(&tok.source);
            return Ok(());
        };
        let open = tok.range.start + rel;
        self.events.push(Event::BeginComment);
        self.inline(open + CARTOUCHE_BODY_OFFSET, tok.range.end - CLOSE.chars().count())?;
        self.events.push(Event::EndComment);
        Ok(())
    }

    fn formal(&mut self, tok: &Token) -> Result<(), PresentError> {
        self.open_formal();
        match tok.kind {
            TokenKind::Comment if tok.source.starts_with(COMMENT) => self.comment(tok),
            _ => {
                self.symbols(tok.range.start, tok.range.end);
                Ok(())
            }
        }
    }
}

fn close_lists(events: &mut Vec<Event>, lists: &mut Vec<ListKind>, keep: usize) {
    while lists.len() > keep {
        let k = lists.pop().expect("non-empty");
        events.push(Event::EndItem);
        events.push(Event::EndList(k));
    }
}

/// Move from the open lists to a new item whose line starts with `kinds`,
/// one symbol per nesting level.
fn enter_item(events: &mut Vec<Event>, lists: &mut Vec<ListKind>, kinds: &[ListKind]) {
    let common = lists.iter().zip(kinds).take_while(|(a, b)| a == b).count();
    let depth = kinds.len();
    if common == depth {
        close_lists(events, lists, depth);
        events.push(Event::EndItem);
        events.push(Event::BeginItem);
        return;
    }
    close_lists(events, lists, common);
    for k in &kinds[common..] {
        events.push(Event::BeginList(*k));
        events.push(Event::BeginItem);
        lists.push(*k);
    }
}

fn unterminated(tok: &Token) -> Option<PresentError> {
    let offset = tok.range.start;
    if tok.source.starts_with(OPEN) {
        Some(PresentError::UnterminatedCartouche { offset })
    } else if tok.source.starts_with(COMMENT) && tok.source.chars().count() > COMMENT.chars().count() {
        let rel = tok.source.find(OPEN).map_or(0, |b| tok.source[..b].chars().count());
        Some(PresentError::UnterminatedCartouche { offset: offset + rel })
    } else if tok.source.starts_with('"') {
        Some(PresentError::UnterminatedString { offset })
    } else if tok.source.starts_with("(*") {
        Some(PresentError::UnterminatedComment { offset })
    } else {
        None
    }
}

/// Presentation events for one node text.
pub fn events(
    text: &str,
    keywords: &KeywordTable,
    handlers: &Antiquotations,
    format: Format,
) -> Result<Vec<Event>, PresentError> {
    let tokens = tokenize(text, keywords);
    if let Some(e) = tokens.iter().filter(|t| t.kind == TokenKind::Error).find_map(unterminated) {
        return Err(e);
    }
    let mut b = Builder {
        chars: text.chars().collect(),
        handlers,
        format,
        events: Vec::new(),
        formal_open: false,
    };
    let mut pending_ws: Option<&Token> = None;
    let mut i = 0;
    while i < tokens.len() {
        let tok = &tokens[i];
        if tok.kind == TokenKind::Whitespace {
            pending_ws = Some(tok);
            i += 1;
            continue;
        }
        let arg = (tok.is_command() && is_document_command(&tok.source))
            .then(|| {
                let j = tokens[i + 1..].iter().position(|t| t.kind != TokenKind::Whitespace)? + i + 1;
                matches!(tokens[j].kind, TokenKind::Cartouche | TokenKind::QuotedString).then_some(j)
            })
            .flatten();
        match arg {
            Some(j) => {
                b.close_formal();
                if let Some(ws) = pending_ws.take() {
                    b.text(&ws.source);
                }
                let arg = &tokens[j];
                let (from, to) = b.argument_body(arg);
                // A quoted argument is presented by its unescaped content.
                let unquoted = (arg.kind == TokenKind::QuotedString)
                    .then(|| unquote(&arg.source))
                    .flatten()
                    .filter(|c| c.chars().count() != to - from);
                let heading = Heading::of_command(&tok.source);
                b.events.push(heading.map_or(Event::BeginText, Event::BeginHeading));
                match unquoted {
                    Some(content) => b.text(&content),
                    None if heading.is_some() => b.inline(from, to)?,
                    None => b.markdown(from, to)?,
                }
                b.events.push(if heading.is_some() { Event::EndHeading } else { Event::EndText });
                i = j + 1;
            }
            None => {
                if let Some(ws) = pending_ws.take() {
                    b.text(&ws.source);
                }
                b.formal(tok)?;
                i += 1;
            }
        }
    }
    if let Some(ws) = pending_ws {
        b.text(&ws.source);
    }
    b.close_formal();
    Ok(b.events)
}

/// Present `text` in `format`.
pub fn present(
    text: &str,
    keywords: &KeywordTable,
    symbols: &SymbolTable,
    handlers: &Antiquotations,
    format: Format,
) -> Result<String, PresentError> {
    Ok(render(format, &events(text, keywords, handlers, format)?, symbols))
}
