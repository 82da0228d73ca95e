//! Oppen-style pretty printing of blocks, breaks and strings.

use std::collections::HashMap;

use crate::markup::Element;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Doc {
    /// Text without line separators, optionally carrying opaque markup.
    Str { text: String, markup: Option<Element> },
    /// Either `spaces` blanks, or a newline indented by the enclosing block
    /// indent plus `indent`.
    Break { spaces: usize, indent: usize },
    Block {
        indent: usize,
        consistent: bool,
        body: Vec<Doc>,
    },
}

impl Doc {
    pub fn text(s: impl Into<String>) -> Doc {
        let text: String = s.into();
        debug_assert!(!text.contains('\n'));
        Doc::Str { text, markup: None }
    }

    pub fn marked(element: Element, s: impl Into<String>) -> Doc {
        Doc::Str {
            text: s.into(),
            markup: Some(element),
        }
    }

    pub fn brk(spaces: usize, indent: usize) -> Doc {
        Doc::Break { spaces, indent }
    }

    pub fn block(indent: usize, body: Vec<Doc>) -> Doc {
        Doc::Block {
            indent,
            consistent: false,
            body,
        }
    }

    pub fn consistent(indent: usize, body: Vec<Doc>) -> Doc {
        Doc::Block {
            indent,
            consistent: true,
            body,
        }
    }

    /// Words separated by single-space breaks, in one inconsistent block.
    pub fn words(s: &str) -> Doc {
        let mut body = Vec::new();
        for (i, w) in s.split_whitespace().enumerate() {
            if i > 0 {
                body.push(Doc::brk(1, 0));
            }
            body.push(Doc::text(w));
        }
        Doc::block(0, body)
    }

    pub fn is_empty(&self) -> bool {
        match self {
            Doc::Str { text, .. } => text.is_empty(),
            Doc::Break { spaces, .. } => *spaces == 0,
            Doc::Block { body, .. } => body.iter().all(Doc::is_empty),
        }
    }
}

/// Width of text in layout units.
pub trait Metric {
    fn width(&self, s: &str) -> f64;
    fn space(&self) -> f64 {
        self.width(" ")
    }
}

/// One unit per character.
#[derive(Clone, Copy, Debug, Default)]
pub struct CharMetric;

impl Metric for CharMetric {
    fn width(&self, s: &str) -> f64 {
        s.chars().count() as f64
    }
}

/// Per-character widths with a default for characters not in the table.
#[derive(Clone, Debug)]
pub struct ProportionalMetric {
    pub widths: HashMap<char, f64>,
    pub default: f64,
}

impl ProportionalMetric {
    /// A narrow/wide split resembling a sans-serif font.
    pub fn sans() -> Self {
        let mut widths = HashMap::new();
        for c in "iljt.,;:'|!() ".chars() {
            widths.insert(c, 0.5);
        }
        for c in "mwMW@".chars() {
            widths.insert(c, 1.5);
        }
        ProportionalMetric {
            widths,
            default: 1.0,
        }
    }
}

impl Metric for ProportionalMetric {
    fn width(&self, s: &str) -> f64 {
        s.chars()
            .map(|c| self.widths.get(&c).copied().unwrap_or(self.default))
            .sum()
    }
}

/// A formatted line with layout facts used by the margin law.
#[derive(Clone, Debug, PartialEq)]
pub struct Line {
    pub text: String,
    pub width: f64,
    /// Breaks rendered as blanks on this line.
    pub unbroken_breaks: usize,
}

struct Layout<'m, M: Metric + ?Sized> {
    metric: &'m M,
    margin: f64,
    lines: Vec<Line>,
    cur: String,
    pos: f64,
    unbroken: usize,
}

impl<M: Metric + ?Sized> Layout<'_, M> {
    fn width(&self, d: &Doc) -> f64 {
        match d {
            Doc::Str { text, .. } => self.metric.width(text),
            Doc::Break { spaces, .. } => *spaces as f64 * self.metric.space(),
            Doc::Block { body, .. } => body.iter().map(|d| self.width(d)).sum(),
        }
    }

    /// Width up to the next break of this level, or `after` past the end.
    fn break_dist(&self, rest: &[Doc], after: f64) -> f64 {
        let mut w = 0.0;
        for d in rest {
            if matches!(d, Doc::Break { .. }) {
                return w;
            }
            w += self.width(d);
        }
        w + after
    }

    fn newline(&mut self, indent: usize) {
        let done = std::mem::take(&mut self.cur);
        self.lines.push(Line {
            width: self.pos,
            text: done,
            unbroken_breaks: std::mem::take(&mut self.unbroken),
        });
        self.cur = " ".repeat(indent);
        self.pos = indent as f64 * self.metric.space();
    }

    fn emit(&mut self, docs: &[Doc], block_indent: usize, force: bool, after: f64) {
        for (i, d) in docs.iter().enumerate() {
            match d {
                Doc::Str { text, .. } => {
                    self.cur.push_str(text);
                    self.pos += self.metric.width(text);
                }
                Doc::Break { spaces, indent } => {
                    let dist = self.break_dist(&docs[i + 1..], after);
                    let blanks = *spaces as f64 * self.metric.space();
                    if force || self.pos + blanks + dist > self.margin {
                        self.newline(block_indent + indent);
                    } else {
                        self.cur.push_str(&" ".repeat(*spaces));
                        self.pos += blanks;
                        self.unbroken += 1;
                    }
                }
                Doc::Block {
                    indent,
                    consistent,
                    body,
                } => {
                    let after_block = self.break_dist(&docs[i + 1..], after);
                    let inner = (self.pos / self.metric.space()).round() as usize + indent;
                    let forced =
                        *consistent && self.pos + self.width(d) + after_block > self.margin;
                    self.emit(body, inner, forced, after_block);
                }
            }
        }
    }
}

/// Lay out `doc` against `margin`. Breaks of a consistent block that does not
/// fit are all taken; other breaks are taken when the material up to the
/// next break would cross the margin.
pub fn layout<M: Metric + ?Sized>(doc: &Doc, margin: f64, metric: &M) -> Vec<Line> {
    let mut l = Layout {
        metric,
        margin,
        lines: Vec::new(),
        cur: String::new(),
        pos: 0.0,
        unbroken: 0,
    };
    l.emit(std::slice::from_ref(doc), 0, false, 0.0);
    l.newline(0);
    l.lines
}

pub fn format<M: Metric + ?Sized>(doc: &Doc, margin: f64, metric: &M) -> Vec<String> {
    layout(doc, margin, metric)
        .into_iter()
        .map(|l| l.text)
        .collect()
}

/// Character-metric formatting joined with newlines.
pub fn format_string(doc: &Doc, margin: usize) -> String {
    format(doc, margin as f64, &CharMetric).join("\n")
}

/// Rendering with every break as blanks.
pub fn unbroken(doc: &Doc) -> String {
    let mut out = String::new();
    fn go(d: &Doc, out: &mut String) {
        match d {
            Doc::Str { text, .. } => out.push_str(text),
            Doc::Break { spaces, .. } => out.push_str(&" ".repeat(*spaces)),
            Doc::Block { body, .. } => body.iter().for_each(|d| go(d, out)),
        }
    }
    go(doc, &mut out);
    out
}
