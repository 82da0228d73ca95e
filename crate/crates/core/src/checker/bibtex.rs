//! Demo checker for bibliography databases: one diagnostic set per entry.

use std::collections::BTreeMap;

use super::{Cancel, CheckInput, Checker, Outcome, Output, Report, ResultCache, Sink};
use crate::markup::Element;
use crate::message::{Message, Phase, Severity};
use crate::syntax::Digest;
use crate::text::TextRange;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Entry {
    pub kind: String,
    pub key: Option<(String, TextRange)>,
    /// From `@` through the closing delimiter.
    pub range: TextRange,
    pub fields: Vec<(String, String, TextRange)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct ParseError {
    range: TextRange,
    message: String,
}

struct Scan<'a> {
    c: &'a [char],
    i: usize,
}

impl Scan<'_> {
    fn skip_ws(&mut self) {
        while self.i < self.c.len() && self.c[self.i].is_whitespace() {
            self.i += 1;
        }
    }

    fn word(&mut self) -> String {
        let s = self.i;
        while self.i < self.c.len()
            && (self.c[self.i].is_alphanumeric() || "_-:./+".contains(self.c[self.i]))
        {
            self.i += 1;
        }
        self.c[s..self.i].iter().collect()
    }

    fn fail<T>(&self, start: usize, message: &str) -> Result<T, ParseError> {
        Err(ParseError {
            range: TextRange::new(start, self.i.max(start + 1).min(self.c.len()).max(start)),
            message: message.into(),
        })
    }

    /// Value delimited by braces (nesting) or quotes, or a bare word.
    fn value(&mut self) -> Result<String, ParseError> {
        let s = self.i;
        match self.c.get(self.i) {
            Some('{') => {
                let mut depth = 0;
                while self.i < self.c.len() {
                    match self.c[self.i] {
                        '{' => depth += 1,
                        '}' => {
                            depth -= 1;
                            if depth == 0 {
                                self.i += 1;
                                return Ok(self.c[s + 1..self.i - 1].iter().collect());
                            }
                        }
                        _ => {}
                    }
                    self.i += 1;
                }
                self.fail(s, "unbalanced braces in field value")
            }
            Some('"') => {
                self.i += 1;
                while self.i < self.c.len() && self.c[self.i] != '"' {
                    self.i += 1;
                }
                if self.i == self.c.len() {
                    return self.fail(s, "unterminated quoted value");
                }
                self.i += 1;
                Ok(self.c[s + 1..self.i - 1].iter().collect())
            }
            _ => {
                let w = self.word();
                if w.is_empty() {
                    return self.fail(s, "expected a field value");
                }
                Ok(w)
            }
        }
    }

    fn entry(&mut self) -> Result<Entry, ParseError> {
        let at = self.i;
        self.i += 1;
        let kind = self.word().to_lowercase();
        if kind.is_empty() {
            return self.fail(at, "expected entry type after `@`");
        }
        self.skip_ws();
        let close = match self.c.get(self.i) {
            Some('{') => '}',
            Some('(') => ')',
            _ => return self.fail(at, "expected `{` after entry type"),
        };
        self.i += 1;
        self.skip_ws();
        let ks = self.i;
        let key = self.word();
        let key = (!key.is_empty()).then(|| (key, TextRange::new(ks, self.i)));
        let mut fields = Vec::new();
        loop {
            self.skip_ws();
            match self.c.get(self.i) {
                Some(',') => {
                    self.i += 1;
                    continue;
                }
                Some(c) if *c == close => {
                    self.i += 1;
                    break;
                }
                None => return self.fail(at, "unterminated entry"),
                _ => {}
            }
            let fs = self.i;
            let name = self.word().to_lowercase();
            if name.is_empty() {
                self.i += 1;
                return self.fail(fs, "expected a field name");
            }
            self.skip_ws();
            if self.c.get(self.i) != Some(&'=') {
                return self.fail(fs, "expected `=` after field name");
            }
            self.i += 1;
            self.skip_ws();
            let value = self.value()?;
            fields.push((name, value, TextRange::new(fs, self.i)));
        }
        Ok(Entry {
            kind,
            key,
            range: TextRange::new(at, self.i),
            fields,
        })
    }
}

/// Entries and the parse errors of malformed ones. A malformed entry ends
/// the scan of that entry; scanning resumes at the next `@`.
fn scan(text: &str) -> (Vec<Entry>, Vec<ParseError>) {
    let chars: Vec<char> = text.chars().collect();
    let mut s = Scan { c: &chars, i: 0 };
    let (mut entries, mut errors) = (Vec::new(), Vec::new());
    while s.i < chars.len() {
        if chars[s.i] != '@' {
            s.i += 1;
            continue;
        }
        let at = s.i;
        match s.entry() {
            Ok(e) => entries.push(e),
            Err(e) => {
                errors.push(e);
                s.i = (at + 1..chars.len()).find(|&j| chars[j] == '@').unwrap_or(chars.len());
            }
        }
    }
    (entries, errors)
}

fn required(kind: &str) -> &'static [&'static str] {
    match kind {
        "article" => &["author", "title", "journal", "year"],
        "book" => &["author", "title", "publisher", "year"],
        "inproceedings" | "incollection" => &["author", "title", "booktitle", "year"],
        "phdthesis" | "mastersthesis" => &["author", "title", "school", "year"],
        "misc" | "comment" | "string" | "preamble" => &[],
        _ => &["title"],
    }
}

/// Field checks of one entry, relative to its `@`.
fn entry_semantics(e: &Entry) -> Report {
    let mut r = Report::default();
    let base = e.range.start;
    let whole = TextRange::new(0, e.range.len());
    if e.key.is_none() && !matches!(e.kind.as_str(), "comment" | "string" | "preamble") {
        r.messages.push(Message::new(Severity::Error, Phase::Semantics, whole, "entry without a key"));
    }
    for f in required(&e.kind) {
        if !e.fields.iter().any(|(n, _, _)| n == f) {
            r.messages.push(Message::new(
                Severity::Error,
                Phase::Semantics,
                whole,
                format!("@{} entry lacks field `{f}`", e.kind),
            ));
        }
    }
    let mut names = std::collections::BTreeSet::new();
    for (name, value, range) in &e.fields {
        let rel = range.unshift(base);
        if name == "year" && !value.trim().chars().all(|c| c.is_ascii_digit()) {
            r.messages.push(Message::new(Severity::Warning, Phase::Semantics, rel, "year is not a number"));
        }
        if !names.insert(name) {
            r.messages.push(Message::new(
                Severity::Warning,
                Phase::Semantics,
                rel,
                format!("field `{name}` repeated"),
            ));
        }
    }
    r
}

pub struct BibtexChecker {
    cache: ResultCache<Report>,
}

impl BibtexChecker {
    pub fn new() -> Self {
        BibtexChecker {
            cache: ResultCache::new(None),
        }
    }
}

impl Default for BibtexChecker {
    fn default() -> Self {
        BibtexChecker::new()
    }
}

impl Checker for BibtexChecker {
    fn check(&self, input: &CheckInput<'_>, cancel: &Cancel, sink: Sink<'_>) -> Outcome {
        let (entries, errors) = scan(input.content);
        let mut report = Report::default();
        let mut emit = |o: Output| {
            sink(o.clone());
            report.push(o);
        };
        let mut seen: BTreeMap<&str, TextRange> = BTreeMap::new();
        for e in &entries {
            let mut el = Element::new("entry").with("type", e.kind.as_str());
            if let Some((k, r)) = &e.key {
                el.set("key", k.as_str());
                if let Some(first) = seen.get(k.as_str()) {
                    emit(Output::Message(Message::new(
                        Severity::Error,
                        Phase::Syntax,
                        *r,
                        format!("duplicate key `{k}` (first at {first})"),
                    )));
                } else {
                    seen.insert(k, *r);
                }
            }
            emit(Output::Markup(e.range, el));
            emit(Output::Message(Message::new(Severity::Status, Phase::Syntax, e.range, "parsed")));
        }
        for err in errors {
            emit(Output::Message(Message::new(Severity::Error, Phase::Syntax, err.range, err.message)));
        }
        for e in &entries {
            let key = Digest::of_str(&input.content.chars().skip(e.range.start).take(e.range.len()).collect::<String>());
            let Some(r) = self.cache.get_or_compute(key, cancel, || (!cancel.is_cancelled()).then(|| entry_semantics(e)))
            else {
                return Outcome::Cancelled;
            };
            r.shifted(e.range.start).outputs().for_each(&mut emit);
        }
        Outcome::Finished(report)
    }

    fn evaluations(&self) -> u64 {
        self.cache.evaluations()
    }
}
