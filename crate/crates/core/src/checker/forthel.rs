//! Demo checker for ForTheL-like block documents.
//!
//! A block is a paragraph starting with `Proposition.`, `Definition.` or
//! `Axiom.` and ending at a blank line. Claims are integer arithmetic.

use std::time::Duration;

use super::arith::{judge, parse_claim, ArithError, Claim, Expr, Rel, Verdict};
use super::{Cancel, CheckInput, Checker, Outcome, Output, Report, ResultCache, Sink};
use crate::markup::Element;
use crate::message::{Message, Phase, Severity};
use crate::parallel::{self, Mode};
use crate::syntax::Digest;
use crate::text::TextRange;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlockKind {
    Proposition,
    Definition,
    Axiom,
}

impl BlockKind {
    pub fn keyword(self) -> &'static str {
        match self {
            BlockKind::Proposition => "Proposition.",
            BlockKind::Definition => "Definition.",
            BlockKind::Axiom => "Axiom.",
        }
    }

    fn all() -> [BlockKind; 3] {
        [BlockKind::Proposition, BlockKind::Definition, BlockKind::Axiom]
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Block {
    pub kind: BlockKind,
    /// From the keyword to the last non-blank character of the paragraph.
    pub range: TextRange,
    pub source: String,
}

impl Block {
    pub fn digest(&self) -> Digest {
        Digest::of_str(&self.source)
    }
}

/// Paragraphs of `text` that form blocks. Other paragraphs are prose.
pub fn scan_blocks(text: &str) -> Vec<Block> {
    let chars: Vec<char> = text.chars().collect();
    let mut lines: Vec<(usize, usize)> = Vec::new();
    let mut start = 0;
    for (i, c) in chars.iter().enumerate() {
        if *c == '\n' {
            lines.push((start, i));
            start = i + 1;
        }
    }
    lines.push((start, chars.len()));
    let blank = |(a, b): (usize, usize)| chars[a..b].iter().all(|c| c.is_whitespace());

    let mut blocks = Vec::new();
    let mut i = 0;
    while i < lines.len() {
        if blank(lines[i]) {
            i += 1;
            continue;
        }
        let first = i;
        while i < lines.len() && !blank(lines[i]) {
            i += 1;
        }
        let (a, _) = lines[first];
        let (_, b) = lines[i - 1];
        let s = a + chars[a..b].iter().take_while(|c| c.is_whitespace()).count();
        let e = b - chars[a..b].iter().rev().take_while(|c| c.is_whitespace()).count();
        let para: String = chars[s..e].iter().collect();
        if let Some(kind) = BlockKind::all().into_iter().find(|k| para.starts_with(k.keyword())) {
            blocks.push(Block {
                kind,
                range: TextRange::new(s, e),
                source: para,
            });
        }
    }
    blocks
}

/// Claim of a block, with ranges relative to the block start.
fn parse_block(source: &str, kind: BlockKind) -> Result<Claim, ArithError> {
    let kw = kind.keyword().chars().count();
    let len = source.chars().count();
    if !source.ends_with('.') || len == kw {
        return Err(ArithError {
            range: TextRange::new(len.saturating_sub(1), len),
            message: "block must end with `.`".into(),
        });
    }
    let body: String = source.chars().skip(kw).take(len - kw - 1).collect();
    parse_claim(&body, kw)
}

fn semantics(block: &Block) -> Report {
    let mut r = Report::default();
    let whole = TextRange::new(0, block.source.chars().count());
    let msg = |sev, range, body: String| Message::new(sev, Phase::Semantics, range, body);
    let claim = match parse_block(&block.source, block.kind) {
        Ok(c) => c,
        Err(_) => return r,
    };
    let closed = |_: &str| None;
    match block.kind {
        BlockKind::Proposition => {
            if claim.rel.is_none() {
                r.messages.push(msg(Severity::Error, whole, "a proposition must be a comparison".into()));
                return r;
            }
            match judge(&claim, &closed) {
                Ok(Verdict::Holds { .. }) => r.messages.push(msg(Severity::Writeln, whole, "checked".into())),
                Ok(Verdict::Fails { lhs, rhs, rel }) => {
                    r.messages.push(msg(
                        Severity::Error,
                        whole,
                        format!("false: {lhs} {} {rhs} does not hold", rel.as_str()),
                    ));
                    if let Some((Rel::Eq, Expr::Num(_, at))) = &claim.rel {
                        r.markup.push((
                            *at,
                            Element::new("active")
                                .with("label", "fix arithmetic")
                                .with("replace", lhs.to_string()),
                        ));
                    }
                }
                Ok(Verdict::Value(_)) => unreachable!("comparison checked above"),
                Err(e) => r.messages.push(msg(Severity::Error, e.range, e.message)),
            }
        }
        BlockKind::Definition => match (&claim.lhs, &claim.rel) {
            (Expr::Var(name, at), Some((Rel::Eq, rhs))) => match super::arith::eval(rhs, &closed) {
                Ok(v) => {
                    r.messages.push(msg(Severity::Writeln, whole, format!("defined {name} = {v}")));
                    r.markup.push((*at, Element::new("defined").with("value", v.to_string())));
                }
                Err(e) => r.messages.push(msg(Severity::Error, e.range, e.message)),
            },
            _ => r.messages.push(msg(Severity::Error, whole, "a definition has the form `name = expression`".into())),
        },
        BlockKind::Axiom => r.messages.push(msg(Severity::Writeln, whole, "assumed".into())),
    }
    r
}

/// Checks blocks in two phases: all syntax output first, then one cached,
/// optionally slowed, evaluation per block.
pub struct ForthelChecker {
    cache: ResultCache<Report>,
    delay: Duration,
    mode: Mode,
}

impl ForthelChecker {
    pub fn new(delay: Duration) -> Self {
        ForthelChecker {
            cache: ResultCache::new(None),
            delay,
            mode: Mode::default(),
        }
    }

    pub fn with_cache(mut self, cache: ResultCache<Report>) -> Self {
        self.cache = cache;
        self
    }

    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn cache(&self) -> &ResultCache<Report> {
        &self.cache
    }
}

impl Checker for ForthelChecker {
    fn check(&self, input: &CheckInput<'_>, cancel: &Cancel, sink: Sink<'_>) -> Outcome {
        let blocks = scan_blocks(input.content);
        let mut report = Report::default();
        let mut valid = Vec::new();
        for b in &blocks {
            let kw = b.kind.keyword().chars().count();
            let mut out = vec![
                Output::Markup(b.range, Element::new("block").with("kind", b.kind.keyword().trim_end_matches('.'))),
                Output::Markup(TextRange::new(b.range.start, b.range.start + kw), Element::new("keyword")),
            ];
            match parse_block(&b.source, b.kind) {
                Ok(_) => {
                    out.push(Output::Message(Message::new(Severity::Status, Phase::Syntax, b.range, "parsed")));
                    valid.push(b.clone());
                }
                Err(e) => out.push(Output::Message(Message::new(
                    Severity::Error,
                    Phase::Syntax,
                    e.range.shift(b.range.start),
                    e.message,
                ))),
            }
            for o in out {
                sink(o.clone());
                report.push(o);
            }
        }
        if cancel.is_cancelled() {
            return Outcome::Cancelled;
        }
        let results = parallel::map(self.mode, &valid, |b| {
            let r = self.cache.get_or_compute(b.digest(), cancel, || {
                if !cancel.sleep(self.delay) {
                    return None;
                }
                Some(semantics(b))
            })?;
            let placed = r.shifted(b.range.start);
            placed.outputs().for_each(sink);
            Some(placed)
        });
        for r in results {
            match r {
                Some(r) => report.extend(r),
                None => return Outcome::Cancelled,
            }
        }
        Outcome::Finished(report)
    }

    fn evaluations(&self) -> u64 {
        self.cache.evaluations()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::document::NodeName;

    fn run(c: &ForthelChecker, text: &str) -> Report {
        let node = NodeName::auxiliary("t.ftl").unwrap();
        let input = CheckInput {
            node: &node,
            content: text,
            header: None,
        };
        match c.check(&input, &Cancel::new(), &super::super::discard) {
            Outcome::Finished(r) => r,
            other => panic!("{other:?}"),
        }
    }

    fn semantic(r: &Report) -> Vec<&Message> {
        r.messages.iter().filter(|m| m.phase == Phase::Semantics).collect()
    }

    #[test]
    fn blocks_split_at_blank_lines() {
        let b = scan_blocks("Axiom. 1 = 1.\n\n  Proposition. 2 +\n 2 = 4.  \n\nprose\n\nJust prose.");
        assert_eq!(b.len(), 2);
        assert_eq!(b[1].kind, BlockKind::Proposition);
        assert_eq!(b[1].range, TextRange::new(17, 41));
    }

    #[test]
    fn true_proposition_checked_on_block_range() {
        let c = ForthelChecker::new(Duration::ZERO);
        let r = run(&c, "Proposition. 2 + 2 = 4.");
        let s = semantic(&r);
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].text(), "checked");
        assert_eq!(s[0].range, TextRange::new(0, 23));
    }

    #[test]
    fn false_proposition_offers_fix() {
        let c = ForthelChecker::new(Duration::ZERO);
        let r = run(&c, "\nProposition. 2 + 2 = 5.");
        let s = semantic(&r);
        assert_eq!(s[0].severity, Severity::Error);
        assert_eq!(s[0].range, TextRange::new(1, 24));
        let active: Vec<_> = r.markup.iter().filter(|(_, e)| e.name() == "active").collect();
        assert_eq!(active[0].0, TextRange::new(22, 23));
        assert_eq!(active[0].1.get("replace"), Some("4"));
    }

    #[test]
    fn recheck_is_cached() {
        let c = ForthelChecker::new(Duration::ZERO);
        let text = "Proposition. 1 < 2.\n\nDefinition. x = 3 * 3.";
        let a = run(&c, text);
        assert_eq!(c.evaluations(), 2);
        let b = run(&c, text);
        assert_eq!(a, b);
        assert_eq!(c.evaluations(), 2);
    }

    #[test]
    fn syntax_errors_are_located() {
        let c = ForthelChecker::new(Duration::ZERO);
        let r = run(&c, "Proposition. 2 + = 4.");
        let e: Vec<_> = r.messages.iter().filter(|m| m.is_error()).collect();
        assert_eq!(e.len(), 1);
        assert_eq!(e[0].phase, Phase::Syntax);
        assert_eq!(e[0].range, TextRange::new(17, 18));
        let r = run(&c, "Axiom. 1 = 1");
        assert!(r.messages[0].is_error());
    }
}
