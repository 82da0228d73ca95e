use thiserror::Error;

use crate::syntax::{CommandAttrs, KeywordTable, Token, TokenKind};
use crate::text::TextRange;

/// Parsed `theory NAME imports ... keywords ... begin` header.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TheoryHeader {
    pub name: String,
    pub name_range: TextRange,
    /// Import names as written, with their ranges.
    pub imports: Vec<(String, TextRange)>,
    pub keywords: KeywordTable,
    /// Ranges of the header keywords `theory`, `imports`, `keywords`, `begin`.
    pub keyword_ranges: Vec<TextRange>,
    /// Offset just past `begin`.
    pub end: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("bad theory header at {range}: {message}")]
pub struct HeaderError {
    pub range: TextRange,
    pub message: String,
}

struct Cursor<'a> {
    toks: Vec<&'a Token>,
    pos: usize,
    end: usize,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<&'a Token> {
        self.toks.get(self.pos).copied()
    }

    fn here(&self) -> TextRange {
        self.peek()
            .map(|t| t.range)
            .unwrap_or_else(|| TextRange::empty(self.end))
    }

    fn fail<T>(&self, message: impl Into<String>) -> Result<T, HeaderError> {
        Err(HeaderError {
            range: self.here(),
            message: message.into(),
        })
    }

    fn is_keyword(&self, kw: &str) -> bool {
        self.peek()
            .is_some_and(|t| t.kind == TokenKind::Keyword && t.source == kw)
    }

    fn keyword(&mut self, kw: &str) -> Result<TextRange, HeaderError> {
        if self.is_keyword(kw) {
            let r = self.here();
            self.pos += 1;
            Ok(r)
        } else {
            self.fail(format!("expected `{kw}`"))
        }
    }

    fn name(&mut self) -> Option<(String, TextRange)> {
        let t = self.peek()?;
        match t.kind {
            TokenKind::Identifier => {
                self.pos += 1;
                Some((t.source.clone(), t.range))
            }
            TokenKind::QuotedString => {
                self.pos += 1;
                Some((t.content(), t.range))
            }
            _ => None,
        }
    }

    fn string(&mut self) -> Option<String> {
        let t = self.peek()?;
        (t.kind == TokenKind::QuotedString).then(|| {
            self.pos += 1;
            t.content()
        })
    }
}

/// Whether a token stream looks like it starts a theory header.
pub fn has_header(tokens: &[Token]) -> bool {
    tokens
        .iter()
        .find(|t| !t.kind.is_improper())
        .is_some_and(|t| t.kind == TokenKind::Keyword && t.source == "theory")
}

/// Parse a theory header from the prelude tokens of a node. Parsing stops
/// after `begin`; whatever follows is left to the caller.
pub fn parse_header(tokens: &[Token]) -> Result<TheoryHeader, HeaderError> {
    let end = tokens.last().map(|t| t.range.end).unwrap_or(0);
    let mut cur = Cursor {
        toks: tokens.iter().filter(|t| !t.kind.is_improper()).collect(),
        pos: 0,
        end,
    };
    let mut keyword_ranges = vec![cur.keyword("theory")?];
    let Some((name, name_range)) = cur.name() else {
        return cur.fail("expected theory name");
    };
    let mut imports = Vec::new();
    if cur.is_keyword("imports") {
        keyword_ranges.push(cur.keyword("imports")?);
        while let Some(imp) = cur.name() {
            imports.push(imp);
        }
        if imports.is_empty() {
            return cur.fail("expected imported theory name");
        }
    }
    let mut keywords = KeywordTable::new();
    if cur.is_keyword("keywords") {
        keyword_ranges.push(cur.keyword("keywords")?);
        loop {
            let mut names = Vec::new();
            while let Some(s) = cur.string() {
                names.push(s);
            }
            if names.is_empty() {
                return cur.fail("expected keyword string");
            }
            if cur.is_keyword("::") {
                cur.pos += 1;
                let Some(kind) = cur.peek().filter(|t| t.kind == TokenKind::Identifier) else {
                    return cur.fail("expected command kind");
                };
                cur.pos += 1;
                let mut attrs = CommandAttrs::default();
                if kind.source == "thy_load" {
                    attrs.load = true;
                    if cur.is_keyword("(") {
                        cur.pos += 1;
                        let Some(ext) = cur.string() else {
                            return cur.fail("expected file extension string");
                        };
                        cur.keyword(")")?;
                        attrs.extension = Some(ext);
                    }
                }
                for n in &names {
                    keywords.add_command(n, attrs.clone());
                }
            } else {
                for n in &names {
                    keywords.add_keyword(n);
                }
            }
            if cur.is_keyword("and") {
                cur.pos += 1;
            } else {
                break;
            }
        }
    }
    let begin = cur.keyword("begin")?;
    keyword_ranges.push(begin);
    Ok(TheoryHeader {
        name,
        name_range,
        imports,
        keywords,
        keyword_ranges,
        end: begin.end,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::tokenize;

    fn parse(src: &str) -> Result<TheoryHeader, HeaderError> {
        parse_header(&tokenize(src, &KeywordTable::bootstrap()))
    }

    #[test]
    fn plain_header() {
        let h = parse("theory A imports B \"sub/C\" begin").unwrap();
        assert_eq!(h.name, "A");
        let names: Vec<&str> = h.imports.iter().map(|(n, _)| n.as_str()).collect();
        assert_eq!(names, ["B", "sub/C"]);
        assert!(h.keywords.is_empty());
    }

    #[test]
    fn keyword_declarations() {
        let h = parse(
            "theory A keywords \"foo\" \"bar\" :: thy_decl and \"use\" :: thy_load (\"ftl\") and \"where\" begin",
        )
        .unwrap();
        assert!(h.keywords.is_command("foo"));
        assert!(h.keywords.is_command("bar"));
        assert_eq!(h.keywords.command("use"), Some(&CommandAttrs::load(Some("ftl"))));
        assert!(h.keywords.is_keyword("where"));
    }

    #[test]
    fn errors_carry_position() {
        let err = parse("theory A imports begin").unwrap_err();
        assert_eq!(err.range.start, 17);
        assert!(parse("theory begin").is_err());
        assert!(parse("theory A").is_err());
    }
}
