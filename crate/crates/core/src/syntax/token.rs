//! Outer-syntax tokenizer.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::keywords::KeywordTable;
use super::symbol::{scan_symbol, starts_with, SymbolKind, CLOSE, COMMENT, OPEN};
use crate::text::TextRange;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TokenKind {
    CommandKeyword,
    Keyword,
    Identifier,
    Number,
    QuotedString,
    Cartouche,
    Comment,
    Whitespace,
    Error,
}

impl TokenKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TokenKind::CommandKeyword => "command-keyword",
            TokenKind::Keyword => "keyword",
            TokenKind::Identifier => "identifier",
            TokenKind::Number => "number",
            TokenKind::QuotedString => "quoted-string",
            TokenKind::Cartouche => "cartouche",
            TokenKind::Comment => "comment",
            TokenKind::Whitespace => "whitespace",
            TokenKind::Error => "error",
        }
    }

    /// Whitespace and comments carry no syntactic content.
    pub fn is_improper(self) -> bool {
        matches!(self, TokenKind::Whitespace | TokenKind::Comment)
    }
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub range: TextRange,
    pub source: String,
}

impl Token {
    pub fn is_command(&self) -> bool {
        self.kind == TokenKind::CommandKeyword
    }

    /// Content of a string or cartouche token with delimiters removed and
    /// string escapes resolved. Other tokens yield their source.
    pub fn content(&self) -> String {
        match self.kind {
            TokenKind::QuotedString => super::quote::unquote(&self.source).unwrap_or_default(),
            TokenKind::Cartouche => cartouche_body(&self.source).to_owned(),
            _ => self.source.clone(),
        }
    }
}

/// Body of a cartouche source without the outer delimiters.
pub fn cartouche_body(source: &str) -> &str {
    source
        .strip_prefix(OPEN)
        .and_then(|s| s.strip_suffix(CLOSE))
        .unwrap_or(source)
}

/// Character offset of the body of a cartouche relative to its start.
pub const CARTOUCHE_BODY_OFFSET: usize = 7;

struct Scanner<'a> {
    chars: &'a [char],
    symbolic: Vec<Vec<char>>,
    keywords: &'a KeywordTable,
}

impl Scanner<'_> {
    fn at(&self, i: usize, lit: &str) -> bool {
        starts_with(self.chars, i, lit)
    }

    fn symbol_len(&self, i: usize) -> usize {
        scan_symbol(self.chars, i).1
    }

    /// End of a cartouche starting at `i` (which holds `\<open>`), or `None`
    /// if it never closes.
    fn cartouche_end(&self, i: usize) -> Option<usize> {
        let mut depth = 0usize;
        let mut j = i;
        while j < self.chars.len() {
            if self.at(j, OPEN) {
                depth += 1;
            } else if self.at(j, CLOSE) {
                depth -= 1;
                if depth == 0 {
                    return Some(j + CLOSE.len());
                }
            }
            j += self.symbol_len(j);
        }
        None
    }

    fn string_end(&self, i: usize) -> Option<usize> {
        let mut j = i + 1;
        while j < self.chars.len() {
            match self.chars[j] {
                '\\' if j + 1 < self.chars.len() => j += 2,
                '"' => return Some(j + 1),
                _ => j += 1,
            }
        }
        None
    }

    fn comment_end(&self, i: usize) -> Option<usize> {
        let mut depth = 0usize;
        let mut j = i;
        while j < self.chars.len() {
            if self.at(j, "(*") {
                depth += 1;
                j += 2;
            } else if self.at(j, "*)") {
                depth -= 1;
                j += 2;
                if depth == 0 {
                    return Some(j);
                }
            } else {
                j += 1;
            }
        }
        None
    }

    fn is_letter_at(&self, i: usize) -> bool {
        let c = self.chars[i];
        if c == '\\' {
            let (kind, _) = scan_symbol(self.chars, i);
            kind == SymbolKind::Named
                && !self.at(i, OPEN)
                && !self.at(i, CLOSE)
                && !self.at(i, COMMENT)
        } else {
            c.is_alphabetic()
        }
    }

    fn ident_end(&self, i: usize) -> usize {
        let mut j = i + self.symbol_len(i);
        loop {
            if j >= self.chars.len() {
                return j;
            }
            let c = self.chars[j];
            if self.is_letter_at(j) {
                j += self.symbol_len(j);
            } else if c.is_alphanumeric() || c == '_' || c == '\'' {
                j += 1;
            } else if c == '\\' && scan_symbol(self.chars, j).0 == SymbolKind::Control {
                j += self.symbol_len(j);
            } else if c == '.' && j + 1 < self.chars.len() && self.is_letter_at(j + 1) {
                j += 1;
            } else {
                return j;
            }
        }
    }

    fn symbolic_keyword(&self, i: usize) -> Option<usize> {
        self.symbolic
            .iter()
            .find(|kw| self.chars[i..].starts_with(kw))
            .map(|kw| kw.len())
    }

    /// Scan one token at `i`: (kind, end).
    fn next(&self, i: usize) -> (TokenKind, usize) {
        let len = self.chars.len();
        let c = self.chars[i];
        if c.is_whitespace() {
            let mut j = i + 1;
            while j < len && self.chars[j].is_whitespace() {
                j += 1;
            }
            return (TokenKind::Whitespace, j);
        }
        if self.at(i, OPEN) {
            return match self.cartouche_end(i) {
                Some(end) => (TokenKind::Cartouche, end),
                None => (TokenKind::Error, len),
            };
        }
        if self.at(i, COMMENT) {
            let mut j = i + COMMENT.len();
            while j < len && self.chars[j].is_whitespace() {
                j += 1;
            }
            if self.at(j, OPEN) {
                return match self.cartouche_end(j) {
                    Some(end) => (TokenKind::Comment, end),
                    None => (TokenKind::Error, len),
                };
            }
            return (TokenKind::Error, i + COMMENT.len());
        }
        if c == '"' {
            return match self.string_end(i) {
                Some(end) => (TokenKind::QuotedString, end),
                None => (TokenKind::Error, len),
            };
        }
        if self.at(i, "(*") {
            return match self.comment_end(i) {
                Some(end) => (TokenKind::Comment, end),
                None => (TokenKind::Error, len),
            };
        }
        if c.is_ascii_digit() {
            let mut j = i + 1;
            while j < len && self.chars[j].is_ascii_digit() {
                j += 1;
            }
            return (TokenKind::Number, j);
        }
        if self.is_letter_at(i) {
            let end = self.ident_end(i);
            let word: String = self.chars[i..end].iter().collect();
            let kind = if self.keywords.is_command(&word) {
                TokenKind::CommandKeyword
            } else if self.keywords.is_keyword(&word) {
                TokenKind::Keyword
            } else {
                TokenKind::Identifier
            };
            return (kind, end);
        }
        if let Some(n) = self.symbolic_keyword(i) {
            let word: String = self.chars[i..i + n].iter().collect();
            let kind = if self.keywords.is_command(&word) {
                TokenKind::CommandKeyword
            } else {
                TokenKind::Keyword
            };
            return (kind, i + n);
        }
        (TokenKind::Error, i + self.symbol_len(i))
    }
}

/// Tokenize `text` into a covering sequence of tokens.
pub fn tokenize(text: &str, keywords: &KeywordTable) -> Vec<Token> {
    let chars: Vec<char> = text.chars().collect();
    tokenize_chars(&chars, keywords)
}

pub(crate) fn tokenize_chars(chars: &[char], keywords: &KeywordTable) -> Vec<Token> {
    let scanner = Scanner {
        chars,
        symbolic: keywords.symbolic(),
        keywords,
    };
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let (kind, end) = scanner.next(i);
        debug_assert!(end > i);
        tokens.push(Token {
            kind,
            range: TextRange::new(i, end),
            source: chars[i..end].iter().collect(),
        });
        i = end;
    }
    tokens
}

/// Tokenize many texts, in parallel when the `parallel` feature is enabled.
pub fn tokenize_all(
    mode: crate::parallel::Mode,
    texts: &[String],
    keywords: &KeywordTable,
) -> Vec<Vec<Token>> {
    crate::parallel::map(mode, texts, |t| tokenize(t, keywords))
}
