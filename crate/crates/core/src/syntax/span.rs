use std::fmt;

use sha2::{Digest as _, Sha256};

use super::token::Token;
use crate::text::TextRange;

/// SHA-256 of some source text.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Digest(pub [u8; 32]);

impl Digest {
    pub fn of(bytes: &[u8]) -> Digest {
        Digest(Sha256::digest(bytes).into())
    }

    pub fn of_str(s: &str) -> Digest {
        Digest::of(s.as_bytes())
    }

    pub fn to_hex(&self) -> String {
        self.0.iter().map(|b| format!("{b:02x}")).collect()
    }
}

impl fmt::Debug for Digest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Digest({})", &self.to_hex()[..12])
    }
}

/// A command-keyed segment of node text, before identity is assigned.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParsedSpan {
    /// Command name, or `""` for the prelude.
    pub command: String,
    pub range: TextRange,
    pub source: String,
    pub hash: Digest,
    pub tokens: Vec<Token>,
}

impl ParsedSpan {
    pub fn is_prelude(&self) -> bool {
        self.command.is_empty()
    }

    /// Tokens with offsets relative to the span start.
    pub fn relative_tokens(&self) -> impl Iterator<Item = Token> + '_ {
        let base = self.range.start;
        self.tokens.iter().map(move |t| Token {
            kind: t.kind,
            range: t.range.unshift(base),
            source: t.source.clone(),
        })
    }
}

/// Split a token stream at every command keyword. Material before the first
/// command becomes a prelude span.
pub fn parse_spans(tokens: &[Token]) -> Vec<ParsedSpan> {
    let mut spans = Vec::new();
    let mut current: Vec<Token> = Vec::new();
    let flush = |current: &mut Vec<Token>, spans: &mut Vec<ParsedSpan>| {
        if current.is_empty() {
            return;
        }
        let toks = std::mem::take(current);
        let command = if toks[0].is_command() {
            toks[0].source.clone()
        } else {
            String::new()
        };
        let source: String = toks.iter().map(|t| t.source.as_str()).collect();
        spans.push(ParsedSpan {
            command,
            range: TextRange::new(toks[0].range.start, toks[toks.len() - 1].range.end),
            hash: Digest::of_str(&source),
            source,
            tokens: toks,
        });
    };
    for tok in tokens {
        if tok.is_command() {
            flush(&mut current, &mut spans);
        }
        current.push(tok.clone());
    }
    flush(&mut current, &mut spans);
    spans
}
