//! Symbols, outer-syntax tokens, and command spans.
//!
//! Offsets are character indices into the node text. A `\<name>` symbol is
//! several characters long; tokens never split a symbol.

mod keywords;
pub mod quote;
mod span;
mod symbol;
mod token;

pub use keywords::{CommandAttrs, KeywordConflict, KeywordTable};
pub use quote::{escape, quote, quote_depth_demo, unquote};
pub use span::{parse_spans, Digest, ParsedSpan};
pub use symbol::{decode_symbols, scan_symbol, Symbol, SymbolKind, CLOSE, COMMENT, OPEN};
pub use token::{cartouche_body, tokenize, tokenize_all, Token, TokenKind, CARTOUCHE_BODY_OFFSET};


/// Escape a token source for one-line display: backslash, tab, newline and
/// carriage return become `\\`, `\t`, `\n`, `\r`.
pub fn escape_display(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out
}

/// One line per token: `KIND<TAB>START<TAB>END<TAB>escaped-source`.
pub fn format_token_listing(tokens: &[Token]) -> String {
    let mut out = String::new();
    for t in tokens {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\n",
            t.kind,
            t.range.start,
            t.range.end,
            escape_display(&t.source)
        ));
    }
    out
}
