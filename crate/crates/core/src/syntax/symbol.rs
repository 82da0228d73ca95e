//! Symbol layer: `\<name>` and `\<^name>` shapes over plain characters.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SymbolKind {
    /// A single character, or the `\r\n` pair.
    Plain,
    /// `\<ident>`
    Named,
    /// `\<^ident>`
    Control,
    /// `\<` not completing a named or control shape.
    Malformed,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Symbol {
    pub kind: SymbolKind,
    pub source: String,
    /// Character offset of the first character.
    pub offset: usize,
}

impl Symbol {
    pub fn char_len(&self) -> usize {
        self.source.chars().count()
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic()
}

fn is_ident_rest(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

/// Classify the symbol starting at `chars[i]`, returning its kind and length
/// in characters. `i` must be in bounds.
pub fn scan_symbol(chars: &[char], i: usize) -> (SymbolKind, usize) {
    match chars[i] {
        '\\' if chars.get(i + 1) == Some(&'<') => {
            let mut j = i + 2;
            let control = chars.get(j) == Some(&'^');
            if control {
                j += 1;
            }
            if !chars.get(j).copied().is_some_and(is_ident_start) {
                return (SymbolKind::Malformed, j - i);
            }
            j += 1;
            while chars.get(j).copied().is_some_and(is_ident_rest) {
                j += 1;
            }
            if chars.get(j) == Some(&'>') {
                let kind = if control {
                    SymbolKind::Control
                } else {
                    SymbolKind::Named
                };
                (kind, j + 1 - i)
            } else {
                (SymbolKind::Malformed, j - i)
            }
        }
        '\r' if chars.get(i + 1) == Some(&'\n') => (SymbolKind::Plain, 2),
        _ => (SymbolKind::Plain, 1),
    }
}

/// Segment `text` into symbols. Total and lossless: the concatenated sources
/// equal the input.
pub fn decode_symbols(text: &str) -> Vec<Symbol> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let (kind, len) = scan_symbol(&chars, i);
        out.push(Symbol {
            kind,
            source: chars[i..i + len].iter().collect(),
            offset: i,
        });
        i += len;
    }
    out
}

/// True when `chars[i..]` starts with the literal `sym`.
pub(crate) fn starts_with(chars: &[char], i: usize, sym: &str) -> bool {
    let mut j = i;
    for c in sym.chars() {
        if chars.get(j) != Some(&c) {
            return false;
        }
        j += 1;
    }
    true
}

pub const OPEN: &str = "\\<open>";
pub const CLOSE: &str = "\\<close>";
pub const COMMENT: &str = "\\<comment>";

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(text: &str) -> Vec<(SymbolKind, String)> {
        decode_symbols(text)
            .into_iter()
            .map(|s| (s.kind, s.source))
            .collect()
    }

    #[test]
    fn empty_input() {
        assert!(decode_symbols("").is_empty());
    }

    #[test]
    fn named_between_plain() {
        assert_eq!(
            kinds("a\\<alpha>b"),
            vec![
                (SymbolKind::Plain, "a".into()),
                (SymbolKind::Named, "\\<alpha>".into()),
                (SymbolKind::Plain, "b".into()),
            ]
        );
    }

    #[test]
    fn control_item() {
        assert_eq!(
            kinds("\\<^item> x"),
            vec![
                (SymbolKind::Control, "\\<^item>".into()),
                (SymbolKind::Plain, " ".into()),
                (SymbolKind::Plain, "x".into()),
            ]
        );
    }

    #[test]
    fn unknown_names_are_still_named() {
        assert_eq!(kinds("\\<frobnicate>")[0].0, SymbolKind::Named);
    }

    #[test]
    fn malformed_shapes_preserved() {
        assert_eq!(
            kinds("\\<>"),
            vec![
                (SymbolKind::Malformed, "\\<".into()),
                (SymbolKind::Plain, ">".into()),
            ]
        );
        assert_eq!(kinds("\\<alpha")[0], (SymbolKind::Malformed, "\\<alpha".into()));
        assert_eq!(kinds("\\<^ x")[0], (SymbolKind::Malformed, "\\<^".into()));
        assert_eq!(kinds("\\x")[0], (SymbolKind::Plain, "\\".into()));
    }

    #[test]
    fn crlf_is_one_cluster() {
        let syms = decode_symbols("a\r\nb");
        assert_eq!(syms.len(), 3);
        assert_eq!(syms[1].source, "\r\n");
        assert_eq!(syms[2].offset, 3);
    }
}
