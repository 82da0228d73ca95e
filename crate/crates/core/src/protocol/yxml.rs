//! Markup trees as text with two reserved control bytes.
//!
//! `X` = 0x05 and `Y` = 0x06. An element is `X Y name (Y key=value)* X`,
//! then its body, then `X Y X`. Text is written verbatim and must not
//! contain either control byte.

use thiserror::Error;

use crate::markup::Element;

pub const X: char = '\u{5}';
pub const Y: char = '\u{6}';

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tree {
    Elem(Element, Vec<Tree>),
    Text(String),
}

impl Tree {
    pub fn elem(element: Element, body: Vec<Tree>) -> Tree {
        Tree::Elem(element, body)
    }

    pub fn text(s: impl Into<String>) -> Tree {
        Tree::Text(s.into())
    }

    /// Concatenated text content.
    pub fn content(&self) -> String {
        match self {
            Tree::Text(s) => s.clone(),
            Tree::Elem(_, body) => body.iter().map(Tree::content).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum YxmlError {
    #[error("unbalanced element end")]
    UnbalancedEnd,
    #[error("element `{0}` not closed")]
    Unclosed(String),
    #[error("malformed element head")]
    BadHead,
    #[error("property without `=`: {0}")]
    BadProperty(String),
    #[error("text contains a reserved control byte")]
    ReservedByte,
}

fn write(t: &Tree, out: &mut String) -> Result<(), YxmlError> {
    match t {
        Tree::Text(s) => {
            if s.contains([X, Y]) {
                return Err(YxmlError::ReservedByte);
            }
            out.push_str(s);
        }
        Tree::Elem(e, body) => {
            if e.name().contains([X, Y, '='])
                || e.properties().iter().any(|(k, v)| k.contains([X, Y, '=']) || v.contains([X, Y]))
            {
                return Err(YxmlError::ReservedByte);
            }
            out.push(X);
            out.push(Y);
            out.push_str(e.name());
            for (k, v) in e.properties() {
                out.push(Y);
                out.push_str(k);
                out.push('=');
                out.push_str(v);
            }
            out.push(X);
            for b in body {
                write(b, out)?;
            }
            out.push(X);
            out.push(Y);
            out.push(X);
        }
    }
    Ok(())
}

pub fn to_string(trees: &[Tree]) -> Result<String, YxmlError> {
    let mut out = String::new();
    for t in trees {
        write(t, &mut out)?;
    }
    Ok(out)
}

pub fn parse(s: &str) -> Result<Vec<Tree>, YxmlError> {
    // Stack of open elements with their bodies; the bottom is the root body.
    let mut stack: Vec<(Option<Element>, Vec<Tree>)> = vec![(None, Vec::new())];
    let mut text = String::new();
    let flush = |text: &mut String, stack: &mut Vec<(Option<Element>, Vec<Tree>)>| {
        if !text.is_empty() {
            stack.last_mut().expect("root").1.push(Tree::Text(std::mem::take(text)));
        }
    };
    let mut rest = s;
    while let Some(i) = rest.find(X) {
        text.push_str(&rest[..i]);
        flush(&mut text, &mut stack);
        let after = &rest[i + 1..];
        let Some(j) = after.find(X) else { return Err(YxmlError::BadHead) };
        let head = &after[..j];
        rest = &after[j + 1..];
        if head == Y.to_string() {
            let (Some(e), body) = stack.pop().expect("non-empty") else {
                return Err(YxmlError::UnbalancedEnd);
            };
            stack.last_mut().expect("root").1.push(Tree::Elem(e, body));
            continue;
        }
        let mut fields = head.strip_prefix(Y).ok_or(YxmlError::BadHead)?.split(Y);
        let name = fields.next().unwrap_or("");
        let mut e = Element::new(name);
        for f in fields {
            let (k, v) = f.split_once('=').ok_or_else(|| YxmlError::BadProperty(f.to_owned()))?;
            e.set(k, v);
        }
        stack.push((Some(e), Vec::new()));
    }
    if rest.contains(Y) {
        return Err(YxmlError::ReservedByte);
    }
    text.push_str(rest);
    flush(&mut text, &mut stack);
    if stack.len() > 1 {
        let (e, _) = stack.pop().expect("non-empty");
        return Err(YxmlError::Unclosed(e.map(|e| e.name().to_owned()).unwrap_or_default()));
    }
    Ok(stack.pop().expect("root").1)
}
