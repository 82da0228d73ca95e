//! Antiquotations: `@{name args}` inside document text, evaluated by
//! registered handlers whose output is inlined unchanged.

use std::collections::BTreeMap;
use std::sync::Arc;

use super::writer::{escape_html, escape_latex};
use super::{Format, PresentError};
use crate::syntax::{cartouche_body, tokenize, unquote, KeywordTable, TokenKind};

pub type Handler = Arc<dyn Fn(&str, Format) -> Result<String, String> + Send + Sync>;

#[derive(Clone, Default)]
pub struct Antiquotations {
    handlers: BTreeMap<String, Handler>,
}

impl std::fmt::Debug for Antiquotations {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_list().entries(self.handlers.keys()).finish()
    }
}

impl Antiquotations {
    pub fn new() -> Self {
        Self::default()
    }

    /// `url` and `verbatim`.
    pub fn standard() -> Self {
        let mut a = Antiquotations::new();
        a.register("url", |arg, f| {
            let arg = argument(arg);
            Ok(match f {
                Format::Latex => format!("\\url{{{}}}", escape_latex(&arg)),
                Format::Html => format!("<a href=\"{0}\">{0}</a>", escape_html(&arg)),
            })
        })
        .expect("fresh registry");
        a.register("verbatim", |arg, f| {
            let arg = argument(arg);
            Ok(match f {
                Format::Latex => format!("\\texttt{{{}}}", escape_latex(&arg)),
                Format::Html => format!("<code>{}</code>", escape_html(&arg)),
            })
        })
        .expect("fresh registry");
        a
    }

    /// The handler receives the raw argument source.
    pub fn register(
        &mut self,
        name: &str,
        handler: impl Fn(&str, Format) -> Result<String, String> + Send + Sync + 'static,
    ) -> Result<(), PresentError> {
        if self.handlers.contains_key(name) {
            return Err(PresentError::DuplicateAntiquotation(name.to_owned()));
        }
        self.handlers.insert(name.to_owned(), Arc::new(handler));
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&Handler> {
        self.handlers.get(name)
    }

    pub fn names(&self) -> Vec<String> {
        self.handlers.keys().cloned().collect()
    }
}

/// Content of an argument that is one string or cartouche; otherwise the
/// trimmed source.
pub fn argument(args: &str) -> String {
    let toks: Vec<_> = tokenize(args, &KeywordTable::new())
        .into_iter()
        .filter(|t| t.kind != TokenKind::Whitespace)
        .collect();
    match toks.as_slice() {
        [t] if t.kind == TokenKind::QuotedString => unquote(&t.source).unwrap_or_else(|| args.trim().to_owned()),
        [t] if t.kind == TokenKind::Cartouche => cartouche_body(&t.source).to_owned(),
        _ => args.trim().to_owned(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn argument_forms() {
        assert_eq!(argument(" \"a b\" "), "a b");
        assert_eq!(argument("\\<open>x\\<close>"), "x");
        assert_eq!(argument(" x y "), "x y");
    }

    #[test]
    fn duplicate_registration() {
        let mut a = Antiquotations::standard();
        assert_eq!(
            a.register("url", |_, _| Ok(String::new())),
            Err(PresentError::DuplicateAntiquotation("url".into()))
        );
        assert_eq!(a.names(), ["url", "verbatim"]);
    }
}
