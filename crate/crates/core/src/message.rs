//! Checker diagnostics anchored at character ranges.

use std::fmt;

use crate::pretty::{self, Doc};
use crate::text::TextRange;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Severity {
    Status,
    Writeln,
    Warning,
    Error,
}

impl Severity {
    pub fn as_str(self) -> &'static str {
        match self {
            Severity::Status => "status",
            Severity::Writeln => "writeln",
            Severity::Warning => "warning",
            Severity::Error => "error",
        }
    }

    pub fn parse(s: &str) -> Option<Severity> {
        Some(match s {
            "status" => Severity::Status,
            "writeln" => Severity::Writeln,
            "warning" => Severity::Warning,
            "error" => Severity::Error,
            _ => return None,
        })
    }
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Phase {
    Syntax,
    Semantics,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Syntax => "syntax",
            Phase::Semantics => "semantics",
        }
    }

    pub fn parse(s: &str) -> Option<Phase> {
        match s {
            "syntax" => Some(Phase::Syntax),
            "semantics" => Some(Phase::Semantics),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Message {
    pub severity: Severity,
    /// Range within the checked content.
    pub range: TextRange,
    pub body: Doc,
    pub phase: Phase,
}

impl Message {
    pub fn new(severity: Severity, phase: Phase, range: TextRange, body: impl Into<String>) -> Self {
        Message {
            severity,
            range,
            body: Doc::words(&body.into()),
            phase,
        }
    }

    pub fn error(range: TextRange, body: impl Into<String>) -> Self {
        Message::new(Severity::Error, Phase::Semantics, range, body)
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }

    /// Body on one line.
    pub fn text(&self) -> String {
        pretty::unbroken(&self.body)
    }

    pub fn shifted(&self, by: usize) -> Message {
        Message {
            range: self.range.shift(by),
            ..self.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn severity_names_round_trip() {
        for s in [Severity::Status, Severity::Writeln, Severity::Warning, Severity::Error] {
            assert_eq!(Severity::parse(s.as_str()), Some(s));
        }
        assert_eq!(Severity::parse("fatal"), None);
    }

    #[test]
    fn body_text_normalizes_spacing() {
        let m = Message::error(TextRange::new(0, 1), "2 + 2  =\n5 is false");
        assert_eq!(m.text(), "2 + 2 = 5 is false");
    }
}
