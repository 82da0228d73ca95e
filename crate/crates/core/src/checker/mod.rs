//! Checkers: functions from content to streamed, offset-anchored output.

pub mod arith;
mod bibtex;
mod cache;
mod external;
mod forthel;
mod sleep;
pub mod theory;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use thiserror::Error;

pub use bibtex::BibtexChecker;
pub use cache::ResultCache;
pub use external::{parse_tool_line, tool_env_var, ExternalChecker, InputMode};
pub use forthel::{scan_blocks, Block, BlockKind, ForthelChecker};
pub use sleep::SleepChecker;

use crate::document::NodeName;
use crate::markup::Element;
use crate::message::{Message, Phase, Severity};
use crate::sessions::TheoryHeader;
use crate::text::TextRange;

/// Cooperative cancellation flag shared between a scheduler and a check.
#[derive(Clone, Debug, Default)]
pub struct Cancel(Arc<AtomicBool>);

impl Cancel {
    pub fn new() -> Self {
        Cancel::default()
    }

    pub fn cancel(&self) {
        self.0.store(true, Ordering::SeqCst);
    }

    pub fn is_cancelled(&self) -> bool {
        self.0.load(Ordering::SeqCst)
    }

    /// Sleep in short slices; `false` if cancelled before the time is up.
    pub fn sleep(&self, d: Duration) -> bool {
        let until = Instant::now() + d;
        loop {
            if self.is_cancelled() {
                return false;
            }
            let now = Instant::now();
            if now >= until {
                return true;
            }
            std::thread::sleep((until - now).min(Duration::from_millis(5)));
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Output {
    Message(Message),
    Markup(TextRange, Element),
}

/// Where a check streams its output as it is produced.
pub type Sink<'a> = &'a (dyn Fn(Output) + Send + Sync);

/// Sink that drops everything.
pub fn discard(_: Output) {}

/// Terminal output of one check, in a deterministic order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Report {
    pub messages: Vec<Message>,
    pub markup: Vec<(TextRange, Element)>,
    /// Named blobs to publish in the session's export store.
    pub exports: Vec<(String, Vec<u8>)>,
}

impl Report {
    pub fn push(&mut self, out: Output) {
        match out {
            Output::Message(m) => self.messages.push(m),
            Output::Markup(r, e) => self.markup.push((r, e)),
        }
    }

    pub fn extend(&mut self, other: Report) {
        self.messages.extend(other.messages);
        self.markup.extend(other.markup);
        self.exports.extend(other.exports);
    }

    pub fn shifted(&self, by: usize) -> Report {
        Report {
            messages: self.messages.iter().map(|m| m.shifted(by)).collect(),
            markup: self.markup.iter().map(|(r, e)| (r.shift(by), e.clone())).collect(),
            exports: self.exports.clone(),
        }
    }

    pub fn has_errors(&self) -> bool {
        self.messages.iter().any(Message::is_error)
    }

    pub fn outputs(&self) -> impl Iterator<Item = Output> + '_ {
        self.messages
            .iter()
            .cloned()
            .map(Output::Message)
            .chain(self.markup.iter().cloned().map(|(r, e)| Output::Markup(r, e)))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Finished(Report),
    /// The checker broke down; the report explains.
    Failed(Report),
    Cancelled,
}

impl Outcome {
    pub fn report(&self) -> Option<&Report> {
        match self {
            Outcome::Finished(r) | Outcome::Failed(r) => Some(r),
            Outcome::Cancelled => None,
        }
    }
}

pub struct CheckInput<'a> {
    pub node: &'a NodeName,
    pub content: &'a str,
    /// Synthetic header of the implicit theory context.
    pub header: Option<&'a TheoryHeader>,
}

pub trait Checker: Send + Sync {
    fn check(&self, input: &CheckInput<'_>, cancel: &Cancel, sink: Sink<'_>) -> Outcome;

    /// Sub-element evaluations performed so far (cache misses).
    fn evaluations(&self) -> u64 {
        0
    }
}

/// Run a checker, turning a panic into a single error over the whole content.
pub fn run_guarded(
    checker: &dyn Checker,
    input: &CheckInput<'_>,
    cancel: &Cancel,
    sink: Sink<'_>,
) -> Outcome {
    match catch_unwind(AssertUnwindSafe(|| checker.check(input, cancel, sink))) {
        Ok(o) => o,
        Err(panic) => {
            let what = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown cause".into());
            let range = TextRange::new(0, input.content.chars().count());
            let mut report = Report::default();
            report.messages.push(Message::new(
                Severity::Error,
                Phase::Semantics,
                range,
                format!("checker crashed: {what}"),
            ));
            Outcome::Failed(report)
        }
    }
}

pub type Template = Arc<dyn Fn(&NodeName) -> TheoryHeader + Send + Sync>;

/// Header of the implicit theory for an auxiliary file: named after the
/// file stem, importing nothing.
pub fn default_template() -> Template {
    Arc::new(|name: &NodeName| TheoryHeader {
        name: name.stem().to_owned(),
        name_range: TextRange::empty(0),
        imports: Vec::new(),
        keywords: crate::syntax::KeywordTable::new(),
        keyword_ranges: Vec::new(),
        end: 0,
    })
}

#[derive(Clone)]
pub struct FileFormat {
    pub extension: String,
    pub checker: String,
    pub template: Template,
}

impl FileFormat {
    pub fn new(extension: &str, checker: &str) -> Self {
        FileFormat {
            extension: extension.to_owned(),
            checker: checker.to_owned(),
            template: default_template(),
        }
    }
}

impl fmt::Debug for FileFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FileFormat")
            .field("extension", &self.extension)
            .field("checker", &self.checker)
            .finish()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RegistryError {
    #[error("checker `{0}` already registered")]
    DuplicateChecker(String),
    #[error("file format `.{0}` already registered")]
    DuplicateFormat(String),
    #[error("format `.{extension}` refers to unknown checker `{checker}`")]
    UnknownChecker { extension: String, checker: String },
}

#[derive(Clone, Default)]
pub struct Registry {
    checkers: BTreeMap<String, Arc<dyn Checker>>,
    formats: BTreeMap<String, FileFormat>,
}

impl fmt::Debug for Registry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Registry")
            .field("checkers", &self.checkers.keys().collect::<Vec<_>>())
            .field("formats", &self.formats)
            .finish()
    }
}

impl Registry {
    pub fn new() -> Self {
        Registry::default()
    }

    /// ForTheL-like blocks for `.ftl` and bibliographies for `.bib`.
    pub fn demo() -> Self {
        let mut r = Registry::new();
        r.register_checker("forthel", Arc::new(ForthelChecker::new(Duration::ZERO)))
            .expect("fresh registry");
        r.register_checker("bibtex", Arc::new(BibtexChecker::new()))
            .expect("fresh registry");
        r.register_format(FileFormat::new("ftl", "forthel"))
            .expect("fresh registry");
        r.register_format(FileFormat::new("bib", "bibtex"))
            .expect("fresh registry");
        r
    }

    pub fn register_checker(
        &mut self,
        id: &str,
        checker: Arc<dyn Checker>,
    ) -> Result<(), RegistryError> {
        if self.checkers.contains_key(id) {
            return Err(RegistryError::DuplicateChecker(id.to_owned()));
        }
        self.checkers.insert(id.to_owned(), checker);
        Ok(())
    }

    pub fn register_format(&mut self, format: FileFormat) -> Result<(), RegistryError> {
        if self.formats.contains_key(&format.extension) {
            return Err(RegistryError::DuplicateFormat(format.extension));
        }
        if !self.checkers.contains_key(&format.checker) {
            return Err(RegistryError::UnknownChecker {
                extension: format.extension,
                checker: format.checker,
            });
        }
        self.formats.insert(format.extension.clone(), format);
        Ok(())
    }

    pub fn checker(&self, id: &str) -> Option<&Arc<dyn Checker>> {
        self.checkers.get(id)
    }

    pub fn format(&self, extension: &str) -> Option<&FileFormat> {
        self.formats.get(extension)
    }

    pub fn extensions(&self) -> BTreeSet<String> {
        self.formats.keys().cloned().collect()
    }

    /// Format and checker responsible for an auxiliary file.
    pub fn for_node(&self, node: &NodeName) -> Option<(&FileFormat, &Arc<dyn Checker>)> {
        let format = self.formats.get(node.extension()?)?;
        Some((format, self.checkers.get(&format.checker)?))
    }

    /// Check `content` as if it were the file `node`.
    pub fn check_file(&self, node: &NodeName, content: &str, cancel: &Cancel, sink: Sink<'_>) -> Option<Outcome> {
        let (format, checker) = self.for_node(node)?;
        let header = (format.template)(node);
        let input = CheckInput {
            node,
            content,
            header: Some(&header),
        };
        Some(run_guarded(checker.as_ref(), &input, cancel, sink))
    }
}
