//! Batch checking: load files, check everything to quiescence, print
//! diagnostics as `FILE:START-END: SEVERITY: body`.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Component, Path, PathBuf};
use std::time::Duration;

use thiserror::Error;

use crate::config::Config;
use crate::document::{Edit, NodeName, Perspective, Version};
use crate::execution::{Engine, Status};
use crate::message::{Message, Severity};
use crate::sessions::{DatabaseStore, ExportEntry, ExportError, ExportStore};
use crate::text::char_len;

#[derive(Debug, Error)]
pub enum BatchError {
    #[error("checking did not settle within {0:?}")]
    Timeout(Duration),
    #[error("cannot write exports: {0}")]
    Export(#[from] ExportError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FileReport {
    /// Path as given, or as found when loaded for an import.
    pub display: String,
    pub messages: Vec<Message>,
    /// Problem with the file itself, e.g. it is unreadable.
    pub problem: Option<String>,
}

#[derive(Clone, Debug, Default)]
pub struct BatchReport {
    pub files: Vec<FileReport>,
    pub exports: usize,
    /// Units that did not finish normally.
    pub failed_units: usize,
}

impl BatchReport {
    pub fn errors(&self) -> usize {
        self.files
            .iter()
            .map(|f| f.messages.iter().filter(|m| m.is_error()).count() + usize::from(f.problem.is_some()))
            .sum()
    }

    pub fn exit_code(&self) -> i32 {
        i32::from(self.errors() > 0)
    }

    /// Diagnostic lines in file order, messages by position.
    pub fn lines(&self) -> Vec<String> {
        let mut out = Vec::new();
        for f in &self.files {
            if let Some(p) = &f.problem {
                out.push(format!("{}: error: {p}", f.display));
            }
            for m in &f.messages {
                out.push(format_line(&f.display, m));
            }
        }
        out
    }
}

pub fn format_line(file: &str, m: &Message) -> String {
    format!("{}:{}-{}: {}: {}", file, m.range.start, m.range.end, m.severity, m.text())
}

/// Lexical normalisation without touching the file system.
fn clean(p: &Path) -> PathBuf {
    let mut out = PathBuf::new();
    for c in p.components() {
        match c {
            Component::CurDir => {}
            Component::ParentDir => {
                if !out.pop() {
                    out.push("..");
                }
            }
            other => out.push(other),
        }
    }
    out
}

fn common_root(paths: &[PathBuf]) -> PathBuf {
    let mut root: Option<PathBuf> = None;
    for p in paths {
        let dir = p.parent().map(Path::to_path_buf).unwrap_or_default();
        root = Some(match root {
            None => dir,
            Some(r) => r
                .components()
                .zip(dir.components())
                .take_while(|(a, b)| a == b)
                .map(|(a, _)| a)
                .collect(),
        });
    }
    root.unwrap_or_default()
}

/// Files that nodes of `v` refer to but that are not loaded yet.
fn wanted(v: &Version) -> BTreeSet<NodeName> {
    let mut out = BTreeSet::new();
    for n in v.nodes() {
        for i in n.imports() {
            if let Some(m) = &i.node {
                if v.node(m).is_none() {
                    out.insert(m.clone());
                }
            }
        }
        for s in n.spans() {
            if let Some(m) = s.attachment.as_ref().and_then(|a| a.node.as_ref()) {
                if v.node(m).is_none() {
                    out.insert(m.clone());
                }
            }
        }
    }
    out
}

/// Check `paths` with a fresh engine. Imports and loaded files that exist
/// next to the given files are read too.
pub fn batch_check(paths: &[PathBuf], config: &Config, timeout: Duration) -> Result<BatchReport, BatchError> {
    let engine = Engine::new(config.engine.clone());
    let abs: Vec<PathBuf> = paths
        .iter()
        .map(|p| {
            let p = if p.is_absolute() {
                p.clone()
            } else {
                std::env::current_dir().unwrap_or_default().join(p)
            };
            clean(&p)
        })
        .collect();
    let root = common_root(&abs);
    let mut report = BatchReport::default();
    let mut nodes: BTreeMap<NodeName, usize> = BTreeMap::new();
    let mut edits = Vec::new();
    type Edits = Vec<(NodeName, Edit)>;
    fn load(
        report: &mut BatchReport,
        nodes: &mut BTreeMap<NodeName, usize>,
        edits: &mut Edits,
        display: String,
        file: &Path,
        name: NodeName,
    ) {
        let idx = report.files.len();
        let mut fr = FileReport {
            display,
            messages: Vec::new(),
            problem: None,
        };
        match std::fs::read_to_string(file) {
            Ok(text) => {
                let len = char_len(&text);
                edits.push((name.clone(), Edit::SetNode(text)));
                edits.push((name.clone(), Edit::Perspective(Perspective::full(len, true))));
                nodes.insert(name, idx);
            }
            Err(e) => fr.problem = Some(format!("cannot read: {e}")),
        }
        report.files.push(fr);
    }
    for (given, abs) in paths.iter().zip(&abs) {
        let display = given.display().to_string();
        let rel = abs.strip_prefix(&root).unwrap_or(abs).to_string_lossy().into_owned();
        let name = match NodeName::from_path(&rel) {
            Ok(n) => n,
            Err(e) => {
                report.files.push(FileReport {
                    display,
                    messages: Vec::new(),
                    problem: Some(e.to_string()),
                });
                continue;
            }
        };
        let registered = name.is_theory() || name.extension().is_some_and(|x| config.engine.registry.format(x).is_some());
        if !registered {
            report.files.push(FileReport {
                display,
                messages: Vec::new(),
                problem: Some(format!(
                    "no checker registered for `.{}` files",
                    name.extension().unwrap_or("")
                )),
            });
            continue;
        }
        if nodes.contains_key(&name) {
            continue;
        }
        load(&mut report, &mut nodes, &mut edits, display, abs, name);
    }
    let mut tried: BTreeSet<NodeName> = BTreeSet::new();
    while !edits.is_empty() {
        // Edits only fail for out-of-range offsets, which SetNode has none of.
        engine.apply_edits(&std::mem::take(&mut edits)).expect("whole-node edits apply");
        for name in wanted(&engine.latest()) {
            if !tried.insert(name.clone()) {
                continue;
            }
            let file = root.join(name.path());
            if file.is_file() {
                let display = file.display().to_string();
                load(&mut report, &mut nodes, &mut edits, display, &file, name);
            }
        }
    }
    if !engine.await_quiescence(timeout) {
        return Err(BatchError::Timeout(timeout));
    }
    for (name, idx) in &nodes {
        report.files[*idx].messages = engine.messages(name);
    }
    report.failed_units = engine
        .results()
        .iter()
        .filter(|(.., s, _)| *s != Status::Finished)
        .count();
    let exports = engine.exports();
    report.exports = exports.len();
    if let Some(db) = &config.export.database {
        let store = DatabaseStore::open(db)?;
        for (theory, name, bytes) in exports {
            let mut e = ExportEntry::new(&config.export.session, &theory, &name, bytes);
            if config.export.compress {
                e = e.compressed();
            }
            store.export_blob(&e)?;
        }
    }
    Ok(report)
}

/// Only error-severity messages decide the exit code.
pub fn has_errors(messages: &[Message]) -> bool {
    messages.iter().any(|m| m.severity == Severity::Error)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(files: &[(&str, &str)]) -> (BatchReport, tempfile::TempDir) {
        let dir = tempfile::tempdir().unwrap();
        let mut paths = Vec::new();
        for (name, text) in files {
            let p = dir.path().join(name);
            std::fs::create_dir_all(p.parent().unwrap()).unwrap();
            std::fs::write(&p, text).unwrap();
            paths.push(p);
        }
        let r = batch_check(&paths, &Config::default(), Duration::from_secs(30)).unwrap();
        (r, dir)
    }

    #[test]
    fn correct_document_exits_zero() {
        let (r, _d) = run(&[("A.thy", "theory A begin\nlemma 1 + 1 = 2\nend\n")]);
        assert_eq!(r.exit_code(), 0);
        assert!(r.lines().iter().any(|l| l.ends_with(": checked")), "{:?}", r.lines());
    }

    #[test]
    fn false_proposition_exact_offsets() {
        let text = "theory A begin\nlemma 2 + 2 = 5\nend\n";
        let (r, _d) = run(&[("A.thy", text)]);
        assert_eq!(r.exit_code(), 1);
        let errors: Vec<String> = r.lines().into_iter().filter(|l| l.contains(": error: ")).collect();
        assert_eq!(errors.len(), 1);
        let start = text.find("lemma").unwrap();
        // the command span runs up to the next command
        let end = text.find("end").unwrap();
        assert!(errors[0].contains(&format!(":{start}-{end}: error: ")), "{}", errors[0]);
    }

    #[test]
    fn empty_file_and_unregistered_extension() {
        let (r, _d) = run(&[("E.thy", ""), ("notes.xyz", "x")]);
        assert!(r.files[0].messages.is_empty());
        assert_eq!(r.files[1].problem.as_deref(), Some("no checker registered for `.xyz` files"));
        assert_eq!(r.exit_code(), 1);
        let (r, _d) = run(&[("E.thy", "")]);
        assert_eq!((r.exit_code(), r.lines().len()), (0, 0));
    }

    #[test]
    fn imports_are_read_from_disk() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("B.thy"), "theory B begin\ndefinition y = 3\nend\n").unwrap();
        let a = dir.path().join("A.thy");
        std::fs::write(&a, "theory A imports B begin\nlemma y = 3\nend\n").unwrap();
        let r = batch_check(&[a], &Config::default(), Duration::from_secs(30)).unwrap();
        assert_eq!(r.exit_code(), 0, "{:?}", r.lines());
        assert_eq!(r.files.len(), 2);
    }
}
