//! Declarative configuration file (TOML).
//!
//! ```toml
//! workers = 4
//! cache_cap = 10000
//! hard_deadline_ms = 2000
//!
//! [checkers.forthel]
//! kind = "forthel"          # forthel | bibtex | sleep | external
//! delay_ms = 0
//!
//! [checkers.lint]
//! kind = "external"
//! program = "lint-tool"
//! args = ["--check", "{file}"]
//! input = "file"            # stdin | file
//! time_limit_ms = 30000
//!
//! [[formats]]
//! extension = "ftl"
//! checker = "forthel"
//!
//! [export]
//! session = "Main"
//! database = "exports.db"
//! compress = true
//! ```
//!
//! Without `[checkers]` and `[[formats]]` the demo registry is used.
//! `PROOFDOC_EXPORT_DB` overrides `export.database`; `PROOFDOC_TOOL_<ID>`
//! overrides the program of external checker `ID`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use serde::Deserialize;
use thiserror::Error;
use toml::Spanned;

use crate::checker::{
    BibtexChecker, Checker, ExternalChecker, FileFormat, ForthelChecker, InputMode, Registry, ResultCache, SleepChecker,
};
use crate::execution::EngineConfig;

pub const EXPORT_DB_ENV: &str = "PROOFDOC_EXPORT_DB";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{line}:{column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("{line}:{column}: {message}")]
    Invalid { line: usize, column: usize, message: String },
}

impl ConfigError {
    /// One-based position of the problem, if known.
    pub fn position(&self) -> Option<(usize, usize)> {
        match self {
            ConfigError::Syntax { line, column, .. } | ConfigError::Invalid { line, column, .. } => Some((*line, *column)),
            ConfigError::Io { .. } => None,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    workers: Option<usize>,
    cache_cap: Option<usize>,
    hard_deadline_ms: Option<u64>,
    #[serde(default)]
    checkers: BTreeMap<String, Spanned<RawChecker>>,
    #[serde(default)]
    formats: Vec<RawFormat>,
    #[serde(default)]
    export: RawExport,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawChecker {
    kind: Spanned<String>,
    delay_ms: Option<u64>,
    program: Option<String>,
    #[serde(default)]
    args: Vec<String>,
    input: Option<Spanned<String>>,
    time_limit_ms: Option<u64>,
    cooperative: Option<bool>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFormat {
    extension: String,
    checker: Spanned<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawExport {
    session: Option<String>,
    database: Option<PathBuf>,
    compress: Option<bool>,
}

#[derive(Clone, Debug)]
pub struct ExportConfig {
    pub session: String,
    pub database: Option<PathBuf>,
    pub compress: bool,
}

#[derive(Clone, Debug)]
pub struct Config {
    pub engine: EngineConfig,
    pub cache_cap: Option<usize>,
    pub export: ExportConfig,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            engine: EngineConfig::default(),
            cache_cap: None,
            export: ExportConfig {
                session: "Main".into(),
                database: std::env::var_os(EXPORT_DB_ENV).map(PathBuf::from),
                compress: true,
            },
        }
    }
}

/// One-based line and column of a byte offset.
fn line_column(src: &str, offset: usize) -> (usize, usize) {
    let before = &src[..offset.min(src.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

fn invalid(src: &str, span: std::ops::Range<usize>, message: impl Into<String>) -> ConfigError {
    let (line, column) = line_column(src, span.start);
    ConfigError::Invalid {
        line,
        column,
        message: message.into(),
    }
}

impl Config {
    pub fn load(path: &Path) -> Result<Config, ConfigError> {
        let src = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_owned(),
            source,
        })?;
        Config::parse(&src)
    }

    pub fn parse(src: &str) -> Result<Config, ConfigError> {
        let raw: RawConfig = toml::from_str(src).map_err(|e| {
            let (line, column) = e.span().map_or((1, 1), |s| line_column(src, s.start));
            ConfigError::Syntax {
                line,
                column,
                message: e.message().to_owned(),
            }
        })?;
        let mut config = Config::default();
        if let Some(w) = raw.workers {
            if w == 0 {
                return Err(invalid(src, 0..0, "workers must be positive"));
            }
            config.engine.workers = w;
        }
        if let Some(ms) = raw.hard_deadline_ms {
            config.engine.hard_deadline = Duration::from_millis(ms);
        }
        config.cache_cap = raw.cache_cap;
        if !raw.checkers.is_empty() || !raw.formats.is_empty() {
            config.engine.registry = build_registry(src, &raw, config.cache_cap)?;
        } else if raw.cache_cap.is_some() {
            let mut r = Registry::new();
            let forthel = ForthelChecker::new(Duration::ZERO).with_cache(ResultCache::new(raw.cache_cap));
            r.register_checker("forthel", Arc::new(forthel)).expect("fresh registry");
            r.register_checker("bibtex", Arc::new(BibtexChecker::new())).expect("fresh registry");
            r.register_format(FileFormat::new("ftl", "forthel")).expect("fresh registry");
            r.register_format(FileFormat::new("bib", "bibtex")).expect("fresh registry");
            config.engine.registry = r;
        }
        if let Some(s) = raw.export.session {
            config.export.session = s;
        }
        if config.export.database.is_none() {
            config.export.database = raw.export.database;
        }
        if let Some(c) = raw.export.compress {
            config.export.compress = c;
        }
        Ok(config)
    }
}

fn build_registry(src: &str, raw: &RawConfig, cache_cap: Option<usize>) -> Result<Registry, ConfigError> {
    let mut r = Registry::new();
    for (id, spanned) in &raw.checkers {
        let c = spanned.get_ref();
        let delay = Duration::from_millis(c.delay_ms.unwrap_or(0));
        let checker: Arc<dyn Checker> = match c.kind.get_ref().as_str() {
            "forthel" => Arc::new(ForthelChecker::new(delay).with_cache(ResultCache::new(cache_cap))),
            "bibtex" => Arc::new(BibtexChecker::new()),
            "sleep" => Arc::new(if c.cooperative.unwrap_or(true) {
                SleepChecker::new(delay)
            } else {
                SleepChecker::stubborn(delay)
            }),
            "external" => {
                let Some(program) = &c.program else {
                    return Err(invalid(src, spanned.span(), format!("checker `{id}` needs a `program`")));
                };
                let input = match c.input.as_ref().map(|s| (s.get_ref().as_str(), s.span())) {
                    None | Some(("stdin", _)) => InputMode::Stdin,
                    Some(("file", _)) => InputMode::TempFile,
                    Some((other, span)) => {
                        return Err(invalid(src, span, format!("unknown input mode `{other}` (expected stdin or file)")))
                    }
                };
                let args: Vec<&str> = c.args.iter().map(String::as_str).collect();
                let mut x = ExternalChecker::new(id, program, &args, input);
                x.time_limit = c.time_limit_ms.map(Duration::from_millis);
                Arc::new(x)
            }
            other => {
                return Err(invalid(
                    src,
                    c.kind.span(),
                    format!("unknown checker kind `{other}` (expected forthel, bibtex, sleep or external)"),
                ))
            }
        };
        r.register_checker(id, checker)
            .map_err(|e| invalid(src, spanned.span(), e.to_string()))?;
    }
    for f in &raw.formats {
        r.register_format(FileFormat::new(&f.extension, f.checker.get_ref()))
            .map_err(|e| invalid(src, f.checker.span(), e.to_string()))?;
    }
    Ok(r)
}
