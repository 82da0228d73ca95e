//! Optional message trace, enabled by `PROOFDOC_PROTOCOL_TRACE`.
//!
//! The variable names a file to append to; `-` or `stderr` means standard
//! error. One line per message: direction, name, then argument lengths and
//! a short escaped preview.

use std::fs::OpenOptions;
use std::io::Write;
use std::sync::Mutex;

pub const TRACE_ENV: &str = "PROOFDOC_PROTOCOL_TRACE";

const PREVIEW: usize = 60;

pub struct Tracer {
    out: Mutex<Box<dyn Write + Send>>,
}

impl Tracer {
    pub fn from_env() -> Option<Tracer> {
        let target = std::env::var(TRACE_ENV).ok().filter(|s| !s.is_empty())?;
        let out: Box<dyn Write + Send> = if target == "-" || target == "stderr" {
            Box::new(std::io::stderr())
        } else {
            match OpenOptions::new().create(true).append(true).open(&target) {
                Ok(f) => Box::new(f),
                Err(e) => {
                    log::warn!("cannot open protocol trace `{target}`: {e}");
                    return None;
                }
            }
        };
        Some(Tracer::to(out))
    }

    pub fn to(out: Box<dyn Write + Send>) -> Tracer {
        Tracer { out: Mutex::new(out) }
    }

    /// `dir` is `>` for outgoing and `<` for incoming messages.
    pub fn record(&self, dir: char, chunks: &[Vec<u8>]) {
        let line = format_line(dir, chunks);
        let mut out = self.out.lock().unwrap_or_else(|e| e.into_inner());
        let _ = writeln!(out, "{line}");
        let _ = out.flush();
    }
}

pub fn format_line(dir: char, chunks: &[Vec<u8>]) -> String {
    let mut line = String::from(dir);
    for (i, c) in chunks.iter().enumerate() {
        line.push(' ');
        if i == 0 {
            line.push_str(&String::from_utf8_lossy(c));
            continue;
        }
        let text = String::from_utf8_lossy(c);
        let preview: String = text.chars().take(PREVIEW).flat_map(char::escape_debug).collect();
        let more = if text.chars().count() > PREVIEW { "…" } else { "" };
        line.push_str(&format!("[{}]\"{preview}{more}\"", c.len()));
    }
    line
}

pub fn maybe(tracer: &Option<Tracer>, dir: char, chunks: &[Vec<u8>]) {
    if let Some(t) = tracer {
        t.record(dir, chunks);
    }
}
