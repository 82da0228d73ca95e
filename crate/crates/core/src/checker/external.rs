//! External tools as checkers.
//!
//! The tool receives the content on stdin or in a fresh temporary file and
//! prints one message per line: `SEVERITY<TAB>START<TAB>END<TAB>body`, with
//! character offsets into the content.

use std::io::{BufRead, BufReader, Read, Write};
use std::os::unix::process::CommandExt;
use std::path::PathBuf;
use std::process::{Command, ExitStatus, Stdio};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use super::{Cancel, CheckInput, Checker, Outcome, Output, Report, Sink};
use crate::message::{Message, Phase, Severity};
use crate::text::TextRange;

/// Time between the interrupt and the kill.
pub const INTERRUPT_DEADLINE: Duration = Duration::from_secs(2);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InputMode {
    Stdin,
    /// Written to a file in the run's temporary directory; `{file}` in the
    /// argument template is replaced by its path.
    TempFile,
}

/// Environment variable overriding the program of checker `id`.
pub fn tool_env_var(id: &str) -> String {
    let id: String = id
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c.to_ascii_uppercase() } else { '_' })
        .collect();
    format!("PROOFDOC_TOOL_{id}")
}

/// One tool output line as messages for content of `len` characters: the
/// message itself, plus a warning if its position had to be clamped.
/// `None` if the line does not follow the grammar.
pub fn parse_tool_line(line: &str, len: usize) -> Option<Vec<Message>> {
    let line = line.strip_suffix('\r').unwrap_or(line);
    let mut parts = line.splitn(4, '\t');
    let severity = Severity::parse(parts.next()?)?;
    let start: usize = parts.next()?.parse().ok()?;
    let end: usize = parts.next()?.parse().ok()?;
    let body = parts.next()?;
    if body.is_empty() && severity != Severity::Status {
        return None;
    }
    let e = end.min(len);
    let s = start.min(e);
    let range = TextRange::new(s, e);
    let mut out = vec![Message::new(severity, Phase::Semantics, range, body)];
    if (s, e) != (start, end) {
        out.push(Message::new(
            Severity::Warning,
            Phase::Semantics,
            range,
            format!("malformed position {start}-{end} from tool, clamped to {range}"),
        ));
    }
    Some(out)
}

#[derive(Clone, Debug)]
pub struct ExternalChecker {
    pub id: String,
    pub program: String,
    pub args: Vec<String>,
    pub input: InputMode,
    /// Where temporary directories are created; the system default if unset.
    pub temp_root: Option<PathBuf>,
    /// A run exceeding this is killed and reported as failed.
    pub time_limit: Option<Duration>,
}

impl ExternalChecker {
    pub fn new(id: &str, program: &str, args: &[&str], input: InputMode) -> Self {
        ExternalChecker {
            id: id.to_owned(),
            program: program.to_owned(),
            args: args.iter().map(|s| s.to_string()).collect(),
            input,
            temp_root: None,
            time_limit: None,
        }
    }

    fn program(&self) -> String {
        std::env::var(tool_env_var(&self.id)).unwrap_or_else(|_| self.program.clone())
    }
}

fn signal(pid: u32, sig: libc::c_int) {
    // The tool leads its own process group; signal all of it.
    unsafe {
        libc::kill(-(pid as libc::pid_t), sig);
    }
}

fn failure(len: usize, body: String) -> Outcome {
    let mut r = Report::default();
    r.messages.push(Message::new(
        Severity::Error,
        Phase::Semantics,
        TextRange::new(0, len),
        body,
    ));
    Outcome::Failed(r)
}

enum End {
    Exited(ExitStatus),
    Cancelled,
    OverTime,
}

impl Checker for ExternalChecker {
    fn check(&self, input: &CheckInput<'_>, cancel: &Cancel, sink: Sink<'_>) -> Outcome {
        let len = input.content.chars().count();
        let program = self.program();
        let dir = match &self.temp_root {
            Some(root) => tempfile::Builder::new().prefix("proofdoc-").tempdir_in(root),
            None => tempfile::Builder::new().prefix("proofdoc-").tempdir(),
        };
        let dir = match dir {
            Ok(d) => d,
            Err(e) => return failure(len, format!("cannot create temporary directory: {e}")),
        };
        let mut args = self.args.clone();
        if self.input == InputMode::TempFile {
            let file = dir.path().join(input.node.file_name());
            if let Err(e) = std::fs::write(&file, input.content) {
                return failure(len, format!("cannot write temporary input: {e}"));
            }
            let path = file.to_string_lossy();
            for a in &mut args {
                *a = a.replace("{file}", &path);
            }
        }
        let mut cmd = Command::new(&program);
        cmd.args(&args)
            .current_dir(dir.path())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .stdin(match self.input {
                InputMode::Stdin => Stdio::piped(),
                InputMode::TempFile => Stdio::null(),
            })
            .process_group(0);
        let mut child = match cmd.spawn() {
            Ok(c) => c,
            Err(e) => return failure(len, format!("cannot start `{program}`: {e}")),
        };
        let pid = child.id();
        let stdin = child.stdin.take();
        let stdout = child.stdout.take().expect("piped");
        let mut stderr = child.stderr.take().expect("piped");

        let report = Mutex::new(Report::default());
        let unparsed = Mutex::new(Vec::<String>::new());
        let started = Instant::now();
        let end = std::thread::scope(|s| {
            if let Some(mut w) = stdin {
                let content = input.content.as_bytes();
                s.spawn(move || {
                    let _ = w.write_all(content);
                });
            }
            s.spawn(|| {
                for line in BufReader::new(stdout).lines() {
                    let Ok(line) = line else { break };
                    if line.trim().is_empty() {
                        continue;
                    }
                    match parse_tool_line(&line, len) {
                        Some(ms) => {
                            for m in ms {
                                if cancel.is_cancelled() {
                                    continue;
                                }
                                sink(Output::Message(m.clone()));
                                report.lock().unwrap().messages.push(m);
                            }
                        }
                        None => unparsed.lock().unwrap().push(line),
                    }
                }
            });
            let err_text = s.spawn(move || {
                let mut buf = String::new();
                let _ = stderr.read_to_string(&mut buf);
                buf
            });
            let mut interrupted: Option<Instant> = None;
            let mut over_time = false;
            let end = loop {
                match child.try_wait() {
                    Ok(Some(status)) => {
                        break if cancel.is_cancelled() {
                            End::Cancelled
                        } else if over_time {
                            End::OverTime
                        } else {
                            End::Exited(status)
                        }
                    }
                    Ok(None) => {}
                    Err(_) => {
                        signal(pid, libc::SIGKILL);
                        let _ = child.wait();
                        break End::Cancelled;
                    }
                }
                let now = Instant::now();
                match interrupted {
                    None => {
                        over_time = self.time_limit.is_some_and(|t| now - started > t);
                        if cancel.is_cancelled() || over_time {
                            signal(pid, libc::SIGINT);
                            interrupted = Some(now);
                        }
                    }
                    Some(at) if now - at >= INTERRUPT_DEADLINE => signal(pid, libc::SIGKILL),
                    Some(_) => {}
                }
                std::thread::sleep(Duration::from_millis(5));
            };
            (end, err_text.join().unwrap_or_default())
        });
        let (end, err_text) = end;
        drop(dir);
        let report = report.into_inner().unwrap();
        let unparsed = unparsed.into_inner().unwrap();
        match end {
            End::Cancelled => Outcome::Cancelled,
            End::OverTime => failure(
                len,
                format!(
                    "`{program}` killed after exceeding its time limit of {} ms",
                    self.time_limit.unwrap_or_default().as_millis()
                ),
            ),
            End::Exited(status) if !status.success() && (report.messages.is_empty() || !unparsed.is_empty()) => {
                let detail = err_text
                    .lines()
                    .chain(unparsed.iter().map(String::as_str))
                    .find(|l| !l.trim().is_empty())
                    .unwrap_or("no diagnostics");
                let code = status.code().map_or_else(|| "a signal".to_owned(), |c| format!("code {c}"));
                failure(len, format!("`{program}` exited with {code}: {detail}"))
            }
            End::Exited(_) => {
                let mut report = report;
                for line in unparsed {
                    let m = Message::new(
                        Severity::Warning,
                        Phase::Semantics,
                        TextRange::new(0, len),
                        format!("ignored tool output: {line}"),
                    );
                    sink(Output::Message(m.clone()));
                    report.messages.push(m);
                }
                Outcome::Finished(report)
            }
        }
    }
}
