//! One protocol connection against a running engine.
//!
//! The calling thread reads and applies client messages; engine events and
//! replies share one ordered channel drained by a writer thread, so reading
//! never waits for checking or for a slow peer.

use std::io::{self, Read, Write};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::mpsc::{channel, Receiver, RecvTimeoutError, Sender};
use std::thread;
use std::time::Duration;

use thiserror::Error;

use super::codec::{encode, CodecError, Decoder};
use super::trace::{self, Tracer};
use super::wire::{ClientMessage, ServerMessage, WireError, PROTOCOL_VERSION};
use crate::document::Edit;
use crate::execution::Engine;

#[derive(Debug, Error)]
pub enum ServeError {
    #[error("connection i/o: {0}")]
    Io(#[from] io::Error),
    #[error("fatal framing error: {0}")]
    Codec(#[from] CodecError),
}

const POLL: Duration = Duration::from_millis(20);

fn write_message(w: &mut impl Write, m: &ServerMessage, tracer: &Option<Tracer>) -> io::Result<()> {
    let chunks = match m.to_chunks() {
        Ok(c) => c,
        Err(e) => {
            log::error!("cannot encode `{}`: {e}", m.name());
            return Ok(());
        }
    };
    trace::maybe(tracer, '>', &chunks);
    let refs: Vec<&[u8]> = chunks.iter().map(Vec::as_slice).collect();
    w.write_all(&encode(&refs))
}

/// Flushes only once the queue is drained.
fn writer_loop(out: Receiver<ServerMessage>, mut w: impl Write, tracer: &Option<Tracer>, closed: &AtomicBool) {
    while let Ok(first) = out.recv() {
        let mut res = write_message(&mut w, &first, tracer);
        while res.is_ok() {
            let Ok(m) = out.try_recv() else { break };
            res = write_message(&mut w, &m, tracer);
        }
        if let Err(e) = res.and_then(|()| w.flush()) {
            log::info!("peer stopped reading: {e}");
            closed.store(true, Ordering::SeqCst);
            return;
        }
    }
}

struct Session<'a> {
    engine: &'a Engine,
    started: bool,
    out: Sender<ServerMessage>,
}

impl Session<'_> {
    fn reply(&self, m: ServerMessage) {
        let _ = self.out.send(m);
    }

    fn error(&self, text: impl Into<String>) {
        self.reply(ServerMessage::Error(text.into()));
    }

    fn handle(&mut self, chunks: &[Vec<u8>]) {
        let msg = match ClientMessage::from_chunks(chunks) {
            Ok(m) => m,
            Err(e @ WireError::UnknownMessage(_)) => return self.error(e.to_string()),
            Err(e) => return self.error(format!("malformed message: {e}")),
        };
        match msg {
            ClientMessage::SessionStart => {
                self.started = true;
                self.reply(ServerMessage::SessionReady {
                    protocol: PROTOCOL_VERSION,
                });
            }
            _ if !self.started => self.error(format!("`{}` before session_start", msg.name())),
            ClientMessage::NodeEdits { version, edits } => self.edits(version, &edits),
            ClientMessage::BlobUpdate { node, content } => self.edits(None, &[(node, Edit::SetNode(content))]),
            ClientMessage::DialogResult { id, .. } => self.error(format!("no dialog `{id}` is pending")),
        }
    }

    fn edits(&self, version: Option<crate::document::VersionId>, edits: &[(crate::document::NodeName, Edit)]) {
        let before = self.engine.latest().id();
        let res = match version {
            Some(v) => self.engine.apply_edits_as(v, edits),
            None => self.engine.apply_edits(edits),
        };
        match res {
            // Nothing new was assigned, so no event announces the version.
            Ok(v) if v == before => {
                let a = self.engine.assignment();
                self.reply(ServerMessage::Assigned {
                    version: v,
                    execs: a.iter().map(|(n, s, e)| (n.clone(), s, e)).collect(),
                });
            }
            Ok(_) => {}
            Err(e) => self.error(format!("edits rejected: {e}")),
        }
    }
}

/// Serve one connection until the peer closes its end. Unknown or malformed
/// messages are answered with `error` and the connection stays up; a framing
/// error ends it.
pub fn serve_connection<R: Read, W: Write + Send>(engine: &Engine, mut reader: R, writer: W) -> Result<(), ServeError> {
    let tracer = Tracer::from_env();
    let (out, out_rx) = channel::<ServerMessage>();
    let events = engine.subscribe();
    let stop = AtomicBool::new(false);
    let closed = AtomicBool::new(false);
    thread::scope(|scope| {
        scope.spawn(|| writer_loop(out_rx, writer, &tracer, &closed));
        let forward = out.clone();
        let stop_ref = &stop;
        scope.spawn(move || loop {
            match events.recv_timeout(POLL) {
                Ok(e) => {
                    if forward.send(ServerMessage::from(e)).is_err() {
                        return;
                    }
                }
                Err(RecvTimeoutError::Timeout) if !stop_ref.load(Ordering::SeqCst) => {}
                Err(_) => return,
            }
        });

        let mut session = Session {
            engine,
            started: false,
            out,
        };
        let mut decoder = Decoder::new();
        let mut buf = vec![0u8; 64 * 1024];
        let result = loop {
            if closed.load(Ordering::SeqCst) {
                break Ok(());
            }
            let n = match reader.read(&mut buf) {
                Ok(0) => break Ok(()),
                Ok(n) => n,
                Err(e) if e.kind() == io::ErrorKind::Interrupted => continue,
                Err(e) => break Err(ServeError::Io(e)),
            };
            decoder.feed(&buf[..n]);
            let fatal = loop {
                match decoder.next_message() {
                    Ok(Some(chunks)) => {
                        trace::maybe(&tracer, '<', &chunks);
                        session.handle(&chunks);
                    }
                    Ok(None) => break None,
                    Err(e) => break Some(e),
                }
            };
            if let Some(e) = fatal {
                session.error(format!("fatal: {e}"));
                break Err(ServeError::Codec(e));
            }
        };
        stop.store(true, Ordering::SeqCst);
        drop(session);
        result
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::execution::EngineConfig;
    use std::io::Cursor;

    fn frame(m: &ClientMessage) -> Vec<u8> {
        let chunks = m.to_chunks().unwrap();
        let refs: Vec<&[u8]> = chunks.iter().map(Vec::as_slice).collect();
        encode(&refs)
    }

    fn decode_all(bytes: &[u8]) -> Vec<ServerMessage> {
        let mut d = Decoder::new();
        d.feed(bytes);
        let mut out = Vec::new();
        while let Some(c) = d.next_message().unwrap() {
            out.push(ServerMessage::from_chunks(&c).unwrap());
        }
        out
    }

    #[test]
    fn unknown_name_and_missing_start() {
        let engine = Engine::new(EngineConfig {
            workers: 1,
            ..EngineConfig::default()
        });
        let mut input = encode(&[b"nope"]);
        input.extend(frame(&ClientMessage::NodeEdits {
            version: None,
            edits: vec![],
        }));
        input.extend(frame(&ClientMessage::SessionStart));
        input.extend(frame(&ClientMessage::NodeEdits {
            version: None,
            edits: vec![],
        }));
        let mut output = Vec::new();
        serve_connection(&engine, Cursor::new(input), &mut output).unwrap();
        let msgs = decode_all(&output);
        assert!(matches!(&msgs[0], ServerMessage::Error(t) if t.contains("nope")));
        assert!(matches!(&msgs[1], ServerMessage::Error(t) if t.contains("before session_start")));
        assert_eq!(msgs[2], ServerMessage::SessionReady { protocol: PROTOCOL_VERSION });
        assert!(matches!(&msgs[3], ServerMessage::Assigned { execs, .. } if execs.is_empty()));
    }

    #[test]
    fn bad_framing_is_fatal() {
        let engine = Engine::new(EngineConfig {
            workers: 1,
            ..EngineConfig::default()
        });
        let mut output = Vec::new();
        let r = serve_connection(&engine, Cursor::new(b"4x\nping".to_vec()), &mut output);
        assert!(matches!(r, Err(ServeError::Codec(_))));
        assert!(matches!(&decode_all(&output)[0], ServerMessage::Error(t) if t.starts_with("fatal")));
    }
}
