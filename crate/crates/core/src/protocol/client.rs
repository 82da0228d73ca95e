//! Headless client: typed messages over any byte stream, with incoming
//! messages decoded on a reader thread.

use std::io::{self, Read, Write};
use std::os::unix::net::UnixStream;
use std::path::Path;
use std::sync::mpsc::{channel, Receiver, RecvTimeoutError};
use std::thread;
use std::time::{Duration, Instant};

use super::codec::{encode, Decoder};
use super::trace::{self, Tracer};
use super::wire::{ClientMessage, ServerMessage, WireError};

/// What the reader thread delivers.
#[derive(Debug)]
pub enum Incoming {
    Message(ServerMessage),
    /// Undecodable input; the reader stops after a framing error.
    Invalid(String),
}

/// Socket write half that signals end of input when dropped, even though
/// the reader thread still holds a clone of the socket.
struct HalfCloser(UnixStream);

impl Write for HalfCloser {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        self.0.write(buf)
    }

    fn flush(&mut self) -> io::Result<()> {
        self.0.flush()
    }
}

impl Drop for HalfCloser {
    fn drop(&mut self) {
        let _ = self.0.shutdown(std::net::Shutdown::Write);
    }
}

pub struct Client {
    writer: Box<dyn Write + Send>,
    incoming: Receiver<Incoming>,
    tracer: Option<Tracer>,
}

impl Client {
    pub fn connect(path: &Path) -> io::Result<Client> {
        let s = UnixStream::connect(path)?;
        let r = s.try_clone()?;
        Ok(Client::new(r, HalfCloser(s)))
    }

    pub fn new(reader: impl Read + Send + 'static, writer: impl Write + Send + 'static) -> Client {
        let (tx, incoming) = channel();
        thread::Builder::new()
            .name("proofdoc-client-reader".into())
            .spawn(move || {
                let mut reader = reader;
                let tracer = Tracer::from_env();
                let mut d = Decoder::new();
                let mut buf = vec![0u8; 64 * 1024];
                loop {
                    let n = match reader.read(&mut buf) {
                        Ok(0) | Err(_) => return,
                        Ok(n) => n,
                    };
                    d.feed(&buf[..n]);
                    loop {
                        let item = match d.next_message() {
                            Ok(None) => break,
                            Ok(Some(chunks)) => {
                                trace::maybe(&tracer, '<', &chunks);
                                match ServerMessage::from_chunks(&chunks) {
                                    Ok(m) => Incoming::Message(m),
                                    Err(e) => Incoming::Invalid(e.to_string()),
                                }
                            }
                            Err(e) => {
                                let _ = tx.send(Incoming::Invalid(e.to_string()));
                                return;
                            }
                        };
                        if tx.send(item).is_err() {
                            return;
                        }
                    }
                }
            })
            .expect("spawn client reader");
        Client {
            writer: Box::new(writer),
            incoming,
            tracer: Tracer::from_env(),
        }
    }

    pub fn send(&mut self, m: &ClientMessage) -> io::Result<()> {
        let chunks = m.to_chunks().map_err(|e: WireError| io::Error::new(io::ErrorKind::InvalidInput, e))?;
        self.send_raw(&chunks)
    }

    /// Send arbitrary chunks, e.g. a message name the server does not know.
    pub fn send_raw(&mut self, chunks: &[Vec<u8>]) -> io::Result<()> {
        trace::maybe(&self.tracer, '>', chunks);
        let refs: Vec<&[u8]> = chunks.iter().map(Vec::as_slice).collect();
        self.writer.write_all(&encode(&refs))?;
        self.writer.flush()
    }

    /// `None` on timeout or when the server has gone.
    pub fn recv(&self, timeout: Duration) -> Option<Incoming> {
        self.incoming.recv_timeout(timeout).ok()
    }

    /// Collect messages until `done` holds for one of them, which is
    /// included. `None` if the deadline passes or the stream ends first.
    pub fn until(&self, timeout: Duration, mut done: impl FnMut(&ServerMessage) -> bool) -> Option<Vec<ServerMessage>> {
        let deadline = Instant::now() + timeout;
        let mut seen = Vec::new();
        loop {
            let left = deadline.checked_duration_since(Instant::now())?;
            match self.incoming.recv_timeout(left) {
                Ok(Incoming::Message(m)) => {
                    let stop = done(&m);
                    seen.push(m);
                    if stop {
                        return Some(seen);
                    }
                }
                Ok(Incoming::Invalid(e)) => log::warn!("invalid server message: {e}"),
                Err(RecvTimeoutError::Timeout | RecvTimeoutError::Disconnected) => return None,
            }
        }
    }

    /// Close the sending direction; the server then ends the session.
    pub fn into_receiver(self) -> Receiver<Incoming> {
        self.incoming
    }
}
