//! Message framing over a byte channel.
//!
//! A message is a header of ASCII decimal chunk lengths joined by commas and
//! terminated by a newline, followed by the chunks' raw bytes. Chunk bytes
//! are never scanned.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodecError {
    #[error("malformed header: unexpected byte 0x{0:02x}")]
    BadByte(u8),
    #[error("malformed header: empty chunk length")]
    EmptyLength,
    #[error("malformed header: chunk length overflows")]
    Overflow,
    #[error("chunk of {len} bytes exceeds the limit of {limit}")]
    TooLarge { len: usize, limit: usize },
}

pub fn encode(chunks: &[&[u8]]) -> Vec<u8> {
    let header: Vec<String> = chunks.iter().map(|c| c.len().to_string()).collect();
    let mut out = header.join(",").into_bytes();
    out.push(b'\n');
    for c in chunks {
        out.extend_from_slice(c);
    }
    out
}

/// Incremental decoder tolerating arbitrary read boundaries.
#[derive(Debug)]
pub struct Decoder {
    buf: Vec<u8>,
    /// Parsed header of the message being received.
    lengths: Option<Vec<usize>>,
    limit: usize,
}

impl Default for Decoder {
    fn default() -> Self {
        Decoder::new()
    }
}

impl Decoder {
    pub fn new() -> Self {
        Decoder::with_limit(1 << 30)
    }

    /// A decoder refusing chunks longer than `limit` bytes.
    pub fn with_limit(limit: usize) -> Self {
        Decoder {
            buf: Vec::new(),
            lengths: None,
            limit,
        }
    }

    pub fn feed(&mut self, bytes: &[u8]) {
        self.buf.extend_from_slice(bytes);
    }

    /// Bytes received but not yet part of a complete message.
    pub fn buffered(&self) -> usize {
        self.buf.len()
    }

    /// The next complete message, `None` while more input is needed. After
    /// an error the stream is unusable.
    pub fn next_message(&mut self) -> Result<Option<Vec<Vec<u8>>>, CodecError> {
        if self.lengths.is_none() {
            for &b in &self.buf {
                if b == b'\n' {
                    break;
                }
                if !(b.is_ascii_digit() || b == b',') {
                    return Err(CodecError::BadByte(b));
                }
            }
            let Some(nl) = self.buf.iter().position(|&b| b == b'\n') else {
                return Ok(None);
            };
            let mut lengths = Vec::new();
            for field in self.buf[..nl].split(|&b| b == b',') {
                if field.is_empty() {
                    return Err(CodecError::EmptyLength);
                }
                let mut n: usize = 0;
                for &d in field {
                    n = n
                        .checked_mul(10)
                        .and_then(|n| n.checked_add(usize::from(d - b'0')))
                        .ok_or(CodecError::Overflow)?;
                }
                if n > self.limit {
                    return Err(CodecError::TooLarge { len: n, limit: self.limit });
                }
                lengths.push(n);
            }
            self.buf.drain(..=nl);
            self.lengths = Some(lengths);
        }
        let total: usize = self.lengths.as_ref().expect("set above").iter().sum();
        if self.buf.len() < total {
            return Ok(None);
        }
        let lengths = self.lengths.take().expect("set above");
        let mut rest = self.buf.split_off(total);
        std::mem::swap(&mut rest, &mut self.buf);
        let mut chunks = Vec::with_capacity(lengths.len());
        let mut at = 0;
        for n in lengths {
            chunks.push(rest[at..at + n].to_vec());
            at += n;
        }
        Ok(Some(chunks))
    }
}
