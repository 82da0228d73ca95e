//! Session export store: named blobs keyed by (session, theory, name).
//!
//! Stored records are one flag byte (0 = raw, 1 = XZ) followed by the
//! payload bytes. Retrieval decompresses transparently.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;
use std::sync::Mutex;

use rusqlite::{params, Connection, ErrorCode};
use thiserror::Error;
use xz2::read::XzDecoder;
use xz2::write::XzEncoder;

const FLAG_RAW: u8 = 0;
const FLAG_XZ: u8 = 1;
const XZ_PRESET: u32 = 6;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExportEntry {
    pub session: String,
    pub theory: String,
    /// Slash-separated path.
    pub name: String,
    pub payload: Vec<u8>,
    pub compressed: bool,
}

impl ExportEntry {
    pub fn new(session: &str, theory: &str, name: &str, payload: Vec<u8>) -> Self {
        ExportEntry {
            session: session.to_owned(),
            theory: theory.to_owned(),
            name: name.to_owned(),
            payload,
            compressed: false,
        }
    }

    pub fn compressed(mut self) -> Self {
        self.compressed = true;
        self
    }

    /// `theory/name`
    pub fn qualified_name(&self) -> String {
        format!("{}/{}", self.theory, self.name)
    }
}

#[derive(Debug, Error)]
pub enum ExportError {
    #[error("duplicate export {session}:{theory}/{name}")]
    Duplicate {
        session: String,
        theory: String,
        name: String,
    },
    #[error("invalid export name `{0}`")]
    InvalidName(String),
    #[error("corrupt export record {0}")]
    Corrupt(String),
    #[error("compression: {0}")]
    Io(#[from] std::io::Error),
    #[error("export database: {0}")]
    Database(#[from] rusqlite::Error),
}

/// Names are non-empty slash-separated paths without empty, `.` or `..`
/// segments.
pub fn valid_name(name: &str) -> bool {
    !name.is_empty()
        && name
            .split('/')
            .all(|seg| !seg.is_empty() && seg != "." && seg != "..")
}

/// Encode a record: flag byte then payload, XZ-compressed when requested.
pub fn encode_record(payload: &[u8], compress: bool) -> Result<Vec<u8>, ExportError> {
    if !compress {
        let mut out = Vec::with_capacity(payload.len() + 1);
        out.push(FLAG_RAW);
        out.extend_from_slice(payload);
        return Ok(out);
    }
    let mut enc = XzEncoder::new(vec![FLAG_XZ], XZ_PRESET);
    enc.write_all(payload)?;
    Ok(enc.finish()?)
}

/// Decode a record into (payload, compressed).
pub fn decode_record(record: &[u8]) -> Result<(Vec<u8>, bool), ExportError> {
    match record.split_first() {
        Some((&FLAG_RAW, rest)) => Ok((rest.to_vec(), false)),
        Some((&FLAG_XZ, rest)) => {
            let mut out = Vec::new();
            XzDecoder::new(rest).read_to_end(&mut out)?;
            Ok((out, true))
        }
        Some((flag, _)) => Err(ExportError::Corrupt(format!("unknown flag byte {flag}"))),
        None => Err(ExportError::Corrupt("empty record".into())),
    }
}

/// Match `name` against `pattern`: `*` matches within one path segment,
/// `**` matches any number of characters including `/`.
pub fn matches_pattern(pattern: &str, name: &str) -> bool {
    fn go(p: &[char], n: &[char]) -> bool {
        match p {
            [] => n.is_empty(),
            ['*', '*', rest @ ..] => (0..=n.len()).any(|k| go(rest, &n[k..])),
            ['*', rest @ ..] => {
                let limit = n.iter().position(|&c| c == '/').unwrap_or(n.len());
                (0..=limit).any(|k| go(rest, &n[k..]))
            }
            [c, rest @ ..] => n.first() == Some(c) && go(rest, &n[1..]),
        }
    }
    let p: Vec<char> = pattern.chars().collect();
    let n: Vec<char> = name.chars().collect();
    go(&p, &n)
}

/// Storage backend for exports. Writes are atomic per entry; the first
/// writer of a key wins and later writers get [`ExportError::Duplicate`].
pub trait ExportStore: Send + Sync {
    fn put_record(&self, session: &str, theory: &str, name: &str, record: Vec<u8>)
        -> Result<(), ExportError>;

    /// Raw records of `session`/`theory` (all theories when `None`), sorted
    /// by (theory, name).
    fn records(
        &self,
        session: &str,
        theory: Option<&str>,
    ) -> Result<Vec<(String, String, Vec<u8>)>, ExportError>;

    fn export_blob(&self, entry: &ExportEntry) -> Result<(), ExportError> {
        if !valid_name(&entry.name) {
            return Err(ExportError::InvalidName(entry.name.clone()));
        }
        let record = encode_record(&entry.payload, entry.compressed)?;
        self.put_record(&entry.session, &entry.theory, &entry.name, record)
    }

    /// Entries of `session`/`theory` whose name matches `pattern`. Unknown
    /// keys give an empty list.
    fn retrieve_export(
        &self,
        session: &str,
        theory: &str,
        pattern: &str,
    ) -> Result<Vec<ExportEntry>, ExportError> {
        self.retrieve_where(session, Some(theory), &|name| matches_pattern(pattern, name))
    }

    /// Entries of `session` whose `theory/name` matches `pattern`.
    fn retrieve_qualified(
        &self,
        session: &str,
        pattern: &str,
    ) -> Result<Vec<ExportEntry>, ExportError> {
        let all = self.retrieve_where(session, None, &|_| true)?;
        Ok(all
            .into_iter()
            .filter(|e| matches_pattern(pattern, &e.qualified_name()))
            .collect())
    }

    fn retrieve_where(
        &self,
        session: &str,
        theory: Option<&str>,
        keep: &dyn Fn(&str) -> bool,
    ) -> Result<Vec<ExportEntry>, ExportError> {
        let mut out = Vec::new();
        for (theory, name, record) in self.records(session, theory)? {
            if keep(&name) {
                let (payload, compressed) = decode_record(&record)?;
                out.push(ExportEntry {
                    session: session.to_owned(),
                    theory,
                    name,
                    payload,
                    compressed,
                });
            }
        }
        Ok(out)
    }

    /// `theory/name` of every entry in `session`.
    fn list(&self, session: &str) -> Result<Vec<String>, ExportError> {
        Ok(self
            .records(session, None)?
            .into_iter()
            .map(|(t, n, _)| format!("{t}/{n}"))
            .collect())
    }
}

type Key = (String, String, String);

/// Interactive-mode store held in memory.
#[derive(Default)]
pub struct MemoryStore {
    entries: Mutex<BTreeMap<Key, Vec<u8>>>,
}

impl MemoryStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Stored record size in bytes, including the flag byte.
    pub fn stored_size(&self, session: &str, theory: &str, name: &str) -> Option<usize> {
        let key = (session.to_owned(), theory.to_owned(), name.to_owned());
        self.entries.lock().unwrap().get(&key).map(Vec::len)
    }
}

impl ExportStore for MemoryStore {
    fn put_record(
        &self,
        session: &str,
        theory: &str,
        name: &str,
        record: Vec<u8>,
    ) -> Result<(), ExportError> {
        let key = (session.to_owned(), theory.to_owned(), name.to_owned());
        let mut entries = self.entries.lock().unwrap();
        if entries.contains_key(&key) {
            return Err(ExportError::Duplicate {
                session: key.0,
                theory: key.1,
                name: key.2,
            });
        }
        entries.insert(key, record);
        Ok(())
    }

    fn records(
        &self,
        session: &str,
        theory: Option<&str>,
    ) -> Result<Vec<(String, String, Vec<u8>)>, ExportError> {
        let entries = self.entries.lock().unwrap();
        Ok(entries
            .iter()
            .filter(|((s, t, _), _)| s == session && theory.is_none_or(|th| th == t))
            .map(|((_, t, n), r)| (t.clone(), n.clone(), r.clone()))
            .collect())
    }
}

/// Batch-mode store: a single-file SQLite database.
pub struct DatabaseStore {
    conn: Mutex<Connection>,
}

impl DatabaseStore {
    pub fn open(path: &Path) -> Result<Self, ExportError> {
        Self::init(Connection::open(path)?)
    }

    pub fn in_memory() -> Result<Self, ExportError> {
        Self::init(Connection::open_in_memory()?)
    }

    fn init(conn: Connection) -> Result<Self, ExportError> {
        conn.execute_batch(
            "CREATE TABLE IF NOT EXISTS exports (
                session TEXT NOT NULL,
                theory TEXT NOT NULL,
                name TEXT NOT NULL,
                record BLOB NOT NULL,
                PRIMARY KEY (session, theory, name)
            )",
        )?;
        Ok(DatabaseStore {
            conn: Mutex::new(conn),
        })
    }
}

impl ExportStore for DatabaseStore {
    fn put_record(
        &self,
        session: &str,
        theory: &str,
        name: &str,
        record: Vec<u8>,
    ) -> Result<(), ExportError> {
        let conn = self.conn.lock().unwrap();
        match conn.execute(
            "INSERT INTO exports (session, theory, name, record) VALUES (?1, ?2, ?3, ?4)",
            params![session, theory, name, record],
        ) {
            Ok(_) => Ok(()),
            Err(rusqlite::Error::SqliteFailure(e, _)) if e.code == ErrorCode::ConstraintViolation => {
                Err(ExportError::Duplicate {
                    session: session.to_owned(),
                    theory: theory.to_owned(),
                    name: name.to_owned(),
                })
            }
            Err(e) => Err(e.into()),
        }
    }

    fn records(
        &self,
        session: &str,
        theory: Option<&str>,
    ) -> Result<Vec<(String, String, Vec<u8>)>, ExportError> {
        let conn = self.conn.lock().unwrap();
        let mut stmt = conn.prepare(
            "SELECT theory, name, record FROM exports
             WHERE session = ?1 AND (?2 IS NULL OR theory = ?2)
             ORDER BY theory, name",
        )?;
        let rows = stmt.query_map(params![session, theory], |row| {
            Ok((row.get(0)?, row.get(1)?, row.get(2)?))
        })?;
        Ok(rows.collect::<Result<_, _>>()?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wildcards() {
        assert!(matches_pattern("a/*", "a/x"));
        assert!(!matches_pattern("a/*", "a/x/y"));
        assert!(matches_pattern("a/**", "a/x/y"));
        assert!(matches_pattern("**", ""));
        assert!(matches_pattern("*.ML", "gen.ML"));
        assert!(!matches_pattern("*.ML", "gen.hs"));
        assert!(matches_pattern("exact", "exact"));
    }

    #[test]
    fn record_flag_byte() {
        assert_eq!(encode_record(b"ab", false).unwrap(), vec![0, b'a', b'b']);
        let xz = encode_record(b"ab", true).unwrap();
        assert_eq!(xz[0], 1);
        assert_eq!(decode_record(&xz).unwrap(), (b"ab".to_vec(), true));
        assert!(decode_record(&[7]).is_err());
        assert!(decode_record(&[]).is_err());
    }

    #[test]
    fn pattern_retrieval_and_duplicates() {
        let store = MemoryStore::new();
        for n in ["a/x", "a/y", "b/z"] {
            store
                .export_blob(&ExportEntry::new("S", "T", n, n.as_bytes().to_vec()))
                .unwrap();
        }
        let got: Vec<String> = store
            .retrieve_export("S", "T", "a/*")
            .unwrap()
            .into_iter()
            .map(|e| e.name)
            .collect();
        assert_eq!(got, ["a/x", "a/y"]);
        assert!(store.retrieve_export("S", "U", "**").unwrap().is_empty());
        let dup = store.export_blob(&ExportEntry::new("S", "T", "a/x", vec![]));
        assert!(matches!(dup, Err(ExportError::Duplicate { .. })));
        assert!(matches!(
            store.export_blob(&ExportEntry::new("S", "T", "a//b", vec![])),
            Err(ExportError::InvalidName(_))
        ));
    }

    #[test]
    fn database_store_round_trip() {
        let store = DatabaseStore::in_memory().unwrap();
        let e = ExportEntry::new("S", "T", "gen/code.ML", b"val x = 1".to_vec()).compressed();
        store.export_blob(&e).unwrap();
        let got = store.retrieve_export("S", "T", "gen/*").unwrap();
        assert_eq!(got, vec![e.clone()]);
        assert!(matches!(store.export_blob(&e), Err(ExportError::Duplicate { .. })));
        assert_eq!(store.list("S").unwrap(), ["T/gen/code.ML"]);
    }
}
