//! Character-offset text ranges.
//!
//! Every offset in this crate counts Unicode scalar values (Rust `char`s),
//! never bytes.

use std::fmt;

/// Half-open interval `[start, end)` of character offsets.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TextRange {
    pub start: usize,
    pub end: usize,
}

impl TextRange {
    pub fn new(start: usize, end: usize) -> Self {
        assert!(start <= end, "inverted range {start}..{end}");
        TextRange { start, end }
    }

    pub fn empty(at: usize) -> Self {
        TextRange { start: at, end: at }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }

    pub fn contains_range(&self, other: &TextRange) -> bool {
        self.start <= other.start && other.end <= self.end
    }

    /// Intersection test where an empty range acts as a point: a point
    /// intersects a range containing it, and another point at the same offset.
    pub fn intersects(&self, other: &TextRange) -> bool {
        match (self.is_empty(), other.is_empty()) {
            (false, false) => self.start < other.end && other.start < self.end,
            (false, true) => self.start <= other.start && other.start < self.end,
            (true, false) => other.start <= self.start && self.start < other.end,
            (true, true) => self.start == other.start,
        }
    }

    pub fn shift(&self, by: usize) -> TextRange {
        TextRange::new(self.start + by, self.end + by)
    }

    /// Shift left by `by`; caller guarantees `start >= by`.
    pub fn unshift(&self, by: usize) -> TextRange {
        TextRange::new(self.start - by, self.end - by)
    }
}

impl fmt::Display for TextRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.start, self.end)
    }
}

/// Number of characters in `s`.
pub fn char_len(s: &str) -> usize {
    s.chars().count()
}

/// Byte index of character offset `offset`, or `None` past the end.
/// `offset == char_len(s)` maps to `s.len()`.
pub fn byte_index(s: &str, offset: usize) -> Option<usize> {
    if offset == 0 {
        return Some(0);
    }
    let mut count = 0;
    for (i, _) in s.char_indices() {
        if count == offset {
            return Some(i);
        }
        count += 1;
    }
    (count == offset).then_some(s.len())
}

/// Substring by character range; `None` when out of bounds.
pub fn slice(s: &str, range: TextRange) -> Option<&str> {
    let start = byte_index(s, range.start)?;
    let end = start + byte_index(&s[start..], range.len())?;
    Some(&s[start..end])
}
