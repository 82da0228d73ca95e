use crate::text::TextRange;

/// A text change recorded between consecutive versions, by length only.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Change {
    Insert { offset: usize, len: usize },
    Remove { offset: usize, len: usize },
}

impl Change {
    /// Map an offset across this change. Offsets strictly inside a removed
    /// region have no image.
    pub fn map(&self, o: usize) -> Option<usize> {
        match *self {
            Change::Insert { offset, len } => Some(if o >= offset { o + len } else { o }),
            Change::Remove { offset, len } => {
                if o <= offset {
                    Some(o)
                } else if o >= offset + len {
                    Some(o - len)
                } else {
                    None
                }
            }
        }
    }

    /// Like [`Change::map`], but offsets inside a removed region collapse to
    /// its start.
    pub fn map_clamped(&self, o: usize) -> usize {
        match *self {
            Change::Remove { offset, len } if o > offset && o < offset + len => offset,
            _ => self.map(o).expect("defined outside removed region"),
        }
    }
}

pub fn transpose(changes: &[Change], o: usize) -> Option<usize> {
    changes.iter().try_fold(o, |o, c| c.map(o))
}

pub fn transpose_clamped(changes: &[Change], o: usize) -> usize {
    changes.iter().fold(o, |o, c| c.map_clamped(o))
}

/// Map a range; `None` when either endpoint falls inside removed text or a
/// non-empty range collapses to nothing.
pub fn transpose_range(changes: &[Change], r: TextRange) -> Option<TextRange> {
    let start = transpose(changes, r.start)?;
    let end = transpose(changes, r.end)?;
    if end < start || (end == start && !r.is_empty()) {
        return None;
    }
    Some(TextRange::new(start, end))
}

/// Minimal single replacement turning `old` into `new`: common prefix and
/// suffix are kept, the middle is removed and re-inserted.
pub fn diff(old: &str, new: &str) -> Vec<Change> {
    let a: Vec<char> = old.chars().collect();
    let b: Vec<char> = new.chars().collect();
    let prefix = a.iter().zip(&b).take_while(|(x, y)| x == y).count();
    let max_suffix = a.len().min(b.len()) - prefix;
    let suffix = a
        .iter()
        .rev()
        .zip(b.iter().rev())
        .take(max_suffix)
        .take_while(|(x, y)| x == y)
        .count();
    let removed = a.len() - prefix - suffix;
    let inserted = b.len() - prefix - suffix;
    let mut out = Vec::new();
    if removed > 0 {
        out.push(Change::Remove {
            offset: prefix,
            len: removed,
        });
    }
    if inserted > 0 {
        out.push(Change::Insert {
            offset: prefix,
            len: inserted,
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn insert_shifts_at_and_after() {
        let c = [Change::Insert { offset: 0, len: 2 }];
        assert_eq!(transpose(&c, 5), Some(7));
        assert_eq!(transpose(&c, 0), Some(2));
    }

    #[test]
    fn remove_interior_undefined() {
        let c = [Change::Remove { offset: 3, len: 3 }];
        assert_eq!(transpose(&c, 4), None);
        assert_eq!(transpose(&c, 3), Some(3));
        assert_eq!(transpose(&c, 6), Some(3));
        assert_eq!(transpose(&c, 9), Some(6));
        assert_eq!(transpose_clamped(&c, 5), 3);
    }

    #[test]
    fn diff_is_minimal_replacement() {
        assert_eq!(diff("abc", "abc"), vec![]);
        assert_eq!(
            diff("abXc", "abYYc"),
            vec![
                Change::Remove { offset: 2, len: 1 },
                Change::Insert { offset: 2, len: 2 }
            ]
        );
        assert_eq!(diff("aaa", "aaaa"), vec![Change::Insert { offset: 3, len: 1 }]);
    }

    #[test]
    fn range_dropped_when_endpoint_removed() {
        let c = [Change::Remove { offset: 4, len: 4 }];
        assert_eq!(transpose_range(&c, TextRange::new(5, 9)), None);
        assert_eq!(transpose_range(&c, TextRange::new(4, 8)), None);
        assert_eq!(
            transpose_range(&c, TextRange::new(8, 10)),
            Some(TextRange::new(4, 6))
        );
    }
}
