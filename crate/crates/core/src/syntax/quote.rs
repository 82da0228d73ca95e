//! Quoted-string escaping and nested embedding.

/// Escape backslashes and double quotes.
pub fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    for c in s.chars() {
        if c == '\\' || c == '"' {
            out.push('\\');
        }
        out.push(c);
    }
    out
}

/// Wrap `s` as a quoted-string literal.
pub fn quote(s: &str) -> String {
    format!("\"{}\"", escape(s))
}

/// Inverse of [`quote`]: strip delimiters and resolve `\c` escapes.
/// Returns `None` if `s` is not a complete quoted-string literal.
pub fn unquote(s: &str) -> Option<String> {
    let inner = s.strip_prefix('"')?.strip_suffix('"')?;
    let mut out = String::with_capacity(inner.len());
    let mut chars = inner.chars();
    while let Some(c) = chars.next() {
        match c {
            '\\' => out.push(chars.next()?),
            '"' => return None,
            c => out.push(c),
        }
    }
    Some(out)
}

/// Embed `payload` as a string literal nested `depth` levels deep: the
/// literal at depth 0 is `quote(payload)`, each further level quotes the
/// previous literal again. The innermost delimiting quotes then carry
/// `2^depth - 1` backslashes.
pub fn quote_depth_demo(payload: &str, depth: u32) -> String {
    let mut literal = quote(payload);
    for _ in 0..depth {
        literal = quote(&literal);
    }
    literal
}

/// Length of the run of backslashes immediately preceding each double quote
/// in `s`, in order of occurrence.
pub fn backslashes_before_quotes(s: &str) -> Vec<usize> {
    let mut out = Vec::new();
    let mut run = 0;
    for c in s.chars() {
        match c {
            '\\' => run += 1,
            '"' => {
                out.push(run);
                run = 0;
            }
            _ => run = 0,
        }
    }
    out
}
