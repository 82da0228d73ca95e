use std::fmt;

use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NodeKind {
    Theory,
    Auxiliary,
}

impl NodeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            NodeKind::Theory => "theory",
            NodeKind::Auxiliary => "auxiliary",
        }
    }

    pub fn parse(s: &str) -> Option<NodeKind> {
        match s {
            "theory" => Some(NodeKind::Theory),
            "auxiliary" => Some(NodeKind::Auxiliary),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("bad node path `{path}`: {reason}")]
pub struct PathError {
    pub path: String,
    pub reason: &'static str,
}

/// A document node: a theory or an auxiliary file, named by a canonical
/// relative path.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeName {
    kind: NodeKind,
    path: String,
}

/// Canonicalize a relative path: drop `.` and empty segments, resolve `..`.
pub fn normalize_path(path: &str) -> Result<String, PathError> {
    let err = |reason| PathError {
        path: path.to_owned(),
        reason,
    };
    if path.starts_with('/') {
        return Err(err("absolute path"));
    }
    let mut parts: Vec<&str> = Vec::new();
    for seg in path.split('/') {
        match seg {
            "" | "." => {}
            ".." => {
                if parts.pop().is_none() {
                    return Err(err("escapes the root"));
                }
            }
            s => parts.push(s),
        }
    }
    if parts.is_empty() {
        return Err(err("empty path"));
    }
    Ok(parts.join("/"))
}

impl NodeName {
    pub fn new(kind: NodeKind, path: &str) -> Result<NodeName, PathError> {
        Ok(NodeName {
            kind,
            path: normalize_path(path)?,
        })
    }

    pub fn theory(path: &str) -> Result<NodeName, PathError> {
        NodeName::new(NodeKind::Theory, path)
    }

    pub fn auxiliary(path: &str) -> Result<NodeName, PathError> {
        NodeName::new(NodeKind::Auxiliary, path)
    }

    /// Theory for `.thy` files, auxiliary otherwise.
    pub fn from_path(path: &str) -> Result<NodeName, PathError> {
        let kind = if path.ends_with(".thy") {
            NodeKind::Theory
        } else {
            NodeKind::Auxiliary
        };
        NodeName::new(kind, path)
    }

    pub fn kind(&self) -> NodeKind {
        self.kind
    }

    pub fn path(&self) -> &str {
        &self.path
    }

    pub fn is_theory(&self) -> bool {
        self.kind == NodeKind::Theory
    }

    /// Directory part, `""` at top level.
    pub fn dir(&self) -> &str {
        self.path.rsplit_once('/').map(|(d, _)| d).unwrap_or("")
    }

    pub fn file_name(&self) -> &str {
        self.path.rsplit_once('/').map(|(_, f)| f).unwrap_or(&self.path)
    }

    pub fn extension(&self) -> Option<&str> {
        self.file_name().rsplit_once('.').map(|(_, e)| e)
    }

    /// File name without extension.
    pub fn stem(&self) -> &str {
        let f = self.file_name();
        f.rsplit_once('.').map(|(s, _)| s).unwrap_or(f)
    }

    /// Resolve `rel` against this node's directory.
    pub fn resolve(&self, kind: NodeKind, rel: &str) -> Result<NodeName, PathError> {
        let dir = self.dir();
        if dir.is_empty() {
            NodeName::new(kind, rel)
        } else {
            NodeName::new(kind, &format!("{dir}/{rel}"))
        }
    }
}

impl fmt::Display for NodeName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_paths() {
        assert_eq!(normalize_path("a/./b//c").unwrap(), "a/b/c");
        assert_eq!(normalize_path("a/x/../b").unwrap(), "a/b");
        assert!(normalize_path("../a").is_err());
        assert!(normalize_path("/a").is_err());
        assert!(normalize_path("./").is_err());
    }

    #[test]
    fn resolution_and_parts() {
        let n = NodeName::theory("dir/A.thy").unwrap();
        assert_eq!(n.stem(), "A");
        assert_eq!(n.extension(), Some("thy"));
        let b = n.resolve(NodeKind::Theory, "../lib/B.thy").unwrap();
        assert_eq!(b.path(), "lib/B.thy");
        assert_eq!(NodeName::from_path("x.ftl").unwrap().kind(), NodeKind::Auxiliary);
    }
}
