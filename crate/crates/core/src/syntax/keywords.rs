use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Attributes of a command keyword.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CommandAttrs {
    /// The command takes a single file argument whose content is attached
    /// to the command span.
    #[serde(default)]
    pub load: bool,
    /// Extension appended to a load argument that has none.
    #[serde(default)]
    pub extension: Option<String>,
}

impl CommandAttrs {
    pub fn load(extension: Option<&str>) -> Self {
        CommandAttrs {
            load: true,
            extension: extension.map(str::to_owned),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("conflicting declarations of command `{name}`: {left:?} vs {right:?}")]
pub struct KeywordConflict {
    pub name: String,
    pub left: CommandAttrs,
    pub right: CommandAttrs,
}

/// Command keywords (which start command spans) and minor keywords.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct KeywordTable {
    #[serde(default)]
    commands: BTreeMap<String, CommandAttrs>,
    #[serde(default)]
    keywords: BTreeSet<String>,
}

impl KeywordTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// The bootstrap table every theory starts from.
    pub fn bootstrap() -> Self {
        let mut table = KeywordTable::new();
        for name in [
            "ML",
            "definition",
            "lemma",
            "text",
            "chapter",
            "section",
            "subsection",
            "subsubsection",
            "paragraph",
            "export_text",
            "end",
        ] {
            table.add_command(name, CommandAttrs::default());
        }
        table.add_command("ML_file", CommandAttrs::load(Some("ML")));
        for kw in [
            "theory", "imports", "keywords", "begin", "and", "::", "=", "+", "-", "*", "/", "(",
            ")", "<", ">", "<=", ">=", "!=", ",", "%",
        ] {
            table.add_keyword(kw);
        }
        table
    }

    pub fn add_command(&mut self, name: &str, attrs: CommandAttrs) {
        self.commands.insert(name.to_owned(), attrs);
    }

    pub fn add_keyword(&mut self, name: &str) {
        self.keywords.insert(name.to_owned());
    }

    pub fn command(&self, name: &str) -> Option<&CommandAttrs> {
        self.commands.get(name)
    }

    pub fn is_command(&self, name: &str) -> bool {
        self.commands.contains_key(name)
    }

    pub fn is_keyword(&self, name: &str) -> bool {
        self.keywords.contains(name)
    }

    pub fn commands(&self) -> impl Iterator<Item = (&str, &CommandAttrs)> {
        self.commands.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn keywords(&self) -> impl Iterator<Item = &str> {
        self.keywords.iter().map(String::as_str)
    }

    pub fn is_empty(&self) -> bool {
        self.commands.is_empty() && self.keywords.is_empty()
    }

    /// Keywords (of either class) that do not start with a letter, longest
    /// first; these are matched greedily by the tokenizer.
    pub(crate) fn symbolic(&self) -> Vec<Vec<char>> {
        let mut syms: Vec<Vec<char>> = self
            .commands
            .keys()
            .chain(self.keywords.iter())
            .filter(|k| !k.chars().next().is_some_and(char::is_alphabetic))
            .map(|k| k.chars().collect())
            .collect();
        syms.sort_by(|a, b| b.len().cmp(&a.len()).then(a.cmp(b)));
        syms.dedup();
        syms
    }

    /// Set union; a command declared with different attributes on both
    /// sides is a non-monotonic redefinition and fails.
    pub fn merge(&self, other: &KeywordTable) -> Result<KeywordTable, KeywordConflict> {
        let mut out = self.clone();
        for (name, attrs) in &other.commands {
            match out.commands.get(name) {
                Some(existing) if existing != attrs => {
                    return Err(KeywordConflict {
                        name: name.clone(),
                        left: existing.clone(),
                        right: attrs.clone(),
                    })
                }
                Some(_) => {}
                None => {
                    out.commands.insert(name.clone(), attrs.clone());
                }
            }
        }
        out.keywords.extend(other.keywords.iter().cloned());
        Ok(out)
    }
}
