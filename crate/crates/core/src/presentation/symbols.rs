//! Bundled symbol table: each named symbol has a LaTeX macro and a display
//! character. Macros use math-mode commands wrapped in `\ensuremath`.

use std::collections::BTreeMap;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolEntry {
    pub latex: String,
    pub display: char,
}

/// Keyed by symbol source, e.g. `\<alpha>`.
#[derive(Clone, Debug, Default)]
pub struct SymbolTable {
    map: BTreeMap<String, SymbolEntry>,
}

const MATH: &[(&str, &str, char)] = &[
    ("alpha", "\\alpha", 'α'),
    ("beta", "\\beta", 'β'),
    ("gamma", "\\gamma", 'γ'),
    ("delta", "\\delta", 'δ'),
    ("epsilon", "\\varepsilon", 'ε'),
    ("zeta", "\\zeta", 'ζ'),
    ("eta", "\\eta", 'η'),
    ("theta", "\\vartheta", 'θ'),
    ("iota", "\\iota", 'ι'),
    ("kappa", "\\kappa", 'κ'),
    ("lambda", "\\lambda", 'λ'),
    ("mu", "\\mu", 'μ'),
    ("nu", "\\nu", 'ν'),
    ("xi", "\\xi", 'ξ'),
    ("pi", "\\pi", 'π'),
    ("rho", "\\varrho", 'ρ'),
    ("sigma", "\\sigma", 'σ'),
    ("tau", "\\tau", 'τ'),
    ("upsilon", "\\upsilon", 'υ'),
    ("phi", "\\varphi", 'φ'),
    ("chi", "\\chi", 'χ'),
    ("psi", "\\psi", 'ψ'),
    ("omega", "\\omega", 'ω'),
    ("Gamma", "\\Gamma", 'Γ'),
    ("Delta", "\\Delta", 'Δ'),
    ("Theta", "\\Theta", 'Θ'),
    ("Lambda", "\\Lambda", 'Λ'),
    ("Xi", "\\Xi", 'Ξ'),
    ("Pi", "\\Pi", 'Π'),
    ("Sigma", "\\Sigma", 'Σ'),
    ("Phi", "\\Phi", 'Φ'),
    ("Psi", "\\Psi", 'Ψ'),
    ("Omega", "\\Omega", 'Ω'),
    ("forall", "\\forall", '∀'),
    ("exists", "\\exists", '∃'),
    ("not", "\\neg", '¬'),
    ("and", "\\wedge", '∧'),
    ("or", "\\vee", '∨'),
    ("longrightarrow", "\\longrightarrow", '⟶'),
    ("Longrightarrow", "\\Longrightarrow", '⟹'),
    ("rightarrow", "\\rightarrow", '→'),
    ("Rightarrow", "\\Rightarrow", '⇒'),
    ("leftarrow", "\\leftarrow", '←'),
    ("longleftrightarrow", "\\longleftrightarrow", '⟷'),
    ("equiv", "\\equiv", '≡'),
    ("le", "\\le", '≤'),
    ("ge", "\\ge", '≥'),
    ("noteq", "\\neq", '≠'),
    ("in", "\\in", '∈'),
    ("notin", "\\notin", '∉'),
    ("subset", "\\subset", '⊂'),
    ("subseteq", "\\subseteq", '⊆'),
    ("union", "\\cup", '∪'),
    ("inter", "\\cap", '∩'),
    ("times", "\\times", '×'),
    ("circ", "\\circ", '∘'),
    ("cdot", "\\cdot", '⋅'),
    ("bottom", "\\bot", '⊥'),
    ("top", "\\top", '⊤'),
    ("infinity", "\\infty", '∞'),
    ("nat", "\\mathbb{N}", 'ℕ'),
    ("int", "\\mathbb{Z}", 'ℤ'),
    ("real", "\\mathbb{R}", 'ℝ'),
    ("open", "\\langle", '‹'),
    ("close", "\\rangle", '›'),
    ("comment", "\\triangleright", '―'),
];

const TEXT: &[(&str, &str, char)] = &[("bullet", "\\textbullet{}", '•'), ("dots", "\\dots{}", '…')];

impl SymbolTable {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn bundled() -> Self {
        let mut t = SymbolTable::empty();
        for (name, cmd, c) in MATH {
            t.insert(name, format!("\\ensuremath{{{cmd}}}"), *c);
        }
        for (name, cmd, c) in TEXT {
            t.insert(name, *cmd, *c);
        }
        t
    }

    /// `name` without the `\<`…`>` wrapping.
    pub fn insert(&mut self, name: &str, latex: impl Into<String>, display: char) {
        self.map.insert(
            format!("\\<{name}>"),
            SymbolEntry {
                latex: latex.into(),
                display,
            },
        );
    }

    pub fn get(&self, source: &str) -> Option<&SymbolEntry> {
        self.map.get(source)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &SymbolEntry)> {
        self.map.iter().map(|(k, v)| (k.as_str(), v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{decode_symbols, SymbolKind};

    #[test]
    fn every_key_is_a_named_symbol() {
        let t = SymbolTable::bundled();
        for (k, _) in t.iter() {
            let s = decode_symbols(k);
            assert_eq!(s.len(), 1, "{k}");
            assert_eq!(s[0].kind, SymbolKind::Named, "{k}");
        }
        assert_eq!(t.get("\\<alpha>").unwrap().latex, "\\ensuremath{\\alpha}");
        assert_eq!(t.get("\\<alpha>").unwrap().display, 'α');
        assert!(t.get("\\<nonsense>").is_none());
    }
}
