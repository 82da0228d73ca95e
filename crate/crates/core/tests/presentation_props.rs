use proofdoc::presentation::{
    present, unescape_html, unescape_latex, Antiquotations, Format, SymbolTable,
};
use proofdoc::syntax::KeywordTable;
use proptest::prelude::*;

fn run(text: &str, format: Format) -> Result<String, proofdoc::presentation::PresentError> {
    present(text, &KeywordTable::bootstrap(), &SymbolTable::bundled(), &Antiquotations::standard(), format)
}

/// Plain formal text: no symbols, no command words, no strings, comments or
/// antiquotations, but every character the writers must escape.
fn plain() -> impl Strategy<Value = String> {
    "[xyzqw0-9#$%&_{}~^<>|/+,.;!? -]{0,30}[xyzqw0-9]"
}

fn wrapped(out: &str, format: Format) -> String {
    let (open, close) = match format {
        Format::Latex => ("\\begin{formal}", "\\end{formal}\n"),
        Format::Html => ("<pre class=\"formal\">", "</pre>\n"),
    };
    out.replacen(open, "", 1).replacen(close, "", 1)
}

/// Environment names in order of `\begin`/`\end`, checked with a stack.
fn latex_balanced(out: &str) -> Result<usize, String> {
    let mut stack: Vec<String> = Vec::new();
    let mut max_lists = 0;
    let mut rest = out;
    while let Some(i) = rest.find(['\\']) {
        rest = &rest[i + 1..];
        for (tag, open) in [("begin{", true), ("end{", false)] {
            if let Some(r) = rest.strip_prefix(tag) {
                let name = &r[..r.find('}').ok_or("unclosed brace")?];
                if open {
                    stack.push(name.to_owned());
                    let lists = stack.iter().filter(|n| ["itemize", "enumerate", "description"].contains(&n.as_str())).count();
                    max_lists = max_lists.max(lists);
                } else if stack.pop().as_deref() != Some(name) {
                    return Err(format!("mismatched end {name}"));
                }
            }
        }
    }
    if stack.is_empty() {
        Ok(max_lists)
    } else {
        Err(format!("unclosed {stack:?}"))
    }
}

fn html_balanced(out: &str) -> Result<usize, String> {
    let mut stack: Vec<String> = Vec::new();
    let mut max_lists = 0;
    let mut rest = out;
    while let Some(i) = rest.find('<') {
        rest = &rest[i + 1..];
        let end = rest.find('>').ok_or("unclosed tag")?;
        let tag = &rest[..end];
        if let Some(name) = tag.strip_prefix('/') {
            if stack.pop().as_deref() != Some(name) {
                return Err(format!("mismatched </{name}>"));
            }
        } else {
            let name = tag.split(' ').next().unwrap().to_owned();
            stack.push(name);
            max_lists = max_lists.max(stack.iter().filter(|n| ["ul", "ol", "dl"].contains(&n.as_str())).count());
        }
    }
    if stack.is_empty() {
        Ok(max_lists)
    } else {
        Err(format!("unclosed {stack:?}"))
    }
}

/// Item lines whose depth changes by at most one per step.
fn items() -> impl Strategy<Value = (String, usize)> {
    prop::collection::vec((-1i32..=1, prop::collection::vec(0usize..3, 4), "[a-z]{1,5}"), 1..15).prop_map(|steps| {
        let mut depth = 0i32;
        let mut max = 0;
        let mut body = String::new();
        for (i, (delta, kinds, word)) in steps.into_iter().enumerate() {
            depth = if i == 0 { 1 } else { (depth + delta).clamp(1, 4) };
            max = max.max(depth as usize);
            for k in &kinds[..depth as usize] {
                body.push_str(["\\<^item>", "\\<^enum>", "\\<^descr>"][*k]);
            }
            if kinds[depth as usize - 1] == 2 {
                body.push_str(&format!(" \\<open>{word}\\<close>"));
            }
            body.push_str(&format!(" {word}\n"));
        }
        (format!("text \\<open>\n{body}\\<close>"), max)
    })
}

fn fragment() -> impl Strategy<Value = String> {
    prop_oneof![
        Just("text \\<open>".to_owned()),
        Just("section \\<open>".to_owned()),
        Just("\\<close>".to_owned()),
        Just("\\<open>".to_owned()),
        Just("lemma ".to_owned()),
        Just("definition ".to_owned()),
        Just("\\<alpha>".to_owned()),
        Just("\\<comment> ".to_owned()),
        Just("\\<^item> ".to_owned()),
        Just("(* ".to_owned()),
        Just(" *)".to_owned()),
        Just("\"".to_owned()),
        Just("@{verbatim ".to_owned()),
        Just("}".to_owned()),
        Just("\n".to_owned()),
        Just("\n\n".to_owned()),
        "[a-z0-9]{1,6}",
        "[ =+<]{1,2}",
    ]
}

const DROPPED: [&str; 6] = ["text", "section", "chapter", "subsection", "subsubsection", "paragraph"];

fn words(s: &str) -> Vec<String> {
    s.split(|c: char| !c.is_ascii_alphanumeric()).filter(|w| !w.is_empty()).map(str::to_owned).collect()
}

/// Source words that must survive: everything outside symbol names,
/// apart from document command names and antiquotation names.
fn source_words(src: &str) -> Vec<String> {
    let mut cleaned = String::new();
    let mut rest = src;
    while !rest.is_empty() {
        if rest.starts_with("\\<") {
            let end = rest.find('>').map_or(rest.len(), |i| i + 1);
            cleaned.push(' ');
            rest = &rest[end..];
        } else if let Some(r) = rest.strip_prefix("@{verbatim") {
            cleaned.push(' ');
            rest = r;
        } else {
            let c = rest.chars().next().unwrap();
            cleaned.push(c);
            rest = &rest[c.len_utf8()..];
        }
    }
    words(&cleaned).into_iter().filter(|w| !DROPPED.contains(&w.as_str())).collect()
}

fn is_subsequence(needle: &[String], hay: &[String]) -> bool {
    let mut it = hay.iter();
    needle.iter().all(|w| it.any(|h| h == w))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn plain_text_is_escaped_verbatim(p in plain()) {
        for (format, unescape) in [(Format::Latex, unescape_latex as fn(&str) -> String), (Format::Html, unescape_html)] {
            let out = run(&p, format).unwrap();
            let inner = wrapped(&out, format);
            prop_assert_eq!(&unescape(&inner), &p, "{}", out);
            // a second pass over the recovered text gives the same output
            prop_assert_eq!(run(&unescape(&inner), format).unwrap(), out);
        }
    }

    #[test]
    fn list_environments_balance((src, depth) in items()) {
        let latex = run(&src, Format::Latex).unwrap();
        prop_assert_eq!(latex_balanced(&latex), Ok(depth), "{}", latex);
        let html = run(&src, Format::Html).unwrap();
        prop_assert_eq!(html_balanced(&html), Ok(depth), "{}", html);
    }

    #[test]
    fn presentation_is_total(parts in prop::collection::vec(fragment(), 0..25)) {
        let src = parts.concat();
        for format in [Format::Latex, Format::Html] {
            if let Ok(out) = run(&src, format) {
                let expected = source_words(&src);
                prop_assert!(is_subsequence(&expected, &words(&out)), "{:?} -> {:?}", src, out);
                match format {
                    Format::Latex => prop_assert!(latex_balanced(&out).is_ok(), "{}", out),
                    Format::Html => prop_assert!(html_balanced(&out).is_ok(), "{}", out),
                }
            }
        }
    }
}

#[test]
fn mixed_document_keeps_every_word() {
    let src = "section \\<open>Intro x1\\<close>\ntext \\<open>see @{verbatim abc} and \\<alpha> y2\n\\<^item> one\n\\<^item>\\<^enum> two\\<close>\nlemma 1 = 1 \\<comment> \\<open>why\\<close> (* raw *)\n";
    for format in [Format::Latex, Format::Html] {
        let out = run(src, format).unwrap();
        assert!(is_subsequence(&source_words(src), &words(&out)), "{out}");
    }
}
