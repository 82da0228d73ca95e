//! LaTeX and HTML writers over one event stream.

use super::symbols::SymbolTable;
use super::{Event, Format, Heading, ListKind};

pub fn escape_latex(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\textbackslash{}"),
            '^' => out.push_str("\\textasciicircum{}"),
            '~' => out.push_str("\\textasciitilde{}"),
            '{' | '}' | '$' | '&' | '#' | '_' | '%' => {
                out.push('\\');
                out.push(c);
            }
            c => out.push(c),
        }
    }
    out
}

/// Inverse of [`escape_latex`] on its image.
pub fn unescape_latex(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut rest = s;
    while let Some(i) = rest.find('\\') {
        out.push_str(&rest[..i]);
        rest = &rest[i..];
        let mut matched = false;
        for (seq, c) in [
            ("\\textbackslash{}", '\\'),
            ("\\textasciicircum{}", '^'),
            ("\\textasciitilde{}", '~'),
        ] {
            if let Some(r) = rest.strip_prefix(seq) {
                out.push(c);
                rest = r;
                matched = true;
                break;
            }
        }
        if !matched {
            let mut cs = rest[1..].chars();
            match cs.next() {
                Some(c) => {
                    out.push(c);
                    rest = cs.as_str();
                }
                None => {
                    out.push('\\');
                    rest = "";
                }
            }
        }
    }
    out.push_str(rest);
    out
}

pub fn escape_html(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            c => out.push(c),
        }
    }
    out
}

pub fn unescape_html(s: &str) -> String {
    s.replace("&lt;", "<").replace("&gt;", ">").replace("&quot;", "\"").replace("&amp;", "&")
}

fn latex_heading(h: Heading) -> &'static str {
    match h {
        Heading::Chapter => "\\chapter{",
        Heading::Section => "\\section{",
        Heading::Subsection => "\\subsection{",
        Heading::Subsubsection => "\\subsubsection{",
        Heading::Paragraph => "\\paragraph{",
    }
}

fn latex_list(k: ListKind) -> &'static str {
    match k {
        ListKind::Itemize => "itemize",
        ListKind::Enumerate => "enumerate",
        ListKind::Description => "description",
    }
}

pub fn render(format: Format, events: &[Event], symbols: &SymbolTable) -> String {
    match format {
        Format::Latex => latex(events, symbols),
        Format::Html => html(events, symbols),
    }
}

fn latex(events: &[Event], symbols: &SymbolTable) -> String {
    let mut out = String::new();
    let mut lists = Vec::new();
    for e in events {
        match e {
            Event::BeginHeading(h) => out.push_str(latex_heading(*h)),
            Event::EndHeading => out.push_str("}\n"),
            Event::BeginText => out.push_str("\\begin{textblock}\n"),
            Event::EndText => out.push_str("\n\\end{textblock}\n"),
            Event::Paragraph => out.push_str("\n\\par\n"),
            Event::BeginList(k) => {
                lists.push(*k);
                out.push_str(&format!("\\begin{{{}}}\n", latex_list(*k)));
            }
            Event::EndList(k) => {
                lists.pop();
                out.push_str(&format!("\n\\end{{{}}}\n", latex_list(*k)));
            }
            Event::BeginItem => out.push_str("\\item "),
            Event::EndItem => {}
            Event::BeginLabel => out.push('['),
            Event::EndLabel => out.push_str("] "),
            Event::BeginComment => out.push_str("\\doccomment{"),
            Event::EndComment => out.push('}'),
            Event::BeginFormal => out.push_str("\\begin{formal}"),
            Event::EndFormal => out.push_str("\\end{formal}\n"),
            Event::Text(s) => out.push_str(&escape_latex(s)),
            Event::Symbol(s) => match symbols.get(s) {
                Some(entry) => out.push_str(&entry.latex),
                None => out.push_str(&escape_latex(s)),
            },
            Event::Raw(s) => out.push_str(s),
        }
    }
    out
}

fn html(events: &[Event], symbols: &SymbolTable) -> String {
    let mut out = String::new();
    let mut closers: Vec<&'static str> = Vec::new();
    // A description item owes its `<dd>` until the label is done.
    let mut owe_dd = false;
    for e in events {
        if owe_dd && !matches!(e, Event::BeginLabel) && !in_label(&closers) {
            out.push_str("<dd>");
            owe_dd = false;
        }
        match e {
            Event::BeginHeading(h) => {
                let (open, close) = match h {
                    Heading::Chapter => ("<h1>", "</h1>\n"),
                    Heading::Section => ("<h2>", "</h2>\n"),
                    Heading::Subsection => ("<h3>", "</h3>\n"),
                    Heading::Subsubsection => ("<h4>", "</h4>\n"),
                    Heading::Paragraph => ("<h5>", "</h5>\n"),
                };
                out.push_str(open);
                closers.push(close);
            }
            Event::BeginText => {
                out.push_str("<div class=\"text\">");
                closers.push("</div>\n");
            }
            Event::Paragraph => out.push_str("<br><br>"),
            Event::BeginList(k) => {
                let (open, close) = match k {
                    ListKind::Itemize => ("<ul>", "</ul>"),
                    ListKind::Enumerate => ("<ol>", "</ol>"),
                    ListKind::Description => ("<dl>", "</dl>"),
                };
                out.push_str(open);
                closers.push(close);
            }
            Event::BeginItem => {
                if closers.last() == Some(&"</dl>") {
                    owe_dd = true;
                    closers.push("</dd>");
                } else {
                    out.push_str("<li>");
                    closers.push("</li>");
                }
            }
            Event::BeginLabel => {
                out.push_str("<dt>");
                closers.push("</dt>");
            }
            Event::BeginComment => {
                out.push_str("<span class=\"comment\">");
                closers.push("</span>");
            }
            Event::BeginFormal => {
                out.push_str("<pre class=\"formal\">");
                closers.push("</pre>\n");
            }
            Event::EndHeading
            | Event::EndText
            | Event::EndList(_)
            | Event::EndItem
            | Event::EndLabel
            | Event::EndComment
            | Event::EndFormal => {
                out.push_str(closers.pop().expect("balanced events"));
            }
            Event::Text(s) => out.push_str(&escape_html(s)),
            Event::Symbol(s) => match symbols.get(s) {
                Some(entry) => out.push(entry.display),
                None => out.push_str(&escape_html(s)),
            },
            Event::Raw(s) => out.push_str(s),
        }
    }
    out
}

fn in_label(closers: &[&str]) -> bool {
    closers.last() == Some(&"</dt>")
}
