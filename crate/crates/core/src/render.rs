//! Turning sections and spreads into pages.
//!
//! Pages are measured in monospace lines. A section's body is its
//! commentary, wrapped to the page width, followed by its code, broken after
//! statements and braces the way a weaver would break it; `@+` keeps the
//! neighbouring tokens on one line. The mini-index goes under a rule at the
//! bottom of each spread, laid out row by row across the configured columns.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use thiserror::Error;

use crate::lexer::{CodeToken, TokenKind};
use crate::meaning::{Origin, TypeMarkup};
use crate::mini::{IdentStyle, MiniEntry, MiniOutput};
use crate::refsort::RefFile;
use crate::source::Section;
use crate::spread::{LayoutConfig, Spread};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Plain,
    Html,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RenderError {
    #[error("malformed markup `{markup}`: {reason}")]
    MalformedMarkup { markup: String, reason: &'static str },
    #[error("sorted index does not match the spreads: {0}")]
    SrefMismatch(String),
}

fn malformed(markup: &str, reason: &'static str) -> RenderError {
    RenderError::MalformedMarkup { markup: markup.to_string(), reason }
}

fn escape_html(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
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

/// Contents of a `{...}` group starting at `text[0] == '{'`, and the rest.
fn braced<'a>(text: &'a str, whole: &str) -> Result<(&'a str, &'a str), RenderError> {
    let mut depth = 0usize;
    for (i, c) in text.char_indices() {
        match c {
            '{' => depth += 1,
            '}' => {
                depth -= 1;
                if depth == 0 {
                    return Ok((&text[1..i], &text[i + 1..]));
                }
            }
            _ => {}
        }
    }
    Err(malformed(whole, "unbalanced braces"))
}

/// Display form of the markup used for types and identifiers.
pub fn render_markup(markup: &str, mode: Mode) -> Result<String, RenderError> {
    let mut out = String::new();
    render_into(markup, markup, mode, false, &mut out)?;
    Ok(out)
}

fn render_into(text: &str, whole: &str, mode: Mode, in_math: bool, out: &mut String) -> Result<(), RenderError> {
    let mut rest = text;
    while let Some(c) = rest.chars().next() {
        if let Some(after) = rest.strip_prefix('\\') {
            let Some(code) = after.chars().next() else {
                return Err(malformed(whole, "dangling backslash"));
            };
            let tail = &after[code.len_utf8()..];
            match code {
                '&' | '\\' | '|' => {
                    let (inner, next) = if tail.starts_with('{') {
                        braced(tail, whole)?
                    } else {
                        let c = tail.chars().next().ok_or_else(|| malformed(whole, "missing identifier"))?;
                        tail.split_at(c.len_utf8())
                    };
                    let name = inner.replace("\\_", "_");
                    if name.contains('\\') || name.contains('{') || name.contains('$') {
                        return Err(malformed(whole, "nested markup in identifier"));
                    }
                    match mode {
                        Mode::Plain => out.push_str(&name),
                        Mode::Html if code == '&' => write!(out, "<b>{}</b>", escape_html(&name)).unwrap(),
                        Mode::Html => write!(out, "<i>{}</i>", escape_html(&name)).unwrap(),
                    }
                    rest = next;
                }
                ',' => {
                    out.push(' ');
                    rest = tail;
                }
                '_' | '$' | '{' | '}' | '%' | '#' => {
                    match mode {
                        Mode::Html => out.push_str(&escape_html(&code.to_string())),
                        Mode::Plain => out.push(code),
                    }
                    rest = tail;
                }
                _ => return Err(malformed(whole, "unknown control sequence")),
            }
        } else if c == '$' {
            if in_math {
                return Err(malformed(whole, "nested math"));
            }
            let close = rest[1..].find('$').ok_or_else(|| malformed(whole, "unclosed `$`"))?;
            render_into(&rest[1..1 + close], whole, mode, true, out)?;
            rest = &rest[close + 2..];
        } else if c == '{' {
            let (inner, next) = braced(rest, whole)?;
            render_into(inner, whole, mode, in_math, out)?;
            rest = next;
        } else if c == '}' {
            return Err(malformed(whole, "unbalanced braces"));
        } else {
            match mode {
                Mode::Html => out.push_str(&escape_html(&c.to_string())),
                Mode::Plain => out.push(c),
            }
            rest = &rest[c.len_utf8()..];
        }
    }
    Ok(())
}

fn location(origin: &Origin, program: &str, mode: Mode) -> String {
    let text = match origin {
        Origin::Section { program: p, section } if p == program => format!("§{section}"),
        Origin::Section { program: p, section } => format!("{p} §{section}"),
        Origin::Literal(label) => label.clone(),
    };
    match mode {
        Mode::Plain => text,
        Mode::Html => escape_html(&text),
    }
}

/// One mini-index line: `ident: type, LOC`, `ident = value, LOC`, or for
/// entries without a type `ident, LOC`.
pub fn format_entry(entry: &MiniEntry, program: &str, mode: Mode) -> Result<String, RenderError> {
    let name = match (mode, entry.ident.style) {
        (Mode::Plain, _) => entry.ident.name.clone(),
        (Mode::Html, IdentStyle::Bold) => format!("<b>{}</b>", escape_html(&entry.ident.name)),
        (Mode::Html, _) => format!("<i>{}</i>", escape_html(&entry.ident.name)),
    };
    let loc = location(&entry.origin, program, mode);
    Ok(match &entry.ty {
        TypeMarkup::Zip => format!("{name}, {loc}"),
        TypeMarkup::Markup(m) => match m.strip_prefix('=') {
            Some(value) => format!("{name} = {}, {loc}", render_markup(value, mode)?),
            None => format!("{name}: {}, {loc}", render_markup(m, mode)?),
        },
    })
}

fn wrap_words(text: &str, first_prefix: &str, width: usize) -> Vec<String> {
    let mut lines = Vec::new();
    let mut line = first_prefix.to_string();
    let mut fresh = line.is_empty();
    for word in text.split_whitespace() {
        let len = line.chars().count();
        if !fresh && len + 1 + word.chars().count() > width {
            lines.push(std::mem::take(&mut line));
            fresh = true;
        }
        if !fresh {
            line.push(' ');
        }
        line.push_str(word);
        fresh = false;
    }
    if !line.is_empty() {
        lines.push(line);
    }
    lines
}

/// Break an over-long code line at spaces, indenting continuations.
fn wrap_code(line: String, width: usize) -> Vec<String> {
    if line.chars().count() <= width {
        return vec![line];
    }
    let indent = line.len() - line.trim_start().len() + 4;
    let mut out = Vec::new();
    let mut rest = line.as_str().to_string();
    while rest.chars().count() > width {
        let limit = rest.char_indices().nth(width).map_or(rest.len(), |(i, _)| i);
        let floor = rest.len() - rest.trim_start().len();
        match rest[..limit].rfind(' ').filter(|&i| i > floor) {
            Some(cut) => {
                out.push(rest[..cut].trim_end().to_string());
                rest = format!("{}{}", " ".repeat(indent), rest[cut..].trim_start());
            }
            None => break,
        }
    }
    out.push(rest);
    out
}

fn strip_bars(text: &str) -> String {
    text.replace('|', "")
}

fn display_token(token: &CodeToken) -> String {
    match token.kind {
        TokenKind::Meta => match token.lexeme.as_str() {
            "@d" => "#define".to_string(),
            "@," => " ".to_string(),
            "@c" | "@;" | "@|" | "@/" | "@#" => String::new(),
            _ => match token.chunk_name() {
                Some(name) if token.is_chunk_definition() => format!("<{}> =", strip_bars(name).trim()),
                Some(name) => format!("<{}>", strip_bars(name).trim()),
                None => token.lexeme.clone(),
            },
        },
        TokenKind::Comment => strip_bars(&token.lexeme),
        _ => token.lexeme.clone(),
    }
}

/// Code lines of a section, before wrapping.
pub fn code_lines(section: &Section) -> Vec<String> {
    let hints: BTreeSet<usize> = section.join_hints().collect();
    let mut lines = Vec::new();
    let mut line = String::new();
    let mut line_depth = 0usize;
    let mut depth = 0usize;
    let mut parens = 0usize;
    let mut pending_break = false;
    let flush = |line: &mut String, line_depth: usize, lines: &mut Vec<String>| {
        if !line.is_empty() {
            lines.push(format!("{}{}", "  ".repeat(line_depth), std::mem::take(line)));
        }
    };
    for (i, token) in section.code_part.iter().enumerate() {
        let gap = match i {
            0 => "",
            _ => &section.code_text[section.code_part[i - 1].end()..token.offset],
        };
        let lexeme = token.lexeme.as_str();
        let structural =
            token.kind == TokenKind::Meta && (lexeme == "@d" || lexeme == "@c" || token.chunk_name().is_some());
        let closing = token.is_punct("}");
        if closing {
            depth = depth.saturating_sub(1);
        }
        let mut brk = pending_break || gap.contains('\n') || closing || structural;
        if hints.contains(&i) || (token.kind == TokenKind::Comment && !gap.contains('\n')) {
            brk = false;
        }
        if brk {
            flush(&mut line, line_depth, &mut lines);
        }
        if token.is(TokenKind::Meta, "@#") {
            flush(&mut line, line_depth, &mut lines);
            lines.push(String::new());
        }
        let shown = display_token(token);
        if !shown.is_empty() {
            if line.is_empty() {
                line_depth = depth;
            } else if !gap.is_empty() || brk || hints.contains(&i) {
                line.push(' ');
            }
            line.push_str(&shown);
        }
        pending_break = false;
        match lexeme {
            "{" if token.kind == TokenKind::Punctuation => {
                depth += 1;
                pending_break = true;
            }
            "}" if token.kind == TokenKind::Punctuation => pending_break = true,
            "(" if token.kind == TokenKind::Punctuation => parens += 1,
            ")" if token.kind == TokenKind::Punctuation => parens = parens.saturating_sub(1),
            ";" if token.kind == TokenKind::Punctuation && parens == 0 => pending_break = true,
            "@/" | "@c" => pending_break = token.kind == TokenKind::Meta,
            _ if token.is_chunk_definition() => pending_break = true,
            _ => {}
        }
    }
    flush(&mut line, line_depth, &mut lines);
    lines
}

/// The lines of a section's body as they appear on a page.
pub fn layout_section(section: &Section, cfg: &LayoutConfig) -> Vec<String> {
    let width = cfg.page_width;
    let header = format!("§{}.", section.number);
    let text = strip_bars(&section.text_part).replace("@@", "@");
    let mut lines = wrap_words(&text, &header, width);
    // A tie keeps its words on one line and prints as a space.
    for line in &mut lines {
        *line = line.replace('~', " ");
    }
    for line in code_lines(section) {
        lines.extend(wrap_code(format!("    {line}"), width));
    }
    lines
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RenderedPage {
    pub spread_number: u32,
    pub members: Vec<u32>,
    /// Section text, gaps included.
    pub body: Vec<String>,
    /// The rule and the mini-index rows.
    pub mini_index: Vec<String>,
    pub oversized: bool,
}

impl RenderedPage {
    pub fn line_count(&self) -> usize {
        self.body.len() + self.mini_index.len()
    }
}

fn mini_rows(cells: &[String], cfg: &LayoutConfig) -> Vec<String> {
    let columns = cfg.mini_columns.max(1);
    let col_width = cfg.page_width.saturating_sub(2 * (columns - 1)) / columns;
    let mut rows = Vec::new();
    for chunk in cells.chunks(columns) {
        let mut row = String::new();
        for (i, cell) in chunk.iter().enumerate() {
            row.push_str(cell);
            if i + 1 < chunk.len() {
                let pad = col_width.saturating_sub(cell.chars().count()) + 2;
                row.push_str(&" ".repeat(pad));
            }
        }
        for _ in 1..cfg.mini_baseline {
            rows.push(String::new());
        }
        rows.push(row);
    }
    rows
}

fn entry_counts(entries: &[MiniEntry]) -> HashMap<&MiniEntry, usize> {
    let mut counts = HashMap::new();
    for e in entries {
        *counts.entry(e).or_insert(0) += 1;
    }
    counts
}

/// Check that a sorted index describes exactly these spreads.
pub fn check_sref(spreads: &[Spread], sref: &RefFile) -> Result<(), RenderError> {
    if sref.spreads.len() != spreads.len() {
        return Err(RenderError::SrefMismatch(format!(
            "{} spreads in the sorted index, {} after packing",
            sref.spreads.len(),
            spreads.len()
        )));
    }
    for (i, (spread, sorted)) in spreads.iter().zip(&sref.spreads).enumerate() {
        let number = i as u32 + 1;
        if sorted.number != number {
            return Err(RenderError::SrefMismatch(format!("expected spread {number}, found {}", sorted.number)));
        }
        if entry_counts(&spread.entries) != entry_counts(&sorted.entries) {
            return Err(RenderError::SrefMismatch(format!("entries of spread {number} differ")));
        }
    }
    Ok(())
}

/// Lay out every spread. With a sorted index the mini-indexes come out in
/// its order, otherwise in packing order.
pub fn render_document(
    spreads: &[Spread],
    bodies: &HashMap<u32, Vec<String>>,
    sref: Option<&RefFile>,
    program: &str,
    cfg: &LayoutConfig,
    mode: Mode,
) -> Result<Vec<RenderedPage>, RenderError> {
    if let Some(sref) = sref {
        check_sref(spreads, sref)?;
    }
    let mut pages = Vec::with_capacity(spreads.len());
    for (i, spread) in spreads.iter().enumerate() {
        let mut body = Vec::new();
        for (k, member) in spread.members.iter().enumerate() {
            if k > 0 {
                body.extend(std::iter::repeat_n(String::new(), cfg.section_gap));
            }
            body.extend(bodies.get(member).cloned().unwrap_or_default());
        }
        let entries = match sref {
            Some(sref) => &sref.spreads[i].entries,
            None => &spread.entries,
        };
        let cells = entries.iter().map(|e| format_entry(e, program, mode)).collect::<Result<Vec<_>, _>>()?;
        let mut mini_index = Vec::new();
        if cfg.rule_allowance > 0 {
            mini_index.push("-".repeat(cfg.page_width));
            mini_index.extend(std::iter::repeat_n(String::new(), cfg.rule_allowance - 1));
        }
        mini_index.extend(mini_rows(&cells, cfg));
        pages.push(RenderedPage {
            spread_number: i as u32 + 1,
            members: spread.members.clone(),
            body,
            mini_index,
            oversized: spread.oversized,
        });
    }
    Ok(pages)
}

fn page_title(page: &RenderedPage) -> String {
    let first = page.members.first().copied().unwrap_or(0);
    let last = page.members.last().copied().unwrap_or(0);
    let range = if first == last { format!("§{first}") } else { format!("§{first}–§{last}") };
    format!("Spread {} ({range})", page.spread_number)
}

/// Plain-text output: pages separated by form feeds.
pub fn pages_to_text(pages: &[RenderedPage]) -> String {
    let mut out = String::new();
    for (i, page) in pages.iter().enumerate() {
        if i > 0 {
            out.push('\u{c}');
            out.push('\n');
        }
        writeln!(out, "{}", page_title(page)).unwrap();
        out.push('\n');
        for line in page.body.iter().chain(&page.mini_index) {
            out.push_str(line.trim_end());
            out.push('\n');
        }
    }
    out
}

/// A standalone HTML document. Bodies are plain lines; the mini-index rows
/// must have been rendered in HTML mode.
pub fn pages_to_html(pages: &[RenderedPage], title: &str) -> String {
    let mut out = String::new();
    writeln!(out, "<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n<title>{}</title>", escape_html(title))
        .unwrap();
    out.push_str("<style>.spread{margin-bottom:3em}.mini{font-size:85%}</style>\n</head>\n<body>\n");
    for page in pages {
        writeln!(out, "<section class=\"spread\" id=\"spread-{}\">", page.spread_number).unwrap();
        writeln!(out, "<h2>{}</h2>", escape_html(&page_title(page))).unwrap();
        out.push_str("<pre>");
        for line in &page.body {
            out.push_str(&escape_html(line));
            out.push('\n');
        }
        out.push_str("</pre>\n<hr>\n<pre class=\"mini\">");
        for line in page.mini_index.iter().skip(1) {
            out.push_str(line);
            out.push('\n');
        }
        out.push_str("</pre>\n</section>\n");
    }
    out.push_str("</body>\n</html>\n");
    out
}

/// Every section's raw mini-output, without packing.
pub fn dump_debug_minis(minis: &[MiniOutput], program: &str) -> String {
    let mut out = String::new();
    for m in minis {
        writeln!(out, "§{}", m.section).unwrap();
        for line in m.to_lines(program) {
            writeln!(out, "{line}").unwrap();
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mini::IdentMarkup;
    use crate::source::parse_source;

    fn plain(m: &str) -> String {
        render_markup(m, Mode::Plain).unwrap()
    }

    #[test]
    fn markup_to_plain_text() {
        assert_eq!(plain(r"\&{register} \&{Vertex} $*$"), "register Vertex *");
        assert_eq!(plain(""), "");
        assert_eq!(plain(r"\&{char} ${*}[\,]$"), "char *[ ]");
        assert_eq!(plain(r"=\|v.\|I"), "=v.I");
        assert_eq!(plain(r"\&{Graph} $*(\,)$"), "Graph *( )");
        assert_eq!(plain(r"\\{not\_taken}"), "not_taken");
        assert_eq!(plain("???"), "???");
    }

    #[test]
    fn markup_to_html() {
        assert_eq!(render_markup(r"\&{int} $*$", Mode::Html).unwrap(), "<b>int</b> *");
        assert_eq!(render_markup(r"\|v.\|I", Mode::Html).unwrap(), "<i>v</i>.<i>I</i>");
        assert_eq!(render_markup("a<b", Mode::Html).unwrap(), "a&lt;b");
    }

    #[test]
    fn malformed_markup() {
        for bad in [r"\&{int", "$*", r"\foo", "}", r"\", r"${$}$"] {
            assert!(matches!(render_markup(bad, Mode::Plain), Err(RenderError::MalformedMarkup { .. })), "{bad}");
        }
    }

    fn entry(origin: Origin, name: &str, ty: TypeMarkup) -> MiniEntry {
        MiniEntry { ident: IdentMarkup::for_meaning(name, &ty), origin, ty }
    }

    #[test]
    fn entry_forms() {
        let not_taken = entry(Origin::section("ham", 4), "not_taken", TypeMarkup::markup(r"=macro (\,)"));
        assert_eq!(format_entry(&not_taken, "ham", Mode::Plain).unwrap(), "not_taken = macro ( ), §4");
        let k = entry(Origin::section("ham", 0), "k", TypeMarkup::markup("???"));
        assert_eq!(format_entry(&k, "ham", Mode::Plain).unwrap(), "k: ???, §0");
        let file = entry(Origin::Literal("<stdio.h>".into()), "FILE", TypeMarkup::Zip);
        assert_eq!(format_entry(&file, "ham", Mode::Plain).unwrap(), "FILE, <stdio.h>");
        let u = entry(Origin::section("GB_GRAPH", 9), "u", TypeMarkup::markup(r"\&{util}"));
        assert_eq!(format_entry(&u, "ham", Mode::Plain).unwrap(), "u: util, GB_GRAPH §9");
        assert_eq!(format_entry(&file, "ham", Mode::Html).unwrap(), "<i>FILE</i>, &lt;stdio.h&gt;");
    }

    fn section(src: &str) -> Section {
        parse_source(src, "p").unwrap().sections.remove(0)
    }

    #[test]
    fn code_breaks_after_statements() {
        let s = section("@ Go.\n@c\nif (x) { t->ark = NULL; v = y; goto advance; }\n");
        assert_eq!(code_lines(&s), vec!["if (x) {", "  t->ark = NULL;", "  v = y;", "  goto advance;", "}"]);
    }

    #[test]
    fn join_hints_keep_statements_together() {
        let joined = section("@ Go.\n@c\nif (x) { t->ark = NULL;@+ v = y;@+ goto advance; }\n");
        assert_eq!(code_lines(&joined), vec!["if (x) {", "  t->ark = NULL; v = y; goto advance;", "}"]);
        let split = section("@ Go.\n@c\nif (x) { t->ark = NULL; v = y; goto advance; }\n");
        let words = |s: &Section| code_lines(s).join(" ").split_whitespace().map(String::from).collect::<Vec<_>>();
        assert_eq!(words(&joined), words(&split));
    }

    #[test]
    fn for_headers_stay_on_one_line() {
        let s = section("@ @c\nfor (a=v->arcs; a; a=a->next) printf(\"%s\\n\", a->tip->name);\n");
        assert_eq!(code_lines(&s), vec![r#"for (a=v->arcs; a; a=a->next) printf("%s\n", a->tip->name);"#]);
    }

    #[test]
    fn macros_and_chunks() {
        let s = section("@ @d deg u.I\n@d not_taken(vert) (vert->taken==0)\n@<Glob@>=\nint n;\n");
        assert_eq!(
            code_lines(&s),
            vec!["#define deg u.I", "#define not_taken(vert) (vert->taken==0)", "<Glob> =", "int n;"]
        );
    }

    #[test]
    fn section_layout_wraps_text() {
        let cfg = LayoutConfig { page_width: 24, ..LayoutConfig::default() };
        let s = section("@ This program uses |restore_graph| to read a graph.\n@c\nint n;\n");
        let lines = layout_section(&s, &cfg);
        assert_eq!(lines, vec!["§1. This program uses", "restore_graph to read a", "graph.", "    int n;"]);
        assert!(lines.iter().all(|l| l.chars().count() <= 24));
    }

    #[test]
    fn long_code_lines_wrap() {
        let cfg = LayoutConfig { page_width: 30, ..LayoutConfig::default() };
        let s = section("@ @c\nx = alpha + beta + gamma + delta + epsilon + zeta;\n");
        let lines = layout_section(&s, &cfg);
        assert!(lines.len() > 2);
        assert!(lines.iter().all(|l| l.chars().count() <= 30), "{lines:?}");
    }

    #[test]
    fn mini_index_rows_are_row_major() {
        let cfg = LayoutConfig { mini_columns: 2, page_width: 20, ..LayoutConfig::default() };
        let cells: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        assert_eq!(mini_rows(&cells, &cfg), vec!["a          b", "c"]);
    }

    #[test]
    fn debug_dump() {
        let minis = vec![
            MiniOutput { section: 1, entries: vec![] },
            MiniOutput {
                section: 2,
                entries: vec![entry(Origin::section("p", 1), "x", TypeMarkup::markup(r"\&{int}"))],
            },
        ];
        assert_eq!(dump_debug_minis(&minis, "p"), "§1\n§2\n\\[1 \\|{x} \\&{int}\n");
    }

    #[test]
    fn sref_must_match() {
        let e = entry(Origin::section("p", 9), "x", TypeMarkup::markup(r"\&{int}"));
        let spreads =
            vec![Spread { members: vec![1], body_lines: 1, height: 3, oversized: false, entries: vec![e.clone()] }];
        let good = RefFile { spreads: vec![crate::refsort::RefSpread { number: 1, entries: vec![e] }] };
        assert!(check_sref(&spreads, &good).is_ok());
        assert!(matches!(check_sref(&spreads, &RefFile::default()), Err(RenderError::SrefMismatch(_))));
        let other = RefFile { spreads: vec![crate::refsort::RefSpread { number: 1, entries: vec![] }] };
        assert!(matches!(check_sref(&spreads, &other), Err(RenderError::SrefMismatch(_))));
    }
}
