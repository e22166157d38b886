//! Per-section mini-output.
//!
//! At the end of each section the current meaning of every identifier the
//! section uses is emitted, except meanings that point back at the section
//! itself and identifiers the user suppressed. Temporary meanings replace the
//! current meaning of their identifier.

use std::collections::HashSet;
use std::fmt;

use thiserror::Error;

use crate::lexer::{inline_code_identifiers, TokenKind};
use crate::meaning::{escape_name, unescape_name, Meaning, MeaningTable, Origin, SectionIndexState, TypeMarkup};
use crate::source::Section;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum IdentStyle {
    /// `\\{name}`: text italics, for multi-letter identifiers.
    Italic,
    /// `\|{x}`: math italics, for single letters.
    MathLetter,
    /// `\&{Name}`: boldface, for type names.
    Bold,
}

impl IdentStyle {
    fn prefix(self) -> &'static str {
        match self {
            IdentStyle::Italic => "\\\\",
            IdentStyle::MathLetter => "\\|",
            IdentStyle::Bold => "\\&",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IdentMarkup {
    pub style: IdentStyle,
    pub name: String,
}

impl IdentMarkup {
    /// Markup for `ident` carrying a meaning of type `ty`.
    pub fn for_meaning(ident: &str, ty: &TypeMarkup) -> Self {
        let style = if ty.names_a_type() {
            IdentStyle::Bold
        } else if ident.chars().count() == 1 {
            IdentStyle::MathLetter
        } else {
            IdentStyle::Italic
        };
        IdentMarkup { style, name: ident.to_string() }
    }

    /// Parse `\\{x}`, `\|{x}` or `\&{x}` (a single character may omit the
    /// braces). Returns the markup and the unparsed rest.
    pub fn parse_prefix(text: &str) -> Option<(IdentMarkup, &str)> {
        let style = [IdentStyle::Italic, IdentStyle::MathLetter, IdentStyle::Bold]
            .into_iter()
            .find(|s| text.starts_with(s.prefix()))?;
        let rest = &text[style.prefix().len()..];
        let (raw, rest) = if let Some(inner) = rest.strip_prefix('{') {
            let close = inner.find('}')?;
            (&inner[..close], &inner[close + 1..])
        } else {
            let c = rest.chars().next()?;
            rest.split_at(c.len_utf8())
        };
        let name = unescape_name(raw);
        if name.is_empty() {
            return None;
        }
        Some((IdentMarkup { style, name }, rest))
    }
}

impl fmt::Display for IdentMarkup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{{{}}}", self.style.prefix(), escape_name(&self.name))
    }
}

/// One mini-index line. The whole triple is the entry's identity.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MiniEntry {
    pub origin: Origin,
    pub ident: IdentMarkup,
    pub ty: TypeMarkup,
}

impl MiniEntry {
    pub fn from_meaning(m: &Meaning) -> Self {
        MiniEntry { origin: m.origin.clone(), ident: IdentMarkup::for_meaning(&m.ident, &m.ty), ty: m.ty.clone() }
    }

    /// The entry as a mini-output line; `program` decides between internal
    /// (`\[`) and external (`\]`) references.
    pub fn to_line(&self, program: &str) -> String {
        let origin = match &self.origin {
            Origin::Section { program: p, section } if p == program => format!("\\[{section}"),
            Origin::Section { program: p, section } => format!("\\]{{{}}}{section}", escape_name(p)),
            Origin::Literal(label) => format!("\\]\"{label}\""),
        };
        format!("{origin} {} {}", self.ident, self.ty)
    }

    pub fn parse_line(line: &str, program: &str) -> Result<MiniEntry, EntryError> {
        let fail = |reason| EntryError { line: line.to_string(), reason };
        let (origin, rest) = if let Some(rest) = line.strip_prefix("\\[") {
            let digits = rest.find(|c: char| !c.is_ascii_digit()).unwrap_or(rest.len());
            let section = rest[..digits].parse().map_err(|_| fail("section number expected"))?;
            (Origin::section(program, section), &rest[digits..])
        } else if let Some(rest) = line.strip_prefix("\\]{") {
            let close = rest.find('}').ok_or_else(|| fail("unclosed program name"))?;
            let name = unescape_name(&rest[..close]);
            let rest = &rest[close + 1..];
            let digits = rest.find(|c: char| !c.is_ascii_digit()).unwrap_or(rest.len());
            let section = rest[..digits].parse().map_err(|_| fail("section number expected"))?;
            (Origin::Section { program: name, section }, &rest[digits..])
        } else if let Some(rest) = line.strip_prefix("\\]\"") {
            let close = rest.find('"').ok_or_else(|| fail("unclosed label"))?;
            (Origin::Literal(rest[..close].to_string()), &rest[close + 1..])
        } else {
            return Err(fail("entry must start with \\[ or \\]"));
        };
        let rest = rest.strip_prefix(' ').ok_or_else(|| fail("space expected after origin"))?;
        let (ident, rest) = IdentMarkup::parse_prefix(rest).ok_or_else(|| fail("identifier markup expected"))?;
        let ty = rest.strip_prefix(' ').ok_or_else(|| fail("space expected after identifier"))?;
        if ty.is_empty() {
            return Err(fail("missing type"));
        }
        Ok(MiniEntry { origin, ident, ty: TypeMarkup::parse(ty) })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unparseable mini-index entry `{line}`: {reason}")]
pub struct EntryError {
    pub line: String,
    pub reason: &'static str,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MiniOutput {
    pub section: u32,
    pub entries: Vec<MiniEntry>,
}

impl MiniOutput {
    pub fn to_lines(&self, program: &str) -> Vec<String> {
        self.entries.iter().map(|e| e.to_line(program)).collect()
    }
}

/// Identifiers used in the section, in order of first use. Commentary counts
/// only inside `|...|` spans (also within comments and chunk names).
pub fn collect_used_identifiers(section: &Section) -> Vec<String> {
    let mut seen = HashSet::new();
    let mut used = Vec::new();
    let mut add = |ident: String| {
        if seen.insert(ident.clone()) {
            used.push(ident);
        }
    };
    for ident in inline_code_identifiers(&section.text_part) {
        add(ident);
    }
    for token in &section.code_part {
        match token.kind {
            TokenKind::Identifier => add(token.lexeme.clone()),
            TokenKind::Comment => inline_code_identifiers(&token.lexeme).into_iter().for_each(&mut add),
            TokenKind::Meta => {
                if let Some(name) = token.chunk_name() {
                    inline_code_identifiers(name).into_iter().for_each(&mut add);
                }
            }
            _ => {}
        }
    }
    used
}

/// The section's mini-output, after its meanings have been processed.
pub fn emit_section_minis(table: &MeaningTable, state: &SectionIndexState, section: &Section) -> MiniOutput {
    let program = table.program();
    let own = |origin: &Origin| origin.section_in(program) == Some(section.number);
    let mut entries = Vec::new();
    let mut seen = HashSet::new();
    let mut push = |entry: MiniEntry, entries: &mut Vec<MiniEntry>| {
        if !own(&entry.origin) && seen.insert(entry.clone()) {
            entries.push(entry);
        }
    };
    let used = collect_used_identifiers(section);
    for ident in &used {
        let temporaries: Vec<_> = state.temporaries.iter().filter(|m| &m.ident == ident).collect();
        if !temporaries.is_empty() {
            for m in temporaries {
                push(MiniEntry::from_meaning(m), &mut entries);
            }
        } else if !state.suppressed.contains(ident) {
            push(MiniEntry::from_meaning(&table.current(ident)), &mut entries);
        }
    }
    for m in state.temporaries.iter().filter(|m| !used.contains(&m.ident)) {
        push(MiniEntry::from_meaning(m), &mut entries);
    }
    MiniOutput { section: section.number, entries }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::meaning::{process_section, MeaningTable};
    use crate::source::{parse_source, MapResolver};

    const SECTION_TEN: [&str; 8] = [
        r"\]{GB\_GRAPH}10 \\{next} \&{Arc} $*$",
        r"\[7 \\{advance} label",
        r"\[6 \\{ark} =\|x.\|A",
        r"\[2 \|{t} \&{register} \&{Vertex} $*$",
        r"\[4 \\{not\_taken} =macro (\,)",
        r"\]{GB\_GRAPH}10 \\{tip} \&{Vertex} $*$",
        r"\[2 \|{v} \&{register} \&{Vertex} $*$",
        r"\[2 \|{a} \&{register} \&{Arc} $*$",
    ];

    #[test]
    fn quoted_lines_parse_and_print_back() {
        for line in SECTION_TEN {
            let entry = MiniEntry::parse_line(line, "ham").unwrap();
            assert_eq!(entry.to_line("ham"), line);
        }
        let printf = r#"\]"<stdio.h>" \\{printf} \&{int} (\,)"#;
        let entry = MiniEntry::parse_line(printf, "ham").unwrap();
        assert_eq!(entry.origin, Origin::Literal("<stdio.h>".into()));
        assert_eq!(entry.to_line("ham"), printf);
    }

    #[test]
    fn serialize_entries() {
        let advance = MiniEntry {
            origin: Origin::section("ham", 7),
            ident: IdentMarkup { style: IdentStyle::Italic, name: "advance".into() },
            ty: TypeMarkup::markup("label"),
        };
        assert_eq!(advance.to_line("ham"), r"\[7 \\{advance} label");
        let next = MiniEntry {
            origin: Origin::section("GB_GRAPH", 10),
            ident: IdentMarkup::for_meaning("next", &TypeMarkup::markup(r"\&{Arc} $*$")),
            ty: TypeMarkup::markup(r"\&{Arc} $*$"),
        };
        assert_eq!(next.to_line("ham"), r"\]{GB\_GRAPH}10 \\{next} \&{Arc} $*$");
    }

    #[test]
    fn ident_styles() {
        let plain = TypeMarkup::markup(r"\&{long}");
        assert_eq!(IdentMarkup::for_meaning("I", &plain).style, IdentStyle::MathLetter);
        assert_eq!(IdentMarkup::for_meaning("arcs", &plain).style, IdentStyle::Italic);
        let typedef = TypeMarkup::markup(r"=\&{struct}");
        assert_eq!(IdentMarkup::for_meaning("Vertex", &typedef).style, IdentStyle::Bold);
    }

    #[test]
    fn bad_lines() {
        for bad in ["", "+ x", r"\[x \\{a} int", r"\[2 a int", r"\[2 \\{a}", r"\]{GB 3 \\{a} b", r"\[2 \\{a} "] {
            assert!(MiniEntry::parse_line(bad, "ham").is_err(), "{bad:?}");
        }
    }

    fn run(src: &str, table: &mut MeaningTable) -> Vec<MiniOutput> {
        let doc = parse_source(src, table.program().to_string().as_str()).unwrap();
        let resolver = MapResolver::default();
        doc.sections
            .iter()
            .map(|s| {
                let out = process_section(table, s, &resolver).unwrap();
                emit_section_minis(table, &out.state, s)
            })
            .collect()
    }

    #[test]
    fn used_identifiers() {
        let doc = parse_source("@ @c\nv->taken = 0;\n@ Uses |restore_graph|.\n@c\nfor (;;) break;\n", "ham").unwrap();
        assert_eq!(collect_used_identifiers(&doc.sections[0]), vec!["v", "taken"]);
        assert_eq!(collect_used_identifiers(&doc.sections[1]), vec!["restore_graph"]);
        let comment = parse_source("@ @c\n#include \"gb_save.h\" /* |restore_graph| */\n", "ham").unwrap();
        assert_eq!(collect_used_identifiers(&comment.sections[0]), vec!["restore_graph"]);
    }

    #[test]
    fn own_section_meanings_are_skipped() {
        let mut table = MeaningTable::new("ham");
        let minis = run("@ @c\n{register int d; d=1;}\n", &mut table);
        assert!(minis[0].entries.is_empty());
    }

    #[test]
    fn temporaries_replace_current_meaning() {
        let mut table = MeaningTable::new("ham");
        let src = "@ @c\n{register Vertex *v;}\n@ @-taken@> @-I@>\n@$taken {ham}2 =\\|v.\\|I@>\n@%@$v {GB\\_GRAPH}9 \\&{util}@>\n @$v {ham}1 \\&{register} \\&{Vertex} $*$@>\n@d taken v.I\n@c\nv->taken=0;\n";
        let minis = run(src, &mut table);
        let lines = minis[1].to_lines("ham");
        assert_eq!(lines, vec![r"\]{GB\_GRAPH}9 \|{v} \&{util}", r"\[1 \|{v} \&{register} \&{Vertex} $*$"]);
    }

    #[test]
    fn suppressing_everything_empties_output() {
        let mut table = MeaningTable::new("ham");
        let minis = run("@ @-x@> @-y@> @-f@>\n@c\nx = f(y);\n", &mut table);
        assert!(minis[0].entries.is_empty());
    }

    #[test]
    fn uninitialized_fallback_entry() {
        let mut table = MeaningTable::new("ham");
        let minis = run("@ @c\nk++;\n", &mut table);
        assert_eq!(minis[0].to_lines("ham"), vec![r"\[0 \|{k} ???"]);
    }
}
