//! The literate source format.
//!
//! A file is a sequence of sections. A line starting with `@ ` (or `@` followed
//! by a tab or newline) opens an ordinary section, `@*` a starred one. Each
//! section has a commentary part followed by an optional code part, which
//! begins at the first `@c`, `@d` or `@<name@>=`. Anything before the first
//! section is limbo and is kept verbatim.
//!
//! Index control commands may appear anywhere in a section, including inside
//! comments:
//!
//! | command            | meaning                                         |
//! |--------------------|-------------------------------------------------|
//! | `@$id {prog}nn ty@>` | set (or temporarily add) a meaning             |
//! | `@$id "label" ty@>`  | same, with a literal origin                    |
//! | `@-id@>`           | suppress the default mini-output for `id`       |
//! | `@%`               | toggle between permanent and temporary `@$`     |
//! | `@i path`          | include a file of commands (rest of the line)   |
//! | `@+`               | keep the surrounding code on one output line    |

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::lexer::{tokenize_code, CodeToken, LexError};
use crate::meaning::{parse_meaning_body, DirectiveError, Meaning};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ControlCommand {
    Meaning(Meaning),
    Suppress(String),
    ToggleTemporary,
    Include(String),
    JoinHint,
}

impl ControlCommand {
    /// Source form of the command.
    pub fn to_source(&self) -> String {
        match self {
            ControlCommand::Meaning(m) => m.to_directive(),
            ControlCommand::Suppress(ident) => format!("@-{ident}@>"),
            ControlCommand::ToggleTemporary => "@%".to_string(),
            ControlCommand::Include(path) => format!("@i {path}\n"),
            ControlCommand::JoinHint => "@+".to_string(),
        }
    }
}

/// A control command together with its place in the section.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlacedControl {
    pub command: ControlCommand,
    /// True when the command sits in the commentary part.
    pub in_text: bool,
    /// Byte offset in the (directive-free) text or code part.
    pub offset: usize,
    /// Number of code tokens that precede the command.
    pub token_index: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Section {
    pub number: u32,
    pub starred: bool,
    pub text_part: String,
    /// Code part with all control commands removed.
    pub code_text: String,
    pub code_part: Vec<CodeToken>,
    pub controls: Vec<PlacedControl>,
}

impl Section {
    pub fn join_hints(&self) -> impl Iterator<Item = usize> + '_ {
        self.controls.iter().filter(|c| !c.in_text && c.command == ControlCommand::JoinHint).map(|c| c.token_index)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceDocument {
    pub program_name: String,
    pub limbo: String,
    pub sections: Vec<Section>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SourceError {
    #[error("line {line}: `@{code}` directive has no closing `@>`")]
    UnterminatedDirective { line: usize, code: char },
    #[error("line {line}: {detail}")]
    MalformedDirective { line: usize, detail: String },
    #[error("line {line}: {error}")]
    Lex { line: usize, error: LexError },
    #[error("include file `{0}` not found")]
    MissingInclude(String),
    #[error("include cycle: {}", .0.join(" -> "))]
    IncludeCycle(Vec<String>),
    #[error("invalid program name `{0}`")]
    BadProgramName(String),
}

/// Source of `@i` targets.
pub trait IncludeResolver {
    fn resolve(&self, path: &str) -> Option<String>;
}

/// Include targets held in memory.
#[derive(Debug, Clone, Default)]
pub struct MapResolver {
    files: HashMap<String, String>,
}

impl MapResolver {
    pub fn from_pairs<K: Into<String>, V: Into<String>>(pairs: impl IntoIterator<Item = (K, V)>) -> Self {
        MapResolver { files: pairs.into_iter().map(|(k, v)| (k.into(), v.into())).collect() }
    }

    pub fn insert(&mut self, path: impl Into<String>, contents: impl Into<String>) {
        self.files.insert(path.into(), contents.into());
    }
}

impl IncludeResolver for MapResolver {
    fn resolve(&self, path: &str) -> Option<String> {
        self.files.get(path).cloned()
    }
}

/// Include targets read from disk, relative to a root directory.
#[derive(Debug, Clone)]
pub struct DirResolver {
    root: PathBuf,
}

impl DirResolver {
    pub fn new(root: impl AsRef<Path>) -> Self {
        DirResolver { root: root.as_ref().to_path_buf() }
    }
}

impl IncludeResolver for DirResolver {
    fn resolve(&self, path: &str) -> Option<String> {
        std::fs::read_to_string(self.root.join(path)).ok()
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Strip control commands from `text`, returning the remaining text and the
/// commands with their offsets in it. `base` is the offset of `text` within
/// the whole file and is only used for line numbers.
fn extract_controls(
    text: &str,
    file: &str,
    base: usize,
) -> Result<(String, Vec<(usize, ControlCommand)>), SourceError> {
    let mut clean = String::with_capacity(text.len());
    let mut controls = Vec::new();
    let mut rest = text;
    let mut consumed = 0;
    while let Some(at) = rest.find('@') {
        clean.push_str(&rest[..at]);
        let after = &rest[at + 1..];
        let line = line_of(file, base + consumed + at);
        let code = after.chars().next();
        let (command, used) = match code {
            Some('$' | '-') => {
                let code = code.unwrap_or('$');
                let Some(close) = after[1..].find("@>") else {
                    return Err(SourceError::UnterminatedDirective { line, code });
                };
                let body = &after[1..1 + close];
                let command = if code == '$' {
                    parse_meaning_body(body).map(ControlCommand::Meaning).map_err(
                        |DirectiveError { body, reason }| SourceError::MalformedDirective {
                            line,
                            detail: format!("`@${body}@>`: {reason}"),
                        },
                    )?
                } else {
                    let ident = body.trim();
                    if ident.is_empty() || !ident.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                        return Err(SourceError::MalformedDirective {
                            line,
                            detail: format!("`@-{body}@>`: identifier expected"),
                        });
                    }
                    ControlCommand::Suppress(ident.to_string())
                };
                (Some(command), 1 + close + 2)
            }
            Some('%') => (Some(ControlCommand::ToggleTemporary), 1),
            Some('+') => (Some(ControlCommand::JoinHint), 1),
            Some('i') if after[1..].starts_with([' ', '\t']) => {
                let end = after.find('\n').unwrap_or(after.len());
                let path = after[1..end].trim();
                if path.is_empty() {
                    return Err(SourceError::MalformedDirective { line, detail: "`@i` needs a file name".into() });
                }
                // The line break belongs to the command.
                (Some(ControlCommand::Include(path.to_string())), (end + 1).min(after.len()))
            }
            Some('@') => {
                clean.push_str("@@");
                (None, 1)
            }
            _ => {
                clean.push('@');
                (None, 0)
            }
        };
        if let Some(command) = command {
            controls.push((clean.len(), command));
        }
        let skip = at + 1 + used;
        consumed += skip;
        rest = &rest[skip..];
    }
    clean.push_str(rest);
    Ok((clean, controls))
}

/// Offset of the first `@c`, `@d` or `@<name@>=` in `text`.
fn code_start(text: &str) -> Option<usize> {
    let bytes = text.as_bytes();
    let mut i = 0;
    while i + 1 < bytes.len() {
        if bytes[i] != b'@' {
            i += 1;
            continue;
        }
        match bytes[i + 1] {
            b'c' | b'd' => return Some(i),
            b'<' => {
                let after = i + 2 + text[i + 2..].find("@>")? + 2;
                if bytes.get(after) == Some(&b'=') {
                    return Some(i);
                }
                i = after;
            }
            _ => i += 2,
        }
    }
    None
}

/// Byte ranges of section bodies, with the starred flag.
fn section_spans(text: &str) -> (usize, Vec<(bool, usize, usize)>) {
    let mut starts = Vec::new();
    let mut line_start = 0;
    for line in text.split_inclusive('\n') {
        let b = line.as_bytes();
        if b.first() == Some(&b'@') {
            match b.get(1) {
                None | Some(b' ' | b'\t' | b'\n' | b'\r') => starts.push((false, line_start, line_start + 1)),
                Some(b'*') => starts.push((true, line_start, line_start + 2)),
                _ => {}
            }
        }
        line_start += line.len();
    }
    let limbo_end = starts.first().map_or(text.len(), |s| s.1);
    let spans = starts
        .iter()
        .enumerate()
        .map(|(i, &(starred, _, body))| {
            let end = starts.get(i + 1).map_or(text.len(), |next| next.1);
            (starred, body, end)
        })
        .collect();
    (limbo_end, spans)
}

fn valid_program_name(name: &str) -> bool {
    !name.is_empty() && !name.contains(|c: char| c.is_whitespace() || c == '{' || c == '}')
}

/// Parse a literate source file.
pub fn parse_source(text: &str, program_name: &str) -> Result<SourceDocument, SourceError> {
    if !valid_program_name(program_name) {
        return Err(SourceError::BadProgramName(program_name.to_string()));
    }
    let (limbo_end, spans) = section_spans(text);
    let mut sections = Vec::with_capacity(spans.len());
    for (i, (starred, start, end)) in spans.into_iter().enumerate() {
        let number = i as u32 + 1;
        let (clean, controls) = extract_controls(&text[start..end], text, start)?;
        let split = code_start(&clean).unwrap_or(clean.len());
        let raw_text = &clean[..split];
        let lead = raw_text.len() - raw_text.trim_start().len();
        let text_part = raw_text.trim().to_string();
        let code_text = clean[split..].trim_end().to_string();
        let mut code_part = tokenize_code(&code_text).map_err(|error| {
            let offset = match error {
                LexError::UnterminatedString(o)
                | LexError::UnterminatedComment(o)
                | LexError::UnterminatedChunkName(o)
                | LexError::UnknownControl(o, _) => o,
            };
            // Offsets are in the directive-free text; close enough for a line number.
            SourceError::Lex { line: line_of(text, start + split + offset), error }
        })?;
        for token in &mut code_part {
            token.section = number;
        }
        let controls = controls
            .into_iter()
            .map(|(offset, command)| {
                if offset <= split {
                    PlacedControl {
                        command,
                        in_text: true,
                        offset: offset.saturating_sub(lead).min(text_part.len()),
                        token_index: 0,
                    }
                } else {
                    let offset = (offset - split).min(code_text.len());
                    let token_index = code_part.partition_point(|t| t.offset < offset);
                    PlacedControl { command, in_text: false, offset, token_index }
                }
            })
            .collect();
        sections.push(Section { number, starred, text_part, code_text, code_part, controls });
    }
    Ok(SourceDocument { program_name: program_name.to_string(), limbo: text[..limbo_end].to_string(), sections })
}

fn splice(text: &str, controls: &[&PlacedControl]) -> String {
    let mut out = String::new();
    let mut at = 0;
    for c in controls {
        out.push_str(&text[at..c.offset]);
        out.push_str(&c.command.to_source());
        at = c.offset;
    }
    out.push_str(&text[at..]);
    out
}

/// Write a document back in source form.
pub fn serialize_source(doc: &SourceDocument) -> String {
    let mut out = doc.limbo.clone();
    if !out.is_empty() && !out.ends_with('\n') {
        out.push('\n');
    }
    for section in &doc.sections {
        out.push_str(if section.starred { "@*" } else { "@ " });
        let text_controls: Vec<_> = section.controls.iter().filter(|c| c.in_text).collect();
        let code_controls: Vec<_> = section.controls.iter().filter(|c| !c.in_text).collect();
        out.push_str(&splice(&section.text_part, &text_controls));
        out.push('\n');
        if !section.code_text.is_empty() || !code_controls.is_empty() {
            out.push_str(&splice(&section.code_text, &code_controls));
            out.push('\n');
        }
    }
    out
}

/// The control commands of a meaning file (`.aux`, `.bux`, `.hux`), in order.
/// Text outside commands is ignored.
pub fn parse_directives(text: &str) -> Result<Vec<ControlCommand>, SourceError> {
    let (_, controls) = extract_controls(text, text, 0)?;
    Ok(controls.into_iter().map(|(_, c)| c).collect())
}

/// Directives of `text` with every `@i` replaced by the expanded contents of
/// the named file.
pub fn expand_includes(text: &str, resolver: &dyn IncludeResolver) -> Result<Vec<ControlCommand>, SourceError> {
    expand_with_stack(text, resolver, &mut Vec::new())
}

pub(crate) fn expand_with_stack(
    text: &str,
    resolver: &dyn IncludeResolver,
    stack: &mut Vec<String>,
) -> Result<Vec<ControlCommand>, SourceError> {
    let mut out = Vec::new();
    for cmd in parse_directives(text)? {
        let ControlCommand::Include(path) = cmd else {
            out.push(cmd);
            continue;
        };
        if stack.contains(&path) {
            let mut cycle = stack.clone();
            cycle.push(path);
            return Err(SourceError::IncludeCycle(cycle));
        }
        let contents = resolver.resolve(&path).ok_or_else(|| SourceError::MissingInclude(path.clone()))?;
        stack.push(path);
        out.extend(expand_with_stack(&contents, resolver, stack)?);
        stack.pop();
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexer::TokenKind;
    use crate::meaning::{Origin, TypeMarkup};

    #[test]
    fn minimal_section() {
        let doc = parse_source("@ Intro.\n@c\nint x;\n", "prog").unwrap();
        assert_eq!(doc.sections.len(), 1);
        let s = &doc.sections[0];
        assert_eq!(s.number, 1);
        assert_eq!(s.text_part, "Intro.");
        let toks: Vec<_> =
            s.code_part.iter().filter(|t| t.kind != TokenKind::Meta).map(|t| (t.kind, t.lexeme.as_str())).collect();
        assert_eq!(
            toks,
            vec![(TokenKind::Keyword, "int"), (TokenKind::Identifier, "x"), (TokenKind::Punctuation, ";")]
        );
    }

    #[test]
    fn empty_file_has_no_sections() {
        let doc = parse_source("", "prog").unwrap();
        assert!(doc.sections.is_empty());
        let limbo_only = parse_source("\\input cwebmac\n", "prog").unwrap();
        assert!(limbo_only.sections.is_empty());
        assert_eq!(limbo_only.limbo, "\\input cwebmac\n");
    }

    #[test]
    fn meaning_directive_in_section() {
        let doc = parse_source("@ Macros.\n@$deg {ham}2 =macro@>\n@d deg u.I\n", "ham").unwrap();
        let s = &doc.sections[0];
        assert_eq!(s.text_part, "Macros.");
        assert_eq!(s.controls.len(), 1);
        assert!(s.controls[0].in_text);
        assert_eq!(
            s.controls[0].command,
            ControlCommand::Meaning(Meaning::new("deg", Origin::section("ham", 2), TypeMarkup::markup("=macro")))
        );
    }

    #[test]
    fn controls_are_interleaved_with_code() {
        let src = "@ @c\nt->ark=NULL;@+v=y;@+goto advance; /* @-k@> the |k|th */\n";
        let doc = parse_source(src, "ham").unwrap();
        let s = &doc.sections[0];
        let hints: Vec<_> = s.join_hints().collect();
        let idx = |lex: &str| s.code_part.iter().position(|t| t.lexeme == lex).unwrap();
        assert_eq!(hints, vec![idx("v"), idx("goto")]);
        let suppress = s.controls.iter().find(|c| matches!(c.command, ControlCommand::Suppress(_))).unwrap();
        assert_eq!(suppress.command, ControlCommand::Suppress("k".into()));
        assert_eq!(s.code_part.last().unwrap().lexeme, "/*  the |k|th */");
    }

    #[test]
    fn numbering_is_contiguous() {
        let doc = parse_source("limbo\n@* Intro.\n@ Two.\n@\nThree.\n@ Four. @c x;\n", "p").unwrap();
        let numbers: Vec<_> = doc.sections.iter().map(|s| s.number).collect();
        assert_eq!(numbers, vec![1, 2, 3, 4]);
        assert!(doc.sections[0].starred);
        assert_eq!(doc.sections[2].text_part, "Three.");
        assert_eq!(doc.sections[3].text_part, "Four.");
        assert_eq!(doc.sections[3].code_text, "@c x;");
    }

    #[test]
    fn directive_errors() {
        assert!(matches!(
            parse_source("@ Text @$deg {ham}2 =macro\n", "ham"),
            Err(SourceError::UnterminatedDirective { line: 1, code: '$' })
        ));
        assert!(matches!(
            parse_source("@ Text\n\n@-taken\n", "ham"),
            Err(SourceError::UnterminatedDirective { line: 3, code: '-' })
        ));
        assert!(matches!(
            parse_source("@ @$deg ham 2@>\n", "ham"),
            Err(SourceError::MalformedDirective { line: 1, .. })
        ));
        assert!(matches!(parse_source("@ x\n", "two words"), Err(SourceError::BadProgramName(_))));
    }

    #[test]
    fn lex_errors_carry_lines() {
        let err = parse_source("@ Text.\n@c\nx=1;\ny=\"open;\n", "p").unwrap_err();
        assert!(matches!(err, SourceError::Lex { line: 4, error: LexError::UnterminatedString(_) }), "{err:?}");
    }

    #[test]
    fn include_expansion_order() {
        let resolver = MapResolver::from_pairs([
            ("gb_graph.hux", "@$Vertex {GB\\_GRAPH}9 =\\&{struct}@>\n"),
            ("gb_save.hux", "@$restore_graph {GB\\_SAVE}4 \\&{Graph} $*(\\,)$@>\n"),
        ]);
        let cmds = expand_includes("@i gb_graph.hux\n@i gb_save.hux\n", &resolver).unwrap();
        let idents: Vec<_> = cmds
            .iter()
            .map(|c| match c {
                ControlCommand::Meaning(m) => m.ident.as_str(),
                _ => "",
            })
            .collect();
        assert_eq!(idents, vec!["Vertex", "restore_graph"]);
    }

    #[test]
    fn include_identity_and_errors() {
        let resolver = MapResolver::default();
        let plain = "@$a {p}1 \\&{int}@>\n@-b@>\n";
        assert_eq!(expand_includes(plain, &resolver).unwrap(), parse_directives(plain).unwrap());
        assert_eq!(
            expand_includes("@i missing.hux\n", &resolver),
            Err(SourceError::MissingInclude("missing.hux".into()))
        );
        let cyclic = MapResolver::from_pairs([("a.hux", "@i b.hux\n"), ("b.hux", "@i a.hux\n")]);
        assert!(matches!(expand_includes("@i a.hux\n", &cyclic), Err(SourceError::IncludeCycle(c)) if c.len() == 3));
    }

    #[test]
    fn at_at_is_literal() {
        let doc = parse_source("@ Mail me@@example.\n", "p").unwrap();
        assert_eq!(doc.sections[0].text_part, "Mail me@@example.");
        assert!(doc.sections[0].controls.is_empty());
    }

    #[test]
    fn round_trip_example() {
        let src = "\\def\\x{}\n@*Intro. See |restore_graph|.@-k@>\n@c\n#include \"gb_graph.h\"\n@ Two.\n@%@$u {GB\\_GRAPH}9 \\&{util}@>\n@d deg u.I\n@<Find@>=\nx=1;@+y=2;\n@i extra.hux\n";
        let doc = parse_source(src, "ham").unwrap();
        let again = parse_source(&serialize_source(&doc), "ham").unwrap();
        assert_eq!(doc, again);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn piece() -> impl Strategy<Value = &'static str> {
            prop::sample::select(vec![
                "x=1;",
                "int y;",
                " ",
                "\n",
                "|v|",
                "@-k@>",
                "@%",
                "@+",
                "@$u {GB\\_GRAPH}9 \\&{util}@>",
                "/* note */",
                "@d m 1\n",
                "@c\n",
                "text ",
                "@<Chunk@>=\n",
                "@<Chunk@>",
                "@i f.hux\n",
            ])
        }

        proptest! {
            #[test]
            fn reparse_of_serialized_is_equal(
                sections in prop::collection::vec(prop::collection::vec(piece(), 0..8), 0..5),
                starred in prop::collection::vec(any::<bool>(), 5),
            ) {
                let mut src = String::new();
                for (i, pieces) in sections.iter().enumerate() {
                    src.push_str(if starred[i] { "@*" } else { "@ " });
                    for p in pieces {
                        src.push_str(p);
                    }
                    src.push('\n');
                }
                let doc = parse_source(&src, "ham").unwrap();
                let numbers: Vec<u32> = doc.sections.iter().map(|s| s.number).collect();
                prop_assert_eq!(numbers, (1..=sections.len() as u32).collect::<Vec<_>>());
                let again = parse_source(&serialize_source(&doc), "ham").unwrap();
                prop_assert_eq!(doc, again);
            }
        }
    }
}
