//! Current meanings of identifiers.
//!
//! Every identifier has exactly one current meaning at any point of a run:
//! where it was defined (a section of some program, or a literal label such
//! as `<stdio.h>`) and a type written in the small TeX-flavoured markup
//! language used throughout the pipeline. Meanings change strictly in source
//! order; there is no block structure.

use std::collections::{HashMap, HashSet};
use std::fmt;

use crate::detect::detect_definitions;
use crate::source::{expand_includes, parse_directives, ControlCommand, IncludeResolver, Section, SourceError};

/// Marker that stands for "no type available".
pub const ZIP: &str = "\\zip";

/// Type text shown for identifiers that never received a meaning.
pub const UNKNOWN_TYPE: &str = "???";

/// Escape a program name or identifier for the markup files (`_` → `\_`).
pub fn escape_name(name: &str) -> String {
    name.replace('_', "\\_")
}

/// Inverse of [`escape_name`]; bare underscores are accepted as well.
pub fn unescape_name(name: &str) -> String {
    name.replace("\\_", "_")
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Origin {
    /// Section `section` of the program called `program`.
    Section { program: String, section: u32 },
    /// A free-form label such as `<stdio.h>`.
    Literal(String),
}

impl Origin {
    pub fn section(program: impl Into<String>, section: u32) -> Self {
        Origin::Section { program: program.into(), section }
    }

    /// The section number when the origin lies in `program`.
    pub fn section_in(&self, program: &str) -> Option<u32> {
        match self {
            Origin::Section { program: p, section } if p == program => Some(*section),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TypeMarkup {
    Zip,
    Markup(String),
}

impl TypeMarkup {
    pub fn markup(text: impl Into<String>) -> Self {
        TypeMarkup::Markup(text.into())
    }

    pub fn parse(text: &str) -> Self {
        if text == ZIP {
            TypeMarkup::Zip
        } else {
            TypeMarkup::Markup(text.to_string())
        }
    }

    pub fn as_str(&self) -> &str {
        match self {
            TypeMarkup::Zip => ZIP,
            TypeMarkup::Markup(m) => m,
        }
    }

    /// Macros and typedefs carry a leading `=`.
    pub fn is_equation(&self) -> bool {
        matches!(self, TypeMarkup::Markup(m) if m.starts_with('='))
    }

    /// Typedef'd names: `=\&{struct}`, `=\&{long}`, ...
    pub fn names_a_type(&self) -> bool {
        matches!(self, TypeMarkup::Markup(m) if m.starts_with("=\\&{"))
    }
}

impl fmt::Display for TypeMarkup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Meaning {
    pub ident: String,
    pub origin: Origin,
    pub ty: TypeMarkup,
}

impl Meaning {
    pub fn new(ident: impl Into<String>, origin: Origin, ty: TypeMarkup) -> Self {
        Meaning { ident: ident.into(), origin, ty }
    }

    pub fn uninitialized(ident: impl Into<String>, program: &str) -> Self {
        Meaning::new(ident, Origin::section(program, 0), TypeMarkup::markup(UNKNOWN_TYPE))
    }

    /// The body of a `@$...@>` directive, without the delimiters.
    pub fn directive_body(&self) -> String {
        let origin = match &self.origin {
            Origin::Section { program, section } => format!("{{{}}}{}", escape_name(program), section),
            Origin::Literal(label) => format!("\"{label}\""),
        };
        format!("{} {} {}", self.ident, origin, self.ty)
    }

    pub fn to_directive(&self) -> String {
        format!("@${}@>", self.directive_body())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("malformed meaning directive `{body}`: {reason}")]
pub struct DirectiveError {
    pub body: String,
    pub reason: &'static str,
}

fn is_identifier(text: &str) -> bool {
    let mut chars = text.chars();
    chars.next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Parse `ident {name}nn type` or `ident "label" type`.
pub fn parse_meaning_body(body: &str) -> Result<Meaning, DirectiveError> {
    let fail = |reason| DirectiveError { body: body.to_string(), reason };
    let trimmed = body.trim_start();
    let ident_end = trimmed.find(|c: char| c.is_whitespace()).ok_or_else(|| fail("missing origin"))?;
    let ident = &trimmed[..ident_end];
    if !is_identifier(ident) {
        return Err(fail("identifier expected"));
    }
    let rest = trimmed[ident_end..].trim_start();
    let (origin, rest) = if let Some(after) = rest.strip_prefix('{') {
        let mut depth = 1usize;
        let mut close = None;
        for (i, c) in after.char_indices() {
            match c {
                '{' => depth += 1,
                '}' => {
                    depth -= 1;
                    if depth == 0 {
                        close = Some(i);
                        break;
                    }
                }
                _ => {}
            }
        }
        let close = close.ok_or_else(|| fail("unbalanced braces in program name"))?;
        let program = unescape_name(&after[..close]);
        if program.is_empty() || program.contains(char::is_whitespace) {
            return Err(fail("bad program name"));
        }
        let after = &after[close + 1..];
        let digits = after.find(|c: char| !c.is_ascii_digit()).unwrap_or(after.len());
        let section: u32 = after[..digits].parse().map_err(|_| fail("section number expected"))?;
        (Origin::Section { program, section }, &after[digits..])
    } else if let Some(after) = rest.strip_prefix('"') {
        let close = after.find('"').ok_or_else(|| fail("unterminated label"))?;
        let label = &after[..close];
        if label.is_empty() {
            return Err(fail("empty label"));
        }
        (Origin::Literal(label.to_string()), &after[close + 1..])
    } else {
        return Err(fail("origin must be {name}nn or \"label\""));
    };
    if !rest.is_empty() && !rest.starts_with(char::is_whitespace) {
        return Err(fail("space expected before type"));
    }
    let ty = rest.trim();
    if ty.is_empty() {
        return Err(fail("empty type"));
    }
    Ok(Meaning::new(ident, origin, TypeMarkup::parse(ty)))
}

/// Serialize aux records, one directive per line.
pub fn serialize_aux(records: &[Meaning]) -> String {
    let mut out = String::new();
    for record in records {
        out.push_str(&record.to_directive());
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MeaningTable {
    program: String,
    bindings: HashMap<String, Meaning>,
}

impl MeaningTable {
    pub fn new(program: impl Into<String>) -> Self {
        MeaningTable { program: program.into(), bindings: HashMap::new() }
    }

    pub fn program(&self) -> &str {
        &self.program
    }

    /// The bound meaning, if any.
    pub fn get(&self, ident: &str) -> Option<&Meaning> {
        self.bindings.get(ident)
    }

    /// The current meaning, falling back to `???, §0`.
    pub fn current(&self, ident: &str) -> Meaning {
        self.bindings.get(ident).cloned().unwrap_or_else(|| Meaning::uninitialized(ident, &self.program))
    }

    pub fn set(&mut self, meaning: Meaning) {
        self.bindings.insert(meaning.ident.clone(), meaning);
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn is_type_name(&self, ident: &str) -> bool {
        self.bindings.get(ident).is_some_and(|m| m.ty.names_a_type())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SectionIndexState {
    pub suppressed: HashSet<String>,
    pub temporaries: Vec<Meaning>,
    pub temporary_mode: bool,
}

impl SectionIndexState {
    pub fn new() -> Self {
        Self::default()
    }
}

/// Apply one control command. Permanent `@$` directives also produce an
/// aux record; `@i` and `@+` are ignored here.
pub fn apply_directive(
    table: &mut MeaningTable,
    state: &mut SectionIndexState,
    cmd: &ControlCommand,
    aux: &mut Vec<Meaning>,
) {
    match cmd {
        ControlCommand::Meaning(m) if state.temporary_mode => state.temporaries.push(m.clone()),
        ControlCommand::Meaning(m) => {
            table.set(m.clone());
            aux.push(m.clone());
        }
        ControlCommand::Suppress(ident) => {
            state.suppressed.insert(ident.clone());
        }
        ControlCommand::ToggleTemporary => state.temporary_mode = !state.temporary_mode,
        ControlCommand::Include(_) | ControlCommand::JoinHint => {}
    }
}

/// Load `system.bux`, then the aux file, then the bux file.
pub fn load_meaning_files(
    program: &str,
    system_bux: Option<&str>,
    aux: Option<&str>,
    bux: Option<&str>,
    resolver: &dyn IncludeResolver,
) -> Result<MeaningTable, SourceError> {
    let mut table = MeaningTable::new(program);
    for text in [system_bux, aux, bux].into_iter().flatten() {
        for cmd in expand_includes(text, resolver)? {
            if let ControlCommand::Meaning(m) = cmd {
                table.set(m);
            }
        }
    }
    Ok(table)
}

/// Result of running one section through the meaning tracker.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SectionOutcome {
    pub aux: Vec<Meaning>,
    pub state: SectionIndexState,
}

/// Apply a section's directives and implicit definitions in source order.
pub fn process_section(
    table: &mut MeaningTable,
    section: &Section,
    resolver: &dyn IncludeResolver,
) -> Result<SectionOutcome, SourceError> {
    let definitions = detect_definitions(section, table);
    let mut state = SectionIndexState::new();
    let mut aux = Vec::new();
    let mut defs = definitions.into_iter().peekable();

    let run_definition =
        |table: &mut MeaningTable, state: &SectionIndexState, aux: &mut Vec<Meaning>, ident: String, ty: TypeMarkup| {
            if state.suppressed.contains(&ident) {
                // Keep the present meaning, but record it.
                if let Some(present) = table.get(&ident) {
                    aux.push(present.clone());
                }
            } else {
                let meaning = Meaning::new(ident, Origin::section(table.program(), section.number), ty);
                table.set(meaning.clone());
                aux.push(meaning);
            }
        };

    for placed in &section.controls {
        while let Some(def) = defs.next_if(|d| d.token_index < placed.token_index) {
            run_definition(table, &state, &mut aux, def.ident, def.ty);
        }
        match &placed.command {
            ControlCommand::Include(path) => {
                let text = resolver.resolve(path).ok_or_else(|| SourceError::MissingInclude(path.clone()))?;
                let mut stack = vec![path.clone()];
                for cmd in crate::source::expand_with_stack(&text, resolver, &mut stack)? {
                    apply_directive(table, &mut state, &cmd, &mut aux);
                }
            }
            cmd => apply_directive(table, &mut state, cmd, &mut aux),
        }
    }
    for def in defs {
        run_definition(table, &state, &mut aux, def.ident, def.ty);
    }
    Ok(SectionOutcome { aux, state })
}

/// Parse a meaning file into its meaning directives without includes.
pub fn parse_aux(text: &str) -> Result<Vec<Meaning>, SourceError> {
    Ok(parse_directives(text)?
        .into_iter()
        .filter_map(|c| match c {
            ControlCommand::Meaning(m) => Some(m),
            _ => None,
        })
        .collect())
}
