//! Implicit definitions in code.
//!
//! A conservative recognizer for the C constructs that change an
//! identifier's meaning: macro definitions, declarations (including the
//! parameters of function definitions and members of struct bodies),
//! typedefs, function definitions and statement labels. Anything it does
//! not understand is skipped without a candidate; explicit `@$` directives
//! cover the rest.

use std::collections::HashSet;

use crate::lexer::{CodeToken, TokenKind};
use crate::meaning::{escape_name, MeaningTable, TypeMarkup};
use crate::source::Section;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImplicitDefinition {
    pub ident: String,
    pub ty: TypeMarkup,
    /// Index of the defining identifier within the section's code tokens.
    pub token_index: usize,
}

const STORAGE_CLASSES: [&str; 4] = ["register", "static", "extern", "auto"];
const TYPE_KEYWORDS: [&str; 11] =
    ["const", "volatile", "unsigned", "signed", "short", "long", "int", "char", "float", "double", "void"];
const TAGGED: [&str; 3] = ["struct", "union", "enum"];

/// Candidates in token order.
pub fn detect_definitions(section: &Section, table: &MeaningTable) -> Vec<ImplicitDefinition> {
    let tokens: Vec<&CodeToken> = section.code_part.iter().filter(|t| t.kind != TokenKind::Comment).collect();
    let lines = line_numbers(&section.code_text, &tokens);
    let mut detector = Detector { tokens, lines, table, local_types: HashSet::new(), found: Vec::new() };
    detector.run();
    detector.found
}

fn line_numbers(text: &str, tokens: &[&CodeToken]) -> Vec<usize> {
    let mut line = 0;
    let mut at = 0;
    tokens
        .iter()
        .map(|t| {
            line += text[at..t.offset].matches('\n').count();
            at = t.offset;
            line
        })
        .collect()
}

struct Detector<'a> {
    tokens: Vec<&'a CodeToken>,
    lines: Vec<usize>,
    table: &'a MeaningTable,
    local_types: HashSet<String>,
    found: Vec<ImplicitDefinition>,
}

/// What a declarator adds to the base type.
#[derive(Debug, Default, Clone, Copy)]
struct Shape {
    stars: usize,
    arrays: usize,
    function: bool,
}

/// (name index, shape, index after the declarator, parameter range)
type Declarator = (usize, Shape, usize, Option<(usize, usize)>);

impl Shape {
    fn markup(self, base: &str) -> String {
        let stars = "*".repeat(self.stars);
        let mut suffix = "[\\,]".repeat(self.arrays);
        if self.function {
            suffix.push_str("(\\,)");
        }
        let decoration = match (self.stars, suffix.is_empty()) {
            (0, true) => String::new(),
            (0, false) if self.function && self.arrays == 0 => suffix,
            (0, false) => format!("${suffix}$"),
            (_, true) => format!("${stars}$"),
            (_, false) if self.arrays > 0 => format!("${{{stars}}}{suffix}$"),
            (_, false) => format!("${stars}{suffix}$"),
        };
        match (base.is_empty(), decoration.is_empty()) {
            (_, true) => base.to_string(),
            (true, false) => decoration,
            (false, false) => format!("{base} {decoration}"),
        }
    }
}

impl<'a> Detector<'a> {
    fn tok(&self, i: usize) -> Option<&'a CodeToken> {
        self.tokens.get(i).copied()
    }

    fn is_punct(&self, i: usize, p: &str) -> bool {
        self.tok(i).is_some_and(|t| t.is_punct(p))
    }

    fn is_type_name(&self, ident: &str) -> bool {
        self.local_types.contains(ident) || self.table.is_type_name(ident)
    }

    fn record(&mut self, i: usize, ty: String) {
        let t = self.tokens[i];
        self.found.push(ImplicitDefinition {
            ident: t.lexeme.clone(),
            ty: TypeMarkup::Markup(ty),
            token_index: t.index,
        });
    }

    /// Does a declaration start at `i`?
    fn starts_declaration(&self, i: usize) -> bool {
        let Some(t) = self.tok(i) else { return false };
        match t.kind {
            TokenKind::Keyword => {
                STORAGE_CLASSES.contains(&t.lexeme.as_str())
                    || TYPE_KEYWORDS.contains(&t.lexeme.as_str())
                    || TAGGED.contains(&t.lexeme.as_str())
            }
            TokenKind::Identifier => {
                self.is_type_name(&t.lexeme)
                    && self.tok(i + 1).is_some_and(|n| n.kind == TokenKind::Identifier || n.is_punct("*"))
            }
            _ => false,
        }
    }

    fn skip_line(&self, i: usize) -> usize {
        let line = self.lines[i];
        let mut j = i;
        while j < self.tokens.len() && self.lines[j] == line {
            j += 1;
        }
        j
    }

    /// Index just past the bracket that closes the one at `open`.
    fn skip_balanced(&self, open: usize) -> usize {
        let mut depth = 0usize;
        let mut j = open;
        while let Some(t) = self.tok(j) {
            if t.kind == TokenKind::Punctuation {
                match t.lexeme.as_str() {
                    "(" | "[" | "{" => depth += 1,
                    ")" | "]" | "}" => {
                        depth = depth.saturating_sub(1);
                        if depth == 0 {
                            return j + 1;
                        }
                    }
                    _ => {}
                }
            }
            j += 1;
        }
        j
    }

    fn run(&mut self) {
        let mut i = 0;
        let mut statement_start = true;
        while i < self.tokens.len() {
            let t = self.tokens[i];
            if t.kind == TokenKind::Meta {
                if t.lexeme == "@d" {
                    i = self.macro_definition(i);
                } else {
                    i += 1;
                }
                statement_start = true;
                continue;
            }
            if t.kind == TokenKind::Punctuation && t.lexeme.starts_with('#') {
                i = self.skip_line(i);
                statement_start = true;
                continue;
            }
            let after_paren = i > 0 && self.is_punct(i - 1, ")");
            if statement_start && t.kind == TokenKind::Identifier && self.is_punct(i + 1, ":") {
                self.record(i, "label".to_string());
                i += 2;
                continue;
            }
            if statement_start && t.is_keyword("typedef") {
                i = self.typedef(i + 1);
                statement_start = true;
                continue;
            }
            if (statement_start || after_paren) && self.starts_declaration(i) {
                i = self.declaration(i, &[";"]);
                statement_start = true;
                continue;
            }
            statement_start = t.kind == TokenKind::Punctuation && matches!(t.lexeme.as_str(), ";" | "{" | "}");
            i += 1;
        }
    }

    fn macro_definition(&mut self, at: usize) -> usize {
        let end = self.skip_line(at);
        if let Some(name) = self.tok(at + 1).filter(|n| n.kind == TokenKind::Identifier && at + 1 < end) {
            let with_args = self.tok(at + 2).is_some_and(|p| p.is_punct("(") && p.offset == name.end());
            let ty = if with_args { "=macro (\\,)" } else { "=macro" };
            self.record(at + 1, ty.to_string());
        }
        end
    }

    /// Parse storage class and base type starting at `i`. Returns the markup
    /// and the index of the first declarator token, or `None` when no base
    /// type is present.
    fn base_type(&mut self, mut i: usize) -> Option<(String, usize, bool)> {
        let mut parts: Vec<String> = Vec::new();
        let mut have_type = false;
        let mut tagged = false;
        while let Some(t) = self.tok(i) {
            match t.kind {
                TokenKind::Keyword if STORAGE_CLASSES.contains(&t.lexeme.as_str()) => {
                    parts.push(format!("\\&{{{}}}", t.lexeme));
                    i += 1;
                }
                TokenKind::Keyword if TYPE_KEYWORDS.contains(&t.lexeme.as_str()) => {
                    parts.push(format!("\\&{{{}}}", t.lexeme));
                    have_type = true;
                    i += 1;
                }
                TokenKind::Keyword if TAGGED.contains(&t.lexeme.as_str()) && !have_type => {
                    parts.push(format!("\\&{{{}}}", t.lexeme));
                    i += 1;
                    if let Some(tag) = self.tok(i).filter(|n| n.kind == TokenKind::Identifier) {
                        parts.push(format!("\\\\{{{}}}", escape_name(&tag.lexeme)));
                        i += 1;
                    }
                    if self.is_punct(i, "{") {
                        let close = self.skip_balanced(i);
                        self.members(i + 1, close.saturating_sub(1));
                        i = close;
                    }
                    have_type = true;
                    tagged = true;
                }
                TokenKind::Identifier if !have_type && self.is_type_name(&t.lexeme) => {
                    parts.push(format!("\\&{{{}}}", t.lexeme));
                    have_type = true;
                    i += 1;
                }
                _ => break,
            }
        }
        (!parts.is_empty()).then(|| (parts.join(" "), i, tagged))
    }

    /// Struct or union members between `start` and `end` (exclusive).
    fn members(&mut self, start: usize, end: usize) {
        let mut i = start;
        while i < end {
            if self.starts_declaration(i) {
                i = self.declaration(i, &[";"]).max(i + 1);
            } else {
                i += 1;
            }
        }
    }

    /// Parse one declarator at `i`: pointer stars, the name and suffixes.
    /// Returns (name index, shape, index after the declarator, parameter range).
    fn declarator(&self, mut i: usize) -> Option<Declarator> {
        let mut shape = Shape::default();
        while let Some(t) = self.tok(i) {
            if t.is_punct("*") {
                shape.stars += 1;
            } else if !(t.is_keyword("const") || t.is_keyword("volatile")) {
                break;
            }
            i += 1;
        }
        let name = i;
        if self.tok(name)?.kind != TokenKind::Identifier {
            return None;
        }
        i += 1;
        let mut params = None;
        loop {
            if self.is_punct(i, "[") {
                shape.arrays += 1;
                i = self.skip_balanced(i);
            } else if self.is_punct(i, "(") {
                shape.function = true;
                let close = self.skip_balanced(i);
                params = Some((i + 1, close.saturating_sub(1)));
                i = close;
            } else {
                break;
            }
        }
        Some((name, shape, i, params))
    }

    /// A declaration starting at `i`; returns the index after it.
    fn declaration(&mut self, i: usize, terminators: &[&str]) -> usize {
        let Some((base, mut i, _)) = self.base_type(i) else { return i + 1 };
        loop {
            let Some((name, shape, after, params)) = self.declarator(i) else {
                return self.skip_to_end(i, terminators);
            };
            self.record(name, shape.markup(&base));
            i = after;
            if shape.function && self.is_punct(i, "{") {
                // Function definition: its parameters are declared here.
                if let Some((start, end)) = params {
                    self.parameters(start, end);
                }
                return i;
            }
            if self.is_punct(i, ":") {
                // Bit field width.
                i += 2;
            }
            if self.is_punct(i, "=") {
                i = self.skip_initializer(i + 1);
            }
            match self.tok(i) {
                Some(t) if t.is_punct(",") => i += 1,
                Some(t) if terminators.iter().any(|p| t.is_punct(p)) => return i + 1,
                _ => return i,
            }
        }
    }

    fn parameters(&mut self, start: usize, end: usize) {
        let mut i = start;
        while i < end {
            if self.starts_declaration(i) {
                if let Some((base, at, _)) = self.base_type(i) {
                    if let Some((name, shape, after, _)) = self.declarator(at) {
                        if name < end {
                            self.record(name, shape.markup(&base));
                        }
                        i = after;
                        continue;
                    }
                    i = at;
                }
            }
            i += 1;
        }
    }

    fn skip_initializer(&self, mut i: usize) -> usize {
        while let Some(t) = self.tok(i) {
            if t.kind == TokenKind::Punctuation {
                match t.lexeme.as_str() {
                    "(" | "[" | "{" => {
                        i = self.skip_balanced(i);
                        continue;
                    }
                    "," | ";" | ")" | "}" => return i,
                    _ => {}
                }
            }
            i += 1;
        }
        i
    }

    fn skip_to_end(&self, mut i: usize, terminators: &[&str]) -> usize {
        while let Some(t) = self.tok(i) {
            if terminators.iter().any(|p| t.is_punct(p)) {
                return i + 1;
            }
            if t.is_punct("{") || t.is_punct("}") {
                return i;
            }
            i += 1;
        }
        i
    }

    fn typedef(&mut self, i: usize) -> usize {
        let Some((base, mut i, tagged)) = self.base_type(i) else { return i };
        let alias = if tagged {
            let kw = TAGGED.iter().find(|k| base.starts_with(&format!("\\&{{{k}}}"))).copied().unwrap_or("struct");
            format!("=\\&{{{kw}}}")
        } else {
            format!("={base}")
        };
        loop {
            let Some((name, shape, after, _)) = self.declarator(i) else {
                return self.skip_to_end(i, &[";"]);
            };
            let ty = if shape.stars + shape.arrays == 0 && !shape.function {
                alias.clone()
            } else {
                format!("={}", shape.markup(&base))
            };
            self.local_types.insert(self.tokens[name].lexeme.clone());
            self.record(name, ty);
            i = after;
            match self.tok(i) {
                Some(t) if t.is_punct(",") => i += 1,
                Some(t) if t.is_punct(";") => return i + 1,
                _ => return i,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::meaning::{Meaning, Origin};
    use crate::source::parse_source;

    fn defs_with(table: &MeaningTable, code: &str) -> Vec<(String, String)> {
        let doc = parse_source(&format!("@ Test.\n{code}\n"), "ham").unwrap();
        detect_definitions(&doc.sections[0], table).into_iter().map(|d| (d.ident, d.ty.as_str().to_string())).collect()
    }

    fn graph_table() -> MeaningTable {
        let mut table = MeaningTable::new("ham");
        for name in ["Vertex", "Arc", "Graph"] {
            table.set(Meaning::new(name, Origin::section("GB_GRAPH", 9), TypeMarkup::markup("=\\&{struct}")));
        }
        table
    }

    fn defs(code: &str) -> Vec<(String, String)> {
        defs_with(&graph_table(), code)
    }

    fn pairs(list: &[(&str, &str)]) -> Vec<(String, String)> {
        list.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect()
    }

    #[test]
    fn macros() {
        assert_eq!(defs("@d deg u.I"), pairs(&[("deg", "=macro")]));
        assert_eq!(
            defs("@d not_taken(vert) (vert->taken==0)\n@d twice (x)"),
            pairs(&[("not_taken", "=macro (\\,)"), ("twice", "=macro")])
        );
    }

    #[test]
    fn register_pointers() {
        assert_eq!(
            defs("@c\nregister Vertex *u,*v;"),
            pairs(&[("u", "\\&{register} \\&{Vertex} $*$"), ("v", "\\&{register} \\&{Vertex} $*$")])
        );
    }

    #[test]
    fn labels() {
        assert_eq!(defs("@c\nadvance: x=1;"), pairs(&[("advance", "label")]));
        assert!(defs("@c\nx = c ? a : b;").is_empty());
        assert!(defs("@c\nswitch (c) { case 1: break; default: x=0; }").is_empty());
    }

    #[test]
    fn kr_parameters_and_arrays() {
        assert_eq!(
            defs("@c\nmain(argc,argv)\n  int argc;\n  char *argv[];\n{}"),
            pairs(&[("argc", "\\&{int}"), ("argv", "\\&{char} ${*}[\\,]$")])
        );
    }

    #[test]
    fn function_definitions() {
        assert_eq!(
            defs("@c\nGraph *restore_graph(char *f, long n)\n{ return 0; }"),
            pairs(&[("restore_graph", "\\&{Graph} $*(\\,)$"), ("f", "\\&{char} $*$"), ("n", "\\&{long}"),])
        );
        assert_eq!(defs("@c\nint printf();"), pairs(&[("printf", "\\&{int} (\\,)")]));
    }

    #[test]
    fn typedefs() {
        let table = MeaningTable::new("gb");
        assert_eq!(
            defs_with(
                &table,
                "@c\ntypedef union { struct vertex_struct *V; long I; } util;\ntypedef struct vertex_struct { char *name; util u, v; } Vertex;\nVertex *w;"
            ),
            pairs(&[
                ("V", "\\&{struct} \\\\{vertex\\_struct} $*$"),
                ("I", "\\&{long}"),
                ("util", "=\\&{union}"),
                ("name", "\\&{char} $*$"),
                ("u", "\\&{util}"),
                ("v", "\\&{util}"),
                ("Vertex", "=\\&{struct}"),
                ("w", "\\&{Vertex} $*$"),
            ])
        );
        assert_eq!(defs_with(&table, "@c\ntypedef long siz;"), pairs(&[("siz", "=\\&{long}")]));
    }

    #[test]
    fn blocks_and_initializers() {
        assert_eq!(
            defs("@c\nfor (v=g;v;v++) {register int d = 0, e[3] = {1,2,3}; d++;}"),
            pairs(&[("d", "\\&{register} \\&{int}"), ("e", "\\&{register} \\&{int} $[\\,]$")])
        );
    }

    #[test]
    fn expressions_are_not_declarations() {
        assert!(defs("@c\nv->taken=0; a=a->next; x = y * z; f(x);").is_empty());
        assert!(defs("@c\n#include \"gb_graph.h\" /* |Graph| */\n@<Global variables@>@;").is_empty());
    }

    #[test]
    fn token_indices_point_at_names() {
        let doc = parse_source("@ x\n@c\n{register Vertex *u;} lab: ;\n", "ham").unwrap();
        let s = &doc.sections[0];
        for d in detect_definitions(s, &graph_table()) {
            assert_eq!(s.code_part[d.token_index].lexeme, d.ident);
        }
    }
}
