//! A lexer for the C subset that appears in literate sources.
//!
//! Besides ordinary C tokens it understands the structural markers of the
//! literate format (`@c`, `@d`, `@<name@>`, `@<name@>=` and the formatting
//! codes `@;`, `@/`, `@#`, `@,`, `@|`), which come back as [`TokenKind::Meta`].
//! Meaning directives (`@$`, `@-`, `@%`, `@i`, `@+`) are removed by the
//! source parser before code reaches the lexer.

use thiserror::Error;

/// The C89 reserved words. Typedef names are never reserved.
pub const RESERVED_WORDS: [&str; 32] = [
    "auto", "break", "case", "char", "const", "continue", "default", "do", "double", "else", "enum", "extern", "float",
    "for", "goto", "if", "int", "long", "register", "return", "short", "signed", "sizeof", "static", "struct",
    "switch", "typedef", "union", "unsigned", "void", "volatile", "while",
];

pub fn is_reserved(word: &str) -> bool {
    RESERVED_WORDS.contains(&word)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TokenKind {
    Identifier,
    Keyword,
    Punctuation,
    Constant,
    StringLiteral,
    Comment,
    /// Literate-format marker such as `@d` or `@<Name@>=`.
    Meta,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeToken {
    pub kind: TokenKind,
    pub lexeme: String,
    /// Section number the token belongs to (0 for free-standing fragments).
    pub section: u32,
    /// Index of the token within its section's code part.
    pub index: usize,
    /// Byte offset of the lexeme within the lexed fragment.
    pub offset: usize,
}

impl CodeToken {
    pub fn end(&self) -> usize {
        self.offset + self.lexeme.len()
    }

    pub fn is(&self, kind: TokenKind, lexeme: &str) -> bool {
        self.kind == kind && self.lexeme == lexeme
    }

    pub fn is_punct(&self, lexeme: &str) -> bool {
        self.is(TokenKind::Punctuation, lexeme)
    }

    pub fn is_keyword(&self, lexeme: &str) -> bool {
        self.is(TokenKind::Keyword, lexeme)
    }

    /// For `@<name@>` and `@<name@>=` markers, the chunk name.
    pub fn chunk_name(&self) -> Option<&str> {
        if self.kind != TokenKind::Meta || !self.lexeme.starts_with("@<") {
            return None;
        }
        let inner = self.lexeme.strip_prefix("@<")?;
        let inner = inner.strip_suffix("@>=").or_else(|| inner.strip_suffix("@>"))?;
        Some(inner)
    }

    pub fn is_chunk_definition(&self) -> bool {
        self.kind == TokenKind::Meta && self.lexeme.starts_with("@<") && self.lexeme.ends_with("@>=")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LexError {
    #[error("unterminated string literal starting at byte {0}")]
    UnterminatedString(usize),
    #[error("unterminated comment starting at byte {0}")]
    UnterminatedComment(usize),
    #[error("unterminated chunk name starting at byte {0}")]
    UnterminatedChunkName(usize),
    #[error("unknown control code `@{1}` at byte {0}")]
    UnknownControl(usize, char),
}

const PUNCTUATORS: [&str; 47] = [
    "<<=", ">>=", "...", "->", "++", "--", "<<", ">>", "<=", ">=", "==", "!=", "&&", "||", "+=", "-=", "*=", "/=",
    "%=", "&=", "|=", "^=", "##", "(", ")", "[", "]", "{", "}", ";", ",", ".", "=", "<", ">", "+", "-", "*", "/", "%",
    "&", "|", "^", "!", "~", "?", ":",
];

/// Lex a code fragment. Whitespace is not represented; the text between
/// consecutive tokens is always whitespace.
pub fn tokenize_code(fragment: &str) -> Result<Vec<CodeToken>, LexError> {
    Lexer::new(fragment).run()
}

struct Lexer<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
    tokens: Vec<CodeToken>,
    /// Set after a `#include` so that `<file.h>` becomes one token.
    after_include: bool,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer { src, bytes: src.as_bytes(), pos: 0, tokens: Vec::new(), after_include: false }
    }

    fn peek(&self, ahead: usize) -> Option<u8> {
        self.bytes.get(self.pos + ahead).copied()
    }

    fn push(&mut self, kind: TokenKind, start: usize) {
        let index = self.tokens.len();
        self.tokens.push(CodeToken {
            kind,
            lexeme: self.src[start..self.pos].to_string(),
            section: 0,
            index,
            offset: start,
        });
    }

    fn at_line_start(&self, start: usize) -> bool {
        self.src[..start].rsplit('\n').next().is_none_or(|prefix| prefix.chars().all(|c| c == ' ' || c == '\t'))
    }

    fn run(mut self) -> Result<Vec<CodeToken>, LexError> {
        while let Some(c) = self.peek(0) {
            let start = self.pos;
            if c.is_ascii_whitespace() {
                if c == b'\n' {
                    self.after_include = false;
                }
                self.pos += 1;
                continue;
            }
            if c == b'@' {
                self.control(start)?;
                continue;
            }
            if c == b'/' && self.peek(1) == Some(b'*') {
                match self.src[start + 2..].find("*/") {
                    Some(end) => self.pos = start + 2 + end + 2,
                    None => return Err(LexError::UnterminatedComment(start)),
                }
                self.push(TokenKind::Comment, start);
                continue;
            }
            if c == b'/' && self.peek(1) == Some(b'/') {
                let end = self.src[start..].find('\n').map_or(self.src.len(), |e| start + e);
                self.pos = end;
                self.push(TokenKind::Comment, start);
                continue;
            }
            if c == b'"' {
                self.quoted(start, b'"')?;
                self.push(TokenKind::StringLiteral, start);
                continue;
            }
            if c == b'\'' {
                self.quoted(start, b'\'')?;
                self.push(TokenKind::Constant, start);
                continue;
            }
            if c == b'<' && self.after_include {
                match self.src[start..].find('>') {
                    Some(end) if !self.src[start..start + end].contains('\n') => {
                        self.pos = start + end + 1;
                        self.push(TokenKind::StringLiteral, start);
                        continue;
                    }
                    _ => {}
                }
            }
            if c == b'#' && self.at_line_start(start) {
                self.pos += 1;
                while matches!(self.peek(0), Some(b' ' | b'\t')) {
                    self.pos += 1;
                }
                while self.peek(0).is_some_and(|b| b.is_ascii_alphabetic()) {
                    self.pos += 1;
                }
                self.push(TokenKind::Punctuation, start);
                self.after_include = self.tokens.last().is_some_and(|t| t.lexeme.ends_with("include"));
                continue;
            }
            if c.is_ascii_alphabetic() || c == b'_' {
                while self.peek(0).is_some_and(|b| b.is_ascii_alphanumeric() || b == b'_') {
                    self.pos += 1;
                }
                let kind =
                    if is_reserved(&self.src[start..self.pos]) { TokenKind::Keyword } else { TokenKind::Identifier };
                self.push(kind, start);
                continue;
            }
            if c.is_ascii_digit() || (c == b'.' && self.peek(1).is_some_and(|b| b.is_ascii_digit())) {
                self.number();
                self.push(TokenKind::Constant, start);
                continue;
            }
            if !c.is_ascii() {
                // Pass non-ASCII characters through as single punctuation.
                let ch = self.src[start..].chars().next().unwrap_or('\u{fffd}');
                self.pos += ch.len_utf8();
                self.push(TokenKind::Punctuation, start);
                continue;
            }
            let rest = &self.src[start..];
            let punct = PUNCTUATORS.iter().find(|p| rest.starts_with(**p)).map_or(1, |p| p.len());
            self.pos += punct;
            self.push(TokenKind::Punctuation, start);
        }
        Ok(self.tokens)
    }

    fn control(&mut self, start: usize) -> Result<(), LexError> {
        let code = self.src[start + 1..].chars().next();
        match code {
            Some('c' | 'd' | ';' | '/' | '#' | ',' | '|') => {
                self.pos += 2;
                self.push(TokenKind::Meta, start);
            }
            Some('<') => {
                let Some(end) = self.src[start + 2..].find("@>") else {
                    return Err(LexError::UnterminatedChunkName(start));
                };
                self.pos = start + 2 + end + 2;
                if self.peek(0) == Some(b'=') {
                    self.pos += 1;
                }
                self.push(TokenKind::Meta, start);
            }
            Some(other) => return Err(LexError::UnknownControl(start, other)),
            None => return Err(LexError::UnknownControl(start, ' ')),
        }
        Ok(())
    }

    fn quoted(&mut self, start: usize, quote: u8) -> Result<(), LexError> {
        self.pos = start + 1;
        loop {
            match self.peek(0) {
                None | Some(b'\n') => return Err(LexError::UnterminatedString(start)),
                Some(b'\\') => self.pos += 2,
                Some(b) if b == quote => {
                    self.pos += 1;
                    return Ok(());
                }
                Some(_) => self.pos += 1,
            }
        }
    }

    fn number(&mut self) {
        if self.peek(0) == Some(b'0') && matches!(self.peek(1), Some(b'x' | b'X')) {
            self.pos += 2;
        }
        while self.peek(0).is_some_and(|b| b.is_ascii_alphanumeric() || b == b'.' || b == b'_') {
            self.pos += 1;
        }
    }
}

/// Identifiers mentioned inside `|...|` spans of commentary text.
pub fn inline_code_identifiers(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut rest = text;
    while let Some(open) = rest.find('|') {
        let after = &rest[open + 1..];
        let Some(close) = after.find('|') else { break };
        let span = &after[..close];
        if let Ok(tokens) = tokenize_code(span) {
            out.extend(tokens.into_iter().filter(|t| t.kind == TokenKind::Identifier).map(|t| t.lexeme));
        }
        rest = &after[close + 1..];
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<(TokenKind, String)> {
        tokenize_code(src).unwrap().into_iter().map(|t| (t.kind, t.lexeme)).collect()
    }

    #[test]
    fn arrow_is_one_token() {
        use TokenKind::*;
        assert_eq!(
            kinds("v->taken=0;"),
            vec![
                (Identifier, "v".into()),
                (Punctuation, "->".into()),
                (Identifier, "taken".into()),
                (Punctuation, "=".into()),
                (Constant, "0".into()),
                (Punctuation, ";".into()),
            ]
        );
    }

    #[test]
    fn register_declaration() {
        use TokenKind::*;
        let got = kinds("register Vertex *u,*v;");
        let want: Vec<(TokenKind, String)> = [
            (Keyword, "register"),
            (Identifier, "Vertex"),
            (Punctuation, "*"),
            (Identifier, "u"),
            (Punctuation, ","),
            (Punctuation, "*"),
            (Identifier, "v"),
            (Punctuation, ";"),
        ]
        .into_iter()
        .map(|(k, s)| (k, s.to_string()))
        .collect();
        assert_eq!(got, want);
    }

    #[test]
    fn comment_is_atomic() {
        assert_eq!(kinds("/* linked list of arcs */"), vec![(TokenKind::Comment, "/* linked list of arcs */".into())]);
    }

    #[test]
    fn include_lines() {
        let toks = kinds("#include <stdio.h>\n#include \"gb_graph.h\" /* |Graph| */\n");
        assert_eq!(toks[0], (TokenKind::Punctuation, "#include".into()));
        assert_eq!(toks[1], (TokenKind::StringLiteral, "<stdio.h>".into()));
        assert_eq!(toks[3], (TokenKind::StringLiteral, "\"gb_graph.h\"".into()));
        assert_eq!(toks[4].0, TokenKind::Comment);
    }

    #[test]
    fn comparison_after_include_line_is_not_a_header() {
        let toks = kinds("#include \"x.h\"\nif (a<b) c=d>e;");
        assert!(toks.iter().any(|t| t == &(TokenKind::Punctuation, "<".to_string())));
    }

    #[test]
    fn literate_markers() {
        let toks = kinds("@d deg u.I\n@<Find all circuits@>=\nx=1;@;\n@<Local variables@>@;");
        assert_eq!(toks[0], (TokenKind::Meta, "@d".into()));
        assert!(toks.contains(&(TokenKind::Meta, "@<Find all circuits@>=".into())));
        assert!(toks.contains(&(TokenKind::Meta, "@<Local variables@>".into())));
        let chunk = tokenize_code("@<Find all circuits@>=").unwrap().remove(0);
        assert_eq!(chunk.chunk_name(), Some("Find all circuits"));
        assert!(chunk.is_chunk_definition());
    }

    #[test]
    fn errors() {
        assert_eq!(tokenize_code("x = \"abc"), Err(LexError::UnterminatedString(4)));
        assert_eq!(tokenize_code("/* abc"), Err(LexError::UnterminatedComment(0)));
        assert_eq!(tokenize_code("@q"), Err(LexError::UnknownControl(0, 'q')));
    }

    #[test]
    fn keywords_are_reserved() {
        let toks = kinds("for (;;) break;");
        assert!(toks.iter().all(|(k, _)| matches!(k, TokenKind::Keyword | TokenKind::Punctuation)));
    }

    #[test]
    fn inline_spans() {
        assert_eq!(
            inline_code_identifiers("reads the graph with |restore_graph|; see |v->arcs|."),
            vec!["restore_graph", "v", "arcs"]
        );
        assert!(inline_code_identifiers("no spans here").is_empty());
    }

    proptest::proptest! {
        #[test]
        fn tokens_and_whitespace_reconstruct_fragment(
            parts in proptest::collection::vec(
                proptest::sample::select(vec![
                    "v", "->", "taken", "=", "0", ";", "register", "Vertex", "*", "(", ")",
                    "\"s t\"", "/* c */", "a_b1", "42", "==", "{", "}", "[", "]", ",",
                ]),
                0..30,
            ),
            gaps in proptest::collection::vec(
                proptest::sample::select(vec![" ", "\n", "  ", "\t"]), 30),
        ) {
            let mut src = String::new();
            for (i, p) in parts.iter().enumerate() {
                src.push_str(p);
                src.push_str(gaps[i]);
            }
            let toks = tokenize_code(&src).unwrap();
            let mut rebuilt = String::new();
            let mut at = 0;
            for t in &toks {
                let gap = &src[at..t.offset];
                proptest::prop_assert!(gap.chars().all(char::is_whitespace));
                rebuilt.push_str(gap);
                rebuilt.push_str(&t.lexeme);
                at = t.end();
            }
            proptest::prop_assert!(src[at..].chars().all(char::is_whitespace));
            rebuilt.push_str(&src[at..]);
            proptest::prop_assert_eq!(rebuilt, src);
        }
    }
}
