//! A weaver for literate C programs that prints, on every two-page spread,
//! a mini-index of the identifiers used there but defined elsewhere.

pub mod cli;
pub mod detect;
pub mod ham;
pub mod lexer;
pub mod meaning;
pub mod mini;
pub mod refsort;
pub mod render;
pub mod source;
pub mod spread;
pub mod weave;
