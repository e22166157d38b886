//! The `.ref` and `.sref` interchange files.
//!
//! `.ref` lists each spread's mini-index entries in packing order: a `!n`
//! line opens spread `n` and every entry follows on its own `+ ` line.
//! `.sref` holds the same entries sorted, each spread closed by a
//! `\donewithpage` line carrying its number.

use std::cmp::Ordering;

use thiserror::Error;

use crate::meaning::Origin;
use crate::mini::{EntryError, MiniEntry};

const DONE_MARKER: &str = "\\donewithpage";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RefSpread {
    pub number: u32,
    pub entries: Vec<MiniEntry>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RefFile {
    pub spreads: Vec<RefSpread>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RefError {
    #[error("line {0}: entry before the first spread marker")]
    EntryBeforeSpread(usize),
    #[error("line {line}: spread {got} does not follow spread {previous}")]
    NonMonotoneSpreadNumbers { line: usize, previous: u32, got: u32 },
    #[error("line {line}: {error}")]
    UnparseableEntry { line: usize, error: EntryError },
    #[error("line {line}: unrecognized line `{text}`")]
    BadLine { line: usize, text: String },
    #[error("entries after the last `\\donewithpage` marker")]
    UnterminatedSpread,
}

fn check_order(spreads: &[RefSpread], line: usize, got: u32) -> Result<(), RefError> {
    match spreads.last() {
        Some(prev) if prev.number >= got => {
            Err(RefError::NonMonotoneSpreadNumbers { line, previous: prev.number, got })
        }
        _ if got == 0 => Err(RefError::NonMonotoneSpreadNumbers { line, previous: 0, got }),
        _ => Ok(()),
    }
}

fn parse_entry(text: &str, line: usize, program: &str) -> Result<MiniEntry, RefError> {
    MiniEntry::parse_line(text, program).map_err(|error| RefError::UnparseableEntry { line, error })
}

/// Parse a `.ref` file; `\[` entries belong to `program`.
pub fn parse_ref(text: &str, program: &str) -> Result<RefFile, RefError> {
    let mut spreads: Vec<RefSpread> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        if raw.is_empty() {
            continue;
        }
        if let Some(n) = raw.strip_prefix('!') {
            let number = n.parse().map_err(|_| RefError::BadLine { line, text: raw.to_string() })?;
            check_order(&spreads, line, number)?;
            spreads.push(RefSpread { number, entries: Vec::new() });
        } else if let Some(entry) = raw.strip_prefix("+ ") {
            let entry = parse_entry(entry, line, program)?;
            spreads.last_mut().ok_or(RefError::EntryBeforeSpread(line))?.entries.push(entry);
        } else {
            return Err(RefError::BadLine { line, text: raw.to_string() });
        }
    }
    Ok(RefFile { spreads })
}

pub fn serialize_ref(file: &RefFile, program: &str) -> String {
    let mut out = String::new();
    for spread in &file.spreads {
        out.push_str(&format!("!{}\n", spread.number));
        for entry in &spread.entries {
            out.push_str("+ ");
            out.push_str(&entry.to_line(program));
            out.push('\n');
        }
    }
    out
}

/// Parse a `.sref` file.
pub fn parse_sref(text: &str, program: &str) -> Result<RefFile, RefError> {
    let mut spreads: Vec<RefSpread> = Vec::new();
    let mut pending = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        if raw.is_empty() {
            continue;
        }
        if let Some(n) = raw.strip_prefix(DONE_MARKER) {
            let number = n.parse().map_err(|_| RefError::BadLine { line, text: raw.to_string() })?;
            check_order(&spreads, line, number)?;
            spreads.push(RefSpread { number, entries: std::mem::take(&mut pending) });
        } else {
            pending.push(parse_entry(raw, line, program)?);
        }
    }
    if !pending.is_empty() {
        return Err(RefError::UnterminatedSpread);
    }
    Ok(RefFile { spreads })
}

pub fn serialize_sref(file: &RefFile, program: &str) -> String {
    let mut out = String::new();
    for spread in &file.spreads {
        for entry in &spread.entries {
            out.push_str(&entry.to_line(program));
            out.push('\n');
        }
        out.push_str(&format!("{DONE_MARKER}{}\n", spread.number));
    }
    out
}

/// Sort key: the identifier folded to lower case without underscores, then
/// its markup, then where it points (other programs by name and section,
/// then literal labels, then this program by section), then its type.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct CollationKey {
    primary: String,
    secondary: String,
    tertiary: (u8, String, u32),
    type_text: String,
}

impl CollationKey {
    pub fn of(entry: &MiniEntry, program: &str) -> Self {
        let primary = entry.ident.name.chars().filter(|&c| c != '_').map(|c| c.to_ascii_lowercase()).collect();
        let tertiary = match &entry.origin {
            Origin::Section { program: p, section } if p == program => (2, String::new(), *section),
            Origin::Section { program: p, section } => (0, p.clone(), *section),
            Origin::Literal(label) => (1, label.clone(), 0),
        };
        CollationKey { primary, secondary: entry.ident.to_string(), tertiary, type_text: entry.ty.to_string() }
    }
}

pub fn compare_entries(a: &MiniEntry, b: &MiniEntry, program: &str) -> Ordering {
    CollationKey::of(a, program).cmp(&CollationKey::of(b, program))
}

pub fn sort_spread(entries: &[MiniEntry], program: &str) -> Vec<MiniEntry> {
    let mut sorted = entries.to_vec();
    sorted.sort_by_cached_key(|e| CollationKey::of(e, program));
    sorted
}

/// The sorted counterpart of a `.ref` file.
pub fn sort_ref(file: &RefFile, program: &str) -> RefFile {
    RefFile {
        spreads: file
            .spreads
            .iter()
            .map(|s| RefSpread { number: s.number, entries: sort_spread(&s.entries, program) })
            .collect(),
    }
}
