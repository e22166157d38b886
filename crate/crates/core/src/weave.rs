//! The weave pass: meanings, mini-outputs, packing and page layout for a
//! whole document, independent of where the files live.

use std::collections::HashMap;

use thiserror::Error;

use crate::meaning::{load_meaning_files, process_section, serialize_aux, Meaning, UNKNOWN_TYPE};
use crate::mini::{emit_section_minis, MiniOutput};
use crate::refsort::{parse_sref, serialize_ref, RefError, RefFile, RefSpread};
use crate::render::{layout_section, pages_to_html, pages_to_text, render_document, Mode, RenderError, RenderedPage};
use crate::source::{parse_source, IncludeResolver, SourceError};
use crate::spread::{pack_document, LayoutConfig, LayoutError, PackInput, Spread, SpreadError};

#[derive(Debug, Error)]
pub enum WeaveError {
    #[error("{file}: {error}")]
    Source { file: String, error: SourceError },
    #[error("{file}: {error}")]
    SortedIndex { file: String, error: RefError },
    #[error(transparent)]
    Layout(#[from] LayoutError),
    #[error(transparent)]
    Spread(#[from] SpreadError),
    #[error(transparent)]
    Render(#[from] RenderError),
}

/// Everything one weave run reads. File names are only used in messages.
#[derive(Debug, Clone, Default)]
pub struct WeaveInput {
    pub program: String,
    pub source_name: String,
    pub source: String,
    pub system_bux: Option<String>,
    pub aux: Option<String>,
    pub bux: Option<String>,
    pub sref: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Warning {
    Oversized { spread: u32, section: u32 },
    Unknown { ident: String, section: u32 },
    StaleSortedIndex(String),
}

impl std::fmt::Display for Warning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Warning::Oversized { spread, section } => {
                write!(f, "spread {spread}: §{section} is taller than a page")
            }
            Warning::Unknown { ident, section } => write!(f, "§{section}: `{ident}` has no known meaning"),
            Warning::StaleSortedIndex(why) => write!(f, "ignoring the sorted index ({why}); printing a preview"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct WeaveOutput {
    /// The new `.aux` file.
    pub aux: String,
    pub aux_records: Vec<Meaning>,
    /// The `.ref` file, written whenever no usable sorted index was given.
    pub ref_file: Option<String>,
    pub minis: Vec<MiniOutput>,
    pub spreads: Vec<Spread>,
    pub pages: Vec<RenderedPage>,
    /// True when the mini-indexes came from the sorted index.
    pub final_pass: bool,
    pub warnings: Vec<Warning>,
}

impl WeaveOutput {
    pub fn document(&self, mode: Mode, title: &str) -> String {
        match mode {
            Mode::Plain => pages_to_text(&self.pages),
            Mode::Html => pages_to_html(&self.pages, title),
        }
    }
}

/// The unsorted index of a packed document.
pub fn ref_file_for(spreads: &[Spread]) -> RefFile {
    RefFile {
        spreads: spreads
            .iter()
            .enumerate()
            .map(|(i, s)| RefSpread { number: i as u32 + 1, entries: s.entries.clone() })
            .collect(),
    }
}

/// Run meanings and mini-output over every section, without packing.
pub fn collect_minis(
    input: &WeaveInput,
    resolver: &dyn IncludeResolver,
) -> Result<(crate::source::SourceDocument, Vec<Meaning>, Vec<MiniOutput>), WeaveError> {
    let source_err = |file: &str| {
        let file = file.to_string();
        move |error| WeaveError::Source { file: file.clone(), error }
    };
    let doc = parse_source(&input.source, &input.program).map_err(source_err(&input.source_name))?;
    let mut table = load_meaning_files(
        &input.program,
        input.system_bux.as_deref(),
        input.aux.as_deref(),
        input.bux.as_deref(),
        resolver,
    )
    .map_err(source_err("meaning files"))?;
    let mut records = Vec::new();
    let mut minis = Vec::with_capacity(doc.sections.len());
    for section in &doc.sections {
        let outcome = process_section(&mut table, section, resolver).map_err(source_err(&input.source_name))?;
        records.extend(outcome.aux);
        minis.push(emit_section_minis(&table, &outcome.state, section));
    }
    Ok((doc, records, minis))
}

pub fn weave(
    input: &WeaveInput,
    resolver: &dyn IncludeResolver,
    cfg: &LayoutConfig,
    mode: Mode,
) -> Result<WeaveOutput, WeaveError> {
    cfg.validate()?;
    let (doc, records, minis) = collect_minis(input, resolver)?;
    let mut warnings = Vec::new();
    for m in &minis {
        for e in m.entries.iter().filter(|e| e.ty.as_str() == UNKNOWN_TYPE) {
            warnings.push(Warning::Unknown { ident: e.ident.name.clone(), section: m.section });
        }
    }

    let mut bodies = HashMap::new();
    let mut inputs = Vec::with_capacity(doc.sections.len());
    for (section, m) in doc.sections.iter().zip(&minis) {
        let body = layout_section(section, cfg);
        inputs.push(PackInput { section: section.number, body_lines: body.len(), minis: m.clone() });
        bodies.insert(section.number, body);
    }
    let spreads = pack_document(&input.program, &inputs, cfg)?;
    for (i, s) in spreads.iter().enumerate() {
        if s.oversized {
            warnings.push(Warning::Oversized { spread: i as u32 + 1, section: s.members[0] });
        }
    }

    let sorted = match &input.sref {
        Some(text) => Some(
            parse_sref(text, &input.program)
                .map_err(|error| WeaveError::SortedIndex { file: format!("{}.sref", input.program), error })?,
        ),
        None => None,
    };
    let (pages, final_pass) =
        match sorted.as_ref().map(|s| render_document(&spreads, &bodies, Some(s), &input.program, cfg, mode)) {
            Some(Ok(pages)) => (pages, true),
            Some(Err(RenderError::SrefMismatch(why))) => {
                warnings.push(Warning::StaleSortedIndex(why));
                (render_document(&spreads, &bodies, None, &input.program, cfg, mode)?, false)
            }
            Some(Err(e)) => return Err(e.into()),
            None => (render_document(&spreads, &bodies, None, &input.program, cfg, mode)?, false),
        };
    let ref_file = (!final_pass).then(|| serialize_ref(&ref_file_for(&spreads), &input.program));

    Ok(WeaveOutput {
        aux: serialize_aux(&records),
        aux_records: records,
        ref_file,
        minis,
        spreads,
        pages,
        final_pass,
        warnings,
    })
}
