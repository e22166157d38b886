//! Greedy assignment of sections to spreads.
//!
//! A spread is a run of consecutive sections sharing one mini-index. While a
//! spread is open, scheduled entries are kept in buckets keyed by where they
//! point: before the base section, at one of the next [`WINDOW`] sections,
//! beyond that window, or into another program. Buckets for member sections
//! are erased when the spread is finished; everything else is printed.

use std::collections::HashSet;

use thiserror::Error;

use crate::meaning::Origin;
use crate::mini::{MiniEntry, MiniOutput};

/// Most sections a single spread can hold.
pub const WINDOW: usize = 20;

const BEFORE: usize = 0;
const FORWARD: usize = WINDOW + 1;
const EXTERNAL: usize = WINDOW + 2;
const BUCKETS: usize = WINDOW + 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LayoutConfig {
    pub mini_columns: usize,
    /// Lines per mini-index row.
    pub mini_baseline: usize,
    /// Lines available on one spread.
    pub page_capacity: usize,
    /// Blank lines between consecutive sections of a spread.
    pub section_gap: usize,
    /// Lines taken by the rule above the mini-index.
    pub rule_allowance: usize,
    /// Characters per output line.
    pub page_width: usize,
}

impl Default for LayoutConfig {
    fn default() -> Self {
        LayoutConfig {
            mini_columns: 2,
            mini_baseline: 1,
            page_capacity: 66,
            section_gap: 1,
            rule_allowance: 1,
            page_width: 80,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LayoutError {
    #[error("mini_columns must be at least 1")]
    NoColumns,
    #[error("mini_baseline must be at least 1")]
    NoBaseline,
    #[error("page capacity {capacity} leaves no room beside a rule of {rule} lines")]
    CapacityTooSmall { capacity: usize, rule: usize },
    #[error("page width {0} is too narrow")]
    TooNarrow(usize),
}

impl LayoutConfig {
    pub fn validate(&self) -> Result<(), LayoutError> {
        if self.mini_columns == 0 {
            return Err(LayoutError::NoColumns);
        }
        if self.mini_baseline == 0 {
            return Err(LayoutError::NoBaseline);
        }
        if self.page_capacity < self.rule_allowance + 1 {
            return Err(LayoutError::CapacityTooSmall { capacity: self.page_capacity, rule: self.rule_allowance });
        }
        if self.page_width < 20 {
            return Err(LayoutError::TooNarrow(self.page_width));
        }
        Ok(())
    }
}

/// Estimated height of a spread: its text, the mini-index rows, the rule,
/// and one gap per boundary between member sections.
pub fn estimate_height(body_lines: usize, n_entries: usize, members: usize, cfg: &LayoutConfig) -> usize {
    let columns = cfg.mini_columns.max(1);
    let rows = n_entries.div_ceil(columns);
    body_lines + rows * cfg.mini_baseline + cfg.rule_allowance + members.saturating_sub(1) * cfg.section_gap
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpreadError {
    #[error("a spread cannot hold more than {WINDOW} sections")]
    WindowExceeded,
    #[error("section {got} does not follow section {last}")]
    NotConsecutive { last: u32, got: u32 },
}

/// A spread being filled.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpreadState {
    program: String,
    base: u32,
    members: usize,
    body_lines: usize,
    buckets: Vec<Vec<MiniEntry>>,
    identities: HashSet<MiniEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Append {
    Fit(SpreadState),
    Overflow,
}

impl SpreadState {
    pub fn new(program: impl Into<String>) -> Self {
        SpreadState {
            program: program.into(),
            base: 0,
            members: 0,
            body_lines: 0,
            buckets: vec![Vec::new(); BUCKETS],
            identities: HashSet::new(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.members == 0
    }

    pub fn members(&self) -> std::ops::RangeInclusive<u32> {
        self.base..=self.base + self.members as u32 - 1
    }

    fn is_member(&self, section: u32) -> bool {
        self.members > 0 && section >= self.base && ((section - self.base) as usize) < self.members
    }

    fn bucket(&self, origin: &Origin) -> usize {
        match origin.section_in(&self.program) {
            None => EXTERNAL,
            Some(s) if s < self.base => BEFORE,
            Some(s) if ((s - self.base) as usize) < WINDOW => 1 + (s - self.base) as usize,
            Some(_) => FORWARD,
        }
    }

    /// Entries that would be printed if the spread ended now.
    pub fn live_entries(&self) -> usize {
        self.live_buckets().map(|b| self.buckets[b].len()).sum()
    }

    fn live_buckets(&self) -> impl Iterator<Item = usize> {
        std::iter::once(BEFORE).chain(1 + self.members..BUCKETS)
    }

    pub fn height(&self, cfg: &LayoutConfig) -> usize {
        estimate_height(self.body_lines, self.live_entries(), self.members, cfg)
    }

    /// The state after unconditionally adding the section.
    fn extended(&self, section: u32, body_lines: usize, minis: &MiniOutput) -> Result<SpreadState, SpreadError> {
        if self.members >= WINDOW {
            return Err(SpreadError::WindowExceeded);
        }
        let mut next = self.clone();
        if next.members == 0 {
            next.base = section;
        } else if section != self.base + self.members as u32 {
            return Err(SpreadError::NotConsecutive { last: self.base + self.members as u32 - 1, got: section });
        }
        next.members += 1;
        next.body_lines += body_lines;
        // Rule (c) needs no work: scheduled entries that point at the new
        // member now sit in a member bucket, which is not counted.
        for entry in &minis.entries {
            let own = entry.origin.section_in(&next.program).is_some_and(|s| next.is_member(s));
            if own || next.identities.contains(entry) {
                continue;
            }
            let b = next.bucket(&entry.origin);
            next.identities.insert(entry.clone());
            next.buckets[b].push(entry.clone());
        }
        Ok(next)
    }

    /// Add the section if the spread still fits; otherwise leave it alone.
    pub fn try_append_section(
        &self,
        section: u32,
        body_lines: usize,
        minis: &MiniOutput,
        cfg: &LayoutConfig,
    ) -> Result<Append, SpreadError> {
        let next = self.extended(section, body_lines, minis)?;
        Ok(if next.height(cfg) <= cfg.page_capacity { Append::Fit(next) } else { Append::Overflow })
    }

    /// Print the spread: member buckets are erased, the rest emitted in
    /// bucket order.
    pub fn finalize(self, cfg: &LayoutConfig) -> Spread {
        let height = self.height(cfg);
        let members: Vec<u32> = self.members().collect();
        let live: Vec<usize> = self.live_buckets().collect();
        let mut buckets = self.buckets;
        let entries = live.into_iter().flat_map(|b| std::mem::take(&mut buckets[b])).collect();
        Spread { members, body_lines: self.body_lines, height, oversized: height > cfg.page_capacity, entries }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Spread {
    pub members: Vec<u32>,
    pub body_lines: usize,
    /// Estimated height including the mini-index.
    pub height: usize,
    /// A single section too tall for any spread.
    pub oversized: bool,
    pub entries: Vec<MiniEntry>,
}

/// What the packer needs to know about one section.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PackInput {
    pub section: u32,
    pub body_lines: usize,
    pub minis: MiniOutput,
}

/// Longest-fit packing: keep adding sections while they fit.
pub fn pack_document(program: &str, sections: &[PackInput], cfg: &LayoutConfig) -> Result<Vec<Spread>, SpreadError> {
    let mut spreads = Vec::new();
    let mut state = SpreadState::new(program);
    for input in sections {
        let attempt = if state.is_empty() {
            // An empty spread always takes the section, even if it is too tall.
            Append::Fit(state.extended(input.section, input.body_lines, &input.minis)?)
        } else {
            match state.try_append_section(input.section, input.body_lines, &input.minis, cfg) {
                Err(SpreadError::WindowExceeded) => Append::Overflow,
                other => other?,
            }
        };
        state = match attempt {
            Append::Fit(next) => next,
            Append::Overflow => {
                spreads.push(std::mem::replace(&mut state, SpreadState::new(program)).finalize(cfg));
                state.extended(input.section, input.body_lines, &input.minis)?
            }
        };
    }
    if !state.is_empty() {
        spreads.push(state.finalize(cfg));
    }
    Ok(spreads)
}
