#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};

use miniweave::ham::corpus::{corpus_files, reference_layout, PROGRAM};
use miniweave::ham::Graph;
use miniweave::meaning::{Meaning, Origin, TypeMarkup, ZIP};
use miniweave::mini::{MiniEntry, MiniOutput};
use miniweave::refsort::{RefFile, RefSpread};
use miniweave::render::Mode;
use miniweave::source::MapResolver;
use miniweave::spread::{estimate_height, LayoutConfig, PackInput};
use miniweave::weave::{weave, WeaveInput, WeaveOutput};
use rand::seq::SliceRandom;
use rand::Rng;

pub const TENTH_SECTION: [&str; 8] = [
    r"\]{GB\_GRAPH}10 \\{next} \&{Arc} $*$",
    r"\[7 \\{advance} label",
    r"\[6 \\{ark} =\|x.\|A",
    r"\[2 \|{t} \&{register} \&{Vertex} $*$",
    r"\[4 \\{not\_taken} =macro (\,)",
    r"\]{GB\_GRAPH}10 \\{tip} \&{Vertex} $*$",
    r"\[2 \|{v} \&{register} \&{Vertex} $*$",
    r"\[2 \|{a} \&{register} \&{Arc} $*$",
];

pub fn ham_files() -> HashMap<&'static str, String> {
    corpus_files().into_iter().collect()
}

pub fn ham_input(aux: Option<String>, sref: Option<String>) -> (WeaveInput, MapResolver) {
    let files = ham_files();
    let input = WeaveInput {
        program: PROGRAM.to_string(),
        source_name: "ham.lw".to_string(),
        source: files["ham.lw"].clone(),
        system_bux: Some(files["system.bux"].clone()),
        aux,
        bux: Some(files["ham.bux"].clone()),
        sref,
    };
    (input, MapResolver::from_pairs(files))
}

pub fn weave_ham(aux: Option<String>, sref: Option<String>) -> WeaveOutput {
    let (input, resolver) = ham_input(aux, sref);
    weave(&input, &resolver, &reference_layout(), Mode::Plain).expect("HAM weaves")
}

pub fn random_graph(rng: &mut impl Rng, n: usize, p: f64) -> Graph {
    let mut g = Graph::new(n);
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(p) {
                g.add_edge(u, v).unwrap();
            }
        }
    }
    g
}

const NAMES: [&str; 12] = ["a", "b", "t", "v", "deg", "next", "tip", "Arc", "count", "x_y", "len", "I"];
const TYPES: [&str; 5] = [r"\&{int}", r"\&{register} \&{Vertex} $*$", r"=\&{struct}", r"=macro (\,)", ZIP];

pub fn random_entry(rng: &mut impl Rng, program: &str, max_section: u32) -> MiniEntry {
    let origin = match rng.gen_range(0..10) {
        0 => Origin::Literal("<stdio.h>".to_string()),
        1 | 2 => Origin::section("GB_GRAPH", rng.gen_range(1..25)),
        _ => Origin::section(program, rng.gen_range(0..=max_section)),
    };
    let name = *NAMES.choose(rng).unwrap();
    let ty = TypeMarkup::parse(TYPES.choose(rng).unwrap());
    MiniEntry::from_meaning(&Meaning::new(name, origin, ty))
}

/// A document of `n` sections with random bodies and mini-outputs that
/// point anywhere, forwards and backwards.
pub fn random_document(rng: &mut impl Rng, program: &str, n: u32) -> Vec<PackInput> {
    (1..=n)
        .map(|section| {
            let k = rng.gen_range(0..9);
            let mut entries: Vec<MiniEntry> = Vec::new();
            for _ in 0..k {
                let e = random_entry(rng, program, n + 3);
                if e.origin.section_in(program) != Some(section) && !entries.contains(&e) {
                    entries.push(e);
                }
            }
            PackInput { section, body_lines: rng.gen_range(1..14), minis: MiniOutput { section, entries } }
        })
        .collect()
}

pub fn random_layout(rng: &mut impl Rng) -> LayoutConfig {
    LayoutConfig {
        mini_columns: rng.gen_range(1..4),
        mini_baseline: rng.gen_range(1..3),
        page_capacity: rng.gen_range(12..60),
        section_gap: rng.gen_range(0..3),
        rule_allowance: rng.gen_range(0..3),
        page_width: 80,
    }
}

/// Entries a spread made of `members` must print, computed from scratch.
pub fn spread_set(program: &str, doc: &[PackInput], members: &[u32]) -> BTreeSet<MiniEntry> {
    doc.iter()
        .filter(|p| members.contains(&p.section))
        .flat_map(|p| p.minis.entries.iter())
        .filter(|e| e.origin.section_in(program).is_none_or(|s| !members.contains(&s)))
        .cloned()
        .collect()
}

pub fn spread_height(program: &str, doc: &[PackInput], members: &[u32], cfg: &LayoutConfig) -> usize {
    let body: usize = doc.iter().filter(|p| members.contains(&p.section)).map(|p| p.body_lines).sum();
    estimate_height(body, spread_set(program, doc, members).len(), members.len(), cfg)
}

/// Longest-fit packing by recomputing every candidate spread from scratch.
pub fn oracle_pack(program: &str, doc: &[PackInput], cfg: &LayoutConfig) -> Vec<(Vec<u32>, BTreeSet<MiniEntry>)> {
    let mut spreads = Vec::new();
    let mut start = 0;
    while start < doc.len() {
        let mut end = start + 1;
        while end < doc.len() && end - start < miniweave::spread::WINDOW {
            let members: Vec<u32> = doc[start..=end].iter().map(|p| p.section).collect();
            if spread_height(program, doc, &members, cfg) > cfg.page_capacity {
                break;
            }
            end += 1;
        }
        let members: Vec<u32> = doc[start..end].iter().map(|p| p.section).collect();
        let set = spread_set(program, doc, &members);
        spreads.push((members, set));
        start = end;
    }
    spreads
}

pub fn random_ref_file(rng: &mut impl Rng, program: &str) -> RefFile {
    let mut number = 0;
    let spreads = (0..rng.gen_range(0..6))
        .map(|_| {
            number += rng.gen_range(1..3);
            let entries = (0..rng.gen_range(0..12)).map(|_| random_entry(rng, program, 30)).collect();
            RefSpread { number, entries }
        })
        .collect();
    RefFile { spreads }
}
