//! Command-line driver: the file protocol around the weave pass.
//!
//! `weave` reads `NAME.aux`, `NAME.bux` and `system.bux`, writes a fresh
//! `NAME.aux`, and either renders final pages from `NAME.sref` or writes
//! `NAME.ref` and renders a preview. `refsort` turns `.ref` into `.sref`.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use crate::ham::{self, corpus};
use crate::refsort::{parse_ref, serialize_sref, sort_ref};
use crate::render::{dump_debug_minis, Mode};
use crate::source::DirResolver;
use crate::spread::LayoutConfig;
use crate::weave::{collect_minis, weave, WeaveInput, WeaveOutput};

pub const SYSTEM_BUX_ENV: &str = "MINIWEAVE_SYSTEM_BUX";

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_WARNINGS: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "miniweave", version, about = "Weave literate C programs with per-spread mini-indexes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Weave a source file into pages.
    Weave(WeaveArgs),
    /// Sort a `.ref` file into a `.sref` file.
    Refsort {
        ref_file: PathBuf,
        /// Program whose sections `\[` entries refer to (default: file stem).
        #[arg(long)]
        program_name: Option<String>,
        /// Where to write the sorted file (default: next to the input).
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Print every section's raw mini-output.
    Check(SourceArgs),
    /// Write the HAM example and its meaning files into a directory.
    HamCorpus { dir: PathBuf },
    /// Count the knight's tours of a board.
    Knights {
        #[arg(default_value_t = 6)]
        rows: usize,
        #[arg(default_value_t = 6)]
        cols: usize,
    },
}

#[derive(Debug, Args)]
pub struct SourceArgs {
    pub source: PathBuf,
    /// Program name used in meanings (default: source file stem).
    #[arg(long)]
    pub program_name: Option<String>,
    /// Meaning file from the previous run; also where the new one goes.
    #[arg(long)]
    pub aux: Option<PathBuf>,
    /// User-maintained meaning file.
    #[arg(long)]
    pub bux: Option<PathBuf>,
    /// Background meanings; overrides the search of MINIWEAVE_SYSTEM_BUX
    /// and the source directory.
    #[arg(long)]
    pub system_bux: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct WeaveArgs {
    #[command(flatten)]
    pub files: SourceArgs,
    /// Mini-index columns per page.
    #[arg(long)]
    pub columns: Option<usize>,
    /// Lines per spread.
    #[arg(long)]
    pub capacity: Option<usize>,
    /// Write HTML instead of plain text.
    #[arg(long)]
    pub html: bool,
    /// Also print every section's raw mini-output.
    #[arg(long)]
    pub debug_minis: bool,
    /// Weave, sort the index and weave again in one go.
    #[arg(long)]
    pub auto: bool,
    /// Output document (default: NAME.txt or NAME.html next to the source).
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

/// Run with explicit arguments, writing to the given streams; returns the
/// exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{e}");
                return EXIT_ERROR;
            }
            let _ = write!(out, "{e}");
            return EXIT_OK;
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            EXIT_ERROR
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Weave(args) => cmd_weave(&args, out, err),
        Command::Refsort { ref_file, program_name, output } => {
            let program = match program_name {
                Some(p) => p,
                None => stem(&ref_file)?,
            };
            let output = output.unwrap_or_else(|| ref_file.with_extension("sref"));
            cmd_refsort(&ref_file, &output, &program)?;
            Ok(EXIT_OK)
        }
        Command::Check(args) => {
            let files = ProtocolFiles::locate(&args)?;
            let input = files.input(false)?;
            let (_, _, minis) = collect_minis(&input, &DirResolver::new(&files.dir))?;
            out.write_all(dump_debug_minis(&minis, &files.program).as_bytes())?;
            Ok(EXIT_OK)
        }
        Command::HamCorpus { dir } => {
            corpus::write_corpus(&dir).with_context(|| format!("writing {}", dir.display()))?;
            writeln!(out, "wrote the HAM corpus to {}", dir.display())?;
            Ok(EXIT_OK)
        }
        Command::Knights { rows, cols } => {
            if rows == 0 || cols == 0 {
                bail!("the board needs at least one row and one column");
            }
            let count = ham::enumerate_hamiltonian_cycles(&ham::knight_graph(rows, cols));
            writeln!(out, "{count}")?;
            Ok(EXIT_OK)
        }
    }
}

fn stem(path: &Path) -> Result<String> {
    path.file_stem()
        .and_then(|s| s.to_str())
        .map(str::to_string)
        .with_context(|| format!("cannot take a program name from {}", path.display()))
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn read_if_present(path: &Path) -> Result<Option<String>> {
    if path.exists() {
        read(path).map(Some)
    } else {
        Ok(None)
    }
}

/// Where each protocol file of one document lives.
#[derive(Debug, Clone)]
struct ProtocolFiles {
    source: PathBuf,
    program: String,
    dir: PathBuf,
    aux: PathBuf,
    bux: PathBuf,
    bux_required: bool,
    system_bux: Option<PathBuf>,
}

impl ProtocolFiles {
    fn locate(args: &SourceArgs) -> Result<Self> {
        let program = match &args.program_name {
            Some(p) => p.clone(),
            None => stem(&args.source)?,
        };
        let dir = match args.source.parent() {
            Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
            _ => PathBuf::from("."),
        };
        let aux = args.aux.clone().unwrap_or_else(|| dir.join(format!("{program}.aux")));
        let (bux, bux_required) = match &args.bux {
            Some(p) => (p.clone(), true),
            None => (dir.join(format!("{program}.bux")), false),
        };
        let system_bux = match &args.system_bux {
            Some(p) => Some(p.clone()),
            None => find_system_bux(&dir),
        };
        Ok(ProtocolFiles { source: args.source.clone(), program, dir, aux, bux, bux_required, system_bux })
    }

    fn sibling(&self, ext: &str) -> PathBuf {
        self.dir.join(format!("{}.{ext}", self.program))
    }

    fn input(&self, with_sref: bool) -> Result<WeaveInput> {
        let bux = if self.bux_required { Some(read(&self.bux)?) } else { read_if_present(&self.bux)? };
        Ok(WeaveInput {
            program: self.program.clone(),
            source_name: self.source.display().to_string(),
            source: read(&self.source)?,
            system_bux: self.system_bux.as_deref().map(read).transpose()?,
            aux: read_if_present(&self.aux)?,
            bux,
            sref: if with_sref { read_if_present(&self.sibling("sref"))? } else { None },
        })
    }
}

/// `system.bux` from the environment's directory list, else the source
/// directory.
fn find_system_bux(source_dir: &Path) -> Option<PathBuf> {
    if let Some(list) = std::env::var_os(SYSTEM_BUX_ENV) {
        for entry in std::env::split_paths(&list) {
            if entry.is_file() {
                return Some(entry);
            }
            let candidate = entry.join("system.bux");
            if candidate.is_file() {
                return Some(candidate);
            }
        }
        return None;
    }
    let candidate = source_dir.join("system.bux");
    candidate.is_file().then_some(candidate)
}

fn layout_for(args: &WeaveArgs) -> LayoutConfig {
    let mut cfg = LayoutConfig::default();
    if let Some(c) = args.columns {
        cfg.mini_columns = c;
    }
    if let Some(c) = args.capacity {
        cfg.page_capacity = c;
    }
    cfg
}

fn weave_once(files: &ProtocolFiles, cfg: &LayoutConfig, mode: Mode) -> Result<WeaveOutput> {
    let input = files.input(true)?;
    let output = weave(&input, &DirResolver::new(&files.dir), cfg, mode)?;
    fs::write(&files.aux, &output.aux).with_context(|| format!("cannot write {}", files.aux.display()))?;
    if let Some(text) = &output.ref_file {
        let path = files.sibling("ref");
        fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))?;
    }
    Ok(output)
}

fn cmd_weave(args: &WeaveArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let files = ProtocolFiles::locate(&args.files)?;
    let cfg = layout_for(args);
    let mode = if args.html { Mode::Html } else { Mode::Plain };
    let mut output = weave_once(&files, &cfg, mode)?;
    if args.auto && !output.final_pass {
        cmd_refsort(&files.sibling("ref"), &files.sibling("sref"), &files.program)?;
        output = weave_once(&files, &cfg, mode)?;
    }
    let target = args.output.clone().unwrap_or_else(|| files.sibling(if args.html { "html" } else { "txt" }));
    fs::write(&target, output.document(mode, &files.program))
        .with_context(|| format!("cannot write {}", target.display()))?;
    if args.debug_minis {
        out.write_all(dump_debug_minis(&output.minis, &files.program).as_bytes())?;
    }
    for w in &output.warnings {
        writeln!(err, "warning: {w}")?;
    }
    let pass = if output.final_pass { "final" } else { "preview" };
    writeln!(err, "{}: {} spreads ({pass}) written to {}", files.program, output.pages.len(), target.display())?;
    Ok(if output.warnings.is_empty() { EXIT_OK } else { EXIT_WARNINGS })
}

fn cmd_refsort(input: &Path, output: &Path, program: &str) -> Result<()> {
    let text = read(input)?;
    let parsed = parse_ref(&text, program).with_context(|| input.display().to_string())?;
    let sorted = serialize_sref(&sort_ref(&parsed, program), program);
    fs::write(output, sorted).with_context(|| format!("cannot write {}", output.display()))
}
