//! Command-line front end.
//!
//! Exit codes: 0 success, 2 I/O failure, 3 invalid input or data.
//! Every command computes all of its outputs before writing any of them,
//! and writes each through a temporary file.

use std::ffi::OsString;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::harness::{self, CompareOptions, DurationSource, SyntheticSpec};
use crate::io;
use crate::lengthreg::{self, DurationTable, RegulationMode};
use crate::metrics::{self, EvalReport, LengthPairs};
use crate::quantize;
use crate::schedule::{self, RefPolicy};
use crate::units::{self, ContinuousUnitSeq, OrigUnitSeq, UnitId};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 2;
pub const EXIT_INVALID: i32 = 3;

/// Discrete speech-unit toolkit.
#[derive(Debug, Parser)]
#[command(name = "unitkit", version, about)]
pub struct RunConfig {
    /// Seed for every random choice (k-means seeding, synthetic corpora).
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Suppress informational output on stdout.
    #[arg(long, global = true)]
    pub quiet: bool,

    /// Reject unit ids outside 0..VOCAB when reading unit files.
    #[arg(long, global = true, value_name = "K")]
    pub vocab: Option<u32>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a k-means codebook on a feature file and write the unit sequence.
    Quantize(QuantizeArgs),
    /// Collapse frame-level units into deduplicated units and run lengths.
    Dedup(DedupArgs),
    /// Expand deduplicated units by integer durations.
    Expand(ExpandArgs),
    /// Fit a per-unit mean duration table.
    FitDurations(FitDurationsArgs),
    /// Realize integer durations under a length-control mode.
    Regulate(RegulateArgs),
    /// Build 20 ms audio / 40 ms video timelines with reference frames.
    Timeline(TimelineArgs),
    /// Score predictions against references: LR, LC@k and BLEU.
    Report(ReportArgs),
    /// Generate a synthetic corpus and compare length-control modes.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
pub struct QuantizeArgs {
    #[arg(long)]
    pub features: PathBuf,
    #[arg(long)]
    pub k: usize,
    #[arg(long, default_value_t = 100)]
    pub iters: usize,
    #[arg(long)]
    pub out_codebook: PathBuf,
    #[arg(long)]
    pub out_units: PathBuf,
}

#[derive(Debug, Args)]
pub struct DedupArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out_units: PathBuf,
    #[arg(long)]
    pub out_durations: PathBuf,
}

#[derive(Debug, Args)]
pub struct ExpandArgs {
    #[arg(long)]
    pub units: PathBuf,
    #[arg(long)]
    pub durations: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct FitDurationsArgs {
    #[arg(long)]
    pub units: PathBuf,
    #[arg(long)]
    pub durations: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct RegulateArgs {
    #[arg(long)]
    pub units: PathBuf,
    /// Predicted durations, one line per unit line.
    #[arg(long, conflicts_with = "table", required_unless_present = "table")]
    pub durations: Option<PathBuf>,
    /// Duration table from `fit-durations`, used instead of --durations.
    #[arg(long)]
    pub table: Option<PathBuf>,
    /// Target frame count per line; not needed for unbounded.
    #[arg(long)]
    pub targets: Option<PathBuf>,
    #[arg(long, value_parser = parse_mode)]
    pub mode: RegulationMode,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TimelineArgs {
    /// Frame-level units, one sequence per line.
    #[arg(long)]
    pub units: PathBuf,
    /// Reference frames available to every line.
    #[arg(long, conflicts_with = "n_ref_file")]
    pub n_ref: Option<usize>,
    /// Reference frame count per line.
    #[arg(long)]
    pub n_ref_file: Option<PathBuf>,
    #[arg(long, default_value = "one_to_one", value_parser = parse_policy)]
    pub policy: RefPolicy,
    /// JSON lines output, one timeline per input line.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Predicted unit sequences.
    #[arg(long)]
    pub pred: PathBuf,
    /// Reference unit sequences (enables BLEU).
    #[arg(
        long = "ref",
        conflicts_with = "ref_lengths",
        required_unless_present = "ref_lengths"
    )]
    pub reference: Option<PathBuf>,
    /// Reference lengths, one per line.
    #[arg(long)]
    pub ref_lengths: Option<PathBuf>,
    /// LC@k thresholds in percent.
    #[arg(long, value_delimiter = ',', default_values_t = metrics::DEFAULT_LC_THRESHOLDS)]
    pub lc: Vec<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// JSON corpus spec.
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "bounded,early_stop,unbounded", value_parser = parse_mode)]
    pub modes: Vec<RegulationMode>,
    /// Duration predictions: the corpus's own run lengths, or a fitted table.
    #[arg(long, default_value = "corpus", value_parser = parse_source)]
    pub predictor: DurationSource,
    #[arg(long, value_delimiter = ',', default_values_t = metrics::DEFAULT_LC_THRESHOLDS)]
    pub lc: Vec<f64>,
    /// Also compute BLEU of realized frame streams against the corpus streams.
    #[arg(long)]
    pub bleu: bool,
    #[arg(long)]
    pub out: PathBuf,
}

fn parse_mode(s: &str) -> std::result::Result<RegulationMode, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_policy(s: &str) -> std::result::Result<RefPolicy, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_source(s: &str) -> std::result::Result<DurationSource, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Exit code for an error: 2 for I/O, 3 for everything else.
pub fn exit_code(err: &Error) -> i32 {
    if err.is_io() {
        EXIT_IO
    } else {
        EXIT_INVALID
    }
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit code. Diagnostics go to stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = match RunConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    match execute(&config) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {}: {e}", e.kind());
            exit_code(&e)
        }
    }
}

pub fn execute(config: &RunConfig) -> Result<()> {
    let ctx = Context {
        seed: config.seed,
        quiet: config.quiet,
        vocab: config.vocab,
    };
    match &config.command {
        Command::Quantize(a) => cmd_quantize(&ctx, a),
        Command::Dedup(a) => cmd_dedup(&ctx, a),
        Command::Expand(a) => cmd_expand(&ctx, a),
        Command::FitDurations(a) => cmd_fit_durations(&ctx, a),
        Command::Regulate(a) => cmd_regulate(&ctx, a),
        Command::Timeline(a) => cmd_timeline(&ctx, a),
        Command::Report(a) => cmd_report(&ctx, a),
        Command::Simulate(a) => cmd_simulate(&ctx, a),
    }
}

struct Context {
    seed: Option<u64>,
    quiet: bool,
    vocab: Option<u32>,
}

impl Context {
    fn say(&self, msg: std::fmt::Arguments<'_>) {
        if !self.quiet {
            let mut out = std::io::stdout().lock();
            let _ = writeln!(out, "{msg}");
        }
    }

    fn read_units(&self, path: &Path) -> Result<Vec<Vec<UnitId>>> {
        let lines = io::read_unit_file(path)?;
        if let Some(k) = self.vocab {
            for (i, line) in lines.iter().enumerate() {
                ContinuousUnitSeq::new(line.clone())
                    .validate_vocab(k)
                    .map_err(|e| e.at_line(i + 1))?;
            }
        }
        Ok(lines)
    }

    fn read_orig_units(&self, path: &Path) -> Result<Vec<OrigUnitSeq>> {
        self.read_units(path)?
            .into_iter()
            .enumerate()
            .map(|(i, u)| OrigUnitSeq::new(u).map_err(|e| e.at_line(i + 1)))
            .collect()
    }
}

/// Persists several outputs only after all of them are staged.
fn write_outputs(outputs: &[(&Path, Vec<u8>)]) -> Result<()> {
    let mut staged = Vec::with_capacity(outputs.len());
    for (path, bytes) in outputs {
        let dir = match path.parent() {
            Some(p) if !p.as_os_str().is_empty() => p,
            _ => Path::new("."),
        };
        let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
        tmp.write_all(bytes)?;
        tmp.as_file().sync_all()?;
        staged.push((tmp, *path));
    }
    for (tmp, path) in staged {
        tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    }
    Ok(())
}

fn check_counts(what: &str, expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::InvalidArgument(format!(
            "{what} has {got} lines, expected {expected}"
        )));
    }
    Ok(())
}

fn cmd_quantize(ctx: &Context, a: &QuantizeArgs) -> Result<()> {
    let x = io::read_features(&a.features)?;
    let fit = quantize::kmeans_fit(&x, a.k, a.iters, ctx.seed.unwrap_or(0))?;
    let units = vec![fit.assignments.clone()];
    write_outputs(&[
        (a.out_codebook.as_path(), io::encode_codebook(&fit.codebook)?),
        (a.out_units.as_path(), io::format_lines(&units).into_bytes()),
    ])?;
    ctx.say(format_args!("wcss {}", fit.wcss()));
    Ok(())
}

fn cmd_dedup(ctx: &Context, a: &DedupArgs) -> Result<()> {
    let lines = ctx.read_units(&a.input)?;
    let (units, durations): (Vec<Vec<UnitId>>, Vec<Vec<usize>>) = lines
        .into_iter()
        .map(|z| {
            let (u, d) = units::collapse(&ContinuousUnitSeq::new(z));
            (u.into_units(), d)
        })
        .unzip();
    write_outputs(&[
        (a.out_units.as_path(), io::format_lines(&units).into_bytes()),
        (
            a.out_durations.as_path(),
            io::format_lines(&durations).into_bytes(),
        ),
    ])?;
    ctx.say(format_args!("{} sequences", units.len()));
    Ok(())
}

fn cmd_expand(ctx: &Context, a: &ExpandArgs) -> Result<()> {
    let units = ctx.read_orig_units(&a.units)?;
    let durations = io::read_int_duration_file(&a.durations)?;
    check_counts("durations file", units.len(), durations.len())?;
    let frames = units
        .iter()
        .zip(&durations)
        .enumerate()
        .map(|(i, (u, d))| {
            units::expand(u, d)
                .map(ContinuousUnitSeq::into_units)
                .map_err(|e| e.at_line(i + 1))
        })
        .collect::<Result<Vec<_>>>()?;
    write_outputs(&[(a.out.as_path(), io::format_lines(&frames).into_bytes())])
}

fn cmd_fit_durations(ctx: &Context, a: &FitDurationsArgs) -> Result<()> {
    let units = ctx.read_orig_units(&a.units)?;
    let durations = io::read_int_duration_file(&a.durations)?;
    check_counts("durations file", units.len(), durations.len())?;
    let table = lengthreg::fit_duration_table(units.iter().zip(durations.iter().map(Vec::as_slice)))?;
    let mut json = serde_json::to_string_pretty(&table).map_err(|e| Error::Format(e.to_string()))?;
    json.push('\n');
    write_outputs(&[(a.out.as_path(), json.into_bytes())])?;
    ctx.say(format_args!(
        "{} units, fallback {}",
        table.mean_duration().len(),
        table.fallback()
    ));
    Ok(())
}

pub fn read_duration_table(path: &Path) -> Result<DurationTable> {
    let text = fs::read_to_string(path)?;
    let table: DurationTable = serde_json::from_str(&text).map_err(|e| Error::Format(e.to_string()))?;
    table.validate()?;
    Ok(table)
}

fn cmd_regulate(ctx: &Context, a: &RegulateArgs) -> Result<()> {
    let units = ctx.read_orig_units(&a.units)?;
    let predictions: Vec<Vec<f64>> = match (&a.durations, &a.table) {
        (Some(path), _) => {
            let d = io::read_real_duration_file(path)?;
            check_counts("durations file", units.len(), d.len())?;
            d
        }
        (None, Some(path)) => {
            let table = read_duration_table(path)?;
            units
                .iter()
                .map(|u| lengthreg::predict_durations(&table, u))
                .collect()
        }
        (None, None) => return Err(Error::InvalidArgument("need --durations or --table".into())),
    };
    let targets = match (&a.targets, a.mode) {
        (Some(path), _) => {
            let t = io::read_lengths_file(path)?;
            check_counts("targets file", units.len(), t.len())?;
            t
        }
        (None, RegulationMode::Unbounded) => vec![1; units.len()],
        (None, mode) => {
            return Err(Error::InvalidArgument(format!(
                "--targets is required for mode {mode}"
            )))
        }
    };

    let realized = units
        .iter()
        .zip(&predictions)
        .zip(&targets)
        .enumerate()
        .map(|(i, ((u, d), &t))| {
            if u.len() != d.len() {
                return Err(Error::LengthMismatch {
                    left: u.len(),
                    right: d.len(),
                }
                .at_line(i + 1));
            }
            lengthreg::regulate(a.mode, d, t).map_err(|e| e.at_line(i + 1))
        })
        .collect::<Result<Vec<_>>>()?;
    write_outputs(&[(a.out.as_path(), io::format_lines(&realized).into_bytes())])?;
    ctx.say(format_args!(
        "{} sequences regulated ({})",
        realized.len(),
        a.mode
    ));
    Ok(())
}

fn cmd_timeline(ctx: &Context, a: &TimelineArgs) -> Result<()> {
    let lines = ctx.read_units(&a.units)?;
    let n_refs: Option<Vec<usize>> = match (&a.n_ref, &a.n_ref_file) {
        (Some(n), _) => Some(vec![*n; lines.len()]),
        (None, Some(path)) => {
            let v = io::read_lengths_file(path)?;
            check_counts("reference count file", lines.len(), v.len())?;
            Some(v)
        }
        (None, None) => None,
    };

    let mut out = String::new();
    let mut repeats = 0;
    for (i, z) in lines.into_iter().enumerate() {
        let z = ContinuousUnitSeq::new(z);
        let timeline = match &n_refs {
            Some(n) => {
                let (t, r) = schedule::schedule(&z, n[i], a.policy).map_err(|e| e.at_line(i + 1))?;
                repeats += r;
                t
            }
            None => schedule::build_timeline(&z).map_err(|e| e.at_line(i + 1))?,
        };
        out.push_str(&serde_json::to_string(&timeline).map_err(|e| Error::Format(e.to_string()))?);
        out.push('\n');
    }
    write_outputs(&[(a.out.as_path(), out.into_bytes())])?;
    if n_refs.is_some() {
        ctx.say(format_args!("repeats {repeats}"));
    }
    Ok(())
}

fn cmd_report(ctx: &Context, a: &ReportArgs) -> Result<()> {
    let pred = ctx.read_units(&a.pred)?;
    let (ref_lengths, references) = match (&a.reference, &a.ref_lengths) {
        (Some(path), _) => {
            let r = ctx.read_units(path)?;
            (r.iter().map(Vec::len).collect::<Vec<_>>(), Some(r))
        }
        (None, Some(path)) => (io::read_lengths_file(path)?, None),
        (None, None) => return Err(Error::InvalidArgument("need --ref or --ref-lengths".into())),
    };
    check_counts("reference file", pred.len(), ref_lengths.len())?;
    let pairs = pred.iter().map(Vec::len).zip(ref_lengths).collect();
    let mut report = EvalReport::from_lengths(&LengthPairs::new(pairs)?, &a.lc)?;
    if let Some(refs) = references {
        report.bleu = Some(metrics::corpus_bleu(&pred, &refs)?);
    }
    let mut json = report.to_json();
    json.push('\n');
    write_outputs(&[(a.out.as_path(), json.into_bytes())])?;
    ctx.say(format_args!("{}", report.to_json()));
    Ok(())
}

fn cmd_simulate(ctx: &Context, a: &SimulateArgs) -> Result<()> {
    let text = fs::read_to_string(&a.spec)?;
    let mut spec: SyntheticSpec =
        serde_json::from_str(&text).map_err(|e| Error::InvalidSpec(e.to_string()))?;
    if let Some(seed) = ctx.seed {
        spec.seed = seed;
    }
    let corpus = harness::generate_corpus(&spec)?;
    let options = CompareOptions {
        source: a.predictor,
        lc_thresholds: a.lc.clone(),
        bleu: a.bleu,
    };
    let reports = harness::run_table3_style(&corpus, &a.modes, &options)?;
    let mut json = harness::reports_to_json(&reports);
    json.push('\n');
    write_outputs(&[(a.out.as_path(), json.into_bytes())])?;
    for r in &reports {
        ctx.say(format_args!("{:<10} {}", r.mode.name(), r.report.to_json()));
    }
    Ok(())
}
