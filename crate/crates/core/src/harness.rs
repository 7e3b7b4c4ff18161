//! Synthetic corpora and the checks that run on them.
//!
//! [`generate_corpus`] draws unit sequences with geometric run lengths and
//! jittered target lengths. [`run_table3_style`] regulates every sequence
//! under each mode and scores the realized lengths against the targets.
//! [`oracle_bound_check`] and [`fuzz_lengthreg`] compare the bounded
//! regulator with a separate, deliberately naive implementation.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lengthreg::{self, RegulationMode};
use crate::metrics::{self, EvalReport, LengthPairs};
use crate::schedule::{self, RefPolicy};
use crate::units::{self, OrigUnitSeq, UnitId};

/// Smallest accepted geometric success probability; keeps mean run length at or below 20 frames.
pub const MIN_DURATION_P: f64 = 0.05;

fn default_p() -> f64 {
    0.4
}

/// Parameters of a synthetic corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSpec {
    pub n_sequences: usize,
    /// Unit vocabulary size K.
    pub vocab_size: u32,
    /// Mean number of units per sequence; lengths are uniform on `1..=2*mean_len-1`.
    pub mean_len: usize,
    /// Success probability of the run-length distribution `1 + Geometric(p)`.
    #[serde(default = "default_p")]
    pub duration_p: f64,
    /// Targets are jittered uniformly within ± this percentage.
    #[serde(default)]
    pub jitter_percent: f64,
    /// Shift applied to every target before jitter, in percent (-5 draws targets 5% short).
    #[serde(default)]
    pub target_bias_percent: f64,
    #[serde(default)]
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn new(n_sequences: usize, vocab_size: u32, mean_len: usize, seed: u64) -> Self {
        Self {
            n_sequences,
            vocab_size,
            mean_len,
            duration_p: default_p(),
            jitter_percent: 0.0,
            target_bias_percent: 0.0,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidSpec(msg));
        if self.n_sequences == 0 {
            return fail("n_sequences must be positive".into());
        }
        if self.vocab_size < 2 {
            return fail("vocab_size must be at least 2 so adjacent units can differ".into());
        }
        if self.mean_len == 0 {
            return fail("mean_len must be positive".into());
        }
        if !(self.duration_p >= MIN_DURATION_P && self.duration_p <= 1.0) {
            return fail(format!(
                "duration_p must lie in [{MIN_DURATION_P}, 1], got {}",
                self.duration_p
            ));
        }
        if !(self.jitter_percent >= 0.0 && self.jitter_percent < 100.0) {
            return fail(format!(
                "jitter_percent must lie in [0, 100), got {}",
                self.jitter_percent
            ));
        }
        let low = self.target_bias_percent - self.jitter_percent;
        if !(self.target_bias_percent.is_finite() && low > -100.0) {
            return fail(format!(
                "target_bias_percent {} with jitter {} can produce non-positive targets",
                self.target_bias_percent, self.jitter_percent
            ));
        }
        Ok(())
    }
}

/// One synthetic utterance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusEntry {
    pub units: OrigUnitSeq,
    pub durations: Vec<usize>,
    pub target: usize,
}

impl CorpusEntry {
    pub fn natural_len(&self) -> usize {
        self.durations.iter().sum()
    }
}

/// `1 + Geometric(p)` by inversion.
fn sample_run_length(rng: &mut ChaCha8Rng, p: f64) -> usize {
    if p >= 1.0 {
        return 1;
    }
    // u in (0, 1]
    let u: f64 = 1.0 - rng.gen::<f64>();
    1 + (u.ln() / (1.0 - p).ln()).floor() as usize
}

pub fn generate_corpus(spec: &SyntheticSpec) -> Result<Vec<CorpusEntry>> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let max_len = 2 * spec.mean_len - 1;
    let mut corpus = Vec::with_capacity(spec.n_sequences);
    for _ in 0..spec.n_sequences {
        let len = rng.gen_range(1..=max_len);
        let mut seq: Vec<UnitId> = Vec::with_capacity(len);
        for _ in 0..len {
            let next = match seq.last() {
                None => rng.gen_range(0..spec.vocab_size),
                Some(&prev) => {
                    // uniform over the K-1 units that differ from prev
                    let u = rng.gen_range(0..spec.vocab_size - 1);
                    if u >= prev {
                        u + 1
                    } else {
                        u
                    }
                }
            };
            seq.push(next);
        }
        let durations: Vec<usize> = (0..len)
            .map(|_| sample_run_length(&mut rng, spec.duration_p))
            .collect();
        let natural: usize = durations.iter().sum();
        let jitter = if spec.jitter_percent > 0.0 {
            rng.gen_range(-spec.jitter_percent..=spec.jitter_percent)
        } else {
            0.0
        };
        let scale = 1.0 + (spec.target_bias_percent + jitter) / 100.0;
        let target = ((natural as f64 * scale).round() as usize).max(1);
        corpus.push(CorpusEntry {
            units: OrigUnitSeq::new(seq)?,
            durations,
            target,
        });
    }
    Ok(corpus)
}

/// Where the duration predictions fed to the regulators come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DurationSource {
    /// The corpus's own run lengths (a perfect predictor).
    #[default]
    Corpus,
    /// Per-unit means from a table fitted on the corpus.
    Table,
}

impl FromStr for DurationSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "corpus" => Ok(DurationSource::Corpus),
            "table" => Ok(DurationSource::Table),
            other => Err(Error::InvalidArgument(format!(
                "unknown duration source '{other}' (expected corpus or table)"
            ))),
        }
    }
}

impl fmt::Display for DurationSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DurationSource::Corpus => "corpus",
            DurationSource::Table => "table",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareOptions {
    pub source: DurationSource,
    pub lc_thresholds: Vec<f64>,
    /// Also score the realized frame streams against the corpus frame streams.
    pub bleu: bool,
}

impl Default for CompareOptions {
    fn default() -> Self {
        Self {
            source: DurationSource::Corpus,
            lc_thresholds: metrics::DEFAULT_LC_THRESHOLDS.to_vec(),
            bleu: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeReport {
    pub mode: RegulationMode,
    pub report: EvalReport,
}

/// Regulates the corpus under each mode and reports LR, LC@k and the
/// number of reference-frame repeats.
///
/// Each utterance's reference clip has `ceil(target / 2)` video frames.
/// Repeats count video frames that must reuse a reference frame when the
/// realized video runs longer, using the wrap policy.
pub fn run_table3_style(
    corpus: &[CorpusEntry],
    modes: &[RegulationMode],
    options: &CompareOptions,
) -> Result<Vec<ModeReport>> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let predictions: Vec<Vec<f64>> = match options.source {
        DurationSource::Corpus => corpus
            .iter()
            .map(|e| e.durations.iter().map(|&d| d as f64).collect())
            .collect(),
        DurationSource::Table => {
            let table =
                lengthreg::fit_duration_table(corpus.iter().map(|e| (&e.units, e.durations.as_slice())))?;
            corpus
                .iter()
                .map(|e| lengthreg::predict_durations(&table, &e.units))
                .collect()
        }
    };

    modes
        .iter()
        .map(|&mode| {
            let realized: Vec<Vec<usize>> = corpus
                .par_iter()
                .zip(&predictions)
                .enumerate()
                .map(|(i, (entry, d))| {
                    lengthreg::regulate(mode, d, entry.target).map_err(|e| e.at_line(i + 1))
                })
                .collect::<Result<_>>()?;

            let mut pairs = Vec::with_capacity(corpus.len());
            let mut repeats = 0;
            for (entry, r) in corpus.iter().zip(&realized) {
                let len: usize = r.iter().sum();
                pairs.push((len, entry.target));
                let n_video = schedule::video_frames_for(len);
                let n_ref = schedule::video_frames_for(entry.target);
                repeats += schedule::assign_reference_frames(n_video, n_ref, RefPolicy::Wrap)?.1;
            }
            let mut report = EvalReport::from_lengths(&LengthPairs::new(pairs)?, &options.lc_thresholds)?;
            report.repeats = Some(repeats);
            if options.bleu {
                let (hyps, refs): (Vec<Vec<UnitId>>, Vec<Vec<UnitId>>) = corpus
                    .par_iter()
                    .zip(&realized)
                    .map(|(entry, r)| {
                        let hyp = units::expand(&entry.units, r)?.into_units();
                        let reference = units::expand(&entry.units, &entry.durations)?.into_units();
                        Ok((hyp, reference))
                    })
                    .collect::<Result<Vec<_>>>()?
                    .into_iter()
                    .unzip();
                report.bleu = Some(metrics::corpus_bleu(&hyps, &refs)?);
            }
            Ok(ModeReport { mode, report })
        })
        .collect()
}

/// `{"<mode>": <report>, ...}` in the order given.
pub fn reports_to_json(reports: &[ModeReport]) -> String {
    let mut s = String::from("{");
    for (i, r) in reports.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        s.push('"');
        s.push_str(r.mode.name());
        s.push_str("\":");
        r.report.write_json(&mut s);
    }
    s.push('}');
    s
}

/// Straightforward bounded regulator used as a cross-check.
///
/// Shares only the arithmetic of the normalization with
/// [`lengthreg::bound_durations`]; rounding and the frame-repair loop are
/// written independently (one linear scan per adjusted frame).
pub fn reference_bound(d: &[f64], target: usize) -> std::result::Result<Vec<usize>, &'static str> {
    if d.is_empty() {
        return Err("EmptyInput");
    }
    if d.iter().any(|x| !x.is_finite()) {
        return Err("NonFiniteInput");
    }
    if d.iter().any(|&x| x <= 0.0) {
        return Err("NonPositiveDuration");
    }
    if target == 0 {
        return Err("NonPositiveTarget");
    }

    let mut total = 0.0;
    for &x in d {
        total += x;
    }
    let t = target as f64;
    let mut scaled = Vec::new();
    for &x in d {
        scaled.push(x * t / total);
    }

    let mut pred: Vec<i64> = Vec::new();
    for &x in &scaled {
        let whole = x.floor();
        let rounded = if x - whole >= 0.5 { whole + 1.0 } else { whole };
        let mut r = rounded as i64;
        if r < 1 {
            r = 1;
        }
        pred.push(r);
    }
    let mut diff = Vec::new();
    for i in 0..d.len() {
        diff.push(scaled[i] - pred[i] as f64);
    }

    let sum: i64 = pred.iter().sum();
    let goal = target as i64;
    let mut touched = vec![false; d.len()];
    let (steps, delta): (i64, i64) = if sum > goal {
        (sum - goal, -1)
    } else {
        (goal - sum, 1)
    };
    for _ in 0..steps {
        let mut pick: Option<usize> = None;
        for i in 0..d.len() {
            if touched[i] {
                continue;
            }
            pick = match pick {
                None => Some(i),
                Some(j) => {
                    let better = if delta < 0 {
                        diff[i] < diff[j]
                    } else {
                        diff[i] > diff[j]
                    };
                    if better {
                        Some(i)
                    } else {
                        Some(j)
                    }
                }
            };
        }
        let Some(i) = pick else {
            return Err("InfeasibleAdjustment");
        };
        touched[i] = true;
        pred[i] += delta;
    }
    Ok(pred.into_iter().map(|p| p as usize).collect())
}

/// First disagreement between the two bounded regulators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Divergence {
    Value {
        index: usize,
        reference: usize,
        fast: usize,
    },
    Length {
        reference: usize,
        fast: usize,
    },
    Error {
        reference: String,
        fast: String,
    },
}

impl fmt::Display for Divergence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Divergence::Value {
                index,
                reference,
                fast,
            } => {
                write!(f, "index {index}: reference {reference}, regulator {fast}")
            }
            Divergence::Length { reference, fast } => {
                write!(
                    f,
                    "output lengths differ: reference {reference}, regulator {fast}"
                )
            }
            Divergence::Error { reference, fast } => {
                write!(f, "outcomes differ: reference {reference}, regulator {fast}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleOutcome {
    pub durations: Option<Vec<usize>>,
    pub divergence: Option<Divergence>,
}

impl OracleOutcome {
    pub fn passed(&self) -> bool {
        self.divergence.is_none()
    }
}

/// Runs both bounded regulators on `(d, target)` and reports the first
/// divergent index, if any. Matching errors count as agreement.
pub fn oracle_bound_check(d: &[f64], target: usize) -> OracleOutcome {
    let fast = lengthreg::bound_durations(d, target).map(|a| a.into_durations());
    let reference = reference_bound(d, target);
    match (reference, fast) {
        (Ok(r), Ok(f)) => {
            let divergence = if r.len() != f.len() {
                Some(Divergence::Length {
                    reference: r.len(),
                    fast: f.len(),
                })
            } else {
                r.iter()
                    .zip(&f)
                    .position(|(a, b)| a != b)
                    .map(|index| Divergence::Value {
                        index,
                        reference: r[index],
                        fast: f[index],
                    })
            };
            OracleOutcome {
                durations: Some(f),
                divergence,
            }
        }
        (Err(r), Err(f)) if r == f.kind() => OracleOutcome {
            durations: None,
            divergence: None,
        },
        (r, f) => OracleOutcome {
            durations: None,
            divergence: Some(Divergence::Error {
                reference: match r {
                    Ok(v) => format!("{v:?}"),
                    Err(e) => e.to_string(),
                },
                fast: match f {
                    Ok(v) => format!("{v:?}"),
                    Err(e) => e.kind().to_string(),
                },
            }),
        },
    }
}

/// Results of a randomized campaign against the bounded regulator.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct FuzzSummary {
    pub instances: usize,
    pub divergences: usize,
    pub sum_violations: usize,
    pub stability_violations: usize,
    pub scale_violations: usize,
    pub first_failure: Option<String>,
}

impl FuzzSummary {
    pub fn clean(&self) -> bool {
        self.divergences == 0
            && self.sum_violations == 0
            && self.stability_violations == 0
            && self.scale_violations == 0
    }
}

/// A fuzz instance: durations, target and an exactly representable scale factor.
#[derive(Debug, Clone, PartialEq)]
pub struct FuzzInstance {
    pub durations: Vec<f64>,
    pub target: usize,
    pub scale: f64,
}

/// Instance `index` of the campaign seeded with `seed`. Instances are
/// independent of each other and of evaluation order.
pub fn fuzz_instance(seed: u64, index: u64, max_n: usize, max_t: usize) -> FuzzInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let n = rng.gen_range(1..=max_n.max(1));
    let target = rng.gen_range(1..=max_t.max(1));
    let shape = rng.gen_range(0..5u8);
    let (durations, dyadic): (Vec<f64>, bool) = match shape {
        // quarter-frame grid, the common case for table predictions
        0 => (
            (0..n).map(|_| rng.gen_range(1..=64u32) as f64 / 4.0).collect(),
            true,
        ),
        // every duration equal: all residuals tie
        1 => {
            let v = rng.gen_range(1..=32u32) as f64 / 4.0;
            (vec![v; n], true)
        }
        // integer run lengths
        2 => ((0..n).map(|_| rng.gen_range(1..=20u32) as f64).collect(), true),
        // tiny predictions, many units collapse to the one-frame clamp
        3 => ((0..n).map(|_| rng.gen_range(0.01..0.6)).collect(), false),
        _ => ((0..n).map(|_| rng.gen_range(0.05..25.0)).collect(), false),
    };
    let exp = rng.gen_range(-6..=6);
    let scale = if dyadic {
        rng.gen_range(1..=40u32) as f64 * 2f64.powi(exp)
    } else {
        2f64.powi(exp)
    };
    FuzzInstance {
        durations,
        target,
        scale,
    }
}

/// Checks the oracle agreement, sum exactness, per-index stability and
/// scale invariance of [`lengthreg::bound_durations`] on `instances`
/// random inputs with at most `max_n` units and targets up to `max_t`.
pub fn fuzz_lengthreg(instances: usize, max_n: usize, max_t: usize, seed: u64) -> FuzzSummary {
    let results: Vec<(usize, [bool; 4], Option<String>)> = (0..instances)
        .into_par_iter()
        .map(|i| {
            let inst = fuzz_instance(seed, i as u64, max_n, max_t);
            let mut flags = [false; 4];
            let mut note = None;

            let outcome = oracle_bound_check(&inst.durations, inst.target);
            if let Some(div) = &outcome.divergence {
                flags[0] = true;
                note = Some(format!("instance {i}: {div}"));
            }
            if let Ok(out) = lengthreg::bound_durations(&inst.durations, inst.target) {
                let out = out.into_durations();
                if out.iter().sum::<usize>() != inst.target {
                    flags[1] = true;
                    note.get_or_insert_with(|| format!("instance {i}: sum differs from target"));
                }
                let dprime =
                    lengthreg::allocate_proportional(&inst.durations, inst.target).expect("bound succeeded");
                let stable = out.iter().zip(&dprime).all(|(&r, &x)| {
                    let pred = lengthreg::natural_frames(x);
                    r + 1 >= pred && r <= pred + 1
                });
                if !stable {
                    flags[2] = true;
                    note.get_or_insert_with(|| format!("instance {i}: moved more than one frame"));
                }
                let scaled: Vec<f64> = inst.durations.iter().map(|&x| x * inst.scale).collect();
                let rescaled = lengthreg::bound_durations(&scaled, inst.target).map(|a| a.into_durations());
                if rescaled.as_ref().ok() != Some(&out) {
                    flags[3] = true;
                    note.get_or_insert_with(|| {
                        format!("instance {i}: not invariant under scale {}", inst.scale)
                    });
                }
            }
            (i, flags, note)
        })
        .collect();

    let mut summary = FuzzSummary {
        instances,
        ..FuzzSummary::default()
    };
    for (_, flags, note) in results {
        summary.divergences += flags[0] as usize;
        summary.sum_violations += flags[1] as usize;
        summary.stability_violations += flags[2] as usize;
        summary.scale_violations += flags[3] as usize;
        if summary.first_failure.is_none() {
            summary.first_failure = note;
        }
    }
    summary
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(n: usize, k: u32, mean_len: usize, seed: u64) -> SyntheticSpec {
        SyntheticSpec::new(n, k, mean_len, seed)
    }

    #[test]
    fn zero_jitter_targets_equal_natural_length() {
        let corpus = generate_corpus(&spec(50, 20, 10, 1)).unwrap();
        assert!(corpus.iter().all(|e| e.target == e.natural_len()));
        assert!(corpus.iter().all(|e| e.durations.iter().all(|&d| d >= 1)));
    }

    #[test]
    fn generation_is_seed_deterministic() {
        let mut s = spec(40, 30, 12, 9);
        s.jitter_percent = 15.0;
        assert_eq!(generate_corpus(&s).unwrap(), generate_corpus(&s).unwrap());
        let mut other = s.clone();
        other.seed = 10;
        assert_ne!(generate_corpus(&s).unwrap(), generate_corpus(&other).unwrap());
    }

    #[test]
    fn mean_length_near_spec() {
        let corpus = generate_corpus(&spec(100, 50, 20, 7)).unwrap();
        let mean = corpus.iter().map(|e| e.units.len()).sum::<usize>() as f64 / 100.0;
        assert!((mean - 20.0).abs() <= 4.0, "mean length {mean}");
    }

    #[test]
    fn jitter_stays_in_band() {
        let mut s = spec(500, 10, 15, 3);
        s.jitter_percent = 20.0;
        for e in generate_corpus(&s).unwrap() {
            let n = e.natural_len() as f64;
            assert!((e.target as f64) >= (0.8 * n).round().max(1.0));
            assert!((e.target as f64) <= (1.2 * n).round());
        }
    }

    #[test]
    fn invalid_specs() {
        assert!(matches!(
            generate_corpus(&spec(0, 5, 5, 0)),
            Err(Error::InvalidSpec(_))
        ));
        assert!(matches!(
            generate_corpus(&spec(5, 1, 5, 0)),
            Err(Error::InvalidSpec(_))
        ));
        assert!(matches!(
            generate_corpus(&spec(5, 5, 0, 0)),
            Err(Error::InvalidSpec(_))
        ));
        let mut s = spec(5, 5, 5, 0);
        s.duration_p = 0.01;
        assert!(generate_corpus(&s).is_err());
        let mut s = spec(5, 5, 5, 0);
        s.target_bias_percent = -90.0;
        s.jitter_percent = 15.0;
        assert!(generate_corpus(&s).is_err());
        let json = r#"{"n_sequences":3,"vocab_size":4,"mean_len":2,"colour":"red"}"#;
        assert!(serde_json::from_str::<SyntheticSpec>(json).is_err());
    }

    #[test]
    fn bounded_mode_is_isometric() {
        let mut s = spec(300, 40, 12, 11);
        s.jitter_percent = 20.0;
        let corpus = generate_corpus(&s).unwrap();
        let reports = run_table3_style(&corpus, &RegulationMode::ALL, &CompareOptions::default()).unwrap();
        let bounded = &reports[0].report;
        assert_eq!(bounded.lr, 1.0);
        assert!(bounded.lc.iter().all(|&(_, v)| v == 100.0));
        assert_eq!(bounded.repeats, Some(0));
        assert!(reports[1].report.lr < 1.0);
    }

    #[test]
    fn table3_short_targets_and_identity() {
        // every target at or below its natural length: early stop lands exactly on it
        let mut s = spec(200, 40, 12, 5);
        s.target_bias_percent = -5.0;
        let corpus = generate_corpus(&s).unwrap();
        let r = run_table3_style(&corpus, &[RegulationMode::EarlyStop], &CompareOptions::default()).unwrap();
        assert_eq!(r[0].report.lr, 1.0);
        assert!(r[0].report.repeats == Some(0));

        // with jitter some targets exceed the natural length and stay unfilled
        s.jitter_percent = 20.0;
        let corpus = generate_corpus(&s).unwrap();
        let r = run_table3_style(&corpus, &[RegulationMode::EarlyStop], &CompareOptions::default()).unwrap();
        assert!(r[0].report.lr < 1.0);

        let corpus = generate_corpus(&spec(200, 40, 12, 5)).unwrap();
        let options = CompareOptions {
            bleu: true,
            ..CompareOptions::default()
        };
        let r = run_table3_style(&corpus, &[RegulationMode::Unbounded], &options).unwrap();
        assert_eq!(r[0].report.lr, 1.0);
        assert_eq!(r[0].report.bleu, Some(100.0));
    }

    #[test]
    fn table3_with_table_predictor_keeps_isometry() {
        let mut s = spec(200, 30, 10, 2);
        s.jitter_percent = 10.0;
        let corpus = generate_corpus(&s).unwrap();
        let options = CompareOptions {
            source: DurationSource::Table,
            ..CompareOptions::default()
        };
        let r = run_table3_style(&corpus, &[RegulationMode::Bounded], &options).unwrap();
        assert_eq!(r[0].report.lr, 1.0);
    }

    #[test]
    fn reports_json_keys_follow_mode_order() {
        let corpus = generate_corpus(&spec(10, 5, 4, 0)).unwrap();
        let modes = [RegulationMode::EarlyStop, RegulationMode::Bounded];
        let json = reports_to_json(&run_table3_style(&corpus, &modes, &CompareOptions::default()).unwrap());
        assert!(json.starts_with(r#"{"early_stop":{"lr":1.000"#), "{json}");
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["bounded"]["lc"]["20"], 100.0);
    }

    #[test]
    fn oracle_worked_example_and_ties() {
        // the same residual on every entry stresses the lowest-index rule on both sides
        for (d, t) in [
            (vec![2.2, 1.8, 2.3, 2.7], 10),
            (vec![1.0; 9], 4),
            (vec![3.0; 5], 7),
            (vec![1.0; 5], 13),
        ] {
            let out = oracle_bound_check(&d, t);
            assert!(out.passed(), "{d:?} {t}: {:?}", out.divergence);
        }
        assert_eq!(
            oracle_bound_check(&[2.2, 1.8, 2.3, 2.7], 10).durations,
            Some(vec![2, 2, 3, 3])
        );
    }

    #[test]
    fn oracle_agrees_on_errors() {
        assert!(oracle_bound_check(&[], 3).passed());
        assert!(oracle_bound_check(&[1.0, 0.0], 3).passed());
        assert!(oracle_bound_check(&[1.0], 0).passed());
    }

    #[test]
    fn reference_bound_is_naive_but_right() {
        assert_eq!(reference_bound(&[0.2, 9.8], 10), Ok(vec![0, 10]));
        assert_eq!(reference_bound(&[1.0, 1.0, 1.0], 3), Ok(vec![1, 1, 1]));
    }

    #[test]
    fn small_fuzz_campaign_is_clean() {
        let summary = fuzz_lengthreg(500, 64, 512, 1);
        assert!(summary.clean(), "{summary:?}");
        assert_eq!(summary, fuzz_lengthreg(500, 64, 512, 1));
    }
}
