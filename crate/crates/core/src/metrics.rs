//! Length metrics, corpus BLEU and the synthesizer loss terms.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// BLEU n-gram orders 1..=MAX_NGRAM.
pub const MAX_NGRAM: usize = 4;

/// Default LC@k thresholds, in percent.
pub const DEFAULT_LC_THRESHOLDS: [f64; 3] = [5.0, 10.0, 20.0];

pub const DEFAULT_LAMBDA_SYNC: f64 = 0.03;
pub const DEFAULT_LAMBDA_GEN: f64 = 0.07;

/// Clamp applied to discriminator outputs before taking logs.
pub const GAN_EPS: f64 = 1e-7;

/// Default floor on the sync similarity before the log.
pub const DEFAULT_SYNC_FLOOR: f64 = 1e-6;

/// (predicted, reference) lengths, both at least 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LengthPairs(Vec<(usize, usize)>);

impl LengthPairs {
    pub fn new(pairs: Vec<(usize, usize)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        if let Some(index) = pairs.iter().position(|&(p, r)| p == 0 || r == 0) {
            return Err(Error::InvalidLength { index });
        }
        Ok(Self(pairs))
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.0
    }
}

/// Mean of per-pair `predicted / reference` ratios.
pub fn length_ratio(c: &LengthPairs) -> f64 {
    let sum: f64 = c.0.iter().map(|&(p, r)| p as f64 / r as f64).sum();
    sum / c.0.len() as f64
}

/// Percentage of pairs with `|pred - ref| <= k% of ref`, boundary included.
pub fn length_compliance(c: &LengthPairs, k: f64) -> Result<f64> {
    if !(k.is_finite() && k > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "LC threshold must be positive, got {k}"
        )));
    }
    // 100 * |pred - ref| <= k * ref keeps integer-valued thresholds exact
    let ok =
        c.0.iter()
            .filter(|&&(p, r)| 100.0 * p.abs_diff(r) as f64 <= k * r as f64)
            .count();
    Ok(100.0 * ok as f64 / c.0.len() as f64)
}

fn ngram_counts<T: Eq + Hash>(tokens: &[T], n: usize) -> HashMap<&[T], usize> {
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for gram in tokens.windows(n) {
            *counts.entry(gram).or_insert(0) += 1;
        }
    }
    counts
}

/// Pooled n-gram statistics behind a corpus BLEU score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct BleuStats {
    pub correct: [usize; MAX_NGRAM],
    pub total: [usize; MAX_NGRAM],
    pub hyp_len: usize,
    pub ref_len: usize,
}

impl BleuStats {
    /// BLEU in [0, 100], no smoothing.
    pub fn score(&self) -> f64 {
        if self.hyp_len == 0 || self.correct.contains(&0) {
            return 0.0;
        }
        let log_mean = self
            .correct
            .iter()
            .zip(&self.total)
            .map(|(&c, &t)| (c as f64 / t as f64).ln())
            .sum::<f64>()
            / MAX_NGRAM as f64;
        let bp = if self.hyp_len < self.ref_len {
            (1.0 - self.ref_len as f64 / self.hyp_len as f64).exp()
        } else {
            1.0
        };
        100.0 * bp * log_mean.exp()
    }
}

pub fn bleu_stats<T: Eq + Hash>(hypotheses: &[Vec<T>], references: &[Vec<T>]) -> Result<BleuStats> {
    if hypotheses.len() != references.len() {
        return Err(Error::LengthMismatch {
            left: hypotheses.len(),
            right: references.len(),
        });
    }
    if hypotheses.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut stats = BleuStats::default();
    for (hyp, reference) in hypotheses.iter().zip(references) {
        stats.hyp_len += hyp.len();
        stats.ref_len += reference.len();
        for n in 1..=MAX_NGRAM {
            let ref_counts = ngram_counts(reference, n);
            for (gram, count) in ngram_counts(hyp, n) {
                stats.correct[n - 1] += count.min(ref_counts.get(gram).copied().unwrap_or(0));
            }
            stats.total[n - 1] += hyp.len().saturating_sub(n - 1);
        }
    }
    Ok(stats)
}

/// Corpus-level BLEU over pre-tokenized sentences, one reference each.
pub fn corpus_bleu<T: Eq + Hash>(hypotheses: &[Vec<T>], references: &[Vec<T>]) -> Result<f64> {
    bleu_stats(hypotheses, references).map(|s| s.score())
}

/// Visual and audio embeddings of the same clip.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingPair {
    visual: Vec<f64>,
    audio: Vec<f64>,
}

impl EmbeddingPair {
    pub fn new(visual: Vec<f64>, audio: Vec<f64>) -> Result<Self> {
        if visual.len() != audio.len() {
            return Err(Error::DimMismatch {
                expected: visual.len(),
                got: audio.len(),
            });
        }
        if visual.is_empty() {
            return Err(Error::EmptyInput);
        }
        if visual.iter().chain(&audio).any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteInput);
        }
        Ok(Self { visual, audio })
    }

    pub fn visual(&self) -> &[f64] {
        &self.visual
    }

    pub fn audio(&self) -> &[f64] {
        &self.audio
    }
}

/// Cosine similarity with the norm product floored at `eps`.
pub fn sync_similarity(p: &EmbeddingPair, eps: f64) -> f64 {
    let dot: f64 = p.visual.iter().zip(&p.audio).map(|(v, a)| v * a).sum();
    let norm = |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>().sqrt();
    dot / (norm(&p.visual) * norm(&p.audio)).max(eps)
}

/// Mean of `-ln(P_sync)`, with `P_sync` clamped into `[floor, 1]`.
pub fn sync_loss(pairs: &[EmbeddingPair], eps: f64, floor: f64) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::EmptyInput);
    }
    if !(floor > 0.0 && floor < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "sync floor must lie in (0, 1), got {floor}"
        )));
    }
    let total: f64 = pairs
        .iter()
        .map(|p| -sync_similarity(p, eps).clamp(floor, 1.0).ln())
        .sum();
    Ok(total / pairs.len() as f64)
}

/// Mean over frames of the L1 norm of `real - generated`.
pub fn lip_l1(real: &[Vec<f64>], generated: &[Vec<f64>]) -> Result<f64> {
    if real.len() != generated.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} real frames vs {} generated frames",
            real.len(),
            generated.len()
        )));
    }
    if real.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut total = 0.0;
    for (i, (r, g)) in real.iter().zip(generated).enumerate() {
        if r.len() != g.len() {
            return Err(Error::ShapeMismatch(format!(
                "frame {i}: {} real values vs {} generated values",
                r.len(),
                g.len()
            )));
        }
        total += r.iter().zip(g).map(|(a, b)| (a - b).abs()).sum::<f64>();
    }
    Ok(total / real.len() as f64)
}

/// Which discriminator objective [`gan_losses`] evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GanLossMode {
    /// `L_D = E_real log(1 - D) + E_gen log(1 - D)`, taken literally.
    AsWritten,
    /// `L_D = -(E_real log D + E_gen log(1 - D))`.
    #[default]
    Canonical,
}

/// Generator and discriminator adversarial losses.
///
/// Both modes use `L_G = E_gen log(1 - D(x))`. Probabilities are clamped
/// to `[GAN_EPS, 1 - GAN_EPS]`.
pub fn gan_losses(d_on_real: &[f64], d_on_gen: &[f64], mode: GanLossMode) -> Result<(f64, f64)> {
    if d_on_real.is_empty() || d_on_gen.is_empty() {
        return Err(Error::EmptyInput);
    }
    if d_on_real.iter().chain(d_on_gen).any(|p| !p.is_finite()) {
        return Err(Error::NonFiniteInput);
    }
    let clamp = |p: f64| p.clamp(GAN_EPS, 1.0 - GAN_EPS);
    let mean =
        |xs: &[f64], f: &dyn Fn(f64) -> f64| xs.iter().map(|&p| f(clamp(p))).sum::<f64>() / xs.len() as f64;
    let log_one_minus = |p: f64| (1.0 - p).ln();

    let gen_term = mean(d_on_gen, &log_one_minus);
    let l_g = gen_term;
    let l_d = match mode {
        GanLossMode::AsWritten => mean(d_on_real, &log_one_minus) + gen_term,
        GanLossMode::Canonical => -(mean(d_on_real, &f64::ln) + gen_term),
    };
    Ok((l_g, l_d))
}

/// `(1 - λ_sync - λ_gen)·L_lip + λ_sync·L_sync + λ_gen·L_G`.
pub fn combined_loss(l_lip: f64, l_sync: f64, l_g: f64, lambda_sync: f64, lambda_gen: f64) -> Result<f64> {
    let valid = lambda_sync.is_finite()
        && lambda_gen.is_finite()
        && lambda_sync >= 0.0
        && lambda_gen >= 0.0
        && lambda_sync + lambda_gen < 1.0;
    if !valid {
        return Err(Error::InvalidWeights {
            sync: lambda_sync,
            gen: lambda_gen,
        });
    }
    Ok((1.0 - lambda_sync - lambda_gen) * l_lip + lambda_sync * l_sync + lambda_gen * l_g)
}

/// [`combined_loss`] with the default weights.
pub fn combined_loss_default(l_lip: f64, l_sync: f64, l_g: f64) -> f64 {
    combined_loss(l_lip, l_sync, l_g, DEFAULT_LAMBDA_SYNC, DEFAULT_LAMBDA_GEN)
        .expect("default weights are valid")
}

/// Negative log-likelihood of a decoded unit sequence given per-step
/// target log-probabilities.
pub fn s2ut_nll(stepwise_target_logprobs: &[f64]) -> Result<f64> {
    if stepwise_target_logprobs.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut total = 0.0;
    for (index, &value) in stepwise_target_logprobs.iter().enumerate() {
        if value.is_nan() {
            return Err(Error::NonFiniteInput);
        }
        if value > 0.0 {
            return Err(Error::PositiveLogProb { index, value });
        }
        total -= value;
    }
    Ok(total)
}

/// Corpus-level evaluation summary.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub lr: f64,
    /// (threshold percent, compliance percent), ascending by threshold.
    pub lc: Vec<(f64, f64)>,
    pub bleu: Option<f64>,
    pub repeats: Option<usize>,
}

impl EvalReport {
    /// LR and LC at each threshold.
    pub fn from_lengths(c: &LengthPairs, thresholds: &[f64]) -> Result<Self> {
        let mut ks = thresholds.to_vec();
        ks.sort_by(f64::total_cmp);
        ks.dedup();
        let lc = ks
            .iter()
            .map(|&k| length_compliance(c, k).map(|v| (k, v)))
            .collect::<Result<_>>()?;
        Ok(Self {
            lr: length_ratio(c),
            lc,
            bleu: None,
            repeats: None,
        })
    }

    pub fn lc_at(&self, k: f64) -> Option<f64> {
        self.lc.iter().find(|(t, _)| *t == k).map(|&(_, v)| v)
    }

    /// Fixed-precision JSON: 3 decimals for `lr`, 2 for `lc` and `bleu`.
    pub fn to_json(&self) -> String {
        let mut s = String::new();
        self.write_json(&mut s);
        s
    }

    pub(crate) fn write_json(&self, s: &mut String) {
        write!(s, "{{\"lr\":{:.3},\"lc\":{{", self.lr).unwrap();
        for (i, (k, v)) in self.lc.iter().enumerate() {
            if i > 0 {
                s.push(',');
            }
            write!(s, "\"{}\":{:.2}", threshold_key(*k), v).unwrap();
        }
        s.push_str("},\"bleu\":");
        match self.bleu {
            Some(b) => write!(s, "{b:.2}").unwrap(),
            None => s.push_str("null"),
        }
        s.push_str(",\"repeats\":");
        match self.repeats {
            Some(r) => write!(s, "{r}").unwrap(),
            None => s.push_str("null"),
        }
        s.push('}');
    }
}

fn threshold_key(k: f64) -> String {
    if k.fract() == 0.0 && k.abs() < 1e15 {
        format!("{}", k as i64)
    } else {
        format!("{k}")
    }
}
