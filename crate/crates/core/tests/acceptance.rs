//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use unitkit::harness::{self, CompareOptions, SyntheticSpec};
use unitkit::metrics::{self, EmbeddingPair, GanLossMode, LengthPairs};
use unitkit::quantize::{self, FeatureMatrix};
use unitkit::{io, ContinuousUnitSeq, OrigUnitSeq, RegulationMode};

type Outcome = Result<String, String>;
type Check = fn() -> Outcome;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

/// Worked example: [2.2, 1.8, 2.3, 2.7] with T=10 gives [2, 2, 3, 3]
/// and expands to the 10-frame sequence, in under 1 ms.
fn c1_worked_example() -> Outcome {
    let units = OrigUnitSeq::new(vec![1, 2, 3, 4]).map_err(|e| e.to_string())?;
    let start = Instant::now();
    let out = unitkit::integerize_bounded(&[2.2, 1.8, 2.3, 2.7], 10).map_err(|e| e.to_string())?;
    let frames = unitkit::expand(&units, out.durations()).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure(
        out.durations() == [2, 2, 3, 3],
        format!("got {:?}", out.durations()),
    )?;
    ensure(
        frames.units() == [1, 1, 2, 2, 3, 3, 3, 4, 4, 4],
        format!("expanded to {:?}", frames.units()),
    )?;
    ensure(elapsed < Duration::from_millis(1), format!("took {elapsed:?}"))?;
    Ok(format!("OUT=[2,2,3,3], 10 frames, {elapsed:?}"))
}

/// Bounded mode on 10,000 sequences with ±20% jitter: LR = 1.000 and
/// LC@5/10/20 = 100.00 exactly, in under 5 s. Early stop on targets drawn
/// 5% short: LR < 1.
fn c2_isometry() -> Outcome {
    let mut spec = SyntheticSpec::new(10_000, 1000, 20, 0);
    spec.jitter_percent = 20.0;
    let start = Instant::now();
    let corpus = harness::generate_corpus(&spec).map_err(|e| e.to_string())?;
    let reports = harness::run_table3_style(&corpus, &[RegulationMode::Bounded], &CompareOptions::default())
        .map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let bounded = &reports[0].report;
    ensure(bounded.lr == 1.0, format!("bounded LR {}", bounded.lr))?;
    for k in [5.0, 10.0, 20.0] {
        let v = bounded.lc_at(k).ok_or("missing LC threshold")?;
        ensure(v == 100.0, format!("bounded LC@{k} = {v}"))?;
    }
    ensure(
        bounded.repeats == Some(0),
        format!("bounded repeats {:?}", bounded.repeats),
    )?;
    ensure(elapsed < Duration::from_secs(5), format!("took {elapsed:?}"))?;

    spec.target_bias_percent = -5.0;
    let short = harness::generate_corpus(&spec).map_err(|e| e.to_string())?;
    let es = harness::run_table3_style(&short, &[RegulationMode::EarlyStop], &CompareOptions::default())
        .map_err(|e| e.to_string())?;
    let es = &es[0].report;
    ensure(es.lr < 1.0, format!("early-stop LR {}", es.lr))?;
    Ok(format!(
        "bounded {} in {elapsed:?}; early stop LR {:.3}, LC@5 {:.2}",
        bounded.to_json(),
        es.lr,
        es.lc_at(5.0).unwrap_or(f64::NAN)
    ))
}

/// Bounded regulator equals the naive reference on 10,000 fuzzed instances.
fn c3_cross_implementation() -> Outcome {
    let summary = harness::fuzz_lengthreg(10_000, 64, 512, 0);
    ensure(
        summary.divergences == 0,
        format!(
            "{} divergences, first: {:?}",
            summary.divergences, summary.first_failure
        ),
    )?;
    Ok(format!("{} instances, 0 divergences", summary.instances))
}

/// Property suite: collapse/expand identity, sum exactness, per-index
/// stability, scale invariance, LC monotone in k.
fn c4_properties() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for i in 0..1000 {
        let z = ContinuousUnitSeq::new(common::random_unit_stream(&mut rng, 200, 12));
        let (u, d) = unitkit::collapse(&z);
        let back = unitkit::expand(&u, &d).map_err(|e| e.to_string())?;
        ensure(back == z, format!("round trip failed on sequence {i}"))?;
    }

    let summary = harness::fuzz_lengthreg(10_000, 64, 512, 0);
    ensure(summary.clean(), format!("{summary:?}"))?;

    for c in 0..100 {
        let n = rng.gen_range(1..200);
        let pairs: Vec<(usize, usize)> = (0..n)
            .map(|_| {
                let r = rng.gen_range(1..500);
                let spread = rng.gen_range(0.5..1.5);
                (((r as f64 * spread).round() as usize).max(1), r)
            })
            .collect();
        let pairs = LengthPairs::new(pairs).map_err(|e| e.to_string())?;
        let mut last = -1.0;
        for k in [1.0, 2.5, 5.0, 7.5, 10.0, 15.0, 20.0, 35.0, 50.0] {
            let v = metrics::length_compliance(&pairs, k).map_err(|e| e.to_string())?;
            ensure(v >= last, format!("corpus {c}: LC dropped at k={k}"))?;
            last = v;
        }
    }
    Ok(
        "1000 round trips; 10000 fuzzed allocations exact/stable/scale-invariant; 100 LC curves monotone"
            .into(),
    )
}

fn stats_match(s: &metrics::BleuStats, c: &common::BruteCounts) -> bool {
    s.correct == c.correct && s.total == c.total && s.hyp_len == c.hyp_len && s.ref_len == c.ref_len
}

/// Checks every corpus of `m` hypothesis/reference pairs drawn from `pool`.
/// Returns the largest score error and the number of count mismatches.
fn exhaustive_corpora(pool: &[Vec<u32>], m: u32) -> (f64, usize) {
    let p = pool.len() as u64;
    let cases = p.pow(2 * m);
    (0..cases)
        .into_par_iter()
        .map(|mut code| {
            let mut hyps = Vec::with_capacity(m as usize);
            let mut refs = Vec::with_capacity(m as usize);
            for _ in 0..m {
                hyps.push(pool[(code % p) as usize].clone());
                code /= p;
                refs.push(pool[(code % p) as usize].clone());
                code /= p;
            }
            let stats = metrics::bleu_stats(&hyps, &refs).expect("valid corpus");
            let counts = common::brute_force_counts(&hyps, &refs);
            let err = (stats.score() - common::brute_force_score(&counts)).abs();
            (err, usize::from(!stats_match(&stats, &counts)))
        })
        .reduce(|| (0.0, 0), |a, b| (a.0.max(b.0), a.1 + b.1))
}

/// corpus_bleu equals a brute-force counter to 1e-9; BLEU(h, h) = 100.
fn c5_bleu_oracle() -> Outcome {
    let pool = common::all_sentences(3, 6);
    let short3 = common::all_sentences(3, 3);
    let short2 = common::all_sentences(3, 2);
    let mut lines = Vec::new();
    for (name, sentences, m) in [
        ("1-sentence, <=6 tokens", &pool, 1),
        ("2-sentence, <=3 tokens", &short3, 2),
        ("3-sentence, <=2 tokens", &short2, 3),
    ] {
        let (err, mismatches) = exhaustive_corpora(sentences, m);
        ensure(err <= 1e-9, format!("{name}: max error {err:e}"))?;
        ensure(mismatches == 0, format!("{name}: {mismatches} count mismatches"))?;
        lines.push(format!(
            "{} {name} (max err {err:.1e})",
            (sentences.len() as u64).pow(2 * m)
        ));
    }

    // longer multi-sentence corpora from the full pool, sampled
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut multi_worst = 0.0f64;
    let draws = 200_000;
    for _ in 0..draws {
        let m = rng.gen_range(2..=3);
        let hyps: Vec<Vec<u32>> = (0..m)
            .map(|_| pool[rng.gen_range(0..pool.len())].clone())
            .collect();
        let refs: Vec<Vec<u32>> = (0..m)
            .map(|_| pool[rng.gen_range(0..pool.len())].clone())
            .collect();
        let stats = metrics::bleu_stats(&hyps, &refs).map_err(|e| e.to_string())?;
        let counts = common::brute_force_counts(&hyps, &refs);
        ensure(
            stats_match(&stats, &counts),
            format!("count mismatch on {hyps:?} / {refs:?}"),
        )?;
        let fast = metrics::corpus_bleu(&hyps, &refs).map_err(|e| e.to_string())?;
        multi_worst = multi_worst.max((fast - common::brute_force_score(&counts)).abs());
    }
    ensure(
        multi_worst <= 1e-9,
        format!("sampled multi-sentence max error {multi_worst:e}"),
    )?;
    lines.push(format!(
        "{draws} sampled 2-3 sentence, <=6 tokens (max err {multi_worst:.1e})"
    ));

    let long: Vec<Vec<u32>> = pool.iter().filter(|s| s.len() >= 4).cloned().collect();
    for chunk in long.chunks(3) {
        let v = metrics::corpus_bleu(chunk, chunk).map_err(|e| e.to_string())?;
        ensure(v == 100.0, format!("BLEU(h,h) = {v}"))?;
    }
    Ok(format!("{}; BLEU(h,h)=100", lines.join(", ")))
}

fn units_bytes(x: &FeatureMatrix, threads: usize) -> Result<(Vec<u8>, Vec<u8>), String> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| e.to_string())?;
    pool.install(|| {
        let fit = quantize::kmeans_fit(x, 3, 100, 0).map_err(|e| e.to_string())?;
        let units = quantize::quantize_assign(&fit.codebook, x).map_err(|e| e.to_string())?;
        Ok((
            io::format_lines(&[units.into_units()]).into_bytes(),
            io::encode_codebook(&fit.codebook).map_err(|e| e.to_string())?,
        ))
    })
}

/// k-means on three blobs (σ=0.01, 100 points each, seed 0): purity
/// ≥ 0.99, NMI ≥ 0.95, WCSS never rises; identical units on 1 and 8 threads.
fn c6_kmeans() -> Outcome {
    let (x, labels) = common::three_blobs(100, 0.01, 0);
    let fit = quantize::kmeans_fit(&x, 3, 100, 0).map_err(|e| e.to_string())?;
    let purity = quantize::purity(&labels, &fit.assignments).map_err(|e| e.to_string())?;
    let nmi = quantize::nmi(&labels, &fit.assignments).map_err(|e| e.to_string())?;
    ensure(purity >= 0.99, format!("purity {purity}"))?;
    ensure(nmi >= 0.95, format!("NMI {nmi}"))?;
    for (i, w) in fit.wcss_trace.windows(2).enumerate() {
        ensure(
            w[1] <= w[0],
            format!("WCSS rose at iteration {}: {} -> {}", i + 1, w[0], w[1]),
        )?;
    }
    let optimal = common::partition_wcss(&x, &labels, 3);
    ensure(
        (fit.wcss() - optimal).abs() <= 1e-9 * optimal.max(1e-12),
        format!("WCSS {} vs blob partition {optimal}", fit.wcss()),
    )?;

    let (one, cb_one) = units_bytes(&x, 1)?;
    let (eight, cb_eight) = units_bytes(&x, 8)?;
    ensure(
        one == eight && cb_one == cb_eight,
        "blob units differ between 1 and 8 threads",
    )?;

    // a larger instance so the assignment pass actually splits across workers
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let big: Vec<f64> = (0..40_000 * 4).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let big = FeatureMatrix::new(40_000, 4, big).map_err(|e| e.to_string())?;
    let (one, cb_one) = units_bytes(&big, 1)?;
    let (eight, cb_eight) = units_bytes(&big, 8)?;
    ensure(
        one == eight && cb_one == cb_eight,
        "40k-row units differ between 1 and 8 threads",
    )?;

    Ok(format!(
        "purity {purity:.4}, NMI {nmi:.4}, {} iterations, WCSS {:.6}",
        fit.wcss_trace.len(),
        fit.wcss()
    ))
}

/// Loss formulas.
fn c7_losses() -> Outcome {
    let combined = metrics::combined_loss_default(1.0, 1.0, 1.0);
    ensure(combined == 1.0, format!("combined_loss(1,1,1) = {combined}"))?;

    let unit = |v: Vec<f64>| EmbeddingPair::new(v.clone(), v).map_err(|e| e.to_string());
    let pairs = vec![
        unit(vec![1.0, 0.0])?,
        unit(vec![0.0, 1.0])?,
        unit(vec![0.6, 0.8])?,
    ];
    let sync = metrics::sync_loss(&pairs, 1e-8, metrics::DEFAULT_SYNC_FLOOR).map_err(|e| e.to_string())?;
    ensure(
        sync == 0.0,
        format!("sync loss of identical unit vectors = {sync}"),
    )?;

    let eps = metrics::GAN_EPS;
    let (_, l_d) =
        metrics::gan_losses(&[1.0 - eps], &[eps], GanLossMode::Canonical).map_err(|e| e.to_string())?;
    ensure(l_d.abs() <= 1e-6, format!("perfect discriminator L_D = {l_d}"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let frames = |rng: &mut ChaCha8Rng| -> Vec<Vec<f64>> {
        (0..6)
            .map(|_| (0..96).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect()
    };
    let (real, gen) = (frames(&mut rng), frames(&mut rng));
    let base = metrics::lip_l1(&real, &gen).map_err(|e| e.to_string())?;
    for c in [0.5, 2.0, 3.0, 1e3] {
        let scale = |f: &Vec<Vec<f64>>| -> Vec<Vec<f64>> {
            f.iter().map(|r| r.iter().map(|v| v * c).collect()).collect()
        };
        let scaled = metrics::lip_l1(&scale(&real), &scale(&gen)).map_err(|e| e.to_string())?;
        let rel = (scaled - c * base).abs() / (c * base);
        ensure(
            rel <= 1e-12,
            format!("lip L1 homogeneity off by {rel:e} at c={c}"),
        )?;
    }
    Ok(format!(
        "combined {combined}, sync {:.3}, L_D {l_d:.1e}, lip L1 homogeneous",
        sync.abs()
    ))
}

fn main() {
    let criteria: [(&str, Check); 7] = [
        ("C1 worked example", c1_worked_example),
        ("C2 bounded-mode isometry", c2_isometry),
        ("C3 cross-implementation oracle", c3_cross_implementation),
        ("C4 property suite", c4_properties),
        ("C5 BLEU oracle equivalence", c5_bleu_oracle),
        ("C6 k-means quality and determinism", c6_kmeans),
        ("C7 loss formulas", c7_losses),
    ];

    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let took = start.elapsed();
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail} [{took:.2?}]"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why} [{took:.2?}]");
            }
        }
    }
    println!(
        "N/A   C8 dataset-bound results (BLEU, MOS, LSE-C/D, FID, absolute NMI/purity): need trained models and audio-visual speech corpora"
    );

    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}
