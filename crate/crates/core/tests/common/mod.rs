//! Test-only oracles and fixtures, kept independent of the library code paths they check.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use unitkit::FeatureMatrix;

/// Pooled n-gram counts by direct enumeration: every n-gram occurrence is
/// compared position by position, with no hashing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BruteCounts {
    pub correct: [usize; 4],
    pub total: [usize; 4],
    pub hyp_len: usize,
    pub ref_len: usize,
}

pub fn brute_force_counts(hyps: &[Vec<u32>], refs: &[Vec<u32>]) -> BruteCounts {
    let mut c = BruteCounts::default();
    for (h, r) in hyps.iter().zip(refs) {
        c.hyp_len += h.len();
        c.ref_len += r.len();
        for n in 1..=4 {
            if h.len() < n {
                continue;
            }
            c.total[n - 1] += h.len() - n + 1;
            for i in 0..=h.len() - n {
                let gram = &h[i..i + n];
                // only the first occurrence of each distinct gram is scored
                if (0..i).any(|j| &h[j..j + n] == gram) {
                    continue;
                }
                let in_hyp = (0..=h.len() - n).filter(|&j| &h[j..j + n] == gram).count();
                let in_ref = if r.len() >= n {
                    (0..=r.len() - n).filter(|&j| &r[j..j + n] == gram).count()
                } else {
                    0
                };
                c.correct[n - 1] += in_hyp.min(in_ref);
            }
        }
    }
    c
}

/// BLEU from counts, via the product of precisions rather than a log sum.
pub fn brute_force_score(c: &BruteCounts) -> f64 {
    if c.hyp_len == 0 || c.correct.contains(&0) {
        return 0.0;
    }
    let mut product = 1.0f64;
    for n in 0..4 {
        product *= c.correct[n] as f64 / c.total[n] as f64;
    }
    let penalty = if c.hyp_len < c.ref_len {
        (1.0 - c.ref_len as f64 / c.hyp_len as f64).exp()
    } else {
        1.0
    };
    100.0 * penalty * product.powf(0.25)
}

pub fn brute_force_bleu(hyps: &[Vec<u32>], refs: &[Vec<u32>]) -> f64 {
    brute_force_score(&brute_force_counts(hyps, refs))
}

/// Every sequence over `0..alphabet` with length `0..=max_len`.
pub fn all_sentences(alphabet: u32, max_len: usize) -> Vec<Vec<u32>> {
    let mut out = vec![vec![]];
    let mut frontier = vec![vec![]];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for s in &frontier {
            for a in 0..alphabet {
                let mut t: Vec<u32> = s.clone();
                t.push(a);
                next.push(t);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Centers of an equilateral triangle with unit sides.
pub const BLOB_CENTERS: [[f64; 2]; 3] = [[0.0, 0.0], [1.0, 0.0], [0.5, 0.866_025_403_784_438_6]];

/// `per_blob` points around each of [`BLOB_CENTERS`] with isotropic noise
/// `sigma`, plus the generating blob of each row.
pub fn three_blobs(per_blob: usize, sigma: f64, seed: u64) -> (FeatureMatrix, Vec<u32>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = Vec::new();
    let mut labels = Vec::new();
    for (b, c) in BLOB_CENTERS.iter().enumerate() {
        for _ in 0..per_blob {
            data.push(c[0] + sigma * gaussian(&mut rng));
            data.push(c[1] + sigma * gaussian(&mut rng));
            labels.push(b as u32);
        }
    }
    (FeatureMatrix::new(3 * per_blob, 2, data).unwrap(), labels)
}

/// WCSS of a labelled partition with centroids at the member means.
pub fn partition_wcss(x: &FeatureMatrix, labels: &[u32], k: usize) -> f64 {
    let d = x.dims();
    let mut total = 0.0;
    for c in 0..k as u32 {
        let members: Vec<usize> = (0..x.rows()).filter(|&i| labels[i] == c).collect();
        if members.is_empty() {
            continue;
        }
        let mut mean = vec![0.0; d];
        for &i in &members {
            for (m, v) in mean.iter_mut().zip(x.row(i)) {
                *m += v;
            }
        }
        for m in &mut mean {
            *m /= members.len() as f64;
        }
        for &i in &members {
            total += x
                .row(i)
                .iter()
                .zip(&mean)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>();
        }
    }
    total
}

/// Minimum WCSS over every assignment of the rows to `k` labels.
pub fn exhaustive_min_wcss(x: &FeatureMatrix, k: usize) -> f64 {
    let n = x.rows();
    let mut labels = vec![0u32; n];
    let mut best = f64::INFINITY;
    loop {
        best = best.min(partition_wcss(x, &labels, k));
        // odometer increment
        let mut i = 0;
        loop {
            if i == n {
                return best;
            }
            labels[i] += 1;
            if (labels[i] as usize) < k {
                break;
            }
            labels[i] = 0;
            i += 1;
        }
    }
}

/// Random frame-level unit sequence with runs, for round-trip checks.
pub fn random_unit_stream(rng: &mut ChaCha8Rng, max_len: usize, vocab: u32) -> Vec<u32> {
    let len = rng.gen_range(0..=max_len);
    let mut out = Vec::with_capacity(len);
    while out.len() < len {
        let u = rng.gen_range(0..vocab);
        let run = rng.gen_range(1..=4);
        for _ in 0..run {
            if out.len() < len {
                out.push(u);
            }
        }
    }
    out
}
