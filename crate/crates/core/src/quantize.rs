//! K-means vector quantization of feature frames into discrete units, and
//! the purity / NMI scores used to judge a clustering against reference labels.

use std::collections::HashMap;
use std::hash::Hash;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::units::{ContinuousUnitSeq, UnitId};

/// Row-major matrix of feature frames.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    rows: usize,
    dims: usize,
    data: Vec<f64>,
}

impl FeatureMatrix {
    pub fn new(rows: usize, dims: usize, data: Vec<f64>) -> Result<Self> {
        if dims == 0 {
            return Err(Error::ShapeMismatch(
                "feature dimension must be at least 1".into(),
            ));
        }
        if rows.checked_mul(dims) != Some(data.len()) {
            return Err(Error::ShapeMismatch(format!(
                "{} values cannot form a {rows}x{dims} matrix",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteInput);
        }
        Ok(Self { rows, dims, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dims = rows.first().map_or(1, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != dims) {
            return Err(Error::DimMismatch {
                expected: dims,
                got: bad.len(),
            });
        }
        Self::new(rows.len(), dims, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dims..(i + 1) * self.dims]
    }
}

/// K centroids of dimension d.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    centroids: FeatureMatrix,
}

impl Codebook {
    pub fn new(centroids: FeatureMatrix) -> Result<Self> {
        if centroids.rows() == 0 {
            return Err(Error::ShapeMismatch(
                "codebook needs at least one centroid".into(),
            ));
        }
        Ok(Self { centroids })
    }

    pub fn k(&self) -> usize {
        self.centroids.rows()
    }

    pub fn dims(&self) -> usize {
        self.centroids.dims()
    }

    pub fn centroid(&self, i: usize) -> &[f64] {
        self.centroids.row(i)
    }

    pub fn centroids(&self) -> &FeatureMatrix {
        &self.centroids
    }

    /// Index of the nearest centroid and its squared distance. Ties go to
    /// the lowest index.
    pub fn nearest(&self, x: &[f64]) -> (usize, f64) {
        let mut best = (0, f64::INFINITY);
        for c in 0..self.k() {
            let dist = squared_distance(x, self.centroid(c));
            if dist < best.1 {
                best = (c, dist);
            }
        }
        best
    }
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Outcome of [`kmeans_fit`].
#[derive(Debug, Clone, Serialize)]
pub struct KMeansFit {
    #[serde(skip)]
    pub codebook: Codebook,
    /// Cluster of every training row under the final codebook.
    pub assignments: Vec<UnitId>,
    /// WCSS after each assignment pass; the last entry is the final WCSS.
    pub wcss_trace: Vec<f64>,
    pub converged: bool,
}

impl KMeansFit {
    pub fn wcss(&self) -> f64 {
        *self.wcss_trace.last().expect("at least one pass")
    }
}

/// Assigns every row to its nearest centroid. Rows are processed in
/// parallel; the output does not depend on the thread count.
fn assign_rows(cb: &Codebook, x: &FeatureMatrix) -> Vec<(usize, f64)> {
    (0..x.rows())
        .into_par_iter()
        .with_min_len(256)
        .map(|i| cb.nearest(x.row(i)))
        .collect()
}

/// Lloyd's algorithm with k-means++ seeding.
///
/// Each iteration assigns rows then recomputes centroids. Iteration stops
/// after `max_iters` assignment passes or once an assignment pass changes
/// nothing. Clusters that lose all members are moved onto the row that is
/// currently worst served by its centroid.
pub fn kmeans_fit(x: &FeatureMatrix, k: usize, max_iters: usize, seed: u64) -> Result<KMeansFit> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    if max_iters == 0 {
        return Err(Error::InvalidArgument("max_iters must be at least 1".into()));
    }
    if x.rows() < k {
        return Err(Error::TooFewPoints { n: x.rows(), k });
    }
    let n = x.rows();
    let dims = x.dims();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut codebook = Codebook::new(seed_plus_plus(x, k, &mut rng))?;

    let mut previous: Option<Vec<usize>> = None;
    let mut wcss_trace = Vec::new();
    let mut converged = false;

    loop {
        let assigned = assign_rows(&codebook, x);
        let labels: Vec<usize> = assigned.iter().map(|a| a.0).collect();
        let wcss: f64 = assigned.iter().map(|a| a.1).sum();
        if let Some(&prev) = wcss_trace.last() {
            debug_assert!(wcss <= prev * (1.0 + 1e-12), "WCSS rose from {prev} to {wcss}");
        }
        wcss_trace.push(wcss);

        if previous.as_ref() == Some(&labels) {
            converged = true;
        }
        if converged || wcss_trace.len() >= max_iters {
            return Ok(KMeansFit {
                codebook,
                assignments: labels.iter().map(|&l| l as UnitId).collect(),
                wcss_trace,
                converged,
            });
        }

        // Update in ascending row order so the sums never depend on scheduling.
        let mut sums = vec![0.0f64; k * dims];
        let mut counts = vec![0usize; k];
        for (i, &c) in labels.iter().enumerate() {
            counts[c] += 1;
            for (s, v) in sums[c * dims..(c + 1) * dims].iter_mut().zip(x.row(i)) {
                *s += v;
            }
        }
        let mut centroids = codebook.centroids.data.clone();
        for c in 0..k {
            if counts[c] > 0 {
                let inv = counts[c] as f64;
                for (dst, s) in centroids[c * dims..(c + 1) * dims]
                    .iter_mut()
                    .zip(&sums[c * dims..(c + 1) * dims])
                {
                    *dst = s / inv;
                }
            }
        }

        let empty: Vec<usize> = (0..k).filter(|&c| counts[c] == 0).collect();
        if !empty.is_empty() {
            let mut worst: Vec<usize> = (0..n).collect();
            // farthest first, lowest row index on ties
            worst.sort_by(|&a, &b| assigned[b].1.total_cmp(&assigned[a].1).then(a.cmp(&b)));
            for (c, &row) in empty.iter().zip(worst.iter().filter(|&&r| assigned[r].1 > 0.0)) {
                centroids[c * dims..(c + 1) * dims].copy_from_slice(x.row(row));
            }
        }

        codebook = Codebook::new(FeatureMatrix {
            rows: k,
            dims,
            data: centroids,
        })?;
        previous = Some(labels);
    }
}

/// k-means++ initialization: first centroid uniform, the rest drawn with
/// probability proportional to squared distance from the nearest chosen one.
fn seed_plus_plus(x: &FeatureMatrix, k: usize, rng: &mut ChaCha8Rng) -> FeatureMatrix {
    let n = x.rows();
    let mut chosen = Vec::with_capacity(k);
    chosen.push(rng.gen_range(0..n));
    let mut nearest: Vec<f64> = (0..n)
        .map(|i| squared_distance(x.row(i), x.row(chosen[0])))
        .collect();

    while chosen.len() < k {
        let total: f64 = nearest.iter().sum();
        let next = if total > 0.0 {
            let threshold = rng.gen::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for (i, &w) in nearest.iter().enumerate() {
                if w <= 0.0 {
                    continue;
                }
                acc += w;
                pick = Some(i);
                if acc > threshold {
                    break;
                }
            }
            pick.expect("positive total has a positive weight")
        } else {
            // all remaining rows coincide with a chosen centroid
            (0..n).find(|i| !chosen.contains(i)).expect("n >= k")
        };
        chosen.push(next);
        for (i, w) in nearest.iter_mut().enumerate() {
            *w = w.min(squared_distance(x.row(i), x.row(next)));
        }
    }

    let mut data = Vec::with_capacity(k * x.dims());
    for &i in &chosen {
        data.extend_from_slice(x.row(i));
    }
    FeatureMatrix {
        rows: k,
        dims: x.dims(),
        data,
    }
}

/// Maps each feature row to its nearest centroid.
pub fn quantize_assign(cb: &Codebook, x: &FeatureMatrix) -> Result<ContinuousUnitSeq> {
    if x.dims() != cb.dims() {
        return Err(Error::DimMismatch {
            expected: cb.dims(),
            got: x.dims(),
        });
    }
    let units = assign_rows(cb, x).into_iter().map(|(c, _)| c as UnitId).collect();
    Ok(ContinuousUnitSeq::new(units))
}

/// Within-cluster sum of squares of `x` under `cb`.
pub fn wcss(cb: &Codebook, x: &FeatureMatrix) -> Result<f64> {
    if x.dims() != cb.dims() {
        return Err(Error::DimMismatch {
            expected: cb.dims(),
            got: x.dims(),
        });
    }
    Ok(assign_rows(cb, x).iter().map(|a| a.1).sum())
}

struct Contingency {
    n: usize,
    labels: Vec<usize>,
    clusters: Vec<usize>,
    joint: HashMap<(usize, usize), usize>,
}

fn contingency<L, C>(labels: &[L], clusters: &[C]) -> Result<Contingency>
where
    L: Eq + Hash,
    C: Eq + Hash,
{
    if labels.len() != clusters.len() {
        return Err(Error::LengthMismatch {
            left: labels.len(),
            right: clusters.len(),
        });
    }
    if labels.is_empty() {
        return Err(Error::EmptyInput);
    }
    fn dense<T: Eq + Hash>(xs: &[T]) -> (Vec<usize>, usize) {
        let mut ids: HashMap<&T, usize> = HashMap::new();
        let coded = xs
            .iter()
            .map(|x| {
                let next = ids.len();
                *ids.entry(x).or_insert(next)
            })
            .collect();
        (coded, ids.len())
    }
    let (l, nl) = dense(labels);
    let (c, nc) = dense(clusters);
    let mut label_counts = vec![0; nl];
    let mut cluster_counts = vec![0; nc];
    let mut joint = HashMap::new();
    for (&a, &b) in l.iter().zip(&c) {
        label_counts[a] += 1;
        cluster_counts[b] += 1;
        *joint.entry((a, b)).or_insert(0) += 1;
    }
    Ok(Contingency {
        n: labels.len(),
        labels: label_counts,
        clusters: cluster_counts,
        joint,
    })
}

/// Fraction of rows whose cluster's majority label matches their own label.
pub fn purity<L, C>(reference_labels: &[L], cluster_ids: &[C]) -> Result<f64>
where
    L: Eq + Hash,
    C: Eq + Hash,
{
    let t = contingency(reference_labels, cluster_ids)?;
    let mut best = vec![0usize; t.clusters.len()];
    for (&(_, c), &count) in &t.joint {
        best[c] = best[c].max(count);
    }
    Ok(best.iter().sum::<usize>() as f64 / t.n as f64)
}

fn entropy(counts: &[usize], n: f64) -> f64 {
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// Normalized mutual information, normalized by the arithmetic mean of the
/// two entropies.
///
/// Two single-class partitions score 1; exactly one single-class partition
/// scores 0.
pub fn nmi<L, C>(reference_labels: &[L], cluster_ids: &[C]) -> Result<f64>
where
    L: Eq + Hash,
    C: Eq + Hash,
{
    let t = contingency(reference_labels, cluster_ids)?;
    let n = t.n as f64;
    match (t.labels.len() == 1, t.clusters.len() == 1) {
        (true, true) => return Ok(1.0),
        (true, false) | (false, true) => return Ok(0.0),
        _ => {}
    }
    let h_labels = entropy(&t.labels, n);
    let h_clusters = entropy(&t.clusters, n);
    let mut mi = 0.0;
    // sorted for a reproducible summation order
    let mut cells: Vec<_> = t.joint.iter().collect();
    cells.sort_unstable_by_key(|(k, _)| **k);
    for (&(a, b), &count) in cells {
        let pij = count as f64 / n;
        let pi = t.labels[a] as f64 / n;
        let pj = t.clusters[b] as f64 / n;
        mi += pij * (pij / (pi * pj)).ln();
    }
    let denom = 0.5 * (h_labels + h_clusters);
    Ok((mi / denom).clamp(0.0, 1.0))
}
