//! Partition agreement scores and trial aggregation.
//!
//! NMI is normalized by the arithmetic mean of the two entropies,
//! `2 I(A;B) / (H(A) + H(B))`. Other normalizations (max, geometric mean)
//! give different absolute values on the same partitions.

use std::collections::HashMap;

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Maps arbitrary labels onto `0..m` in order of first appearance.
fn compact(labels: &[usize]) -> (Vec<usize>, usize) {
    let mut ids = HashMap::new();
    let out = labels
        .iter()
        .map(|&l| {
            let next = ids.len();
            *ids.entry(l).or_insert(next)
        })
        .collect();
    (out, ids.len())
}

fn check_lengths(a: &[usize], b: &[usize]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.is_empty() {
        return Err(Error::InvalidParams("partitions must be nonempty".into()));
    }
    Ok(())
}

/// Contingency table of two partitions after compaction: `(table, rows, cols)`.
fn contingency(a: &[usize], b: &[usize]) -> (Vec<usize>, usize, usize) {
    let (a, ka) = compact(a);
    let (b, kb) = compact(b);
    let mut table = vec![0usize; ka * kb];
    for (&x, &y) in a.iter().zip(&b) {
        table[x * kb + y] += 1;
    }
    (table, ka, kb)
}

/// Normalized mutual information in `[0, 1]`. Returns 0 when both partitions
/// have zero entropy.
pub fn nmi(a: &[usize], b: &[usize]) -> Result<f64> {
    check_lengths(a, b)?;
    let n = a.len() as f64;
    let (table, ka, kb) = contingency(a, b);
    let mut row = vec![0usize; ka];
    let mut col = vec![0usize; kb];
    for i in 0..ka {
        for j in 0..kb {
            row[i] += table[i * kb + j];
            col[j] += table[i * kb + j];
        }
    }
    let entropy = |counts: &[usize]| -> f64 {
        counts
            .iter()
            .filter(|&&c| c > 0)
            .map(|&c| {
                let p = c as f64 / n;
                -p * p.ln()
            })
            .sum()
    };
    let (ha, hb) = (entropy(&row), entropy(&col));
    if ha + hb <= 0.0 {
        return Ok(0.0);
    }
    let mut mi = 0.0;
    for i in 0..ka {
        for j in 0..kb {
            let c = table[i * kb + j];
            if c > 0 {
                let c = c as f64;
                mi += c / n * (c * n / (row[i] as f64 * col[j] as f64)).ln();
            }
        }
    }
    Ok((2.0 * mi / (ha + hb)).clamp(0.0, 1.0))
}

/// Largest label cluster count accepted by [`clustering_accuracy`].
pub const MAX_MATCHED_CLUSTERS: usize = 64;

/// Fraction of nodes that agree under the best one-to-one relabeling of the
/// clusters, found by solving an assignment problem on the contingency table.
pub fn clustering_accuracy(a: &[usize], b: &[usize]) -> Result<f64> {
    check_lengths(a, b)?;
    let (table, ka, kb) = contingency(a, b);
    if ka.max(kb) > MAX_MATCHED_CLUSTERS {
        return Err(Error::InvalidParams(format!(
            "{} clusters exceed the matching limit of {MAX_MATCHED_CLUSTERS}",
            ka.max(kb)
        )));
    }
    // Rows must not outnumber columns.
    let transposed = ka > kb;
    let (rows, cols) = if transposed { (kb, ka) } else { (ka, kb) };
    let weight = |i: usize, j: usize| {
        let (x, y) = if transposed { (j, i) } else { (i, j) };
        table[x * kb + y] as f64
    };
    let cost: Vec<f64> = (0..rows * cols).map(|x| -weight(x / cols, x % cols)).collect();
    let assignment = hungarian(&cost, rows, cols);
    let matched: f64 = assignment.iter().enumerate().map(|(i, &j)| weight(i, j)).sum();
    Ok(matched / a.len() as f64)
}

/// Minimum-cost assignment of every row to a distinct column (`rows <= cols`),
/// using the shortest augmenting path form of the Hungarian algorithm.
/// Returns the column chosen for each row.
pub fn hungarian(cost: &[f64], rows: usize, cols: usize) -> Vec<usize> {
    assert!(rows <= cols, "hungarian needs rows <= cols");
    assert_eq!(cost.len(), rows * cols);
    let c = |i: usize, j: usize| cost[(i - 1) * cols + (j - 1)];
    // 1-based potentials; column 0 is a sentinel.
    let mut u = vec![0.0; rows + 1];
    let mut v = vec![0.0; cols + 1];
    let mut owner = vec![0usize; cols + 1];
    let mut way = vec![0usize; cols + 1];
    for i in 1..=rows {
        owner[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; cols + 1];
        let mut used = vec![false; cols + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=cols {
                if !used[j] {
                    let cur = c(i0, j) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=cols {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut out = vec![0; rows];
    for j in 1..=cols {
        if owner[j] > 0 {
            out[owner[j] - 1] = j - 1;
        }
    }
    out
}

/// Plain accuracy over the nodes selected by `mask`; labels are compared as-is.
pub fn classification_accuracy(pred: &[usize], truth: &[usize], mask: &[bool]) -> Result<f64> {
    if pred.len() != truth.len() || pred.len() != mask.len() {
        return Err(Error::LengthMismatch {
            left: pred.len(),
            right: truth.len().min(mask.len()),
        });
    }
    let (hits, total) = pred
        .iter()
        .zip(truth)
        .zip(mask)
        .filter(|(_, &m)| m)
        .fold((0usize, 0usize), |(h, t), ((p, q), _)| (h + usize::from(p == q), t + 1));
    if total == 0 {
        return Err(Error::EmptyMask);
    }
    Ok(hits as f64 / total as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AggregateStat {
    pub mean: f64,
    /// Normal-approximation confidence half-width, `z · sd / sqrt(n)`.
    pub half_width: f64,
    pub n_trials: usize,
}

pub const DEFAULT_CONFIDENCE: f64 = 0.95;

/// Two-sided standard normal quantile for the given confidence level.
pub fn z_score(confidence: f64) -> Result<f64> {
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::InvalidParams(format!(
            "confidence {confidence} must lie in (0, 1)"
        )));
    }
    let normal = Normal::standard();
    Ok(normal.inverse_cdf(0.5 + confidence / 2.0))
}

pub fn aggregate(samples: &[f64], confidence: f64) -> Result<AggregateStat> {
    if samples.len() < 2 {
        return Err(Error::TooFewSamples { got: samples.len() });
    }
    let z = z_score(confidence)?;
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(AggregateStat {
        mean,
        half_width: z * var.sqrt() / n.sqrt(),
        n_trials: samples.len(),
    })
}

/// Ranks with ties sharing their average rank (1-based).
fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut ranks = vec![0.0; xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &t in &idx[i..=j] {
            ranks[t] = r;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank correlation (Pearson correlation of average ranks).
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::TooFewSamples { got: x.len() });
    }
    let (rx, ry) = (average_ranks(x), average_ranks(y));
    let n = rx.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Ok(0.0);
    }
    Ok(sxy / (sxx * syy).sqrt())
}
