use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::squared_distance;
use crate::error::{Error, Result};
use crate::features::Matrix;
use crate::seeding::{self, StreamRng};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KMeansOptions {
    pub max_iter: usize,
    pub n_init: usize,
}

impl Default for KMeansOptions {
    fn default() -> Self {
        KMeansOptions {
            max_iter: 300,
            n_init: 10,
        }
    }
}

#[derive(Clone, Debug)]
pub struct KMeansFit {
    pub labels: Vec<usize>,
    pub centroids: Matrix,
    /// Within-cluster sum of squared distances of the returned partition.
    pub sse: f64,
    pub iterations: usize,
    /// SSE after each assignment step of the winning restart.
    pub sse_trace: Vec<f64>,
}

fn distinct_rows_at_least(x: &Matrix, k: usize) -> bool {
    let mut rows: Vec<&[f64]> = x.iter_rows().collect();
    rows.sort_by(|a, b| {
        a.iter()
            .zip(b.iter())
            .map(|(p, q)| p.total_cmp(q))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    rows.dedup();
    rows.len() >= k
}

/// Lloyd's algorithm with k-means++ seeding, best of `n_init` restarts by SSE.
///
/// Restart `r` runs on its own stream derived from one `u64` drawn from `rng`,
/// so the result does not depend on how restarts are scheduled.
pub fn kmeans<R: Rng + ?Sized>(
    x: &Matrix,
    k: usize,
    opts: &KMeansOptions,
    rng: &mut R,
) -> Result<KMeansFit> {
    if k == 0 || k > x.rows() {
        return Err(Error::InvalidParams(format!(
            "k = {k} must lie in 1..={}",
            x.rows()
        )));
    }
    if x.values().iter().any(|v| !v.is_finite()) {
        return Err(Error::DegenerateInput("features contain non-finite values".into()));
    }
    if !distinct_rows_at_least(x, k) {
        return Err(Error::DegenerateInput(format!("fewer than {k} distinct rows")));
    }
    let base = rng.random::<u64>();
    let fits: Vec<KMeansFit> = (0..opts.n_init.max(1))
        .into_par_iter()
        .map(|r| {
            let mut stream = seeding::stream(base, &[r as u64]);
            let init = plus_plus(x, k, &mut stream);
            lloyd(x, init, opts.max_iter)
        })
        .collect();
    // first minimum wins
    let best = fits
        .into_iter()
        .reduce(|best, f| if f.sse < best.sse { f } else { best })
        .expect("at least one restart");
    Ok(best)
}

fn plus_plus(x: &Matrix, k: usize, rng: &mut StreamRng) -> Matrix {
    let n = x.rows();
    let mut centers = Matrix::zeros(k, x.cols());
    let first = rng.random_range(0..n);
    centers.row_mut(0).copy_from_slice(x.row(first));
    let mut d2: Vec<f64> = x.iter_rows().map(|r| squared_distance(r, centers.row(0))).collect();
    for c in 1..k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = None;
            for (i, &w) in d2.iter().enumerate() {
                if w > 0.0 {
                    chosen = Some(i);
                    if target < w {
                        break;
                    }
                    target -= w;
                }
            }
            chosen.expect("positive total weight")
        } else {
            rng.random_range(0..n)
        };
        centers.row_mut(c).copy_from_slice(x.row(pick));
        for (i, row) in x.iter_rows().enumerate() {
            d2[i] = d2[i].min(squared_distance(row, centers.row(c)));
        }
    }
    centers
}

fn nearest(row: &[f64], centers: &Matrix) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, center) in centers.iter_rows().enumerate() {
        let d = squared_distance(row, center);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn recompute_centroids(x: &Matrix, labels: &[usize], k: usize) -> (Matrix, Vec<usize>) {
    let mut centers = Matrix::zeros(k, x.cols());
    let mut counts = vec![0usize; k];
    for (row, &c) in x.iter_rows().zip(labels) {
        counts[c] += 1;
        for (acc, &v) in centers.row_mut(c).iter_mut().zip(row) {
            *acc += v;
        }
    }
    for (c, &count) in counts.iter().enumerate() {
        if count > 0 {
            let inv = 1.0 / count as f64;
            centers.row_mut(c).iter_mut().for_each(|v| *v *= inv);
        }
    }
    (centers, counts)
}

fn lloyd(x: &Matrix, mut centers: Matrix, max_iter: usize) -> KMeansFit {
    let n = x.rows();
    let k = centers.rows();
    let mut labels = vec![usize::MAX; n];
    let mut dist = vec![0.0; n];
    let mut sse_trace = Vec::new();
    let mut iterations = 0;
    for _ in 0..max_iter.max(1) {
        iterations += 1;
        let mut changed = false;
        for (i, row) in x.iter_rows().enumerate() {
            let (c, d) = nearest(row, &centers);
            if c != labels[i] {
                labels[i] = c;
                changed = true;
            }
            dist[i] = d;
        }
        let sse: f64 = dist.iter().sum();
        if let Some(&prev) = sse_trace.last() {
            debug_assert!(sse <= prev * (1.0 + 1e-9) + 1e-9, "SSE rose from {prev} to {sse}");
        }
        sse_trace.push(sse);
        if !changed {
            break;
        }
        let (mut next, mut counts) = recompute_centroids(x, &labels, k);
        // Refill empty clusters with the point farthest from its centroid.
        while let Some(empty) = counts.iter().position(|&c| c == 0) {
            let far = (0..n)
                .filter(|&i| counts[labels[i]] > 1)
                .map(|i| (i, squared_distance(x.row(i), next.row(labels[i]))))
                .fold(None, |best: Option<(usize, f64)>, (i, d)| match best {
                    Some((_, bd)) if bd >= d => best,
                    _ => Some((i, d)),
                })
                .map(|(i, _)| i)
                .expect("k <= n leaves a cluster with two or more points");
            labels[far] = empty;
            let recomputed = recompute_centroids(x, &labels, k);
            next = recomputed.0;
            counts = recomputed.1;
        }
        centers = next;
    }
    let (centroids, _) = recompute_centroids(x, &labels, k);
    let sse = x
        .iter_rows()
        .zip(&labels)
        .map(|(row, &c)| squared_distance(row, centroids.row(c)))
        .sum();
    KMeansFit {
        labels,
        centroids,
        sse,
        iterations,
        sse_trace,
    }
}
