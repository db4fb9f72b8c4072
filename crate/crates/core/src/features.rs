//! Node features drawn from an isotropic Gaussian mixture, and edge features
//! that shift with whether an edge crosses clusters.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::sbm::ClusterAssignment;
use crate::seeding;

/// Relation between feature clusters and graph clusters.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureMode {
    /// Feature clusters coincide with graph clusters (`k_f = k`).
    #[default]
    Match,
    /// Some graph clusters are split into several feature clusters (`k_f > k`).
    Nest,
    /// Some graph clusters are merged into one feature cluster (`k_f < k`).
    Group,
}

impl std::fmt::Display for FeatureMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.pad(match self {
            FeatureMode::Match => "match",
            FeatureMode::Nest => "nest",
            FeatureMode::Group => "group",
        })
    }
}

impl FeatureMode {
    pub fn check(self, k: usize, k_f: usize) -> Result<()> {
        let ok = k_f >= 1
            && match self {
                FeatureMode::Match => k_f == k,
                FeatureMode::Nest => k_f > k,
                FeatureMode::Group => k_f < k,
            };
        if ok {
            Ok(())
        } else {
            Err(Error::ModeMismatch {
                mode: self.to_string(),
                k,
                k_f,
            })
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeatureParams {
    /// Feature dimension.
    pub s: usize,
    pub k_f: usize,
    pub mode: FeatureMode,
    /// Standard deviation of cluster-center coordinates.
    pub sigma_c: f64,
    /// Within-cluster standard deviation.
    pub sigma: f64,
}

impl Default for FeatureParams {
    fn default() -> Self {
        FeatureParams {
            s: 32,
            k_f: 4,
            mode: FeatureMode::Match,
            sigma_c: 3.0,
            sigma: 1.0,
        }
    }
}

impl FeatureParams {
    pub fn validate(&self, k: usize) -> Result<()> {
        if self.s == 0 {
            return Err(Error::InvalidParams("feature dimension s must be positive".into()));
        }
        if !(self.sigma_c.is_finite() && self.sigma_c > 0.0) {
            return Err(Error::InvalidParams(format!("sigma_c = {} must be > 0", self.sigma_c)));
        }
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return Err(Error::InvalidParams(format!("sigma = {} must be > 0", self.sigma)));
        }
        self.mode.check(k, self.k_f)
    }
}

fn default_sigma_e() -> f64 {
    1.0
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EdgeFeatureParams {
    pub s_e: usize,
    pub sigma_e: f64,
    /// Per-coordinate mean of inter-cluster edge features.
    pub x_e: f64,
}

impl Default for EdgeFeatureParams {
    fn default() -> Self {
        EdgeFeatureParams {
            s_e: 4,
            sigma_e: default_sigma_e(),
            x_e: 2.0,
        }
    }
}

impl EdgeFeatureParams {
    pub fn validate(&self) -> Result<()> {
        if self.s_e == 0 {
            return Err(Error::InvalidParams("s_e must be >= 1".into()));
        }
        if !(self.sigma_e.is_finite() && self.sigma_e > 0.0) {
            return Err(Error::InvalidParams(format!("sigma_e = {} must be > 0", self.sigma_e)));
        }
        if !self.x_e.is_finite() {
            return Err(Error::InvalidParams("x_e must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureAssignment {
    pub labels: Vec<usize>,
    pub k_f: usize,
}

/// Dense row-major matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

/// Node features, one row per node in graph order.
pub type FeatureMatrix = Matrix;
/// Edge features, one row per edge in canonical edge order.
pub type EdgeFeatureMatrix = Matrix;
/// Cluster centers, one row per feature cluster.
pub type Centers = Matrix;

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            values: vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != rows * cols {
            return Err(Error::InvalidParams(format!(
                "{} values for a {rows}x{cols} matrix",
                values.len()
            )));
        }
        Ok(Matrix { rows, cols, values })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidParams("ragged rows".into()));
        }
        Ok(Matrix {
            rows: rows.len(),
            cols,
            values: rows.concat(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.values[i * self.cols..(i + 1) * self.cols]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> {
        // chunks_exact panics on a zero chunk size
        let cols = self.cols.max(1);
        self.values.chunks_exact(cols).take(self.rows)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Right-multiplies by a `cols × cols` matrix given row-major.
    pub fn mul_square(&self, m: &[f64]) -> Matrix {
        let c = self.cols;
        assert_eq!(m.len(), c * c);
        let mut out = Matrix::zeros(self.rows, c);
        for i in 0..self.rows {
            let src = self.row(i);
            let dst = out.row_mut(i);
            for (a, &x) in src.iter().enumerate() {
                for b in 0..c {
                    dst[b] += x * m[a * c + b];
                }
            }
        }
        out
    }
}

/// Derives feature memberships from graph memberships.
///
/// * `Match`: feature label = graph label.
/// * `Nest`: extra feature cluster `k + j` (for `j < k_f - k`) is carved out
///   of graph cluster `j mod k`; every node of a split cluster picks one of
///   its parts uniformly at random. Clusters beyond the first `k_f - k` stay whole.
/// * `Group`: graph cluster `c` joins feature cluster `c mod k_f`, so the
///   first `k_f` clusters anchor the groups and the rest are dealt round-robin.
pub fn build_feature_memberships<R: Rng + ?Sized>(
    assignment: &ClusterAssignment,
    k_f: usize,
    mode: FeatureMode,
    rng: &mut R,
) -> Result<FeatureAssignment> {
    let k = assignment.k();
    mode.check(k, k_f)?;
    let labels = match mode {
        FeatureMode::Match => assignment.labels().to_vec(),
        FeatureMode::Group => assignment.labels().iter().map(|&c| c % k_f).collect(),
        FeatureMode::Nest => {
            let mut parts: Vec<Vec<usize>> = (0..k).map(|c| vec![c]).collect();
            for j in 0..k_f - k {
                parts[j % k].push(k + j);
            }
            assignment
                .labels()
                .iter()
                .map(|&c| {
                    let p = &parts[c];
                    if p.len() == 1 {
                        p[0]
                    } else {
                        p[rng.random_range(0..p.len())]
                    }
                })
                .collect()
        }
    };
    Ok(FeatureAssignment { labels, k_f })
}

/// `k_f × s` matrix of i.i.d. `N(0, sigma_c²)` entries.
pub fn sample_centers<R: Rng + ?Sized>(k_f: usize, s: usize, sigma_c: f64, rng: &mut R) -> Centers {
    let values = (0..k_f * s)
        .map(|_| sigma_c * rng.sample::<f64, _>(StandardNormal))
        .collect();
    Matrix {
        rows: k_f,
        cols: s,
        values,
    }
}

/// Row `i` is `N(centers[label_i], sigma² I)`. Each row has its own stream
/// keyed by one `u64` taken from `rng` and the row index.
pub fn sample_node_features<R: Rng + ?Sized>(
    memberships: &FeatureAssignment,
    centers: &Centers,
    sigma: f64,
    rng: &mut R,
) -> Result<FeatureMatrix> {
    if let Some(&bad) = memberships.labels.iter().find(|&&c| c >= centers.rows()) {
        return Err(Error::InvalidParams(format!(
            "feature label {bad} has no center ({} centers)",
            centers.rows()
        )));
    }
    let base = rng.random::<u64>();
    let s = centers.cols();
    let mut out = Matrix::zeros(memberships.labels.len(), s);
    out.values
        .par_chunks_mut(s.max(1))
        .zip(memberships.labels.par_iter())
        .enumerate()
        .for_each(|(i, (row, &c))| {
            let mut stream = seeding::stream(base, &[i as u64]);
            for (x, &mu) in row.iter_mut().zip(centers.row(c)) {
                *x = mu + sigma * stream.sample::<f64, _>(StandardNormal);
            }
        });
    Ok(out)
}

/// One row per edge in canonical order: intra-cluster rows are
/// `N(0, sigma_e² I)`, inter-cluster rows `N(x_e·1, sigma_e² I)`.
pub fn sample_edge_features<R: Rng + ?Sized>(
    graph: &Graph,
    assignment: &ClusterAssignment,
    params: &EdgeFeatureParams,
    rng: &mut R,
) -> Result<EdgeFeatureMatrix> {
    params.validate()?;
    if assignment.n() != graph.node_count() {
        return Err(Error::LengthMismatch {
            left: assignment.n(),
            right: graph.node_count(),
        });
    }
    let base = rng.random::<u64>();
    let labels = assignment.labels();
    let s_e = params.s_e;
    let mut out = Matrix::zeros(graph.edge_count(), s_e);
    out.values
        .par_chunks_mut(s_e)
        .zip(graph.edges().par_iter())
        .enumerate()
        .for_each(|(i, (row, &(u, v)))| {
            let mean = if labels[u] == labels[v] { 0.0 } else { params.x_e };
            let mut stream = seeding::stream(base, &[i as u64]);
            for x in row.iter_mut() {
                *x = mean + params.sigma_e * stream.sample::<f64, _>(StandardNormal);
            }
        });
    Ok(out)
}

/// Between- over within-cluster sum of squares.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BssWssRatio {
    pub bss: f64,
    pub wss: f64,
    /// `bss / wss`; `+inf` when only `wss` vanishes, `0` when both do.
    pub ratio: f64,
    /// Set when both sums vanish and the ratio is a placeholder.
    pub degenerate: bool,
}

pub fn feature_separation_stats(
    features: &FeatureMatrix,
    labels: &[usize],
    k: usize,
) -> Result<BssWssRatio> {
    if labels.len() != features.rows() {
        return Err(Error::LengthMismatch {
            left: labels.len(),
            right: features.rows(),
        });
    }
    if k < 2 {
        return Err(Error::DegenerateClusters("need at least 2 clusters".into()));
    }
    let s = features.cols();
    let mut counts = vec![0usize; k];
    let mut sums = vec![0.0; k * s];
    let mut global = vec![0.0; s];
    for (row, &c) in features.iter_rows().zip(labels) {
        if c >= k {
            return Err(Error::DegenerateClusters(format!("label {c} outside 0..{k}")));
        }
        counts[c] += 1;
        for (j, &x) in row.iter().enumerate() {
            sums[c * s + j] += x;
            global[j] += x;
        }
    }
    if let Some(c) = counts.iter().position(|&n| n == 0) {
        return Err(Error::DegenerateClusters(format!("cluster {c} is empty")));
    }
    let n = labels.len() as f64;
    global.iter_mut().for_each(|g| *g /= n);
    let means: Vec<f64> = (0..k * s).map(|i| sums[i] / counts[i / s] as f64).collect();

    let bss: f64 = (0..k)
        .map(|c| {
            let d2: f64 = (0..s).map(|j| (means[c * s + j] - global[j]).powi(2)).sum();
            counts[c] as f64 * d2
        })
        .sum();
    let wss: f64 = features
        .iter_rows()
        .zip(labels)
        .map(|(row, &c)| {
            row.iter()
                .enumerate()
                .map(|(j, &x)| (x - means[c * s + j]).powi(2))
                .sum::<f64>()
        })
        .sum();

    let (ratio, degenerate) = if wss > 0.0 {
        (bss / wss, false)
    } else if bss > 0.0 {
        (f64::INFINITY, false)
    } else {
        (0.0, true)
    };
    Ok(BssWssRatio {
        bss,
        wss,
        ratio,
        degenerate,
    })
}
