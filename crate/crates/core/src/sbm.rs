//! Degree-corrected stochastic block model.
//!
//! The pipeline is: draw cluster memberships, fix the k×k matrix of expected
//! edge counts from the target average degree and the inter-cluster degree,
//! draw power-law degree propensities, then sample each node pair
//! independently with a rate proportional to the product of the endpoint
//! propensities.

use rand::distr::Distribution;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::seeding;

/// How `d_out` relates to the other clusters.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutDegreeMode {
    /// `d_out` is a node's total expected degree into all other clusters,
    /// split evenly among them; `d_in = d - d_out`.
    #[default]
    Total,
    /// `d_out` is the expected degree into each other cluster;
    /// `d_in = d - (k - 1) * d_out`.
    PerCluster,
}

/// Converts a pair rate into an edge probability.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeMechanism {
    /// `p = min(rate, 1)`: block edge counts match the block matrix exactly
    /// in expectation whenever no rate exceeds 1.
    #[default]
    Bernoulli,
    /// `p = 1 - exp(-rate)`: a Poisson multigraph with multi-edges collapsed.
    /// Undershoots the block matrix by roughly `rate / 2` relative.
    PoissonCollapse,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PowerLawParams {
    pub d_min: f64,
    pub d_max: f64,
    pub alpha: f64,
}

impl Default for PowerLawParams {
    fn default() -> Self {
        PowerLawParams {
            d_min: 2.0,
            d_max: 4.0,
            alpha: 2.0,
        }
    }
}

impl PowerLawParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.d_min.is_finite() && self.d_max.is_finite() && self.alpha.is_finite()) {
            return Err(Error::InvalidParams("power-law parameters must be finite".into()));
        }
        if self.d_min <= 0.0 {
            return Err(Error::InvalidParams(format!("d_min = {} must be > 0", self.d_min)));
        }
        if self.d_max < self.d_min {
            return Err(Error::InvalidParams(format!(
                "d_max = {} must be >= d_min = {}",
                self.d_max, self.d_min
            )));
        }
        if self.alpha <= 0.0 {
            return Err(Error::InvalidParams(format!("alpha = {} must be > 0", self.alpha)));
        }
        Ok(())
    }
}

fn default_rate_cap() -> f64 {
    50.0
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GraphParams {
    pub n: usize,
    pub k: usize,
    /// Expected average degree.
    pub d: f64,
    /// Expected inter-cluster degree, read according to `out_degree`.
    pub d_out: f64,
    pub out_degree: OutDegreeMode,
    pub power_law: PowerLawParams,
    pub edge_mechanism: EdgeMechanism,
    /// Any pair rate above this aborts sampling with `RateOverflow`.
    pub rate_cap: f64,
}

impl Default for GraphParams {
    fn default() -> Self {
        GraphParams {
            n: 1000,
            k: 4,
            d: 20.0,
            d_out: 2.0,
            out_degree: OutDegreeMode::Total,
            power_law: PowerLawParams::default(),
            edge_mechanism: EdgeMechanism::Bernoulli,
            rate_cap: default_rate_cap(),
        }
    }
}

impl GraphParams {
    /// Expected degree of a node towards its own cluster.
    pub fn d_in(&self) -> f64 {
        match self.out_degree {
            OutDegreeMode::Total => self.d - self.d_out,
            OutDegreeMode::PerCluster => self.d - (self.k as f64 - 1.0) * self.d_out,
        }
    }

    /// Expected degree of a node towards one specific other cluster.
    pub fn d_out_per_cluster(&self) -> f64 {
        match self.out_degree {
            OutDegreeMode::Total => self.d_out / (self.k as f64 - 1.0),
            OutDegreeMode::PerCluster => self.d_out,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidParams("n must be positive".into()));
        }
        if self.k < 2 {
            return Err(Error::InvalidParams(format!("k = {} must be >= 2", self.k)));
        }
        if self.k > self.n {
            return Err(Error::InvalidParams(format!(
                "k = {} exceeds n = {}",
                self.k, self.n
            )));
        }
        if !(self.d.is_finite() && self.d > 0.0 && self.d < self.n as f64) {
            return Err(Error::InvalidParams(format!(
                "d = {} must lie in (0, n = {})",
                self.d, self.n
            )));
        }
        if !(self.d_out.is_finite() && self.d_out >= 0.0) {
            return Err(Error::InvalidParams(format!("d_out = {} must be >= 0", self.d_out)));
        }
        if self.d_in() < 0.0 {
            return Err(Error::InvalidParams(format!(
                "d_out = {} leaves a negative within-cluster degree (d = {}, mode {:?})",
                self.d_out, self.d, self.out_degree
            )));
        }
        if self.rate_cap.is_nan() || self.rate_cap <= 0.0 {
            return Err(Error::InvalidParams("rate_cap must be positive".into()));
        }
        self.power_law.validate()
    }
}

/// Cluster label of every node plus the realized block sizes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterAssignment {
    labels: Vec<usize>,
    sizes: Vec<usize>,
}

impl ClusterAssignment {
    /// Fails with `EmptyBlock` if some cluster in `0..k` has no node and with
    /// `Validation` if a label is out of range.
    pub fn from_labels(labels: Vec<usize>, k: usize) -> Result<Self> {
        let mut sizes = vec![0; k];
        for (i, &c) in labels.iter().enumerate() {
            if c >= k {
                return Err(Error::Validation(format!(
                    "node {i} has label {c} outside 0..{k}"
                )));
            }
            sizes[c] += 1;
        }
        if let Some(cluster) = sizes.iter().position(|&s| s == 0) {
            return Err(Error::EmptyBlock { cluster });
        }
        Ok(ClusterAssignment { labels, sizes })
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn k(&self) -> usize {
        self.sizes.len()
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    /// Node ids of each cluster, ascending.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out: Vec<Vec<usize>> = self.sizes.iter().map(|&s| Vec::with_capacity(s)).collect();
        for (i, &c) in self.labels.iter().enumerate() {
            out[c].push(i);
        }
        out
    }

    /// Renames cluster `c` to `perm[c]`.
    pub fn permute_clusters(&self, perm: &[usize]) -> Result<Self> {
        let labels = self.labels.iter().map(|&c| perm[c]).collect();
        ClusterAssignment::from_labels(labels, self.k())
    }
}

/// Draws every label independently and uniformly from `0..k`.
pub fn sample_memberships<R: Rng + ?Sized>(
    n: usize,
    k: usize,
    rng: &mut R,
) -> Result<ClusterAssignment> {
    if k < 2 {
        return Err(Error::InvalidParams(format!("k = {k} must be >= 2")));
    }
    let labels = (0..n).map(|_| rng.random_range(0..k)).collect();
    ClusterAssignment::from_labels(labels, k)
}

/// Symmetric matrix of expected edge counts between clusters. The diagonal
/// counts each within-cluster edge once.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockMatrix {
    k: usize,
    entries: Vec<f64>,
}

impl BlockMatrix {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let k = rows.len();
        let mut entries = Vec::with_capacity(k * k);
        for row in rows {
            if row.len() != k {
                return Err(Error::InvalidParams("block matrix must be square".into()));
            }
            entries.extend_from_slice(row);
        }
        let m = BlockMatrix { k, entries };
        for a in 0..k {
            for b in 0..k {
                let x = m.get(a, b);
                if !(x.is_finite() && x >= 0.0) {
                    return Err(Error::InvalidParams(format!("entry ({a}, {b}) = {x}")));
                }
                if x != m.get(b, a) {
                    return Err(Error::InvalidParams("block matrix must be symmetric".into()));
                }
            }
        }
        Ok(m)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.entries[a * self.k + b]
    }

    /// `2·Σ_a D_aa + 2·Σ_{a<b} D_ab`, i.e. the sum of all expected degrees.
    pub fn total_degree_mass(&self) -> f64 {
        let mut total = 0.0;
        for a in 0..self.k {
            total += 2.0 * self.get(a, a);
            for b in a + 1..self.k {
                total += 2.0 * self.get(a, b);
            }
        }
        total
    }

    /// Applies the cluster renaming `c -> perm[c]`.
    pub fn permute(&self, perm: &[usize]) -> Self {
        let mut entries = vec![0.0; self.k * self.k];
        for a in 0..self.k {
            for b in 0..self.k {
                entries[perm[a] * self.k + perm[b]] = self.get(a, b);
            }
        }
        BlockMatrix { k: self.k, entries }
    }
}

/// Fixes the expected edge counts from the realized block sizes.
///
/// Each node of cluster `a` expects `d_in` neighbours inside `a` and
/// `d_out_per_cluster` inside every other cluster. Off-diagonal entries
/// average the two per-node targets so the matrix stays symmetric when
/// blocks have different sizes.
pub fn build_block_matrix(params: &GraphParams, sizes: &[usize]) -> Result<BlockMatrix> {
    params.validate()?;
    if sizes.len() != params.k {
        return Err(Error::InvalidParams(format!(
            "{} block sizes given for k = {}",
            sizes.len(),
            params.k
        )));
    }
    if sizes.iter().sum::<usize>() != params.n {
        return Err(Error::InvalidParams("block sizes do not sum to n".into()));
    }
    let k = params.k;
    let d_in = params.d_in();
    let per_other = params.d_out_per_cluster();
    let mut entries = vec![0.0; k * k];
    for a in 0..k {
        entries[a * k + a] = sizes[a] as f64 * d_in / 2.0;
        for b in a + 1..k {
            let v = (sizes[a] as f64 * per_other + sizes[b] as f64 * per_other) / 2.0;
            entries[a * k + b] = v;
            entries[b * k + a] = v;
        }
    }
    Ok(BlockMatrix { k, entries })
}

/// Continuous power law with density proportional to `x^-alpha` on `[d_min, d_max]`,
/// sampled by inverting its CDF.
#[derive(Clone, Copy, Debug)]
pub struct TruncatedPowerLaw {
    params: PowerLawParams,
}

impl TruncatedPowerLaw {
    pub fn new(params: PowerLawParams) -> Result<Self> {
        params.validate()?;
        Ok(TruncatedPowerLaw { params })
    }

    /// Inverse CDF at `u ∈ [0, 1]`.
    pub fn quantile(&self, u: f64) -> f64 {
        let PowerLawParams { d_min: a, d_max: b, alpha } = self.params;
        if a == b {
            return a;
        }
        let x = if (alpha - 1.0).abs() < 1e-12 {
            a * (b / a).powf(u)
        } else {
            let e = 1.0 - alpha;
            let (lo, hi) = (a.powf(e), b.powf(e));
            (lo + u * (hi - lo)).powf(1.0 / e)
        };
        x.clamp(a, b)
    }

    /// Closed-form mean.
    pub fn mean(&self) -> f64 {
        let PowerLawParams { d_min: a, d_max: b, alpha } = self.params;
        if a == b {
            return a;
        }
        // ∫ x^{1-α} / ∫ x^{-α}, each integral written as a function of the exponent.
        let integral = |p: f64| {
            if (p + 1.0).abs() < 1e-12 {
                (b / a).ln()
            } else {
                (b.powf(p + 1.0) - a.powf(p + 1.0)) / (p + 1.0)
            }
        };
        integral(1.0 - alpha) / integral(-alpha)
    }
}

impl Distribution<f64> for TruncatedPowerLaw {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.quantile(rng.random::<f64>())
    }
}

/// Per-node degree propensities, scaled to mean 1 within every cluster.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThetaVector(Vec<f64>);

impl ThetaVector {
    pub fn new(theta: Vec<f64>) -> Result<Self> {
        if let Some(x) = theta.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
            return Err(Error::InvalidParams(format!("theta entry {x} must be positive")));
        }
        Ok(ThetaVector(theta))
    }

    /// All ones.
    pub fn uniform(n: usize) -> Self {
        ThetaVector(vec![1.0; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

pub fn sample_degree_propensities<R: Rng + ?Sized>(
    assignment: &ClusterAssignment,
    params: &PowerLawParams,
    rng: &mut R,
) -> Result<ThetaVector> {
    let dist = TruncatedPowerLaw::new(*params)?;
    let mut theta: Vec<f64> = (0..assignment.n()).map(|_| dist.sample(rng)).collect();
    let mut sums = vec![0.0; assignment.k()];
    for (&c, &t) in assignment.labels().iter().zip(&theta) {
        sums[c] += t;
    }
    for (t, &c) in theta.iter_mut().zip(assignment.labels()) {
        *t *= assignment.sizes()[c] as f64 / sums[c];
    }
    Ok(ThetaVector(theta))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EdgeSampling {
    pub mechanism: EdgeMechanism,
    pub rate_cap: f64,
}

impl Default for EdgeSampling {
    fn default() -> Self {
        EdgeSampling {
            mechanism: EdgeMechanism::Bernoulli,
            rate_cap: default_rate_cap(),
        }
    }
}

impl From<&GraphParams> for EdgeSampling {
    fn from(p: &GraphParams) -> Self {
        EdgeSampling {
            mechanism: p.edge_mechanism,
            rate_cap: p.rate_cap,
        }
    }
}

/// Samples a graph with the default edge mechanism and rate cap.
pub fn sample_graph<R: Rng + ?Sized>(
    assignment: &ClusterAssignment,
    block: &BlockMatrix,
    theta: &ThetaVector,
    rng: &mut R,
) -> Result<Graph> {
    sample_graph_with(assignment, block, theta, &EdgeSampling::default(), rng)
}

/// Samples every unordered pair `i < j` independently.
///
/// The pair rate is `θ_i θ_j D_ab / (n_a n_b)` across clusters and
/// `θ_i θ_j D_aa / (n_a (n_a - 1) / 2)` inside a cluster. Each block pair is
/// drawn from its own stream keyed by one `u64` taken from `rng`, so the
/// result does not depend on the rayon schedule.
pub fn sample_graph_with<R: Rng + ?Sized>(
    assignment: &ClusterAssignment,
    block: &BlockMatrix,
    theta: &ThetaVector,
    opts: &EdgeSampling,
    rng: &mut R,
) -> Result<Graph> {
    let n = assignment.n();
    let k = assignment.k();
    if block.k() != k || theta.0.len() != n {
        return Err(Error::InvalidParams(format!(
            "shape mismatch: {n} nodes / {k} clusters vs theta {} / block matrix {}",
            theta.0.len(),
            block.k()
        )));
    }
    let base = rng.random::<u64>();
    let members = assignment.members();
    let theta = theta.as_slice();
    let sizes = assignment.sizes();

    let mut pairs = Vec::with_capacity(k * (k + 1) / 2);
    for a in 0..k {
        for b in a..k {
            pairs.push((a, b));
        }
    }

    // Scale turning θ_i θ_j into a rate, or None when the block pair has no node pairs.
    let scale = |a: usize, b: usize| -> Option<f64> {
        let slots = if a == b {
            (sizes[a] * sizes[a].saturating_sub(1)) as f64 / 2.0
        } else {
            (sizes[a] * sizes[b]) as f64
        };
        (slots > 0.0).then(|| block.get(a, b) / slots)
    };

    let max_theta: Vec<f64> = members
        .iter()
        .map(|m| m.iter().map(|&i| theta[i]).fold(0.0, f64::max))
        .collect();
    for &(a, b) in &pairs {
        if let Some(s) = scale(a, b) {
            let peak = max_theta[a] * max_theta[b] * s;
            if !peak.is_finite() || peak > opts.rate_cap {
                return Err(Error::RateOverflow {
                    rate: peak,
                    cap: opts.rate_cap,
                });
            }
        }
    }

    let to_prob = |rate: f64| match opts.mechanism {
        EdgeMechanism::Bernoulli => rate.min(1.0),
        EdgeMechanism::PoissonCollapse => -(-rate).exp_m1(),
    };

    let chunks: Vec<Vec<(usize, usize)>> = pairs
        .par_iter()
        .enumerate()
        .map(|(idx, &(a, b))| {
            let mut out = Vec::new();
            let Some(s) = scale(a, b) else { return out };
            if s == 0.0 {
                return out;
            }
            let mut stream = seeding::stream(base, &[idx as u64]);
            let ma = &members[a];
            let mb = &members[b];
            for (x, &i) in ma.iter().enumerate() {
                let partners = if a == b { &ma[x + 1..] } else { &mb[..] };
                let ti = theta[i] * s;
                for &j in partners {
                    let p = to_prob(ti * theta[j]);
                    if stream.random::<f64>() < p {
                        out.push(if i < j { (i, j) } else { (j, i) });
                    }
                }
            }
            out
        })
        .collect();

    let mut edges: Vec<(usize, usize)> = chunks.into_iter().flatten().collect();
    edges.sort_unstable();
    Ok(Graph::from_sorted_unchecked(n, edges))
}

/// Inter-cluster degree at which the planted clusters stop being recoverable
/// by spectral methods: `d/k - sqrt(d/k)`, clamped to 0 when `d/k < 1`.
pub fn detectability_threshold(d: f64, k: usize) -> Result<f64> {
    if !(d.is_finite() && d > 0.0) || k < 2 {
        return Err(Error::InvalidParams(format!(
            "detectability threshold needs d > 0 and k >= 2 (got d = {d}, k = {k})"
        )));
    }
    let r = d / k as f64;
    Ok(if r < 1.0 { 0.0 } else { r - r.sqrt() })
}
