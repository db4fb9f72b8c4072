//! Regularized spectral clustering.
//!
//! Nodes are embedded with the leading eigenvectors of
//! `M = D_τ^{-1/2} A D_τ^{-1/2}` where `D_τ = D + τI` and `τ` is the average
//! degree. The eigenvectors come from block power iteration on `M + I`
//! (whose spectrum lies in `[0, 2]`, so the largest-magnitude eigenvalues are
//! the largest algebraic ones of `M`) with Rayleigh–Ritz extraction and
//! locking of converged leading vectors.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::kmeans::{kmeans, KMeansOptions};
use crate::error::{Error, Result};
use crate::features::Matrix;
use crate::graph::{Adjacency, Graph};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SpectralOptions {
    /// Residual `‖Mv - λv‖` at which an eigenpair is accepted.
    pub tol: f64,
    pub max_iter: usize,
    /// Extra block vectors beyond `k`.
    pub oversample: usize,
    pub kmeans: KMeansOptions,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        SpectralOptions {
            tol: 1e-6,
            max_iter: 5000,
            oversample: 8,
            kmeans: KMeansOptions::default(),
        }
    }
}

/// `D_τ^{-1/2} A D_τ^{-1/2}` applied matrix-free.
#[derive(Clone, Debug)]
pub struct RegularizedAdjacency {
    adj: Adjacency,
    scale: Vec<f64>,
    tau: f64,
}

impl RegularizedAdjacency {
    pub fn new(graph: &Graph) -> Self {
        let n = graph.node_count();
        let adj = graph.adjacency();
        let tau = if n == 0 {
            0.0
        } else {
            2.0 * graph.edge_count() as f64 / n as f64
        };
        let scale = (0..n)
            .map(|i| {
                let d = adj.degree(i) as f64 + tau;
                if d > 0.0 {
                    1.0 / d.sqrt()
                } else {
                    0.0
                }
            })
            .collect();
        RegularizedAdjacency { adj, scale, tau }
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn dim(&self) -> usize {
        self.scale.len()
    }

    /// `y = M x`.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (i, out) in y.iter_mut().enumerate() {
            let acc: f64 = self.adj.neighbors(i).iter().map(|&j| self.scale[j] * x[j]).sum();
            *out = self.scale[i] * acc;
        }
    }
}

/// Leading eigenpairs, largest eigenvalue first.
#[derive(Clone, Debug)]
pub struct Eigenpairs {
    pub values: Vec<f64>,
    /// Unit-norm eigenvectors.
    pub vectors: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
    pub iterations: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += alpha * xi);
}

/// Orthonormalizes `block` against `locked` and itself (two passes of
/// modified Gram–Schmidt). Columns that vanish are replaced with fresh
/// random directions.
fn orthonormalize<R: Rng + ?Sized>(block: &mut [Vec<f64>], locked: &[Vec<f64>], rng: &mut R) {
    for i in 0..block.len() {
        for attempt in 0..4 {
            for _ in 0..2 {
                for q in locked.iter() {
                    let c = dot(q, &block[i]);
                    axpy(-c, q, &mut block[i]);
                }
                for j in 0..i {
                    let (head, tail) = block.split_at_mut(i);
                    let c = dot(&head[j], &tail[0]);
                    axpy(-c, &head[j], &mut tail[0]);
                }
            }
            let norm = dot(&block[i], &block[i]).sqrt();
            if norm > 1e-10 || attempt == 3 {
                let inv = if norm > 0.0 { 1.0 / norm } else { 0.0 };
                block[i].iter_mut().for_each(|v| *v *= inv);
                break;
            }
            block[i].iter_mut().for_each(|v| *v = rng.sample(StandardNormal));
        }
    }
}

/// Top-`k` eigenpairs of `op` by subspace iteration on `op + I`.
pub fn top_eigenpairs<R: Rng + ?Sized>(
    op: &RegularizedAdjacency,
    k: usize,
    opts: &SpectralOptions,
    rng: &mut R,
) -> Result<Eigenpairs> {
    let n = op.dim();
    if k == 0 || k > n {
        return Err(Error::InvalidParams(format!("cannot extract {k} eigenpairs of a {n}-dim operator")));
    }
    let shifted = |x: &[f64], y: &mut [f64]| {
        op.apply(x, y);
        axpy(1.0, x, y);
    };
    let m = (k + opts.oversample).min(n);
    let mut locked: Vec<Vec<f64>> = Vec::new();
    let mut locked_vals: Vec<f64> = Vec::new();
    let mut locked_res: Vec<f64> = Vec::new();
    let mut block: Vec<Vec<f64>> = (0..m)
        .map(|_| (0..n).map(|_| rng.sample(StandardNormal)).collect())
        .collect();
    orthonormalize(&mut block, &locked, rng);
    let mut images: Vec<Vec<f64>> = vec![vec![0.0; n]; m];
    let mut worst = f64::INFINITY;

    for iter in 1..=opts.max_iter {
        let active = m - locked.len();
        block.truncate(active);
        images.truncate(active);
        for (b, img) in block.iter().zip(images.iter_mut()) {
            shifted(b, img);
        }
        // Rayleigh–Ritz on span(block): H = Bᵀ (M+I) B.
        let h = DMatrix::from_fn(active, active, |i, j| {
            0.5 * (dot(&block[i], &images[j]) + dot(&block[j], &images[i]))
        });
        let eig = SymmetricEigen::new(h);
        let mut order: Vec<usize> = (0..active).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

        let rotate = |basis: &[Vec<f64>]| -> Vec<Vec<f64>> {
            order
                .iter()
                .map(|&c| {
                    let mut v = vec![0.0; n];
                    for (r, b) in basis.iter().enumerate() {
                        axpy(eig.eigenvectors[(r, c)], b, &mut v);
                    }
                    v
                })
                .collect()
        };
        let ritz = rotate(&block);
        let ritz_images = rotate(&images);

        // Lock the converged leading Ritz pairs, in order.
        let need = k - locked.len();
        worst = 0.0;
        let mut newly = 0;
        for (idx, &c) in order.iter().take(need).enumerate() {
            let theta = eig.eigenvalues[c];
            let mut r = ritz_images[idx].clone();
            axpy(-theta, &ritz[idx], &mut r);
            let res = dot(&r, &r).sqrt();
            worst = worst.max(res);
            if res <= opts.tol && idx == newly {
                newly += 1;
            }
        }
        for idx in 0..newly {
            locked.push(ritz[idx].clone());
            locked_vals.push(eig.eigenvalues[order[idx]] - 1.0);
            let mut r = ritz_images[idx].clone();
            axpy(-eig.eigenvalues[order[idx]], &ritz[idx], &mut r);
            locked_res.push(dot(&r, &r).sqrt());
        }
        if locked.len() >= k {
            return Ok(Eigenpairs {
                values: locked_vals,
                vectors: locked,
                residuals: locked_res,
                iterations: iter,
            });
        }
        // Next block: images of the unlocked Ritz vectors.
        block = ritz_images.into_iter().skip(newly).collect();
        orthonormalize(&mut block, &locked, rng);
        images.resize(block.len(), vec![0.0; n]);
    }
    Err(Error::ConvergenceFailure {
        iterations: opts.max_iter,
        residual: worst,
    })
}

#[derive(Clone, Debug)]
pub struct SpectralFit {
    pub labels: Vec<usize>,
    pub eigenpairs: Eigenpairs,
}

/// Clusters the rows of the row-normalized top-`k` eigenvector embedding with k-means.
pub fn spectral_graph_clustering<R: Rng + ?Sized>(
    graph: &Graph,
    k: usize,
    opts: &SpectralOptions,
    rng: &mut R,
) -> Result<SpectralFit> {
    if k < 2 {
        return Err(Error::InvalidParams(format!("k = {k} must be >= 2")));
    }
    let op = RegularizedAdjacency::new(graph);
    let pairs = top_eigenpairs(&op, k, opts, rng)?;
    let n = graph.node_count();
    let mut embedding = Matrix::zeros(n, k);
    for i in 0..n {
        let row = embedding.row_mut(i);
        for (c, v) in pairs.vectors.iter().enumerate() {
            row[c] = v[i];
        }
        let norm = dot(row, row).sqrt();
        if norm > 0.0 {
            row.iter_mut().for_each(|x| *x /= norm);
        }
    }
    let fit = kmeans(&embedding, k, &opts.kmeans, rng)?;
    Ok(SpectralFit {
        labels: fit.labels,
        eigenpairs: pairs,
    })
}
