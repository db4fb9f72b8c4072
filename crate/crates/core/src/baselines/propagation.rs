use serde::{Deserialize, Serialize};

use super::{argmax, SplitSpec};
use crate::error::{Error, Result};
use crate::graph::Graph;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PropagationOptions {
    pub alpha: f64,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for PropagationOptions {
    fn default() -> Self {
        PropagationOptions {
            alpha: 0.9,
            max_iter: 50,
            tol: 1e-6,
        }
    }
}

/// Label spreading: `F ← α S F + (1 - α) Y` with `S = D^{-1/2} A D^{-1/2}`,
/// training rows clamped to their one-hot seed after every step.
///
/// Returns a label for every node. Unlabeled nodes that no seed reaches
/// (including isolated ones) get the most common training label.
pub fn label_propagation(
    graph: &Graph,
    split: &SplitSpec,
    labels: &[usize],
    opts: &PropagationOptions,
) -> Result<Vec<usize>> {
    let n = graph.node_count();
    if labels.len() != n || split.n != n {
        return Err(Error::LengthMismatch {
            left: labels.len(),
            right: n,
        });
    }
    if split.train.is_empty() {
        return Err(Error::InvalidParams("label propagation needs training labels".into()));
    }
    let classes = labels.iter().max().map_or(0, |&m| m + 1);
    let adj = graph.adjacency();
    let inv_sqrt: Vec<f64> = (0..n)
        .map(|i| match adj.degree(i) {
            0 => 0.0,
            d => 1.0 / (d as f64).sqrt(),
        })
        .collect();

    let mut seeds = vec![0.0; n * classes];
    let mut counts = vec![0.0; classes];
    for &i in &split.train {
        seeds[i * classes + labels[i]] = 1.0;
        counts[labels[i]] += 1.0;
    }
    let majority = argmax(&counts);
    let is_train = split.train_mask();

    let mut f = seeds.clone();
    let mut next = vec![0.0; n * classes];
    for _ in 0..opts.max_iter {
        for i in 0..n {
            let row = &mut next[i * classes..(i + 1) * classes];
            if is_train[i] {
                row.copy_from_slice(&seeds[i * classes..(i + 1) * classes]);
                continue;
            }
            row.fill(0.0);
            for &j in adj.neighbors(i) {
                let w = opts.alpha * inv_sqrt[i] * inv_sqrt[j];
                for (r, &x) in row.iter_mut().zip(&f[j * classes..(j + 1) * classes]) {
                    *r += w * x;
                }
            }
        }
        let change = next
            .iter()
            .zip(&f)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        std::mem::swap(&mut f, &mut next);
        if change < opts.tol {
            break;
        }
    }
    Ok((0..n)
        .map(|i| {
            let row = &f[i * classes..(i + 1) * classes];
            if row.iter().all(|&x| x == 0.0) {
                majority
            } else {
                argmax(row)
            }
        })
        .collect())
}
