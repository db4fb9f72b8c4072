//! Classical reference methods: graph-only and feature-only clustering for
//! the unsupervised task, and graph-only and feature-only classifiers for
//! the few-shot semi-supervised task.

mod centroid;
mod kmeans;
mod propagation;
mod spectral;
mod split;

pub use centroid::nearest_centroid;
pub use kmeans::{kmeans, KMeansFit, KMeansOptions};
pub use propagation::{label_propagation, PropagationOptions};
pub use spectral::{
    spectral_graph_clustering, top_eigenpairs, Eigenpairs, RegularizedAdjacency, SpectralFit,
    SpectralOptions,
};
pub use split::{make_few_shot_split, SplitSpec};

/// Index of the largest entry; ties go to the lowest index.
pub(crate) fn argmax(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate().skip(1) {
        if x > xs[best] {
            best = i;
        }
    }
    best
}

pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}
