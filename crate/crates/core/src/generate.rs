//! The full generation pipeline.

use crate::config::GeneratorConfig;
use crate::error::{Error, Result};
use crate::features::{
    build_feature_memberships, sample_centers, sample_edge_features, sample_node_features,
    EdgeFeatureMatrix, FeatureAssignment, FeatureMatrix,
};
use crate::graph::Graph;
use crate::sbm::{
    build_block_matrix, sample_degree_propensities, sample_graph_with, sample_memberships,
    ClusterAssignment, EdgeSampling,
};
use crate::seeding::{
    stream, TAG_CENTERS, TAG_EDGE_FEATURES, TAG_FEATURE_MEMBERSHIP, TAG_GRAPH, TAG_MEMBERSHIP,
    TAG_NODE_FEATURES, TAG_THETA,
};

/// Membership draws are repeated on fresh streams until every cluster is
/// populated, at most this many times.
pub const MEMBERSHIP_ATTEMPTS: u64 = 64;

/// One generated instance. The seed is `config.seed`.
#[derive(Clone, Debug, PartialEq)]
pub struct DatasetBundle {
    pub config: GeneratorConfig,
    pub assignment: ClusterAssignment,
    pub graph: Graph,
    pub features: FeatureMatrix,
    pub feature_assignment: FeatureAssignment,
    pub edge_features: Option<EdgeFeatureMatrix>,
}

impl DatasetBundle {
    pub fn seed(&self) -> u64 {
        self.config.seed
    }

    pub fn labels(&self) -> &[usize] {
        self.assignment.labels()
    }

    /// Cross-component shape checks.
    pub fn validate(&self) -> Result<()> {
        let n = self.graph.node_count();
        let shape = |what: &str, got: usize, want: usize| -> Result<()> {
            if got != want {
                return Err(Error::Validation(format!("{what}: expected {want}, found {got}")));
            }
            Ok(())
        };
        shape("node count", self.config.graph.n, n)?;
        shape("cluster labels", self.assignment.n(), n)?;
        shape("cluster count", self.assignment.k(), self.config.graph.k)?;
        shape("feature rows", self.features.rows(), n)?;
        shape("feature columns", self.features.cols(), self.config.features.s)?;
        shape("feature labels", self.feature_assignment.labels.len(), n)?;
        shape("feature clusters", self.feature_assignment.k_f, self.config.features.k_f)?;
        if let Some(&bad) = self.feature_assignment.labels.iter().find(|&&c| c >= self.feature_assignment.k_f) {
            return Err(Error::Validation(format!("feature label {bad} out of range")));
        }
        match (&self.edge_features, &self.config.edge_features) {
            (Some(m), Some(p)) => {
                shape("edge feature rows", m.rows(), self.graph.edge_count())?;
                shape("edge feature columns", m.cols(), p.s_e)?;
            }
            (None, None) => {}
            (Some(_), None) => {
                return Err(Error::Validation("edge features present but not configured".into()))
            }
            (None, Some(_)) => {
                return Err(Error::Validation("edge features configured but missing".into()))
            }
        }
        Ok(())
    }
}

fn draw_memberships(n: usize, k: usize, seed: u64) -> Result<ClusterAssignment> {
    let mut last = None;
    for attempt in 0..MEMBERSHIP_ATTEMPTS {
        match sample_memberships(n, k, &mut stream(seed, &[TAG_MEMBERSHIP, attempt])) {
            Ok(a) => return Ok(a),
            Err(e @ Error::EmptyBlock { .. }) => {
                log::debug!("membership attempt {attempt} left a cluster empty");
                last = Some(e);
            }
            Err(e) => return Err(e),
        }
    }
    Err(last.expect("at least one attempt"))
}

/// Runs memberships, block matrix, propensities, graph, feature memberships,
/// centers, node features and (if configured) edge features. Each stage reads
/// its own stream derived from the seed, so the bundle is a pure function of
/// the configuration.
pub fn generate(config: &GeneratorConfig) -> Result<DatasetBundle> {
    config.validate()?;
    let seed = config.seed;
    let gp = &config.graph;
    let fp = &config.features;

    let assignment = draw_memberships(gp.n, gp.k, seed)?;
    let block = build_block_matrix(gp, assignment.sizes())?;
    let theta =
        sample_degree_propensities(&assignment, &gp.power_law, &mut stream(seed, &[TAG_THETA]))?;
    let graph = sample_graph_with(
        &assignment,
        &block,
        &theta,
        &EdgeSampling::from(gp),
        &mut stream(seed, &[TAG_GRAPH]),
    )?;

    let feature_assignment = build_feature_memberships(
        &assignment,
        fp.k_f,
        fp.mode,
        &mut stream(seed, &[TAG_FEATURE_MEMBERSHIP]),
    )?;
    let centers = sample_centers(fp.k_f, fp.s, fp.sigma_c, &mut stream(seed, &[TAG_CENTERS]));
    let features = sample_node_features(
        &feature_assignment,
        &centers,
        fp.sigma,
        &mut stream(seed, &[TAG_NODE_FEATURES]),
    )?;
    let edge_features = config
        .edge_features
        .as_ref()
        .map(|ep| {
            sample_edge_features(&graph, &assignment, ep, &mut stream(seed, &[TAG_EDGE_FEATURES]))
        })
        .transpose()?;

    let bundle = DatasetBundle {
        config: config.clone(),
        assignment,
        graph,
        features,
        feature_assignment,
        edge_features,
    };
    debug_assert!(bundle.validate().is_ok());
    Ok(bundle)
}
