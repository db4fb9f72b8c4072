//! JSON configuration documents.
//!
//! Both documents carry `"schema": 1`. Every section may be partial; missing
//! fields take the default values (n = 1000, k = 4, d = 20, d_out = 2,
//! d_min = 2, d_max = 4, alpha = 2, s = 32, k_f = 4, match, sigma = 1,
//! sigma_c = 3, no edge features).

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::baselines::{KMeansOptions, PropagationOptions, SpectralOptions};
use crate::error::{Error, Result};
use crate::features::{EdgeFeatureParams, FeatureParams};
use crate::sbm::GraphParams;

pub const SCHEMA_VERSION: u32 = 1;

fn schema_version() -> u32 {
    SCHEMA_VERSION
}

fn check_schema(found: u32) -> Result<()> {
    if found != SCHEMA_VERSION {
        return Err(Error::Config(format!(
            "schema version {found} is not supported (expected {SCHEMA_VERSION})"
        )));
    }
    Ok(())
}

/// Everything needed to reproduce one draw.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorConfig {
    #[serde(default = "schema_version")]
    pub schema: u32,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub graph: GraphParams,
    #[serde(default)]
    pub features: FeatureParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge_features: Option<EdgeFeatureParams>,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            schema: SCHEMA_VERSION,
            seed: 0,
            graph: GraphParams::default(),
            features: FeatureParams::default(),
            edge_features: None,
        }
    }
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<()> {
        check_schema(self.schema)?;
        self.graph.validate()?;
        self.features.validate(self.graph.k)?;
        if let Some(e) = &self.edge_features {
            e.validate()?;
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: GeneratorConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    /// Applies the semi-supervised overrides: 4-dimensional features with
    /// unit center spread, half of the degree across clusters, and
    /// 4-dimensional edge features with spread 0.5 and shift 2.
    pub fn semi_supervised(mut self) -> Self {
        self.features.s = 4;
        self.features.sigma_c = 1.0;
        self.graph.d_out = 0.5 * self.graph.d;
        self.edge_features = Some(EdgeFeatureParams {
            s_e: 4,
            sigma_e: 0.5,
            x_e: 2.0,
        });
        self
    }

    /// Sets a named scalar parameter. `d_out_ratio` sets `d_out = value · d`.
    pub fn set_param(&mut self, name: &str, value: f64) -> Result<()> {
        let as_count = |v: f64| -> Result<usize> {
            if v.fract() == 0.0 && v >= 0.0 && v <= usize::MAX as f64 {
                Ok(v as usize)
            } else {
                Err(Error::Config(format!("{name} needs a nonnegative integer, got {v}")))
            }
        };
        match name {
            "n" => self.graph.n = as_count(value)?,
            "k" => self.graph.k = as_count(value)?,
            "d" => self.graph.d = value,
            "d_out" => self.graph.d_out = value,
            "d_out_ratio" => self.graph.d_out = value * self.graph.d,
            "d_min" => self.graph.power_law.d_min = value,
            "d_max" => self.graph.power_law.d_max = value,
            "alpha" => self.graph.power_law.alpha = value,
            "rate_cap" => self.graph.rate_cap = value,
            "s" => self.features.s = as_count(value)?,
            "k_f" => self.features.k_f = as_count(value)?,
            "sigma_c" => self.features.sigma_c = value,
            "sigma" => self.features.sigma = value,
            "s_e" | "sigma_e" | "x_e" => {
                let e = self.edge_features.get_or_insert_with(EdgeFeatureParams::default);
                match name {
                    "s_e" => e.s_e = as_count(value)?,
                    "sigma_e" => e.sigma_e = value,
                    _ => e.x_e = value,
                }
            }
            _ => return Err(Error::Config(format!("unknown parameter `{name}`"))),
        }
        Ok(())
    }
}

/// Parameters the sweep runner knows how to vary.
pub const SWEEPABLE: &[&str] = &[
    "n",
    "k",
    "d",
    "d_out",
    "d_out_ratio",
    "d_min",
    "d_max",
    "alpha",
    "rate_cap",
    "s",
    "k_f",
    "sigma_c",
    "sigma",
    "s_e",
    "sigma_e",
    "x_e",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Unsupervised,
    SemiSupervised,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Regularized spectral clustering of the graph.
    Spectral,
    /// k-means on node features.
    Kmeans,
    /// Label spreading over the graph from the training nodes.
    LabelPropagation,
    /// Nearest training-class centroid in feature space.
    NearestCentroid,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::Spectral,
        Method::Kmeans,
        Method::LabelPropagation,
        Method::NearestCentroid,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Spectral => "spectral",
            Method::Kmeans => "kmeans",
            Method::LabelPropagation => "label_propagation",
            Method::NearestCentroid => "nearest_centroid",
        }
    }

    pub fn parse(s: &str) -> Result<Method> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown method `{s}`")))
    }

    pub fn task(self) -> Task {
        match self {
            Method::Spectral | Method::Kmeans => Task::Unsupervised,
            Method::LabelPropagation | Method::NearestCentroid => Task::SemiSupervised,
        }
    }

    /// Stable stream id, independent of the method's position in a list.
    pub(crate) fn stream_id(self) -> u64 {
        self as u64
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.pad(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitParams {
    pub shots: usize,
    pub val_per_class: usize,
}

impl Default for SplitParams {
    fn default() -> Self {
        SplitParams {
            shots: 20,
            val_per_class: 30,
        }
    }
}

/// Settings of the baseline methods.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MethodOptions {
    pub kmeans: KMeansOptions,
    pub spectral: SpectralOptions,
    pub propagation: PropagationOptions,
}

fn default_trials() -> usize {
    20
}

fn default_confidence() -> f64 {
    crate::metrics::DEFAULT_CONFIDENCE
}

/// One parameter sweep. The master seed is `base.seed`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default = "schema_version")]
    pub schema: u32,
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub base: GeneratorConfig,
    pub param: String,
    pub values: Vec<f64>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    pub methods: Vec<Method>,
    pub task: Task,
    #[serde(default)]
    pub split: SplitParams,
    #[serde(default = "default_confidence")]
    pub confidence: f64,
    #[serde(default)]
    pub options: MethodOptions,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        check_schema(self.schema)?;
        if self.values.is_empty() {
            return Err(Error::Config("sweep grid is empty".into()));
        }
        if !SWEEPABLE.contains(&self.param.as_str()) {
            return Err(Error::Config(format!(
                "`{}` is not a sweepable parameter (one of {})",
                self.param,
                SWEEPABLE.join(", ")
            )));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be >= 1".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::Config("no methods selected".into()));
        }
        if let Some(m) = self.methods.iter().find(|m| m.task() != self.task) {
            return Err(Error::Config(format!("method {m} does not fit task {:?}", self.task)));
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return Err(Error::Config("confidence must lie in (0, 1)".into()));
        }
        for &v in &self.values {
            self.config_at(v)?;
        }
        Ok(())
    }

    /// The base configuration with the swept parameter set to `value`.
    pub fn config_at(&self, value: f64) -> Result<GeneratorConfig> {
        let mut cfg = self.base.clone();
        cfg.set_param(&self.param, value)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_from_empty_document() {
        let cfg = GeneratorConfig::from_json("{}").unwrap();
        assert_eq!(cfg, GeneratorConfig::default());
        assert_eq!(cfg.graph.n, 1000);
        assert_eq!(cfg.features.sigma_c, 3.0);
    }

    #[test]
    fn partial_sections_fill_in() {
        let cfg = GeneratorConfig::from_json(
            r#"{"schema": 1, "seed": 5, "graph": {"d_out": 3.5}, "edge_features": {"x_e": 1}}"#,
        )
        .unwrap();
        assert_eq!(cfg.graph.d_out, 3.5);
        assert_eq!(cfg.graph.d, 20.0);
        assert_eq!(cfg.edge_features.unwrap().s_e, 4);
        assert_eq!(cfg.edge_features.unwrap().sigma_e, 1.0);
    }

    #[test]
    fn rejects_bad_documents() {
        assert!(matches!(
            GeneratorConfig::from_json(r#"{"schema": 2}"#),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            GeneratorConfig::from_json(r#"{"graph": {"dout": 1}}"#),
            Err(Error::Json(_))
        ));
        assert!(matches!(
            GeneratorConfig::from_json(r#"{"graph": {"d_out": 25}}"#),
            Err(Error::InvalidParams(_))
        ));
    }

    #[test]
    fn set_param_covers_sweepable_names() {
        for name in SWEEPABLE {
            let mut cfg = GeneratorConfig::default();
            cfg.set_param(name, 4.0).unwrap();
        }
        let mut cfg = GeneratorConfig::default();
        cfg.set_param("d_out_ratio", 0.25).unwrap();
        assert_eq!(cfg.graph.d_out, 5.0);
        assert!(cfg.set_param("s", 2.5).is_err());
        assert!(cfg.set_param("bogus", 1.0).is_err());
    }

    #[test]
    fn scenario_validation() {
        let ok = r#"{"param": "d_out", "values": [1, 2], "methods": ["spectral"], "task": "unsupervised"}"#;
        let sc = ScenarioConfig::from_json(ok).unwrap();
        assert_eq!(sc.trials, 20);
        let bad_param = ok.replace("\"d_out\"", "\"colour\"");
        assert!(matches!(ScenarioConfig::from_json(&bad_param), Err(Error::Config(_))));
        let empty = ok.replace("[1, 2]", "[]");
        assert!(matches!(ScenarioConfig::from_json(&empty), Err(Error::Config(_))));
        let wrong_task = ok.replace("spectral", "label_propagation");
        assert!(matches!(ScenarioConfig::from_json(&wrong_task), Err(Error::Config(_))));
        let invalid_value = ok.replace("[1, 2]", "[1, 40]");
        assert!(matches!(
            ScenarioConfig::from_json(&invalid_value),
            Err(Error::InvalidParams(_))
        ));
    }
}
