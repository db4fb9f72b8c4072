//! Attributed degree-corrected stochastic block model (ADC-SBM) generator
//! and a small benchmark harness around it.
//!
//! A draw produces a simple undirected graph with planted clusters and
//! power-law degree propensities, Gaussian-mixture node features whose
//! clusters match, nest or group the graph clusters, and optional edge
//! features that shift with whether an edge crosses clusters. The harness
//! sweeps one generator parameter at a time and scores classical baselines
//! against the planted labels.

pub mod baselines;
pub mod bundle;
pub mod calibrate;
pub mod config;
pub mod error;
pub mod features;
pub mod generate;
pub mod graph;
pub mod metrics;
pub mod sbm;
pub mod scenario;
pub mod seeding;

pub use bundle::{read_bundle, write_bundle};
pub use config::{GeneratorConfig, Method, ScenarioConfig, Task};
pub use error::{Error, Result};
pub use generate::{generate, DatasetBundle};
pub use scenario::{run_scenario, ScenarioResult};
