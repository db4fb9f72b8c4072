//! On-disk bundle directories.
//!
//! ```text
//! edges.tsv           u<TAB>v per line, u < v, canonical order
//! labels.csv          one graph cluster id per line
//! feature_labels.csv  one feature cluster id per line
//! features.csv        n lines of s comma-separated reals
//! edge_features.csv   line i belongs to line i of edges.tsv (optional)
//! meta.json           schema version, seed, shapes and the generator config
//! ```
//!
//! Reals are written with 17 significant digits, which round-trips every
//! `f64` exactly.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::{GeneratorConfig, SCHEMA_VERSION};
use crate::error::{Error, Result};
use crate::features::{FeatureAssignment, Matrix};
use crate::generate::DatasetBundle;
use crate::graph::Graph;
use crate::sbm::ClusterAssignment;

pub const EDGES_FILE: &str = "edges.tsv";
pub const LABELS_FILE: &str = "labels.csv";
pub const FEATURE_LABELS_FILE: &str = "feature_labels.csv";
pub const FEATURES_FILE: &str = "features.csv";
pub const EDGE_FEATURES_FILE: &str = "edge_features.csv";
pub const META_FILE: &str = "meta.json";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BundleMeta {
    pub schema: u32,
    pub seed: u64,
    pub n: usize,
    pub k: usize,
    pub edges: usize,
    pub feature_dim: usize,
    pub edge_feature_dim: Option<usize>,
    pub config: GeneratorConfig,
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn write_matrix(m: &Matrix) -> String {
    let mut out = String::with_capacity(m.values().len() * 24);
    for row in m.iter_rows() {
        for (j, x) in row.iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            write!(out, "{x:.16e}").unwrap();
        }
        out.push('\n');
    }
    out
}

fn write_ids(ids: &[usize]) -> String {
    let mut out = String::with_capacity(ids.len() * 3);
    for id in ids {
        writeln!(out, "{id}").unwrap();
    }
    out
}

pub fn write_bundle(bundle: &DatasetBundle, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    bundle.validate()?;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;

    let mut edges = String::with_capacity(bundle.graph.edge_count() * 10);
    for (u, v) in bundle.graph.edges() {
        writeln!(edges, "{u}\t{v}").unwrap();
    }
    write_file(&dir.join(EDGES_FILE), &edges)?;
    write_file(&dir.join(LABELS_FILE), &write_ids(bundle.assignment.labels()))?;
    write_file(
        &dir.join(FEATURE_LABELS_FILE),
        &write_ids(&bundle.feature_assignment.labels),
    )?;
    write_file(&dir.join(FEATURES_FILE), &write_matrix(&bundle.features))?;
    let edge_path = dir.join(EDGE_FEATURES_FILE);
    match &bundle.edge_features {
        Some(m) => write_file(&edge_path, &write_matrix(m))?,
        // a stale file from an earlier bundle would contradict meta.json
        None if edge_path.exists() => fs::remove_file(&edge_path).map_err(|e| Error::io(&edge_path, e))?,
        None => {}
    }

    let meta = BundleMeta {
        schema: SCHEMA_VERSION,
        seed: bundle.seed(),
        n: bundle.graph.node_count(),
        k: bundle.assignment.k(),
        edges: bundle.graph.edge_count(),
        feature_dim: bundle.features.cols(),
        edge_feature_dim: bundle.edge_features.as_ref().map(Matrix::cols),
        config: bundle.config.clone(),
    };
    write_file(&dir.join(META_FILE), &serde_json::to_string_pretty(&meta)?)
}

fn read_required(dir: &Path, name: &str) -> Result<(PathBuf, String)> {
    let path = dir.join(name);
    match fs::read_to_string(&path) {
        Ok(text) => Ok((path, text)),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            Err(Error::Schema(format!("bundle is missing {name}")))
        }
        Err(e) => Err(Error::io(&path, e)),
    }
}

fn bad_line(path: &Path, line: usize, what: impl std::fmt::Display) -> Error {
    Error::Validation(format!("{}:{}: {what}", path.display(), line + 1))
}

fn parse_ids(path: &Path, text: &str, expected: usize) -> Result<Vec<usize>> {
    let ids = text
        .lines()
        .enumerate()
        .map(|(i, l)| l.trim().parse::<usize>().map_err(|e| bad_line(path, i, e)))
        .collect::<Result<Vec<_>>>()?;
    if ids.len() != expected {
        return Err(Error::Validation(format!(
            "{}: {} lines, expected {expected}",
            path.display(),
            ids.len()
        )));
    }
    Ok(ids)
}

fn parse_matrix(path: &Path, text: &str, rows: usize, cols: usize) -> Result<Matrix> {
    let mut values = Vec::with_capacity(rows * cols);
    let mut seen = 0;
    for (i, line) in text.lines().enumerate() {
        let before = values.len();
        for field in line.split(',') {
            let x: f64 = field.trim().parse().map_err(|e| bad_line(path, i, e))?;
            if !x.is_finite() {
                return Err(bad_line(path, i, "non-finite value"));
            }
            values.push(x);
        }
        if values.len() - before != cols {
            return Err(bad_line(path, i, format!("{} columns, expected {cols}", values.len() - before)));
        }
        seen += 1;
    }
    if seen != rows {
        return Err(Error::Validation(format!(
            "{}: {seen} rows, expected {rows}",
            path.display()
        )));
    }
    Matrix::from_vec(rows, cols, values)
}

pub fn read_bundle(dir: impl AsRef<Path>) -> Result<DatasetBundle> {
    let dir = dir.as_ref();
    let (meta_path, meta_text) = read_required(dir, META_FILE)?;
    let probe: serde_json::Value = serde_json::from_str(&meta_text)
        .map_err(|e| Error::Schema(format!("{}: {e}", meta_path.display())))?;
    match probe.get("schema").and_then(serde_json::Value::as_u64) {
        Some(v) if v == SCHEMA_VERSION as u64 => {}
        Some(v) => {
            return Err(Error::Schema(format!(
                "bundle schema {v} is not supported (expected {SCHEMA_VERSION})"
            )))
        }
        None => return Err(Error::Schema("meta.json has no schema version".into())),
    }
    let meta: BundleMeta = serde_json::from_value(probe)
        .map_err(|e| Error::Schema(format!("{}: {e}", meta_path.display())))?;
    meta.config
        .validate()
        .map_err(|e| Error::Validation(format!("config echo: {e}")))?;

    let (edges_path, edges_text) = read_required(dir, EDGES_FILE)?;
    let mut edges = Vec::with_capacity(meta.edges);
    for (i, line) in edges_text.lines().enumerate() {
        let mut cols = line.split('\t');
        let mut next = || -> Result<usize> {
            cols.next()
                .ok_or_else(|| bad_line(&edges_path, i, "expected two columns"))?
                .trim()
                .parse()
                .map_err(|e| bad_line(&edges_path, i, e))
        };
        let (u, v) = (next()?, next()?);
        if cols.next().is_some() {
            return Err(bad_line(&edges_path, i, "expected two columns"));
        }
        if u >= v || v >= meta.n {
            return Err(bad_line(&edges_path, i, format!("edge ({u}, {v}) invalid for n = {}", meta.n)));
        }
        edges.push((u, v));
    }
    if edges.len() != meta.edges {
        return Err(Error::Validation(format!(
            "{}: {} edges, meta.json says {}",
            edges_path.display(),
            edges.len(),
            meta.edges
        )));
    }
    if edges.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Validation(format!("{}: edges not in canonical order", edges_path.display())));
    }
    let graph = Graph::new(meta.n, edges).map_err(|e| Error::Validation(e.to_string()))?;

    let (labels_path, labels_text) = read_required(dir, LABELS_FILE)?;
    let labels = parse_ids(&labels_path, &labels_text, meta.n)?;
    let assignment =
        ClusterAssignment::from_labels(labels, meta.k).map_err(|e| Error::Validation(e.to_string()))?;

    let (fl_path, fl_text) = read_required(dir, FEATURE_LABELS_FILE)?;
    let feature_assignment = FeatureAssignment {
        labels: parse_ids(&fl_path, &fl_text, meta.n)?,
        k_f: meta.config.features.k_f,
    };

    let (f_path, f_text) = read_required(dir, FEATURES_FILE)?;
    let features = parse_matrix(&f_path, &f_text, meta.n, meta.feature_dim)?;

    let edge_features = match meta.edge_feature_dim {
        Some(cols) => {
            let (path, text) = read_required(dir, EDGE_FEATURES_FILE)?;
            Some(parse_matrix(&path, &text, graph.edge_count(), cols)?)
        }
        None => None,
    };

    let bundle = DatasetBundle {
        config: meta.config,
        assignment,
        graph,
        features,
        feature_assignment,
        edge_features,
    };
    if bundle.seed() != meta.seed {
        return Err(Error::Validation(format!(
            "meta.json seed {} disagrees with config seed {}",
            meta.seed,
            bundle.seed()
        )));
    }
    bundle.validate()?;
    Ok(bundle)
}
