//! Parameter sweeps over the generator, scored with the baselines.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{
    kmeans, label_propagation, make_few_shot_split, nearest_centroid, spectral_graph_clustering,
};
use crate::config::{GeneratorConfig, Method, MethodOptions, ScenarioConfig, SplitParams, Task};
use crate::error::{Error, Result};
use crate::generate::{generate, DatasetBundle};
use crate::metrics::{aggregate, classification_accuracy, nmi, AggregateStat};
use crate::sbm::OutDegreeMode;
use crate::seeding::{derive_seed, stream, TAG_METHOD, TAG_SPLIT};

pub const RESULTS_HEADER: [&str; 7] = ["param", "value", "method", "metric", "trial", "seed", "score"];
pub const AGGREGATES_HEADER: [&str; 7] = ["param", "value", "method", "metric", "mean", "ci95", "n"];

/// Seed of trial `trial` at grid position `grid`.
pub fn trial_seed(master: u64, grid: usize, trial: usize) -> u64 {
    derive_seed(master, &[grid as u64, trial as u64])
}

pub fn metric_name(task: Task) -> &'static str {
    match task {
        Task::Unsupervised => "nmi",
        Task::SemiSupervised => "accuracy",
    }
}

/// Scores one method on one bundle, using the bundle's seed for the
/// method's randomness and for the split.
///
/// Unsupervised methods are scored by NMI against the graph clusters (both
/// cluster with `k` groups); semi-supervised ones by test accuracy on a
/// few-shot split.
pub fn evaluate(
    bundle: &DatasetBundle,
    method: Method,
    options: &MethodOptions,
    split: &SplitParams,
) -> Result<f64> {
    let seed = bundle.seed();
    let truth = bundle.labels();
    let k = bundle.assignment.k();
    let mut rng = stream(seed, &[TAG_METHOD, method.stream_id()]);
    match method {
        Method::Spectral => {
            let fit = spectral_graph_clustering(&bundle.graph, k, &options.spectral, &mut rng)?;
            nmi(&fit.labels, truth)
        }
        Method::Kmeans => {
            let fit = kmeans(&bundle.features, k, &options.kmeans, &mut rng)?;
            nmi(&fit.labels, truth)
        }
        Method::LabelPropagation | Method::NearestCentroid => {
            let spec = make_few_shot_split(
                truth,
                split.shots,
                split.val_per_class,
                &mut stream(seed, &[TAG_SPLIT]),
            )?;
            let pred = if method == Method::LabelPropagation {
                label_propagation(&bundle.graph, &spec, truth, &options.propagation)?
            } else {
                nearest_centroid(&bundle.features, &spec, truth)?
            };
            classification_accuracy(&pred, truth, &spec.test_mask())
        }
    }
}

/// One raw score. Failed trials carry `NaN`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub param: String,
    pub value: f64,
    pub method: Method,
    pub metric: String,
    pub trial: usize,
    pub seed: u64,
    pub score: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub param: String,
    pub value: f64,
    pub method: Method,
    pub metric: String,
    pub mean: f64,
    pub ci95: f64,
    /// Successful trials.
    pub n: usize,
}

impl AggregateRow {
    /// With a single successful trial the interval is undefined and `ci95`
    /// is reported as 0.
    pub fn interval_undefined(&self) -> bool {
        self.n < 2
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioResult {
    pub name: String,
    pub param: String,
    pub rows: Vec<ResultRow>,
    pub aggregates: Vec<AggregateRow>,
}

/// Aggregates rows per `(value, method, metric)` in first-appearance order,
/// skipping `NaN` scores.
pub fn aggregate_rows(rows: &[ResultRow], confidence: f64) -> Result<Vec<AggregateRow>> {
    let mut keys: Vec<(f64, Method, &str)> = Vec::new();
    for r in rows {
        let key = (r.value, r.method, r.metric.as_str());
        if !keys.iter().any(|k| k.0.to_bits() == key.0.to_bits() && k.1 == key.1 && k.2 == key.2) {
            keys.push(key);
        }
    }
    keys.into_iter()
        .map(|(value, method, metric)| {
            let scores: Vec<f64> = rows
                .iter()
                .filter(|r| r.value.to_bits() == value.to_bits() && r.method == method && r.metric == metric)
                .map(|r| r.score)
                .filter(|s| !s.is_nan())
                .collect();
            let param = rows[0].param.clone();
            let stat = match scores.len() {
                0 => {
                    return Err(Error::AllTrialsFailed {
                        param,
                        value,
                        method: method.to_string(),
                    })
                }
                1 => AggregateStat {
                    mean: scores[0],
                    half_width: 0.0,
                    n_trials: 1,
                },
                _ => aggregate(&scores, confidence)?,
            };
            Ok(AggregateRow {
                param,
                value,
                method,
                metric: metric.to_string(),
                mean: stat.mean,
                ci95: stat.half_width,
                n: stat.n_trials,
            })
        })
        .collect()
}

/// Generates one trial's bundle and scores every method on it.
fn run_cell(sc: &ScenarioConfig, grid: usize, trial: usize) -> Vec<ResultRow> {
    let value = sc.values[grid];
    let seed = trial_seed(sc.base.seed, grid, trial);
    let row = |method: Method, score: f64| ResultRow {
        param: sc.param.clone(),
        value,
        method,
        metric: metric_name(sc.task).to_string(),
        trial,
        seed,
        score,
    };
    let bundle = sc.config_at(value).and_then(|mut cfg| {
        cfg.seed = seed;
        generate(&cfg)
    });
    let bundle = match bundle {
        Ok(b) => b,
        Err(e) => {
            log::warn!("{} = {value}, trial {trial}: generation failed: {e}", sc.param);
            return sc.methods.iter().map(|&m| row(m, f64::NAN)).collect();
        }
    };
    sc.methods
        .iter()
        .map(|&m| match evaluate(&bundle, m, &sc.options, &sc.split) {
            Ok(score) => row(m, score),
            Err(e) => {
                log::warn!("{} = {value}, trial {trial}, {m}: {e}", sc.param);
                row(m, f64::NAN)
            }
        })
        .collect()
}

/// Runs every `(grid value, trial)` cell on a pool of `workers` threads.
/// Rows come back in cell order whatever the worker count.
pub fn run_scenario(sc: &ScenarioConfig, workers: usize) -> Result<ScenarioResult> {
    sc.validate()?;
    let cells: Vec<(usize, usize)> = (0..sc.values.len())
        .flat_map(|g| (0..sc.trials).map(move |t| (g, t)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start {workers} workers: {e}")))?;
    let rows: Vec<ResultRow> = pool.install(|| {
        cells
            .par_iter()
            .map(|&(g, t)| run_cell(sc, g, t))
            .collect::<Vec<_>>()
            .into_iter()
            .flatten()
            .collect()
    });
    let aggregates = aggregate_rows(&rows, sc.confidence)?;
    for a in aggregates.iter().filter(|a| a.interval_undefined()) {
        log::warn!(
            "{} = {}, {}: one successful trial, ci95 reported as 0",
            a.param,
            a.value,
            a.method
        );
    }
    Ok(ScenarioResult {
        name: sc.name.clone(),
        param: sc.param.clone(),
        rows,
        aggregates,
    })
}

fn to_csv<T: Serialize>(items: &[T], header: &[&str]) -> Result<String> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(header)?;
    for item in items {
        w.serialize(item)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Csv(e.into_error().into()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

fn from_csv<T: for<'de> Deserialize<'de>>(text: &str, header: &[&str]) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    if r.headers()?.iter().ne(header.iter().copied()) {
        return Err(Error::Schema(format!("expected header {}", header.join(","))));
    }
    Ok(r.deserialize().collect::<std::result::Result<Vec<T>, _>>()?)
}

impl ScenarioResult {
    pub fn results_csv(&self) -> Result<String> {
        to_csv(&self.rows, &RESULTS_HEADER)
    }

    pub fn aggregates_csv(&self) -> Result<String> {
        to_csv(&self.aggregates, &AGGREGATES_HEADER)
    }

    /// Writes `results` and, next to it, `aggregates.csv`.
    pub fn write(&self, results: impl AsRef<Path>) -> Result<()> {
        let results = results.as_ref();
        let aggregates = results.with_file_name("aggregates.csv");
        if let Some(dir) = results.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        std::fs::write(results, self.results_csv()?).map_err(|e| Error::io(results, e))?;
        std::fs::write(&aggregates, self.aggregates_csv()?).map_err(|e| Error::io(&aggregates, e))
    }
}

pub fn parse_results_csv(text: &str) -> Result<Vec<ResultRow>> {
    from_csv(text, &RESULTS_HEADER)
}

pub fn parse_aggregates_csv(text: &str) -> Result<Vec<AggregateRow>> {
    from_csv(text, &AGGREGATES_HEADER)
}

/// Names accepted by [`preset`].
pub const PRESETS: &[&str] = &[
    "graph-signal",
    "feature-signal",
    "density",
    "power-law",
    "feature-dim",
    "graph-signal-ratio",
];

fn linspace(start: f64, stop: f64, steps: usize) -> Vec<f64> {
    (0..=steps)
        .map(|i| start + (stop - start) * i as f64 / steps as f64)
        .collect()
}

fn powers(base: f64, lo: i32, hi: i32) -> Vec<f64> {
    (lo..=hi).map(|e| base.powi(e)).collect()
}

/// Built-in sweeps. Unsupervised presets run spectral clustering and
/// k-means; semi-supervised presets start from the semi-supervised
/// overrides and run label propagation and nearest centroid.
pub fn preset(name: &str) -> Result<ScenarioConfig> {
    let unsupervised = |param: &str, values: Vec<f64>, base: GeneratorConfig| ScenarioConfig {
        schema: crate::config::SCHEMA_VERSION,
        name: name.to_string(),
        base,
        param: param.to_string(),
        values,
        trials: 20,
        methods: vec![Method::Spectral, Method::Kmeans],
        task: Task::Unsupervised,
        split: SplitParams::default(),
        confidence: crate::metrics::DEFAULT_CONFIDENCE,
        options: MethodOptions::default(),
    };
    let semi = |param: &str, values: Vec<f64>| ScenarioConfig {
        methods: vec![Method::LabelPropagation, Method::NearestCentroid],
        task: Task::SemiSupervised,
        ..unsupervised(param, values, GeneratorConfig::default().semi_supervised())
    };
    let sc = match name {
        "graph-signal" => {
            // d_out is the degree towards each other cluster here, so the top
            // of the grid (d_out = d / k) is an unstructured graph.
            let mut base = GeneratorConfig::default();
            base.graph.out_degree = OutDegreeMode::PerCluster;
            unsupervised("d_out", linspace(1.0, 5.0, 8), base)
        }
        "feature-signal" => unsupervised(
            "sigma_c",
            (0..=6).map(|i| 10f64.powf(-2.0 + 0.5 * i as f64)).collect(),
            GeneratorConfig::default(),
        ),
        "density" => unsupervised("d", powers(2.0, 2, 7), GeneratorConfig::default()),
        "power-law" => {
            let mut base = GeneratorConfig::default();
            // heavy tails push single pair rates far past the default cap
            base.graph.rate_cap = 1e6;
            unsupervised("d_max", powers(2.0, 2, 10), base)
        }
        "feature-dim" => semi("s", powers(2.0, 1, 7)),
        "graph-signal-ratio" => semi("d_out_ratio", linspace(0.0, 1.0, 10)),
        _ => {
            return Err(Error::Config(format!(
                "unknown preset `{name}` (one of {})",
                PRESETS.join(", ")
            )))
        }
    };
    sc.validate()?;
    Ok(sc)
}

/// A preset name or the path of a scenario JSON file.
pub fn load_scenario(spec: &str) -> Result<ScenarioConfig> {
    if PRESETS.contains(&spec) {
        preset(spec)
    } else if Path::new(spec).exists() {
        ScenarioConfig::load(spec)
    } else {
        Err(Error::Config(format!(
            "`{spec}` is neither a preset ({}) nor an existing file",
            PRESETS.join(", ")
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(param: &str, values: Vec<f64>, methods: Vec<Method>, task: Task) -> ScenarioConfig {
        let mut base = GeneratorConfig::default();
        base.graph.n = 200;
        base.graph.d = 10.0;
        base.graph.d_out = 1.0;
        base.features.s = 4;
        if task == Task::SemiSupervised {
            base = base.semi_supervised();
        }
        ScenarioConfig {
            schema: 1,
            name: "t".into(),
            base,
            param: param.into(),
            values,
            trials: 3,
            methods,
            task,
            split: SplitParams {
                shots: 5,
                val_per_class: 5,
            },
            confidence: 0.95,
            options: MethodOptions::default(),
        }
    }

    #[test]
    fn presets_validate() {
        for name in PRESETS {
            let sc = preset(name).unwrap();
            assert_eq!(sc.trials, 20);
            assert!(!sc.values.is_empty());
        }
        assert_eq!(preset("graph-signal").unwrap().values.len(), 9);
        assert_eq!(preset("density").unwrap().values, vec![4.0, 8.0, 16.0, 32.0, 64.0, 128.0]);
        assert_eq!(*preset("power-law").unwrap().values.last().unwrap(), 1024.0);
        let fs = preset("feature-signal").unwrap().values;
        assert!((fs[0] - 0.01).abs() < 1e-15 && (fs[6] - 10.0).abs() < 1e-12);
        assert!(preset("nope").is_err());
    }

    #[test]
    fn rows_and_aggregates_shape() {
        let sc = small("d_out", vec![0.5, 2.0], vec![Method::Spectral, Method::Kmeans], Task::Unsupervised);
        let res = run_scenario(&sc, 2).unwrap();
        assert_eq!(res.rows.len(), 2 * 3 * 2);
        assert_eq!(res.aggregates.len(), 2 * 2);
        assert!(res.aggregates.iter().all(|a| a.n == 3 && a.metric == "nmi"));
        assert_eq!(aggregate_rows(&res.rows, 0.95).unwrap(), res.aggregates);
    }

    #[test]
    fn worker_count_does_not_change_rows() {
        let sc = small("d_out_ratio", vec![0.0, 1.0], vec![Method::LabelPropagation, Method::NearestCentroid], Task::SemiSupervised);
        let a = run_scenario(&sc, 1).unwrap();
        let b = run_scenario(&sc, 4).unwrap();
        assert_eq!(a.results_csv().unwrap(), b.results_csv().unwrap());
    }

    #[test]
    fn csv_round_trip_reproduces_aggregates() {
        let sc = small("sigma_c", vec![0.1, 3.0], vec![Method::Kmeans], Task::Unsupervised);
        let res = run_scenario(&sc, 2).unwrap();
        let rows = parse_results_csv(&res.results_csv().unwrap()).unwrap();
        assert_eq!(rows, res.rows);
        let stored = parse_aggregates_csv(&res.aggregates_csv().unwrap()).unwrap();
        assert_eq!(aggregate_rows(&rows, 0.95).unwrap(), stored);
        assert!(res.results_csv().unwrap().starts_with("param,value,method,metric,trial,seed,score\n"));
    }

    #[test]
    fn single_trial_reports_zero_width() {
        let mut sc = small("d_out", vec![1.0], vec![Method::Spectral], Task::Unsupervised);
        sc.trials = 1;
        let res = run_scenario(&sc, 1).unwrap();
        assert_eq!(res.aggregates[0].ci95, 0.0);
        assert!(res.aggregates[0].interval_undefined());
    }

    #[test]
    fn failed_trials_are_recorded_not_fatal() {
        // 2 shots + 3 val per class; with n = 24 some trials leave a class
        // with fewer than 5 nodes.
        let mut sc = small("d_out_ratio", vec![0.5], vec![Method::NearestCentroid], Task::SemiSupervised);
        sc.split = SplitParams { shots: 2, val_per_class: 3 };
        sc.base.graph.n = 24;
        sc.base.graph.d = 4.0;
        sc.trials = 12;
        let res = run_scenario(&sc, 2).unwrap();
        let failed = res.rows.iter().filter(|r| r.score.is_nan()).count();
        assert!(failed > 0 && failed < 12, "{failed}");
        assert_eq!(res.aggregates[0].n, 12 - failed);
    }

    #[test]
    fn all_failed_cell_aborts() {
        let mut sc = small("d_out_ratio", vec![0.5], vec![Method::NearestCentroid], Task::SemiSupervised);
        sc.split.shots = 1000;
        assert!(matches!(run_scenario(&sc, 1), Err(Error::AllTrialsFailed { .. })));
    }

    #[test]
    fn single_cell_reproducible_in_isolation() {
        let sc = small("d_out", vec![0.5, 2.0], vec![Method::Spectral], Task::Unsupervised);
        let res = run_scenario(&sc, 3).unwrap();
        let row = &res.rows[4];
        let mut cfg = sc.config_at(row.value).unwrap();
        cfg.seed = row.seed;
        let bundle = generate(&cfg).unwrap();
        let score = evaluate(&bundle, row.method, &sc.options, &sc.split).unwrap();
        assert_eq!(score.to_bits(), row.score.to_bits());
    }
}
