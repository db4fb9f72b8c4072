use std::path::PathBuf;
use std::process::ExitCode;

use adcsbm::calibrate::{calibrate_feature_signal, DEFAULT_TOLERANCE};
use adcsbm::config::{GeneratorConfig, Method, MethodOptions, SplitParams};
use adcsbm::scenario::{evaluate, load_scenario, metric_name};
use adcsbm::{generate, read_bundle, run_scenario, write_bundle, Result};
use clap::{Parser, Subcommand};

/// Attributed degree-corrected SBM generator and benchmark runner.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate one dataset bundle.
    Generate {
        /// Generator config (JSON). Defaults apply when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Overrides the seed in the config.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a parameter sweep; writes the raw rows and aggregates.csv beside them.
    Sweep {
        /// Preset name or scenario file (JSON).
        #[arg(long)]
        scenario: String,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Overrides the master seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score one baseline on a bundle.
    Eval {
        #[arg(long)]
        bundle: PathBuf,
        /// spectral, kmeans, label_propagation or nearest_centroid
        #[arg(long)]
        method: String,
        #[arg(long, default_value_t = SplitParams::default().shots)]
        shots: usize,
        #[arg(long, default_value_t = SplitParams::default().val_per_class)]
        val_per_class: usize,
    },
    /// Find the feature spread at which features and graph are equally informative.
    Calibrate {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
        tolerance: f64,
        #[arg(long, default_value_t = 20)]
        trials: usize,
    },
}

fn load_config(path: Option<PathBuf>) -> Result<GeneratorConfig> {
    path.map_or_else(|| Ok(GeneratorConfig::default()), GeneratorConfig::load)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate { config, seed, out } => {
            let mut cfg = load_config(config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let bundle = generate(&cfg)?;
            write_bundle(&bundle, &out)?;
            println!(
                "wrote {}: n = {}, edges = {}, seed = {}",
                out.display(),
                bundle.graph.node_count(),
                bundle.graph.edge_count(),
                cfg.seed
            );
        }
        Command::Sweep {
            scenario,
            trials,
            workers,
            seed,
            out,
        } => {
            let mut sc = load_scenario(&scenario)?;
            if let Some(t) = trials {
                sc.trials = t;
            }
            if let Some(s) = seed {
                sc.base.seed = s;
            }
            let res = run_scenario(&sc, workers)?;
            res.write(&out)?;
            for a in &res.aggregates {
                println!(
                    "{} = {:<10} {:<18} {} {:.4} ± {:.4} (n = {})",
                    a.param, a.value, a.method, a.metric, a.mean, a.ci95, a.n
                );
            }
        }
        Command::Eval {
            bundle,
            method,
            shots,
            val_per_class,
        } => {
            let method = Method::parse(&method)?;
            let b = read_bundle(&bundle)?;
            let split = SplitParams { shots, val_per_class };
            let score = evaluate(&b, method, &MethodOptions::default(), &split)?;
            println!("{method} {} {score}", metric_name(method.task()));
        }
        Command::Calibrate {
            config,
            tolerance,
            trials,
        } => {
            let cfg = load_config(config)?;
            let c = calibrate_feature_signal(&cfg, trials, tolerance)?;
            println!("{}", serde_json::to_string_pretty(&c)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
