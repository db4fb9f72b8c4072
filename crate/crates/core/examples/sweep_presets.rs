//! Run a built-in sweep with few trials and write results.csv and
//! aggregates.csv.
//!
//!     cargo run --release --example sweep_presets -- [preset] [trials] [out.csv]

use adcsbm::run_scenario;
use adcsbm::scenario::{preset, PRESETS};

fn main() -> adcsbm::Result<()> {
    let mut args = std::env::args().skip(1);
    let name = args.next().unwrap_or_else(|| "graph-signal".into());
    let trials = args.next().map_or(5, |s| s.parse().expect("trials must be an integer"));
    let out = args.next().unwrap_or_else(|| format!("target/sweeps/{name}/results.csv"));

    println!("presets: {}", PRESETS.join(", "));
    let mut sc = preset(&name)?;
    sc.trials = trials;
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
    let res = run_scenario(&sc, workers)?;
    for a in &res.aggregates {
        println!("{:>8.4} {:<18} {:.3} ± {:.3}", a.value, a.method, a.mean, a.ci95);
    }
    res.write(&out)?;
    println!("wrote {out}");
    Ok(())
}
