//! Generate one dataset, write it as a bundle directory and read it back.
//!
//!     cargo run --example generate_bundle -- [out_dir] [seed]

use adcsbm::features::EdgeFeatureParams;
use adcsbm::graph::graph_stats;
use adcsbm::{generate, read_bundle, write_bundle, GeneratorConfig};

fn main() -> adcsbm::Result<()> {
    let mut args = std::env::args().skip(1);
    let out = args.next().unwrap_or_else(|| "target/example-bundle".into());
    let seed = args.next().map_or(42, |s| s.parse().expect("seed must be an integer"));

    let mut cfg = GeneratorConfig {
        seed,
        ..Default::default()
    };
    cfg.edge_features = Some(EdgeFeatureParams::default());

    let bundle = generate(&cfg)?;
    let stats = graph_stats(&bundle.graph, &bundle.assignment)?;
    println!("nodes            {}", bundle.graph.node_count());
    println!("edges            {}", bundle.graph.edge_count());
    println!("average degree   {:.3}", stats.average_degree);
    println!("within fraction  {:.3}", stats.within_block_fraction);
    println!("cluster sizes    {:?}", bundle.assignment.sizes());

    write_bundle(&bundle, &out)?;
    let back = read_bundle(&out)?;
    assert_eq!(back, bundle);
    println!("round trip through {out} ok");
    Ok(())
}
