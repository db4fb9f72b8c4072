//! Spectral clustering on either side of the detectability limit.
//!
//! The graph-only signal is swept by the degree each node sends to every
//! other cluster. At d / k the graph carries no cluster information.

use adcsbm::baselines::{spectral_graph_clustering, SpectralOptions};
use adcsbm::metrics::nmi;
use adcsbm::sbm::{detectability_threshold, OutDegreeMode};
use adcsbm::seeding::stream;
use adcsbm::{generate, GeneratorConfig};

fn main() -> adcsbm::Result<()> {
    let (d, k) = (20.0, 4);
    println!("detectability limit for d = {d}, k = {k}: {:.14}", detectability_threshold(d, k)?);

    let trials = 5;
    for d_out in [1.0, 2.0, 3.0, 3.5, 4.0, 5.0] {
        let mut total = 0.0;
        for t in 0..trials {
            let mut cfg = GeneratorConfig {
                seed: t,
                ..Default::default()
            };
            cfg.graph.out_degree = OutDegreeMode::PerCluster;
            cfg.graph.d_out = d_out;
            let b = generate(&cfg)?;
            let fit = spectral_graph_clustering(&b.graph, k, &SpectralOptions::default(), &mut stream(t, &[]))?;
            total += nmi(&fit.labels, b.labels())?;
        }
        println!("d_out = {d_out:<4} mean NMI {:.3}", total / trials as f64);
    }
    Ok(())
}
