//! Edge features shift by x_e on edges that cross clusters. A threshold on
//! the mean coordinate tells the two kinds of edge apart.

use adcsbm::features::EdgeFeatureParams;
use adcsbm::{generate, GeneratorConfig};

fn main() -> adcsbm::Result<()> {
    for x_e in [0.0, 0.5, 1.0, 2.0] {
        let mut cfg = GeneratorConfig::default();
        cfg.graph.d_out = 10.0;
        cfg.edge_features = Some(EdgeFeatureParams {
            s_e: 4,
            sigma_e: 0.5,
            x_e,
        });
        let b = generate(&cfg)?;
        let ef = b.edge_features.as_ref().expect("configured above");
        let labels = b.labels();
        let mut errors = 0;
        for (row, &(u, v)) in ef.iter_rows().zip(b.graph.edges()) {
            let mean = row.iter().sum::<f64>() / row.len() as f64;
            let crosses = labels[u] != labels[v];
            if (mean > x_e / 2.0) != crosses {
                errors += 1;
            }
        }
        println!(
            "x_e = {x_e:<4} threshold error {:.4}",
            errors as f64 / b.graph.edge_count() as f64
        );
    }
    Ok(())
}
