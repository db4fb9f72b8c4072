//! 20-shot node classification with label propagation (graph only) and
//! nearest centroid (features only) as homophily drops.

use adcsbm::baselines::{label_propagation, make_few_shot_split, nearest_centroid, PropagationOptions};
use adcsbm::metrics::classification_accuracy;
use adcsbm::seeding::stream;
use adcsbm::{generate, GeneratorConfig};

fn main() -> adcsbm::Result<()> {
    println!("d_out/d  propagation  centroid");
    for ratio in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let mut cfg = GeneratorConfig::default().semi_supervised();
        cfg.graph.d_out = ratio * cfg.graph.d;
        let b = generate(&cfg)?;
        let split = make_few_shot_split(b.labels(), 20, 30, &mut stream(0, &[]))?;
        let test = split.test_mask();
        let lp = label_propagation(&b.graph, &split, b.labels(), &PropagationOptions::default())?;
        let nc = nearest_centroid(&b.features, &split, b.labels())?;
        println!(
            "{ratio:<8} {:<12.3} {:.3}",
            classification_accuracy(&lp, b.labels(), &test)?,
            classification_accuracy(&nc, b.labels(), &test)?
        );
    }
    Ok(())
}
