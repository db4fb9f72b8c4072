//! Feature clusters that match, nest or group the graph clusters, and the
//! between/within sum-of-squares ratio as the center spread grows.

use adcsbm::features::{build_feature_memberships, feature_separation_stats, FeatureMode};
use adcsbm::sbm::sample_memberships;
use adcsbm::seeding::stream;
use adcsbm::{generate, GeneratorConfig};

fn main() -> adcsbm::Result<()> {
    let graph = sample_memberships(12, 4, &mut stream(3, &[]))?;
    println!("graph   {:?}", graph.labels());
    for (mode, k_f) in [(FeatureMode::Match, 4), (FeatureMode::Nest, 6), (FeatureMode::Group, 2)] {
        let f = build_feature_memberships(&graph, k_f, mode, &mut stream(3, &[1]))?;
        println!("{mode:<7} {:?}", f.labels);
    }

    println!();
    println!("sigma_c  BSS/WSS");
    for sigma_c in [0.5, 1.0, 2.0, 4.0] {
        let mut cfg = GeneratorConfig::default();
        cfg.features.sigma_c = sigma_c;
        let b = generate(&cfg)?;
        let r = feature_separation_stats(&b.features, &b.feature_assignment.labels, b.feature_assignment.k_f)?;
        println!("{sigma_c:<8} {:.3}", r.ratio);
    }
    Ok(())
}
