//! Find the center spread at which k-means on the features scores the
//! same NMI as spectral clustering on the graph.

use adcsbm::calibrate::calibrate_feature_signal;
use adcsbm::GeneratorConfig;

fn main() -> adcsbm::Result<()> {
    for d_out in [8.0, 10.0, 11.0] {
        let mut cfg = GeneratorConfig::default();
        cfg.graph.d_out = d_out;
        let c = calibrate_feature_signal(&cfg, 5, 0.02)?;
        println!(
            "d_out = {d_out:<4} graph NMI {:.3}  sigma_c* {:.4}  feature NMI {:.3}  ({} evaluations)",
            c.graph_nmi, c.sigma_c, c.feature_nmi, c.evaluations
        );
    }
    Ok(())
}
