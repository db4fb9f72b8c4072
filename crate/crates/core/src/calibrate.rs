//! Matching feature signal to graph signal.

use serde::Serialize;

use crate::config::{GeneratorConfig, Method, MethodOptions, SplitParams};
use crate::error::{Error, Result};
use crate::generate::generate;
use crate::scenario::{evaluate, trial_seed};

/// Search range for `log10(sigma_c)`.
pub const LOG10_RANGE: (f64, f64) = (-4.0, 4.0);
pub const MAX_BISECTIONS: usize = 20;
pub const DEFAULT_TOLERANCE: f64 = 0.02;
/// Graph NMI must exceed this and stay below 1. Spectral clustering of a
/// structureless graph scores a little above 0 by chance (about 0.01 at
/// n = 300), so the floor sits above that.
pub const PRECONDITION_FLOOR: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Calibration {
    pub sigma_c: f64,
    /// Mean k-means NMI at `sigma_c`.
    pub feature_nmi: f64,
    /// Mean spectral NMI, the target.
    pub graph_nmi: f64,
    /// Feature-NMI evaluations performed, each over all trials.
    pub evaluations: usize,
    /// Whether the gap closed to within the tolerance.
    pub converged: bool,
}

fn mean_score(cfg: &GeneratorConfig, method: Method, trials: usize, options: &MethodOptions) -> Result<f64> {
    let mut total = 0.0;
    let mut ok = 0usize;
    for t in 0..trials {
        let mut c = cfg.clone();
        c.seed = trial_seed(cfg.seed, 0, t);
        let score = generate(&c).and_then(|b| evaluate(&b, method, options, &SplitParams::default()));
        match score {
            Ok(s) => {
                total += s;
                ok += 1;
            }
            Err(e) => log::warn!("calibration trial {t}, {method}: {e}"),
        }
    }
    if ok == 0 {
        return Err(Error::AllTrialsFailed {
            param: "sigma_c".into(),
            value: cfg.features.sigma_c,
            method: method.to_string(),
        });
    }
    Ok(total / ok as f64)
}

pub fn calibrate_feature_signal(cfg: &GeneratorConfig, trials: usize, tolerance: f64) -> Result<Calibration> {
    calibrate_feature_signal_with(cfg, trials, tolerance, &MethodOptions::default())
}

/// Finds `sigma_c` at which k-means on the features reaches the same mean NMI
/// as spectral clustering on the graph. Bisects `log10(sigma_c)` over
/// [`LOG10_RANGE`], starting at the midpoint, for at most
/// [`MAX_BISECTIONS`] halvings. Every evaluation reuses the same trial
/// seeds, so the graphs stay fixed and only the feature draws move.
pub fn calibrate_feature_signal_with(
    cfg: &GeneratorConfig,
    trials: usize,
    tolerance: f64,
    options: &MethodOptions,
) -> Result<Calibration> {
    cfg.validate()?;
    if trials == 0 {
        return Err(Error::Config("trials must be >= 1".into()));
    }
    if tolerance.is_nan() || tolerance < 0.0 {
        return Err(Error::Config(format!("tolerance must be >= 0, got {tolerance}")));
    }
    let graph_nmi = mean_score(cfg, Method::Spectral, trials, options)?;
    if graph_nmi <= PRECONDITION_FLOOR || graph_nmi >= 1.0 {
        return Err(Error::CalibrationPrecondition { graph_nmi });
    }

    let mut evaluations = 0;
    let mut feature_at = |log_sigma: f64| -> Result<f64> {
        evaluations += 1;
        let mut c = cfg.clone();
        c.features.sigma_c = 10f64.powf(log_sigma);
        mean_score(&c, Method::Kmeans, trials, options)
    };

    let (mut lo, mut hi) = LOG10_RANGE;
    let mut mid = 0.5 * (lo + hi);
    let mut f_mid = feature_at(mid)?;
    let mut best = (mid, f_mid);
    let closer = |best: (f64, f64), cand: (f64, f64)| {
        if (cand.1 - graph_nmi).abs() < (best.1 - graph_nmi).abs() {
            cand
        } else {
            best
        }
    };

    if (f_mid - graph_nmi).abs() > tolerance {
        let f_lo = feature_at(lo)?;
        let f_hi = feature_at(hi)?;
        if (f_lo - graph_nmi).signum() == (f_hi - graph_nmi).signum() {
            return Err(Error::NotBracketed {
                target: graph_nmi,
                low: f_lo,
                high: f_hi,
            });
        }
        best = closer(closer(best, (lo, f_lo)), (hi, f_hi));
        for _ in 0..MAX_BISECTIONS {
            if (best.1 - graph_nmi).abs() <= tolerance {
                break;
            }
            // feature NMI rises with sigma_c
            if f_mid < graph_nmi {
                lo = mid;
            } else {
                hi = mid;
            }
            mid = 0.5 * (lo + hi);
            f_mid = feature_at(mid)?;
            best = closer(best, (mid, f_mid));
        }
    }
    Ok(Calibration {
        sigma_c: 10f64.powf(best.0),
        feature_nmi: best.1,
        graph_nmi,
        evaluations,
        converged: (best.1 - graph_nmi).abs() <= tolerance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> GeneratorConfig {
        let mut cfg = GeneratorConfig::default();
        cfg.graph.n = 300;
        cfg.graph.d_out = 10.0;
        cfg.features.s = 8;
        cfg
    }

    #[test]
    fn loose_tolerance_stops_after_one_evaluation() {
        let c = calibrate_feature_signal(&small(), 3, 1.0).unwrap();
        assert_eq!(c.evaluations, 1);
        assert_eq!(c.sigma_c, 1.0);
        assert!(c.converged);
    }

    #[test]
    fn undetectable_graph_violates_precondition() {
        let mut cfg = small();
        cfg.graph.d_out = 15.0;
        assert!(matches!(
            calibrate_feature_signal(&cfg, 3, 0.02),
            Err(Error::CalibrationPrecondition { .. })
        ));
    }

    #[test]
    fn bisection_closes_the_gap() {
        let c = calibrate_feature_signal(&small(), 4, 0.05).unwrap();
        assert!(c.converged, "{c:?}");
        assert!((c.feature_nmi - c.graph_nmi).abs() <= 0.05);
        assert!(c.evaluations <= 3 + MAX_BISECTIONS);
    }
}
