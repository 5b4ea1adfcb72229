use super::config::{DetectorKind, SimConfig};
use super::sweep::{run_sweep, SweepRow};
use crate::error::{Error, Result};

/// A detector's BER next to the exhaustive ML BER on the same trials.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleComparison {
    pub ml: SweepRow,
    pub detector: SweepRow,
    /// Binomial standard deviation of the ML BER estimate.
    pub sigma: f64,
}

impl OracleComparison {
    /// |BER − BER_ML| in units of `sigma`.
    pub fn deviation(&self) -> f64 {
        let d = (self.detector.ber - self.ml.ber).abs();
        if d == 0.0 {
            0.0
        } else {
            d / self.sigma
        }
    }

    pub fn within(&self, n_sigma: f64) -> bool {
        self.deviation() <= n_sigma
    }
}

/// Runs `base` (a single-SNR flat sweep) twice, once with the configured
/// detector and once with the ML oracle. Both runs see the same channels,
/// symbols and noise because instances depend only on the trial seed.
pub fn compare_with_ml(base: &SimConfig) -> Result<OracleComparison> {
    if base.snr_db.len() != 1 {
        return Err(Error::invalid("sim.snr_db", "oracle comparison uses a single SNR"));
    }
    let mut cfg = base.clone();
    cfg.target_errors = 0;
    let mut ml_cfg = cfg.clone();
    ml_cfg.detector = DetectorKind::MlOracle;
    let ml = run_sweep(&ml_cfg)?.rows.pop();
    let det = run_sweep(&cfg)?.rows.pop();
    let (ml, detector) = match (ml, det) {
        (Some(m), Some(d)) => (m, d),
        _ => return Err(Error::invalid("sim.max_trials", "need at least one trial")),
    };
    let p = ml.ber;
    let sigma = (p * (1.0 - p) / ml.bits as f64).sqrt();
    Ok(OracleComparison { ml, detector, sigma })
}
