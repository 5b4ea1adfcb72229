use crate::error::{Error, Result};
use crate::system::ModAlphabet;

/// Where the uniform-random pmf replaces the Gibbs conditional in a sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum RandomizationSchedule {
    /// For every coordinate an index k is drawn uniformly from the 2K
    /// coordinates; the coordinate uses the random pmf when k equals it.
    #[default]
    PerCoordinate,
    /// Exactly one uniformly chosen coordinate per sweep uses the random pmf.
    OnePerSweep,
}

/// Tuning of the MCMC detectors.
#[derive(Clone, Debug, PartialEq)]
pub struct DetectorParams {
    /// Temperature α of the target distribution.
    pub alpha: f64,
    /// Minimum number of sweeps allowed after a stall.
    pub c_min: f64,
    /// Scale of the stalling limit.
    pub c1: f64,
    /// Scale of the repetition criterion.
    pub c2: f64,
    /// Sweep budget per run.
    pub max_iter: usize,
    /// Restart budget.
    pub r_max: usize,
    /// Restrict the random pmf to the current level and its two neighbours.
    pub neighbor_restricted_random: bool,
    pub randomization: RandomizationSchedule,
}

impl DetectorParams {
    /// Defaults for the restart detector with `k` complex unknowns:
    /// c_min = 10, c1 = 10·log2 M, c2 = 0.5·log2 M, MAX-ITER = 8K√M, R_max = 50,
    /// neighbour-restricted random updates for 64-QAM.
    pub fn restart_defaults(alphabet: &ModAlphabet, k: usize) -> Self {
        let bits = alphabet.bits_per_symbol() as f64;
        Self {
            alpha: 1.0,
            c_min: 10.0,
            c1: 10.0 * bits,
            c2: 0.5 * bits,
            max_iter: 8 * k * alphabet.size(),
            r_max: 50,
            neighbor_restricted_random: alphabet.order() == 64,
            randomization: RandomizationSchedule::default(),
        }
    }

    /// Standalone R-MCMC preset used for 4-QAM: c1 = 20, MAX-ITER = 16K.
    pub fn rmcmc_preset(alphabet: &ModAlphabet, k: usize) -> Self {
        Self {
            c1: 20.0,
            max_iter: 16 * k,
            r_max: 1,
            ..Self::restart_defaults(alphabet, k)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0) {
            return Err(Error::invalid("alpha", "must be positive"));
        }
        if !(self.c_min >= 1.0) {
            return Err(Error::invalid("c_min", "must be at least 1"));
        }
        if !(self.c1 > 0.0) {
            return Err(Error::invalid("c1", "must be positive"));
        }
        if !(self.c2 >= 0.0) {
            return Err(Error::invalid("c2", "must be non-negative"));
        }
        if self.max_iter == 0 {
            return Err(Error::invalid("max_iter", "must be at least 1"));
        }
        if self.r_max == 0 {
            return Err(Error::invalid("r_max", "must be at least 1"));
        }
        Ok(())
    }
}

/// Θ_s = ⌈max(c_min, c1·exp(φ))⌉, saturated at `max_iter`.
pub fn stalling_limit(phi: f64, params: &DetectorParams) -> usize {
    let raw = (params.c1 * phi.exp()).max(params.c_min).ceil();
    if raw.is_nan() || raw >= params.max_iter as f64 {
        params.max_iter
    } else {
        raw as usize
    }
}

/// P = ⌊max(0, c2·φ)⌋ + 1.
pub fn required_repetitions(phi: f64, params: &DetectorParams) -> usize {
    let v = (params.c2 * phi).max(0.0).floor();
    if v.is_nan() {
        1
    } else {
        // float-to-int casts saturate
        (v as usize).saturating_add(1)
    }
}
