//! MCMC detectors for the real-valued lattice problem min ‖y − Hx‖².

mod chain;
mod ml;
mod params;
mod restarts;
mod rmcmc;

pub use chain::{gibbs_conditional_pmf, GibbsChain};
pub use ml::{ml_bruteforce, ML_SEARCH_CAP};
pub use params::{required_repetitions, stalling_limit, DetectorParams, RandomizationSchedule};
pub use restarts::{rmcmc_with_restarts, rmcmc_with_restarts_logged};
pub use rmcmc::{conventional_mcmc, rmcmc, rmcmc_traced, RunTrace};

/// Output of a detector on one instance.
#[derive(Clone, Debug, PartialEq)]
pub struct DetectorResult {
    /// PAM index per real coordinate.
    pub x_hat: Vec<u8>,
    /// ‖y − H x̂‖², recomputed from scratch.
    pub best_cost: f64,
    pub sweeps_used: u64,
    pub restarts_used: u64,
    /// Real additions and multiplications charged to the run.
    pub real_ops: u64,
}
