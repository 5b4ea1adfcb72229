use rand::Rng;

use super::chain::GibbsChain;
use super::params::{stalling_limit, DetectorParams, RandomizationSchedule};
use super::DetectorResult;
use crate::system::{standardized_cost, ModAlphabet, NoiseStats, ObservationModel, Problem};

/// Per-sweep record of a randomized run.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunTrace {
    /// Best cost after each sweep.
    pub best_costs: Vec<f64>,
    /// Random-pmf updates applied to each coordinate over the run.
    pub random_updates: Vec<u64>,
}

/// Conventional Gibbs detector: `max_iter` sweeps at temperature α, keeping
/// the lowest-cost state visited.
pub fn conventional_mcmc<M, R>(
    problem: Problem<'_, M>,
    alphabet: &ModAlphabet,
    start: &[u8],
    params: &DetectorParams,
    rng: &mut R,
) -> DetectorResult
where
    M: ObservationModel + ?Sized,
    R: Rng + ?Sized,
{
    let mut chain = GibbsChain::new(problem, alphabet, start, params.alpha);
    let mut best = start.to_vec();
    let mut beta = chain.cost();
    for _ in 0..params.max_iter {
        chain.sweep(rng);
        if chain.cost() < beta {
            beta = chain.cost();
            best.copy_from_slice(chain.state());
        }
    }
    finish(problem, alphabet, best, chain.sweeps(), chain.ops() + chain.sweeps())
}

/// Randomized MCMC with the stalling-based stopping rule.
pub fn rmcmc<M, R>(
    problem: Problem<'_, M>,
    alphabet: &ModAlphabet,
    start: &[u8],
    params: &DetectorParams,
    mode: NoiseStats,
    rng: &mut R,
) -> DetectorResult
where
    M: ObservationModel + ?Sized,
    R: Rng + ?Sized,
{
    run(problem, alphabet, start, params, mode, rng, None)
}

/// [`rmcmc`] that also records the per-sweep best cost and random-update counts.
pub fn rmcmc_traced<M, R>(
    problem: Problem<'_, M>,
    alphabet: &ModAlphabet,
    start: &[u8],
    params: &DetectorParams,
    mode: NoiseStats,
    rng: &mut R,
) -> (DetectorResult, RunTrace)
where
    M: ObservationModel + ?Sized,
    R: Rng + ?Sized,
{
    let mut trace = RunTrace {
        best_costs: Vec::new(),
        random_updates: vec![0; start.len()],
    };
    let res = run(problem, alphabet, start, params, mode, rng, Some(&mut trace));
    (res, trace)
}

fn run<M, R>(
    problem: Problem<'_, M>,
    alphabet: &ModAlphabet,
    start: &[u8],
    params: &DetectorParams,
    mode: NoiseStats,
    rng: &mut R,
    mut trace: Option<&mut RunTrace>,
) -> DetectorResult
where
    M: ObservationModel + ?Sized,
    R: Rng + ?Sized,
{
    let dim = start.len();
    let n_obs = problem.complex_obs();
    let mut chain = GibbsChain::new(problem, alphabet, start, params.alpha);
    let mut best = start.to_vec();
    let mut beta = chain.cost();
    let mut extra_ops = 0u64;
    // sweep index at which the best cost last strictly decreased
    let mut last_drop = 0usize;
    let mut t = 0usize;
    while t < params.max_iter {
        let mut random_step = |i: usize, chain: &mut GibbsChain<'_, M>, rng: &mut R| {
            chain.random_update(i, params.neighbor_restricted_random, rng);
            if let Some(tr) = trace.as_deref_mut() {
                tr.random_updates[i] += 1;
            }
        };
        match params.randomization {
            RandomizationSchedule::PerCoordinate => {
                for i in 0..dim {
                    if rng.random_range(0..dim) == i {
                        random_step(i, &mut chain, rng);
                    } else {
                        chain.gibbs_update(i, rng);
                    }
                }
            }
            RandomizationSchedule::OnePerSweep => {
                let k = rng.random_range(0..dim);
                for i in 0..dim {
                    if i == k {
                        random_step(i, &mut chain, rng);
                    } else {
                        chain.gibbs_update(i, rng);
                    }
                }
            }
        }
        chain.end_sweep();
        t += 1;

        let gamma = chain.cost();
        extra_ops += 1;
        if gamma <= beta && chain.state() != best.as_slice() {
            if gamma < beta {
                last_drop = t;
            }
            best.copy_from_slice(chain.state());
            beta = gamma;
        }
        if let Some(tr) = trace.as_deref_mut() {
            tr.best_costs.push(beta);
        }
        if last_drop < t {
            let phi = standardized_cost(beta, n_obs, problem.sigma2, mode);
            let theta = stalling_limit(phi, params);
            extra_ops += 6;
            if theta < t && last_drop <= t - theta {
                break;
            }
        }
    }
    finish(problem, alphabet, best, chain.sweeps(), chain.ops() + extra_ops)
}

fn finish<M: ObservationModel + ?Sized>(
    problem: Problem<'_, M>,
    alphabet: &ModAlphabet,
    best: Vec<u8>,
    sweeps: u64,
    ops: u64,
) -> DetectorResult {
    let best_cost = problem.cost(&alphabet.values(&best));
    let m = problem.model;
    DetectorResult {
        x_hat: best,
        best_cost,
        sweeps_used: sweeps,
        restarts_used: 1,
        real_ops: ops + m.coord_len() as u64 * m.column_ops() + 2 * m.obs_len() as u64,
    }
}
