use rand::Rng;

use super::params::{required_repetitions, DetectorParams};
use super::rmcmc::rmcmc;
use super::DetectorResult;
use crate::error::Result;
use crate::system::{mmse_detect, standardized_cost, ModAlphabet, NoiseStats, ObservationModel, Problem};

/// R-MCMC with restarts. The first run starts from the quantized MMSE
/// estimate, later runs from uniformly random vectors. Stops once the best
/// vector found so far has been returned P(φ) times, or after `r_max` runs.
pub fn rmcmc_with_restarts<M, R>(
    problem: Problem<'_, M>,
    alphabet: &ModAlphabet,
    params: &DetectorParams,
    mode: NoiseStats,
    rng: &mut R,
) -> Result<DetectorResult>
where
    M: ObservationModel + ?Sized,
    R: Rng + ?Sized,
{
    rmcmc_with_restarts_logged(problem, alphabet, params, mode, rng).map(|(r, _)| r)
}

/// [`rmcmc_with_restarts`] that also returns each run's result.
pub fn rmcmc_with_restarts_logged<M, R>(
    problem: Problem<'_, M>,
    alphabet: &ModAlphabet,
    params: &DetectorParams,
    mode: NoiseStats,
    rng: &mut R,
) -> Result<(DetectorResult, Vec<DetectorResult>)>
where
    M: ObservationModel + ?Sized,
    R: Rng + ?Sized,
{
    params.validate()?;
    let dim = problem.model.coord_len();
    let (mmse, mut ops) = mmse_detect(&problem, alphabet)?;
    let mut sweeps = 0u64;
    // distinct outputs with their cost and how often they were returned
    let mut seen: Vec<(Vec<u8>, f64, usize)> = Vec::new();
    let mut best = 0usize;
    let mut runs = Vec::new();

    for r in 0..params.r_max {
        let start: Vec<u8> = if r == 0 {
            mmse.clone()
        } else {
            (0..dim).map(|_| rng.random_range(0..alphabet.size()) as u8).collect()
        };
        let res = rmcmc(problem, alphabet, &start, params, mode, rng);
        ops += res.real_ops;
        sweeps += res.sweeps_used;

        match seen.iter().position(|(v, _, _)| *v == res.x_hat) {
            Some(p) => seen[p].2 += 1,
            None => {
                seen.push((res.x_hat.clone(), res.best_cost, 1));
                // strict improvement keeps the earliest of equal-cost vectors
                if res.best_cost < seen[best].1 {
                    best = seen.len() - 1;
                }
            }
        }
        runs.push(res);

        let phi = standardized_cost(seen[best].1, problem.complex_obs(), problem.sigma2, mode);
        ops += 8 + seen.len() as u64;
        if seen[best].2 >= required_repetitions(phi, params) {
            break;
        }
    }

    let (x_hat, best_cost, _) = seen.swap_remove(best);
    let result = DetectorResult {
        x_hat,
        best_cost,
        sweeps_used: sweeps,
        restarts_used: runs.len() as u64,
        real_ops: ops,
    };
    Ok((result, runs))
}
