use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;

use super::config::{CsiMode, DetectorKind, Scenario, SimConfig, StartVector};
use crate::chanest::{
    detect_frame, generate_frame, iterate_estimation_detection, DetectionStats, EstimationParams, Frame,
    FrameConfig,
};
use crate::cpsc::{detect_cpsc_frame, generate_cpsc_frame, generate_fs_channel, iterate_cpsc, CpscConfig, CpscFrame};
use crate::detect::{
    conventional_mcmc, ml_bruteforce, rmcmc, rmcmc_with_restarts, DetectorParams, DetectorResult, ML_SEARCH_CAP,
};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, stream, stream_rng};
use crate::system::{
    generate_flat_channel, lift_matrix, mmse_detect, transmit_flat, ComplexChannel, DenseModel, FlatObservation,
    ModAlphabet, NoiseStats, ObservationModel, Problem,
};

/// Environment variable holding the default worker count.
pub const THREADS_ENV: &str = "MIMO_MCMC_THREADS";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopReason {
    TargetErrors,
    MaxTrials,
}

impl StopReason {
    pub fn as_str(self) -> &'static str {
        match self {
            StopReason::TargetErrors => "target_errors",
            StopReason::MaxTrials => "max_trials",
        }
    }
}

/// Aggregate over the trials of one SNR point and one estimation iteration.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub snr_db: f64,
    /// 0 for perfect CSI or the pilot-only pass, j for the j-th refinement.
    pub iteration: usize,
    pub trials: u64,
    pub bits: u64,
    pub bit_errors: u64,
    pub ber: f64,
    pub avg_real_ops_per_bit: f64,
    /// Sweeps per detected vector.
    pub avg_sweeps: f64,
    /// Restarts per detected vector.
    pub avg_restarts: f64,
    /// Mean channel MSE when the channel is estimated.
    pub mse: Option<f64>,
    pub stopped_by: StopReason,
    /// Seconds spent on the SNR point, when timing is enabled.
    pub wall_time: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    /// (SNR, BER) pairs of one iteration in grid order.
    pub fn curve(&self, iteration: usize) -> Vec<(f64, f64)> {
        self.rows
            .iter()
            .filter(|r| r.iteration == iteration)
            .map(|r| (r.snr_db, r.ber))
            .collect()
    }

    pub fn rows_for(&self, iteration: usize) -> impl Iterator<Item = &SweepRow> {
        self.rows.iter().filter(move |r| r.iteration == iteration)
    }

    /// Highest iteration index present.
    pub fn last_iteration(&self) -> usize {
        self.rows.iter().map(|r| r.iteration).max().unwrap_or(0)
    }
}

/// Counters of one iteration within a trial.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct IterationCounts {
    pub bits: u64,
    pub bit_errors: u64,
    pub real_ops: u64,
    pub sweeps: u64,
    pub restarts: u64,
    /// Detector invocations.
    pub detections: u64,
    pub mse: Option<f64>,
}

impl IterationCounts {
    fn from_stats(stats: DetectionStats, detections: usize, mse: Option<f64>) -> Self {
        Self {
            bits: stats.bits,
            bit_errors: stats.bit_errors,
            real_ops: stats.real_ops,
            sweeps: stats.sweeps,
            restarts: stats.restarts,
            detections: detections as u64,
            mse,
        }
    }
}

/// Per-iteration counters of one trial.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialOutcome {
    pub iterations: Vec<IterationCounts>,
}

/// Random ingredients of one trial.
#[derive(Clone, Debug)]
pub enum TrialInstance {
    Flat {
        channel: ComplexChannel,
        obs: FlatObservation,
    },
    Frame(Frame),
    Cpsc(CpscFrame),
}

/// Resolved settings shared by all trials of a sweep.
#[derive(Clone, Debug)]
pub struct SweepPlan {
    pub config: SimConfig,
    pub alphabet: ModAlphabet,
    pub params: DetectorParams,
    pub frame: Option<FrameConfig>,
    pub cpsc: Option<CpscConfig>,
}

impl SweepPlan {
    pub fn new(config: &SimConfig) -> Result<Self> {
        config.validate()?;
        let alphabet = config.alphabet()?;
        let params = config.detector_params()?;
        let f = &config.frame;
        let frame = match config.scenario {
            Scenario::FlatEstimated => Some(FrameConfig::new(config.k, config.n, f.q, alphabet.clone())?),
            _ => None,
        };
        let cpsc = match config.scenario {
            Scenario::Cpsc => Some(CpscConfig::new(
                config.k,
                config.n,
                f.l,
                f.i,
                f.q,
                config.omega2(),
                alphabet.clone(),
            )?),
            _ => None,
        };
        Ok(Self {
            config: config.clone(),
            alphabet,
            params,
            frame,
            cpsc,
        })
    }

    /// Noise variance at an SNR.
    pub fn sigma2(&self, snr_db: f64) -> f64 {
        match &self.cpsc {
            Some(c) => c.sigma2(snr_db),
            None => self.config.snr_convention.sigma2(snr_db, self.config.k, &self.alphabet),
        }
    }

    /// Seed of trial `trial` at grid index `snr_idx`.
    pub fn trial_seed(&self, snr_idx: usize, trial: u64) -> u64 {
        derive_seed(self.config.master_seed, &[snr_idx as u64, trial])
    }

    /// Draws the channel, data and noise of a trial from the instance stream.
    pub fn generate(&self, snr_db: f64, trial_seed: u64) -> Result<TrialInstance> {
        let sigma2 = self.sigma2(snr_db);
        let mut rng = stream_rng(trial_seed, &[stream::INSTANCE]);
        let c = &self.config;
        if let Some(cfg) = &self.cpsc {
            let channel = generate_fs_channel(cfg, &mut rng);
            return Ok(TrialInstance::Cpsc(generate_cpsc_frame(cfg, channel, sigma2, &mut rng)?));
        }
        let channel = generate_flat_channel(c.k, c.n, c.imbalance, &mut rng)?;
        match &self.frame {
            Some(cfg) => Ok(TrialInstance::Frame(generate_frame(cfg, channel, sigma2, &mut rng)?)),
            None => {
                let obs = transmit_flat(&channel, &self.alphabet, sigma2, &mut rng)?;
                Ok(TrialInstance::Flat { channel, obs })
            }
        }
    }

    /// Runs the receiver on a trial instance.
    pub fn evaluate(&self, instance: &TrialInstance, trial_seed: u64) -> Result<TrialOutcome> {
        let f = &self.config.frame;
        let est = EstimationParams {
            detector: self.params.clone(),
            max_sweeps: f.max_sweeps,
            iterations: f.iterations,
            variance: f.variance,
            noise_stats: f.noise_stats,
        };
        let iterations = match instance {
            TrialInstance::Flat { obs, .. } => {
                let mut rng = stream_rng(trial_seed, &[stream::DETECTOR]);
                let res = run_detector(
                    self.config.detector,
                    self.config.start,
                    &self.params,
                    obs.system.problem(),
                    &self.alphabet,
                    &mut rng,
                )?;
                vec![IterationCounts {
                    bits: obs.tx.len() as u64 * self.alphabet.bits_per_dim() as u64,
                    bit_errors: self.alphabet.bit_errors(&res.x_hat, &obs.tx),
                    real_ops: res.real_ops,
                    sweeps: res.sweeps_used,
                    restarts: res.restarts_used,
                    detections: 1,
                    mse: None,
                }]
            }
            TrialInstance::Frame(frame) => {
                let cfg = self.frame.as_ref().ok_or_else(|| mismatch("flat frame"))?;
                match f.csi {
                    CsiMode::Perfect => {
                        let model = DenseModel::new(lift_matrix(&frame.channel.h));
                        let (_, stats) =
                            detect_frame(cfg, frame, &model, &self.params, NoiseStats::PerfectCsi, trial_seed)?;
                        vec![IterationCounts::from_stats(stats, frame.data.len(), None)]
                    }
                    CsiMode::Estimated => {
                        let out = iterate_estimation_detection(cfg, frame, &est, trial_seed)?;
                        out.records
                            .iter()
                            .map(|r| IterationCounts::from_stats(r.detection, frame.data.len(), Some(r.mse)))
                            .collect()
                    }
                }
            }
            TrialInstance::Cpsc(frame) => {
                let cfg = self.cpsc.as_ref().ok_or_else(|| mismatch("CPSC frame"))?;
                match f.csi {
                    CsiMode::Perfect => {
                        let (_, stats) = detect_cpsc_frame(
                            cfg,
                            frame,
                            &frame.channel,
                            &self.params,
                            NoiseStats::PerfectCsi,
                            trial_seed,
                        )?;
                        vec![IterationCounts::from_stats(stats, frame.data.len(), None)]
                    }
                    CsiMode::Estimated => {
                        let out = iterate_cpsc(cfg, frame, &est, trial_seed)?;
                        out.records
                            .iter()
                            .map(|r| IterationCounts::from_stats(r.detection, frame.data.len(), Some(r.mse)))
                            .collect()
                    }
                }
            }
        };
        Ok(TrialOutcome { iterations })
    }

    pub fn run_trial(&self, snr_idx: usize, trial: u64) -> Result<TrialOutcome> {
        let seed = self.trial_seed(snr_idx, trial);
        let instance = self.generate(self.config.snr_db[snr_idx], seed)?;
        self.evaluate(&instance, seed)
    }

    /// Rows produced per SNR point.
    fn row_count(&self) -> usize {
        match (self.config.scenario, self.config.frame.csi) {
            (Scenario::FlatPerfectCsi, _) | (_, CsiMode::Perfect) => 1,
            _ => self.config.frame.iterations + 1,
        }
    }
}

fn mismatch(kind: &str) -> Error {
    Error::invalid("instance", format!("{kind} does not match the configured scenario"))
}

/// Runs one detector on a flat problem. Single-run detectors start from the
/// quantized MMSE estimate (charged to the op count) or a random vector.
pub fn run_detector<M, R>(
    kind: DetectorKind,
    start: StartVector,
    params: &DetectorParams,
    problem: Problem<'_, M>,
    alphabet: &ModAlphabet,
    rng: &mut R,
) -> Result<DetectorResult>
where
    M: ObservationModel + ?Sized,
    R: Rng + ?Sized,
{
    let initial = |rng: &mut R| -> Result<(Vec<u8>, u64)> {
        match start {
            StartVector::Mmse => mmse_detect(&problem, alphabet),
            StartVector::Random => {
                let dim = problem.model.coord_len();
                Ok(((0..dim).map(|_| rng.random_range(0..alphabet.size()) as u8).collect(), 0))
            }
        }
    };
    match kind {
        DetectorKind::RmcmcR => rmcmc_with_restarts(problem, alphabet, params, NoiseStats::PerfectCsi, rng),
        DetectorKind::Rmcmc => {
            params.validate()?;
            let (x0, ops) = initial(rng)?;
            let mut res = rmcmc(problem, alphabet, &x0, params, NoiseStats::PerfectCsi, rng);
            res.real_ops += ops;
            Ok(res)
        }
        DetectorKind::ConvMcmc { .. } => {
            params.validate()?;
            let (x0, ops) = initial(rng)?;
            let mut res = conventional_mcmc(problem, alphabet, &x0, params, rng);
            res.real_ops += ops;
            Ok(res)
        }
        DetectorKind::Mmse => {
            let (x_hat, real_ops) = mmse_detect(&problem, alphabet)?;
            let best_cost = problem.cost(&alphabet.values(&x_hat));
            Ok(DetectorResult {
                x_hat,
                best_cost,
                sweeps_used: 0,
                restarts_used: 0,
                real_ops,
            })
        }
        DetectorKind::MlOracle => ml_bruteforce(problem, alphabet, ML_SEARCH_CAP),
    }
}

/// Worker count from [`THREADS_ENV`], or rayon's default when unset.
pub fn default_threads() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .filter(|&n: &usize| n > 0)
}

/// [`run_sweep_with_threads`] with the default worker count.
pub fn run_sweep(config: &SimConfig) -> Result<SweepResult> {
    run_sweep_with_threads(config, default_threads())
}

/// Runs every SNR point of `config`.
///
/// Trials run in parallel batches, but results are scanned in trial order
/// and the point stops at the first trial whose cumulative error count (on
/// the last iteration) reaches the target, so the output does not depend
/// on the worker count.
pub fn run_sweep_with_threads(config: &SimConfig, threads: Option<usize>) -> Result<SweepResult> {
    let plan = SweepPlan::new(config)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::invalid("threads", e.to_string()))?;
    if config.max_trials == 0 {
        return Ok(SweepResult::default());
    }
    let batch = (pool.current_num_threads() as u64 * 2).max(4);
    let rows_per_point = plan.row_count();
    let mut rows = Vec::with_capacity(config.snr_db.len() * rows_per_point);

    for (snr_idx, &snr_db) in config.snr_db.iter().enumerate() {
        let started = Instant::now();
        let mut acc = vec![IterationCounts::default(); rows_per_point];
        let mut mse_sum = vec![0.0; rows_per_point];
        let mut trials = 0u64;
        let mut stopped = StopReason::MaxTrials;
        'point: while trials < config.max_trials {
            let end = (trials + batch).min(config.max_trials);
            let outcomes: Vec<Result<TrialOutcome>> =
                pool.install(|| (trials..end).into_par_iter().map(|t| plan.run_trial(snr_idx, t)).collect());
            for outcome in outcomes {
                let outcome = outcome?;
                trials += 1;
                for ((a, m), c) in acc.iter_mut().zip(mse_sum.iter_mut()).zip(&outcome.iterations) {
                    a.bits += c.bits;
                    a.bit_errors += c.bit_errors;
                    a.real_ops += c.real_ops;
                    a.sweeps += c.sweeps;
                    a.restarts += c.restarts;
                    a.detections += c.detections;
                    if let Some(v) = c.mse {
                        *m += v;
                        a.mse = Some(0.0);
                    }
                }
                if config.target_errors > 0 && acc[rows_per_point - 1].bit_errors >= config.target_errors {
                    stopped = StopReason::TargetErrors;
                    break 'point;
                }
            }
        }
        let wall_time = config.wall_time.then(|| started.elapsed().as_secs_f64());
        for (iteration, (a, m)) in acc.iter().zip(&mse_sum).enumerate() {
            rows.push(SweepRow {
                snr_db,
                iteration,
                trials,
                bits: a.bits,
                bit_errors: a.bit_errors,
                ber: a.bit_errors as f64 / a.bits as f64,
                avg_real_ops_per_bit: a.real_ops as f64 / a.bits as f64,
                avg_sweeps: a.sweeps as f64 / a.detections as f64,
                avg_restarts: a.restarts as f64 / a.detections as f64,
                mse: a.mse.map(|_| m / trials as f64),
                stopped_by: stopped,
                wall_time,
            });
        }
    }
    Ok(SweepResult { rows })
}
