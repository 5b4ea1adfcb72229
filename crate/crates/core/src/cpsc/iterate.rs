use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use super::block::{convolve_block, remove_cyclic_prefix, unitary_dft_rows};
use super::config::{build_pilot_sequences, initial_fs_estimate, CpscConfig, FreqSelChannel};
use super::estimate::{block_symbols, estimate_fs_channel_data_phase};
use super::freq::{build_freq_model, FreqDomainModel};
use crate::chanest::{DetectionStats, EstimationParams};
use crate::detect::{rmcmc_with_restarts, DetectorParams, DetectorResult};
use crate::error::{Error, Result};
use crate::rng::{stream, stream_rng};
use crate::system::channel::complex_gaussian;
use crate::system::{NoiseStats, Problem};

/// One CPSC frame: pilot block plus Q data blocks over a fixed multipath channel.
#[derive(Clone, Debug, PartialEq)]
pub struct CpscFrame {
    pub channel: FreqSelChannel,
    pub sigma2: f64,
    /// Lifted x̄ indices per block (2KI each).
    pub data: Vec<Vec<u8>>,
    /// Pilot-window noise, N × KL.
    pub pilot_noise: DMatrix<Complex64>,
    /// Per-block noise including the CP interval, N × (I+L−1).
    pub block_noise: Vec<DMatrix<Complex64>>,
    /// Pilot-window observations, N × KL.
    pub pilot_obs: DMatrix<Complex64>,
    /// Lifted frequency-domain observation z̄ of each block.
    pub z: Vec<Vec<f64>>,
}

impl CpscFrame {
    pub fn from_parts(
        cfg: &CpscConfig,
        channel: FreqSelChannel,
        sigma2: f64,
        data: Vec<Vec<u8>>,
        pilot_noise: DMatrix<Complex64>,
        block_noise: Vec<DMatrix<Complex64>>,
    ) -> Result<Self> {
        let (n, k, l, i) = (cfg.n, cfg.k, cfg.l, cfg.i);
        if (channel.n, channel.k, channel.l) != (n, k, l) {
            return Err(Error::Dimension("channel does not match configuration".into()));
        }
        if data.len() != cfg.q || data.iter().any(|d| d.len() != cfg.block_coords()) {
            return Err(Error::Dimension("data blocks do not match configuration".into()));
        }
        if pilot_noise.shape() != (n, k * l)
            || block_noise.len() != cfg.q
            || block_noise.iter().any(|b| b.shape() != (n, i + l - 1))
        {
            return Err(Error::Dimension("noise does not match configuration".into()));
        }
        let pilots = build_pilot_sequences(k, l, cfg.pilot_amplitude())?;
        let mut pilot_obs = pilot_noise.clone();
        for j in 0..n {
            for nn in 0..k * l {
                let mut acc = Complex64::new(0.0, 0.0);
                for u in 0..k {
                    for t in 0..l.min(nn + 1) {
                        acc += channel.tap(j, u, t) * pilots[(u, nn - t)];
                    }
                }
                pilot_obs[(j, nn)] += acc;
            }
        }
        let z = data
            .iter()
            .zip(&block_noise)
            .map(|(idx, noise)| {
                let x = block_symbols(cfg, idx);
                let rows: Vec<Vec<Complex64>> = x.row_iter().map(|r| r.iter().copied().collect()).collect();
                let rx = convolve_block(&channel, &rows, noise.clone());
                frequency_observation(&remove_cyclic_prefix(&rx.samples, l))
            })
            .collect();
        Ok(Self {
            channel,
            sigma2,
            data,
            pilot_noise,
            block_noise,
            pilot_obs,
            z,
        })
    }
}

/// Lifted z̄ (bin-major) from the CP-free time-domain block, N × I.
pub fn frequency_observation(y: &DMatrix<Complex64>) -> Vec<f64> {
    let (n, i) = y.shape();
    let mut f = y.clone();
    unitary_dft_rows(&mut f, false);
    let ni = n * i;
    let mut out = vec![0.0; 2 * ni];
    for m in 0..i {
        for j in 0..n {
            out[m * n + j] = f[(j, m)].re;
            out[ni + m * n + j] = f[(j, m)].im;
        }
    }
    out
}

/// Draws data and noise for one frame.
pub fn generate_cpsc_frame<R: Rng + ?Sized>(
    cfg: &CpscConfig,
    channel: FreqSelChannel,
    sigma2: f64,
    rng: &mut R,
) -> Result<CpscFrame> {
    let size = cfg.alphabet.size();
    let data = (0..cfg.q)
        .map(|_| (0..cfg.block_coords()).map(|_| rng.random_range(0..size) as u8).collect())
        .collect();
    let pilot_noise = DMatrix::from_fn(cfg.n, cfg.k * cfg.l, |_, _| complex_gaussian(rng, sigma2));
    let block_noise = (0..cfg.q)
        .map(|_| DMatrix::from_fn(cfg.n, cfg.i + cfg.l - 1, |_, _| complex_gaussian(rng, sigma2)))
        .collect();
    CpscFrame::from_parts(cfg, channel, sigma2, data, pilot_noise, block_noise)
}

/// R-MCMC-R equalization of one block through the frequency-domain model.
pub fn equalize_block<R: Rng + ?Sized>(
    model: &FreqDomainModel,
    z: &[f64],
    sigma2: f64,
    cfg: &CpscConfig,
    params: &DetectorParams,
    mode: NoiseStats,
    rng: &mut R,
) -> Result<DetectorResult> {
    let problem = Problem { model, y: z, sigma2 };
    rmcmc_with_restarts(problem, &cfg.alphabet, params, mode, rng)
}

/// Equalizes every block of `frame` with the channel `estimate`.
pub fn detect_cpsc_frame(
    cfg: &CpscConfig,
    frame: &CpscFrame,
    estimate: &FreqSelChannel,
    params: &DetectorParams,
    mode: NoiseStats,
    seed: u64,
) -> Result<(Vec<Vec<u8>>, DetectionStats)> {
    let model = build_freq_model(estimate, cfg.i);
    let mut rng = stream_rng(seed, &[stream::DETECTOR]);
    let mut stats = DetectionStats::default();
    let mut out = Vec::with_capacity(frame.data.len());
    for (z, tx) in frame.z.iter().zip(&frame.data) {
        let res = equalize_block(&model, z, frame.sigma2, cfg, params, mode, &mut rng)?;
        stats.bits += (tx.len() as u32 * cfg.alphabet.bits_per_dim()) as u64;
        stats.bit_errors += cfg.alphabet.bit_errors(&res.x_hat, tx);
        stats.real_ops += res.real_ops;
        stats.sweeps += res.sweeps_used;
        stats.restarts += res.restarts_used;
        out.push(res.x_hat);
    }
    Ok((out, stats))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CpscIterationRecord {
    /// Mean squared tap error per complex coefficient.
    pub mse: f64,
    pub detection: DetectionStats,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CpscOutcome {
    pub estimate: FreqSelChannel,
    pub x_hat: Vec<Vec<u8>>,
    /// Entry 0 is the pilot-only pass.
    pub records: Vec<CpscIterationRecord>,
}

/// Pilot-based equalization followed by rounds of data-phase estimation
/// and re-equalization, with the streams of every round derived from `seed`.
pub fn iterate_cpsc(cfg: &CpscConfig, frame: &CpscFrame, params: &EstimationParams, seed: u64) -> Result<CpscOutcome> {
    let pilot_est = initial_fs_estimate(cfg, &frame.pilot_obs, cfg.pilot_amplitude())?;
    let (mut x_hat, stats) =
        detect_cpsc_frame(cfg, frame, &pilot_est, &params.detector, params.noise_stats, seed)?;
    let mut records = vec![CpscIterationRecord {
        mse: pilot_est.mse(&frame.channel),
        detection: stats,
    }];
    let mut estimate = pilot_est.clone();
    for _ in 0..params.iterations {
        let mut rng = stream_rng(seed, &[stream::ESTIMATOR]);
        estimate = estimate_fs_channel_data_phase(
            cfg,
            &frame.z,
            &x_hat,
            frame.sigma2,
            &pilot_est,
            params.max_sweeps,
            params.variance,
            &mut rng,
        )?;
        let (x, stats) = detect_cpsc_frame(cfg, frame, &estimate, &params.detector, params.noise_stats, seed)?;
        x_hat = x;
        records.push(CpscIterationRecord {
            mse: estimate.mse(&frame.channel),
            detection: stats,
        });
    }
    Ok(CpscOutcome {
        estimate,
        x_hat,
        records,
    })
}
