use nalgebra::DMatrix;
use num_complex::Complex64;

use super::estimator::{gibbs_channel_estimate, VarianceForm};
use super::frame::{initial_estimate, transmit_matrix, Frame, FrameConfig};
use super::vectorize::{channel_to_g, g_to_channel, vectorize_frame};
use crate::detect::{rmcmc_with_restarts, DetectorParams};
use crate::error::Result;
use crate::rng::{stream, stream_rng};
use crate::system::{lift_matrix, DenseModel, NoiseStats, Problem};

/// Settings of the iterative estimation/detection loop.
#[derive(Clone, Debug, PartialEq)]
pub struct EstimationParams {
    pub detector: DetectorParams,
    /// Gibbs sweeps per estimation (MAX).
    pub max_sweeps: usize,
    /// Estimation/detection iterations after the pilot-only pass.
    pub iterations: usize,
    pub variance: VarianceForm,
    /// Error-free cost statistics assumed by the detector on estimated channels.
    pub noise_stats: NoiseStats,
}

impl EstimationParams {
    pub fn new(detector: DetectorParams) -> Self {
        Self {
            detector,
            max_sweeps: 2,
            iterations: 2,
            variance: VarianceForm::default(),
            noise_stats: NoiseStats::PilotCsi,
        }
    }
}

/// Detection statistics of one pass over a frame.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DetectionStats {
    pub bits: u64,
    pub bit_errors: u64,
    pub real_ops: u64,
    pub sweeps: u64,
    pub restarts: u64,
}

impl DetectionStats {
    pub fn ber(&self) -> f64 {
        self.bit_errors as f64 / self.bits.max(1) as f64
    }
}

/// Channel MSE and detection result after one iteration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IterationRecord {
    /// ‖Ĥ − H‖²_F per complex coefficient on the lifted channel.
    pub mse: f64,
    pub detection: DetectionStats,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IterativeOutcome {
    /// Final 2N × 2K real channel estimate.
    pub h_hat: DMatrix<f64>,
    /// Final detected data columns.
    pub x_hat: Vec<Vec<u8>>,
    /// Entry 0 is the pilot-only pass, entry j the j-th refinement.
    pub records: Vec<IterationRecord>,
}

/// Per-coefficient MSE between two lifted 2N × 2K channels.
pub fn lifted_mse(h_hat: &DMatrix<f64>, h: &DMatrix<f64>) -> f64 {
    let (rows, cols) = h.shape();
    (h_hat - h).norm_squared() / (rows * cols / 2) as f64
}

/// Detects every data column of `frame` on the real channel `h_r`.
pub fn detect_frame(
    cfg: &FrameConfig,
    frame: &Frame,
    h_r: &DenseModel,
    params: &DetectorParams,
    mode: NoiseStats,
    seed: u64,
) -> Result<(Vec<Vec<u8>>, DetectionStats)> {
    let mut rng = stream_rng(seed, &[stream::DETECTOR]);
    let mut stats = DetectionStats::default();
    let mut out = Vec::with_capacity(frame.data.len());
    for (j, tx) in frame.data.iter().enumerate() {
        let y = frame.data_observation(cfg, j);
        let problem = Problem { model: h_r, y: &y, sigma2: frame.sigma2 };
        let res = rmcmc_with_restarts(problem, &cfg.alphabet, params, mode, &mut rng)?;
        stats.bits += (tx.len() as u32 * cfg.alphabet.bits_per_dim()) as u64;
        stats.bit_errors += cfg.alphabet.bit_errors(&res.x_hat, tx);
        stats.real_ops += res.real_ops;
        stats.sweeps += res.sweeps_used;
        stats.restarts += res.restarts_used;
        out.push(res.x_hat);
    }
    Ok((out, stats))
}

/// Pilot estimate followed by `params.iterations` rounds of Gibbs channel
/// estimation with the detected data and redetection.
///
/// Every round reuses the same detector and estimator streams derived from
/// `seed`, so successive rounds differ only through the channel estimate.
pub fn iterate_estimation_detection(
    cfg: &FrameConfig,
    frame: &Frame,
    params: &EstimationParams,
    seed: u64,
) -> Result<IterativeOutcome> {
    let h_true = lift_matrix(&frame.channel.h);
    let h0 = lift_matrix(&initial_estimate(&frame.pilot_block(cfg), cfg.pilot_amplitude())?);
    let g0 = channel_to_g(&h0);

    let mut h_hat = h0;
    let mut records = Vec::with_capacity(params.iterations + 1);
    let model = DenseModel::new(h_hat.clone());
    let (mut x_hat, stats) = detect_frame(cfg, frame, &model, &params.detector, params.noise_stats, seed)?;
    records.push(IterationRecord {
        mse: lifted_mse(&h_hat, &h_true),
        detection: stats,
    });

    for _ in 0..params.iterations {
        let x_tot: DMatrix<Complex64> = transmit_matrix(cfg, &x_hat);
        let vm = vectorize_frame(&frame.received, &x_tot)?;
        let mut rng = stream_rng(seed, &[stream::ESTIMATOR]);
        let g = gibbs_channel_estimate(&vm, vm.r(), frame.sigma2, &g0, params.max_sweeps, params.variance, &mut rng);
        h_hat = g_to_channel(&g, cfg.n, cfg.k);
        let model = DenseModel::new(h_hat.clone());
        let (x, stats) = detect_frame(cfg, frame, &model, &params.detector, params.noise_stats, seed)?;
        x_hat = x;
        records.push(IterationRecord {
            mse: lifted_mse(&h_hat, &h_true),
            detection: stats,
        });
    }
    Ok(IterativeOutcome { h_hat, x_hat, records })
}
