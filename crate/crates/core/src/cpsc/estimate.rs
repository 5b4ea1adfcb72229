use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use super::block::{twiddle, unitary_dft_rows};
use super::config::{CpscConfig, FreqSelChannel};
use crate::chanest::{gibbs_channel_estimate, VarianceForm};
use crate::error::{Error, Result};
use crate::system::{lift_matrix, lift_vector, unlift_vector, DenseModel};

/// Complex symbols of a block as one row per user (K × I), from lifted
/// x̄ indices.
pub fn block_symbols(cfg: &CpscConfig, idx: &[u8]) -> DMatrix<Complex64> {
    let (k, i) = (cfg.k, cfg.i);
    let ki = k * i;
    DMatrix::from_fn(k, i, |u, t| {
        Complex64::new(cfg.alphabet.level(idx[t * k + u]), cfg.alphabet.level(idx[ki + t * k + u]))
    })
}

/// Â (QI × KL): row `blk·I + m`, column `u·L + l` holds b̂_blk^u(m)·e^{−2πi·ml/I},
/// with b̂ the unitary DFT of the detected symbols.
pub fn data_phase_matrix(cfg: &CpscConfig, detected: &[Vec<u8>]) -> DMatrix<Complex64> {
    let (k, i, l) = (cfg.k, cfg.i, cfg.l);
    let mut a = DMatrix::from_element(detected.len() * i, k * l, Complex64::new(0.0, 0.0));
    for (blk, idx) in detected.iter().enumerate() {
        let mut b = block_symbols(cfg, idx);
        unitary_dft_rows(&mut b, false);
        for m in 0..i {
            for u in 0..k {
                for t in 0..l {
                    a[(blk * i + m, u * l + t)] = b[(u, m)] * twiddle(m * t, i);
                }
            }
        }
    }
    a
}

/// Observations z^j of antenna `j` stacked over blocks (length QI).
pub fn antenna_observations(cfg: &CpscConfig, z_blocks: &[Vec<f64>], j: usize) -> Vec<Complex64> {
    let ni = cfg.n * cfg.i;
    z_blocks
        .iter()
        .flat_map(|z| (0..cfg.i).map(move |m| Complex64::new(z[m * cfg.n + j], z[ni + m * cfg.n + j])))
        .collect()
}

/// Refines the taps of every antenna with the Gibbs estimator on
/// z^j = Âh^j + w^j, starting from `start`.
#[allow(clippy::too_many_arguments)]
pub fn estimate_fs_channel_data_phase<R: Rng + ?Sized>(
    cfg: &CpscConfig,
    z_blocks: &[Vec<f64>],
    detected: &[Vec<u8>],
    sigma2: f64,
    start: &FreqSelChannel,
    max_sweeps: usize,
    variance: VarianceForm,
    rng: &mut R,
) -> Result<FreqSelChannel> {
    if z_blocks.len() != detected.len() {
        return Err(Error::Dimension("one detected block per observed block is required".into()));
    }
    let a = DenseModel::new(lift_matrix(&data_phase_matrix(cfg, detected)));
    let mut taps = Vec::with_capacity(cfg.n * cfg.k * cfg.l);
    for j in 0..cfg.n {
        let r = lift_vector(&antenna_observations(cfg, z_blocks, j));
        let g0 = lift_vector(start.antenna(j));
        let g = gibbs_channel_estimate(&a, &r, sigma2, &g0, max_sweeps, variance, rng);
        taps.extend(unlift_vector(&g));
    }
    FreqSelChannel::new(cfg.n, cfg.k, cfg.l, taps)
}
