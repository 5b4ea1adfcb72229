//! Linear MMSE detection, SNR conventions and the analytic AWGN reference.

use statrs::function::erf::erfc;

use super::model::ObservationModel;
use super::real::Problem;
use super::ModAlphabet;
use crate::error::Result;

/// How the SNR axis maps to the noise variance σ².
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SnrConvention {
    /// Average received SNR per receive antenna, K·Es/σ².
    #[default]
    PerReceiveAntenna,
    /// Per-bit SNR, K·Es/(σ²·log2 M).
    PerBit,
}

impl SnrConvention {
    /// σ² for `snr_db` with `k` unit-power users.
    pub fn sigma2(self, snr_db: f64, k: usize, alphabet: &ModAlphabet) -> f64 {
        let snr = 10f64.powf(snr_db / 10.0);
        let base = k as f64 * alphabet.energy() / snr;
        match self {
            SnrConvention::PerReceiveAntenna => base,
            SnrConvention::PerBit => base / alphabet.bits_per_symbol() as f64,
        }
    }
}

/// Soft MMSE estimate (HᵀH + (σ²/Es)I)⁻¹Hᵀy and its op count.
pub fn mmse_soft<M: ObservationModel + ?Sized>(
    problem: &Problem<'_, M>,
    alphabet: &ModAlphabet,
) -> Result<(Vec<f64>, u64)> {
    problem
        .model
        .regularized_solve(problem.y, problem.sigma2 / alphabet.energy())
}

/// MMSE estimate quantized to the nearest PAM level per coordinate.
pub fn mmse_detect<M: ObservationModel + ?Sized>(
    problem: &Problem<'_, M>,
    alphabet: &ModAlphabet,
) -> Result<(Vec<u8>, u64)> {
    let (soft, ops) = mmse_soft(problem, alphabet)?;
    let hard = soft.iter().map(|&v| alphabet.nearest_index(v)).collect();
    Ok((hard, ops + 2 * soft.len() as u64))
}

fn q_function(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// Exact BER of Gray-coded square M-QAM on an unfaded AWGN channel at
/// average symbol SNR Es/σ² (the per-antenna SNR seen by one user when K = N).
pub fn siso_awgn_ber(alphabet: &ModAlphabet, snr_db: f64) -> f64 {
    let snr = 10f64.powf(snr_db / 10.0);
    // Per real dimension: levels spaced by 2, noise variance Es/(2·snr).
    let sd = (alphabet.energy() / (2.0 * snr)).sqrt();
    let levels = alphabet.levels();
    let side = levels.len();
    let bits = alphabet.bits_per_dim() as f64;
    let mut total = 0.0;
    for (t, &sent) in levels.iter().enumerate() {
        for d in 0..side {
            let lo = if d == 0 { f64::NEG_INFINITY } else { levels[d] - 1.0 };
            let hi = if d + 1 == side { f64::INFINITY } else { levels[d] + 1.0 };
            let p_hi = if hi.is_infinite() { 0.0 } else { q_function((hi - sent) / sd) };
            let p_lo = if lo.is_infinite() { 1.0 } else { q_function((lo - sent) / sd) };
            let p = p_lo - p_hi;
            let errs = alphabet.bit_errors(&[t as u8], &[d as u8]) as f64;
            total += p * errs;
        }
    }
    total / (side as f64 * bits)
}
