use nalgebra::DMatrix;
use num_complex::Complex64;

use super::frame::FrameConfig;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CrlbMode {
    /// Only the pilot block is known.
    PilotOnly,
    /// The whole frame is known (genie-aided data).
    FullFrame,
}

/// Nominal CRLB on the per-coefficient MSE, assuming orthogonal
/// equal-energy data blocks.
pub fn crlb_mse(cfg: &FrameConfig, sigma2: f64, mode: CrlbMode) -> f64 {
    let pilot = sigma2 / (cfg.k as f64 * cfg.alphabet.energy());
    match mode {
        CrlbMode::PilotOnly => pilot,
        CrlbMode::FullFrame => pilot / (cfg.q + 1) as f64,
    }
}

/// CRLB σ²·tr((XXᴴ)⁻¹)/K for a known transmit matrix X (K × T).
pub fn crlb_mse_for(x: &DMatrix<Complex64>, sigma2: f64) -> Result<f64> {
    let k = x.nrows();
    let gram = x * x.adjoint();
    let inv = gram
        .cholesky()
        .ok_or(Error::Singular("frame Gram matrix XXᴴ"))?
        .inverse();
    let tr: f64 = (0..k).map(|i| inv[(i, i)].re).sum();
    Ok(sigma2 * tr / k as f64)
}
