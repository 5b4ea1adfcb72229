use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::system::channel::complex_gaussian;
use crate::system::{lift_vector, ComplexChannel, ModAlphabet};

/// Frame layout: a K-symbol pilot block followed by Q data blocks of K
/// channel uses each.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameConfig {
    pub k: usize,
    pub n: usize,
    pub q: usize,
    pub alphabet: ModAlphabet,
}

impl FrameConfig {
    pub fn new(k: usize, n: usize, q: usize, alphabet: ModAlphabet) -> Result<Self> {
        if k == 0 || n == 0 {
            return Err(Error::invalid("k/n", "dimensions must be positive"));
        }
        if k > n {
            return Err(Error::invalid("k", "must not exceed n"));
        }
        Ok(Self { k, n, q, alphabet })
    }

    /// Pilot amplitude p = √(K·Es).
    pub fn pilot_amplitude(&self) -> f64 {
        (self.k as f64 * self.alphabet.energy()).sqrt()
    }

    /// Channel uses per frame, (Q+1)·K.
    pub fn frame_len(&self) -> usize {
        (self.q + 1) * self.k
    }

    pub fn data_columns(&self) -> usize {
        self.q * self.k
    }
}

/// One transmitted and received frame.
#[derive(Clone, Debug, PartialEq)]
pub struct Frame {
    pub channel: ComplexChannel,
    pub sigma2: f64,
    /// Lifted PAM indices of each data column (2K entries: real parts, then imaginary).
    pub data: Vec<Vec<u8>>,
    /// Complex noise, N × (Q+1)K; pilot block first.
    pub noise: DMatrix<Complex64>,
    /// Received frame Y_tot, N × (Q+1)K.
    pub received: DMatrix<Complex64>,
}

impl Frame {
    /// Rebuilds the received signal from its ingredients.
    pub fn from_parts(
        cfg: &FrameConfig,
        channel: ComplexChannel,
        sigma2: f64,
        data: Vec<Vec<u8>>,
        noise: DMatrix<Complex64>,
    ) -> Result<Self> {
        if channel.h.shape() != (cfg.n, cfg.k) {
            return Err(Error::Dimension(format!(
                "channel is {:?}, frame expects {}x{}",
                channel.h.shape(),
                cfg.n,
                cfg.k
            )));
        }
        if noise.shape() != (cfg.n, cfg.frame_len()) {
            return Err(Error::Dimension("noise matrix does not match frame".into()));
        }
        if data.len() != cfg.data_columns() || data.iter().any(|c| c.len() != 2 * cfg.k) {
            return Err(Error::Dimension("data columns do not match frame".into()));
        }
        let x = transmit_matrix(cfg, &data);
        let received = &channel.h * x + &noise;
        Ok(Self {
            channel,
            sigma2,
            data,
            noise,
            received,
        })
    }

    /// Pilot-block observations Y_P (N × K).
    pub fn pilot_block(&self, cfg: &FrameConfig) -> DMatrix<Complex64> {
        self.received.columns(0, cfg.k).into_owned()
    }

    /// Lifted observation of data column `j`.
    pub fn data_observation(&self, cfg: &FrameConfig, j: usize) -> Vec<f64> {
        let col: Vec<Complex64> = self.received.column(cfg.k + j).iter().copied().collect();
        lift_vector(&col)
    }
}

/// Draws data and noise for one frame over `channel`.
pub fn generate_frame<R: Rng + ?Sized>(
    cfg: &FrameConfig,
    channel: ComplexChannel,
    sigma2: f64,
    rng: &mut R,
) -> Result<Frame> {
    let size = cfg.alphabet.size();
    let data = (0..cfg.data_columns())
        .map(|_| (0..2 * cfg.k).map(|_| rng.random_range(0..size) as u8).collect())
        .collect();
    let noise = DMatrix::from_fn(cfg.n, cfg.frame_len(), |_, _| complex_gaussian(rng, sigma2));
    Frame::from_parts(cfg, channel, sigma2, data, noise)
}

/// X_tot = [p·I_K, X_1, …, X_Q] built from lifted data indices.
pub fn transmit_matrix(cfg: &FrameConfig, data: &[Vec<u8>]) -> DMatrix<Complex64> {
    let k = cfg.k;
    let p = cfg.pilot_amplitude();
    let mut x = DMatrix::from_element(k, k + data.len(), Complex64::new(0.0, 0.0));
    for i in 0..k {
        x[(i, i)] = Complex64::new(p, 0.0);
    }
    for (j, col) in data.iter().enumerate() {
        for i in 0..k {
            x[(i, k + j)] = Complex64::new(cfg.alphabet.level(col[i]), cfg.alphabet.level(col[k + i]));
        }
    }
    x
}

/// Pilot-based estimate Ĥ_c = Y_P / p.
pub fn initial_estimate(y_pilot: &DMatrix<Complex64>, p: f64) -> Result<DMatrix<Complex64>> {
    if !(p > 0.0) {
        return Err(Error::invalid("p", "pilot amplitude must be positive"));
    }
    Ok(y_pilot.map(|v| v / p))
}
