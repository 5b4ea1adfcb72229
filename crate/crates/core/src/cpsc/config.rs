use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::system::channel::complex_gaussian;
use crate::system::ModAlphabet;

/// Block structure of a cyclic-prefixed single-carrier frame.
#[derive(Clone, Debug, PartialEq)]
pub struct CpscConfig {
    pub k: usize,
    pub n: usize,
    /// Multipath taps L.
    pub l: usize,
    /// Information symbols per block I.
    pub i: usize,
    /// Data blocks per frame Q.
    pub q: usize,
    /// Power-delay profile Ω_l².
    pub omega2: Vec<f64>,
    pub alphabet: ModAlphabet,
}

impl CpscConfig {
    /// Configuration with unit-power taps, Ω_l² = 1.
    pub fn uniform(k: usize, n: usize, l: usize, i: usize, q: usize, alphabet: ModAlphabet) -> Result<Self> {
        Self::new(k, n, l, i, q, vec![1.0; l], alphabet)
    }

    pub fn new(
        k: usize,
        n: usize,
        l: usize,
        i: usize,
        q: usize,
        omega2: Vec<f64>,
        alphabet: ModAlphabet,
    ) -> Result<Self> {
        if k == 0 || n == 0 {
            return Err(Error::invalid("k/n", "dimensions must be positive"));
        }
        if l == 0 {
            return Err(Error::invalid("l", "at least one tap is required"));
        }
        if i < l {
            return Err(Error::invalid("i", "block length must be at least the channel length"));
        }
        if omega2.len() != l || omega2.iter().any(|w| !(*w >= 0.0)) {
            return Err(Error::invalid("omega2", "need L non-negative tap powers"));
        }
        Ok(Self {
            k,
            n,
            l,
            i,
            q,
            omega2,
            alphabet,
        })
    }

    /// Pilot amplitude b = √(K·Es·∑Ω_l²).
    pub fn pilot_amplitude(&self) -> f64 {
        (self.k as f64 * self.alphabet.energy() * self.omega2.iter().sum::<f64>()).sqrt()
    }

    /// Noise variance for an average receive SNR of `snr_db` per antenna,
    /// σ² = K·Es·∑Ω_l² / 10^(snr/10).
    pub fn sigma2(&self, snr_db: f64) -> f64 {
        self.k as f64 * self.alphabet.energy() * self.omega2.iter().sum::<f64>() / 10f64.powf(snr_db / 10.0)
    }

    /// Channel uses per frame, (L+1)K + (I+L−1)Q − 1.
    pub fn frame_len(&self) -> usize {
        (self.l + 1) * self.k + (self.i + self.l - 1) * self.q - 1
    }

    /// Real unknowns per block, 2KI.
    pub fn block_coords(&self) -> usize {
        2 * self.k * self.i
    }
}

/// Multipath taps h^{(j,k)}(l) for every antenna/user pair.
#[derive(Clone, Debug, PartialEq)]
pub struct FreqSelChannel {
    pub n: usize,
    pub k: usize,
    pub l: usize,
    /// Entry `(j·K + k)·L + l`.
    pub taps: Vec<Complex64>,
}

impl FreqSelChannel {
    pub fn new(n: usize, k: usize, l: usize, taps: Vec<Complex64>) -> Result<Self> {
        if taps.len() != n * k * l {
            return Err(Error::Dimension(format!(
                "expected {} taps, got {}",
                n * k * l,
                taps.len()
            )));
        }
        Ok(Self { n, k, l, taps })
    }

    #[inline]
    pub fn tap(&self, j: usize, k: usize, l: usize) -> Complex64 {
        self.taps[(j * self.k + k) * self.l + l]
    }

    /// Taps seen by antenna `j`, ordered [h^{(j,1)}; …; h^{(j,K)}].
    pub fn antenna(&self, j: usize) -> &[Complex64] {
        let w = self.k * self.l;
        &self.taps[j * w..(j + 1) * w]
    }

    /// Flat channel formed by tap `l`, N × K.
    pub fn tap_matrix(&self, l: usize) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.n, self.k, |j, k| self.tap(j, k, l))
    }

    /// Mean squared tap error per complex coefficient.
    pub fn mse(&self, other: &FreqSelChannel) -> f64 {
        let s: f64 = self.taps.iter().zip(&other.taps).map(|(a, b)| (a - b).norm_sqr()).sum();
        s / self.taps.len() as f64
    }
}

/// Draws taps h^{(j,k)}(l) ~ CN(0, Ω_l²).
pub fn generate_fs_channel<R: Rng + ?Sized>(cfg: &CpscConfig, rng: &mut R) -> FreqSelChannel {
    let mut taps = Vec::with_capacity(cfg.n * cfg.k * cfg.l);
    for _ in 0..cfg.n * cfg.k {
        for &w in &cfg.omega2 {
            taps.push(complex_gaussian(rng, w));
        }
    }
    FreqSelChannel {
        n: cfg.n,
        k: cfg.k,
        l: cfg.l,
        taps,
    }
}

/// Time-staggered pilot impulses: user k sends `b` at position kL of a
/// KL-long sequence. Returns one row per user.
pub fn build_pilot_sequences(k: usize, l: usize, b: f64) -> Result<DMatrix<f64>> {
    if !(b > 0.0) {
        return Err(Error::invalid("b", "pilot amplitude must be positive"));
    }
    let mut m = DMatrix::zeros(k, k * l);
    for u in 0..k {
        m[(u, u * l)] = b;
    }
    Ok(m)
}

/// Tap estimate ĥ^j = y_P^j / b from the N × KL pilot observations.
pub fn initial_fs_estimate(cfg: &CpscConfig, y_pilot: &DMatrix<Complex64>, b: f64) -> Result<FreqSelChannel> {
    if !(b > 0.0) {
        return Err(Error::invalid("b", "pilot amplitude must be positive"));
    }
    if y_pilot.shape() != (cfg.n, cfg.k * cfg.l) {
        return Err(Error::Dimension("pilot observation must be N x KL".into()));
    }
    let taps = (0..cfg.n)
        .flat_map(|j| (0..cfg.k * cfg.l).map(move |c| (j, c)))
        .map(|(j, c)| y_pilot[(j, c)] / b)
        .collect();
    FreqSelChannel::new(cfg.n, cfg.k, cfg.l, taps)
}
