use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Received-power imbalance across users.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PowerImbalance {
    /// σ_k² = 1 for every user.
    None,
    /// σ_k² uniform in dB on `[lo_db, hi_db]`, renormalized to ∑σ_k² = K.
    UniformDb { lo_db: f64, hi_db: f64 },
}

/// Flat-fading uplink channel `H_c` (N×K) with per-user powers.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexChannel {
    pub h: DMatrix<Complex64>,
    pub powers: Vec<f64>,
}

impl ComplexChannel {
    pub fn users(&self) -> usize {
        self.h.ncols()
    }

    pub fn antennas(&self) -> usize {
        self.h.nrows()
    }
}

/// Draws a CN(0, σ²) sample.
#[inline]
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let s = (variance / 2.0).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(s * re, s * im)
}

pub fn draw_powers<R: Rng + ?Sized>(
    k: usize,
    imbalance: PowerImbalance,
    rng: &mut R,
) -> Result<Vec<f64>> {
    match imbalance {
        PowerImbalance::None => Ok(vec![1.0; k]),
        PowerImbalance::UniformDb { lo_db, hi_db } => {
            if !(lo_db <= hi_db) {
                return Err(Error::invalid("imbalance", "lower bound exceeds upper bound"));
            }
            let mut p: Vec<f64> = (0..k)
                .map(|_| {
                    let db = if hi_db > lo_db {
                        rng.random_range(lo_db..=hi_db)
                    } else {
                        lo_db
                    };
                    10f64.powf(db / 10.0)
                })
                .collect();
            let scale = k as f64 / p.iter().sum::<f64>();
            p.iter_mut().for_each(|v| *v *= scale);
            Ok(p)
        }
    }
}

/// Draws an i.i.d. Rayleigh channel with optional power imbalance.
pub fn generate_flat_channel<R: Rng + ?Sized>(
    k: usize,
    n: usize,
    imbalance: PowerImbalance,
    rng: &mut R,
) -> Result<ComplexChannel> {
    if k == 0 || k > n {
        return Err(Error::invalid("k", format!("need 1 <= K <= N, got K={k}, N={n}")));
    }
    let powers = draw_powers(k, imbalance, rng)?;
    let mut h = DMatrix::<Complex64>::zeros(n, k);
    for c in 0..k {
        for r in 0..n {
            h[(r, c)] = complex_gaussian(rng, powers[c]);
        }
    }
    Ok(ComplexChannel { h, powers })
}
