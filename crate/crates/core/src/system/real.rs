use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::channel::ComplexChannel;
use super::model::{DenseModel, ObservationModel};
use crate::error::{Error, Result};

/// Lifts a complex matrix to `[Re −Im; Im Re]`.
pub fn lift_matrix(h: &DMatrix<Complex64>) -> DMatrix<f64> {
    let (n, k) = h.shape();
    DMatrix::from_fn(2 * n, 2 * k, |r, c| {
        let v = h[(r % n, c % k)];
        match (r < n, c < k) {
            (true, true) => v.re,
            (true, false) => -v.im,
            (false, true) => v.im,
            (false, false) => v.re,
        }
    })
}

/// Lifts a complex vector to `[Re; Im]`.
pub fn lift_vector(v: &[Complex64]) -> Vec<f64> {
    v.iter().map(|c| c.re).chain(v.iter().map(|c| c.im)).collect()
}

/// Inverse of [`lift_vector`].
pub fn unlift_vector(v: &[f64]) -> Vec<Complex64> {
    let half = v.len() / 2;
    (0..half).map(|i| Complex64::new(v[i], v[half + i])).collect()
}

/// Real-valued detection problem `y = Hx + n` of size 2N × 2K.
#[derive(Clone, Debug)]
pub struct RealSystem {
    pub h: DenseModel,
    pub y: Vec<f64>,
    /// Complex noise variance σ².
    pub sigma2: f64,
}

impl RealSystem {
    pub fn new(h: DMatrix<f64>, y: Vec<f64>, sigma2: f64) -> Result<Self> {
        if h.nrows() != y.len() || h.nrows() % 2 != 0 || h.ncols() % 2 != 0 {
            return Err(Error::Dimension(format!(
                "H is {}x{}, y has {} entries",
                h.nrows(),
                h.ncols(),
                y.len()
            )));
        }
        if !(sigma2 > 0.0) {
            return Err(Error::invalid("sigma2", "noise variance must be positive"));
        }
        Ok(Self {
            h: DenseModel::new(h),
            y,
            sigma2,
        })
    }

    /// Receive antennas N.
    pub fn n(&self) -> usize {
        self.h.obs_len() / 2
    }

    /// Users K.
    pub fn k(&self) -> usize {
        self.h.coord_len() / 2
    }

    pub fn problem(&self) -> Problem<'_, DenseModel> {
        Problem {
            model: &self.h,
            y: &self.y,
            sigma2: self.sigma2,
        }
    }
}

/// Lifts `(H_c, y_c)` into a [`RealSystem`].
pub fn lift_to_real(h: &DMatrix<Complex64>, y: &[Complex64], sigma2: f64) -> Result<RealSystem> {
    if h.nrows() != y.len() {
        return Err(Error::Dimension(format!(
            "H_c has {} rows, y_c has {} entries",
            h.nrows(),
            y.len()
        )));
    }
    RealSystem::new(lift_matrix(h), lift_vector(y), sigma2)
}

/// Borrowed view of a detection problem over any observation model.
pub struct Problem<'a, M: ObservationModel + ?Sized> {
    pub model: &'a M,
    pub y: &'a [f64],
    pub sigma2: f64,
}

impl<M: ObservationModel + ?Sized> Clone for Problem<'_, M> {
    fn clone(&self) -> Self {
        *self
    }
}

impl<M: ObservationModel + ?Sized> Copy for Problem<'_, M> {}

impl<M: ObservationModel + ?Sized> Problem<'_, M> {
    /// Number of complex observations (N for the flat model).
    pub fn complex_obs(&self) -> usize {
        self.model.obs_len() / 2
    }

    /// Number of complex unknowns (K for the flat model).
    pub fn complex_coords(&self) -> usize {
        self.model.coord_len() / 2
    }

    pub fn cost(&self, x: &[f64]) -> f64 {
        residual_cost(self.model, self.y, x)
    }
}

/// Observation of one channel use over a flat channel.
#[derive(Clone, Debug)]
pub struct FlatObservation {
    pub system: RealSystem,
    /// Transmitted real-dimension level indices, `[Re; Im]`.
    pub tx: Vec<u8>,
    /// Lifted noise vector.
    pub noise: Vec<f64>,
}

impl FlatObservation {
    /// Rebuilds `y = Hx + n` from the channel, the transmitted indices and the noise.
    pub fn from_parts(
        channel: &ComplexChannel,
        alphabet: &super::ModAlphabet,
        sigma2: f64,
        tx: Vec<u8>,
        noise: Vec<f64>,
    ) -> Result<Self> {
        let h = lift_matrix(&channel.h);
        if tx.len() != h.ncols() || noise.len() != h.nrows() {
            return Err(Error::Dimension(format!(
                "channel is {}x{} real, got {} symbols and {} noise samples",
                h.nrows(),
                h.ncols(),
                tx.len(),
                noise.len()
            )));
        }
        if tx.iter().any(|&t| t as usize >= alphabet.size()) {
            return Err(Error::invalid("tx", "symbol index outside the alphabet"));
        }
        let model = DenseModel::new(h);
        let mut y = model.apply(&alphabet.values(&tx));
        for (v, n) in y.iter_mut().zip(&noise) {
            *v += n;
        }
        let system = RealSystem::new(model.matrix(), y, sigma2)?;
        Ok(Self { system, tx, noise })
    }
}

/// Transmits uniformly random symbols over `channel` with CN(0, σ²) noise.
pub fn transmit_flat<R: Rng + ?Sized>(
    channel: &ComplexChannel,
    alphabet: &super::ModAlphabet,
    sigma2: f64,
    rng: &mut R,
) -> Result<FlatObservation> {
    let (n2, k2) = (2 * channel.antennas(), 2 * channel.users());
    let tx: Vec<u8> = (0..k2)
        .map(|_| rng.random_range(0..alphabet.size()) as u8)
        .collect();
    let s = (sigma2 / 2.0).sqrt();
    let noise: Vec<f64> = (0..n2)
        .map(|_| s * Distribution::<f64>::sample(&StandardNormal, rng))
        .collect();
    FlatObservation::from_parts(channel, alphabet, sigma2, tx, noise)
}

/// ‖y − Hx‖².
pub fn residual_cost<M: ObservationModel + ?Sized>(model: &M, y: &[f64], x: &[f64]) -> f64 {
    model.residual(y, x).iter().map(|v| v * v).sum()
}

/// Which statistics the error-free residual follows.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum NoiseStats {
    /// Residual per complex dimension has variance σ².
    #[default]
    PerfectCsi,
    /// Residual includes pilot-estimation error; variance 2σ².
    PilotCsi,
}

impl NoiseStats {
    pub fn variance_scale(self) -> f64 {
        match self {
            NoiseStats::PerfectCsi => 1.0,
            NoiseStats::PilotCsi => 2.0,
        }
    }
}

/// Cost centred and scaled by the χ² statistics of the error-free residual.
///
/// `n` is the number of complex observations.
pub fn standardized_cost(cost: f64, n: usize, sigma2: f64, mode: NoiseStats) -> f64 {
    let v = mode.variance_scale() * sigma2;
    let n = n as f64;
    (cost - n * v) / (n.sqrt() * v)
}
