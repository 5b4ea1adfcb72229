use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::system::ObservationModel;

/// Denominator used for the conditional variance of a channel coordinate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum VarianceForm {
    /// σ²/(2‖s̄_i‖²) with ‖s̄_i‖² = ‖ŝ_i‖² + σ², consistent with the mean.
    #[default]
    Augmented,
    /// σ²/(2‖ŝ_i‖²).
    Unaugmented,
}

/// One draw of the estimator, for auditing the weighted average.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EstimatorSample {
    pub coord: usize,
    pub value: f64,
    pub weight: f64,
}

/// Gibbs sampler over real channel coefficients with prior 𝒩(0, ½) and
/// likelihood exp(−‖r − Ŝg‖²/σ²), producing a weighted running average of
/// the samples.
pub struct GibbsEstimator<'a, M: ObservationModel + ?Sized> {
    model: &'a M,
    sigma2: f64,
    variance: VarianceForm,
    g_hat: Vec<f64>,
    g_star: Vec<f64>,
    weight_sums: Vec<f64>,
    resid: Vec<f64>,
}

impl<'a, M: ObservationModel + ?Sized> GibbsEstimator<'a, M> {
    pub fn new(model: &'a M, r: &[f64], sigma2: f64, g0: &[f64], variance: VarianceForm) -> Self {
        assert_eq!(g0.len(), model.coord_len(), "initial vector length");
        assert_eq!(r.len(), model.obs_len(), "observation length");
        let resid = model.residual(r, g0);
        Self {
            model,
            sigma2,
            variance,
            g_hat: g0.to_vec(),
            g_star: g0.to_vec(),
            weight_sums: vec![0.0; g0.len()],
            resid,
        }
    }

    pub fn g_hat(&self) -> &[f64] {
        &self.g_hat
    }

    pub fn g_star(&self) -> &[f64] {
        &self.g_star
    }

    pub fn weight_sums(&self) -> &[f64] {
        &self.weight_sums
    }

    /// Cached r − Ŝĝ.
    pub fn residual(&self) -> &[f64] {
        &self.resid
    }

    /// Mean and variance of coordinate `i` given all others.
    pub fn conditional_params(&self, i: usize) -> (f64, f64) {
        let norm = self.model.column_norm_sq(i);
        // r̃ᵀŝ with r̃ = residual + ĝ_i ŝ_i
        let proj = self.model.column_dot(i, &self.resid) + self.g_hat[i] * norm;
        let aug = norm + self.sigma2;
        let mean = proj / aug;
        let var = match self.variance {
            VarianceForm::Augmented => self.sigma2 / (2.0 * aug),
            VarianceForm::Unaugmented if norm > 0.0 => self.sigma2 / (2.0 * norm),
            VarianceForm::Unaugmented => 0.5,
        };
        (mean, var)
    }

    /// One pass over every coordinate.
    pub fn sweep<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        self.sweep_inner(rng, None);
    }

    /// [`sweep`](Self::sweep) that appends each draw to `log`.
    pub fn sweep_logged<R: Rng + ?Sized>(&mut self, rng: &mut R, log: &mut Vec<EstimatorSample>) {
        self.sweep_inner(rng, Some(log));
    }

    fn sweep_inner<R: Rng + ?Sized>(&mut self, rng: &mut R, mut log: Option<&mut Vec<EstimatorSample>>) {
        for i in 0..self.g_hat.len() {
            let (mean, var) = self.conditional_params(i);
            let z: f64 = StandardNormal.sample(rng);
            let value = mean + var.sqrt() * z;
            let delta = value - self.g_hat[i];
            if delta != 0.0 {
                self.model.column_axpy(i, -delta, &mut self.resid);
            }
            self.g_hat[i] = value;
            // exp(−(ĝ−μ)²/(2σ_g²)) with ĝ − μ = σ_g z
            let weight = (-0.5 * z * z).exp();
            let total = self.weight_sums[i] + weight;
            if total > 0.0 {
                self.g_star[i] = (weight * value + self.weight_sums[i] * self.g_star[i]) / total;
            }
            self.weight_sums[i] = total;
            if let Some(l) = log.as_deref_mut() {
                l.push(EstimatorSample { coord: i, value, weight });
            }
        }
    }
}

/// Runs `max_sweeps` full sweeps from `g0` and returns the weighted estimate.
pub fn gibbs_channel_estimate<M, R>(
    model: &M,
    r: &[f64],
    sigma2: f64,
    g0: &[f64],
    max_sweeps: usize,
    variance: VarianceForm,
    rng: &mut R,
) -> Vec<f64>
where
    M: ObservationModel + ?Sized,
    R: Rng + ?Sized,
{
    let mut est = GibbsEstimator::new(model, r, sigma2, g0, variance);
    for _ in 0..max_sweeps {
        est.sweep(rng);
    }
    est.g_star
}
