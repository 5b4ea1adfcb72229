use rand::Rng;

use crate::system::{ModAlphabet, ObservationModel, Problem};

/// Sweeps between full residual recomputations.
const REFRESH_PERIOD: u64 = 64;

/// Ops per candidate when forming a conditional: the cost change
/// δ²‖h‖² − 2δ·dot, scaling, max-shift, exp, accumulation and the
/// inverse-CDF comparison.
const OPS_PER_CANDIDATE: u64 = 12;

/// Single-site Gibbs sampler over the lattice of PAM indices, targeting
/// p(x) ∝ exp(−‖y − Hx‖² / (α²σ²)).
///
/// The residual `y − Hx` is cached so that each coordinate update costs one
/// column dot product plus one column update when the symbol moves.
pub struct GibbsChain<'a, M: ObservationModel + ?Sized> {
    problem: Problem<'a, M>,
    alphabet: &'a ModAlphabet,
    idx: Vec<u8>,
    x: Vec<f64>,
    resid: Vec<f64>,
    cost: f64,
    inv_temp: f64,
    weights: Vec<f64>,
    sweeps: u64,
    ops: u64,
}

impl<'a, M: ObservationModel + ?Sized> GibbsChain<'a, M> {
    pub fn new(problem: Problem<'a, M>, alphabet: &'a ModAlphabet, start: &[u8], alpha: f64) -> Self {
        assert_eq!(start.len(), problem.model.coord_len(), "start vector length");
        let x = alphabet.values(start);
        let resid = problem.model.residual(problem.y, &x);
        let cost = resid.iter().fold(0.0, |acc, v| acc + v * v);
        let m = problem.model;
        let ops = m.coord_len() as u64 * m.column_ops() + 2 * m.obs_len() as u64;
        Self {
            problem,
            alphabet,
            idx: start.to_vec(),
            x,
            resid,
            cost,
            inv_temp: 1.0 / (alpha * alpha * problem.sigma2),
            weights: vec![0.0; alphabet.size()],
            sweeps: 0,
            ops,
        }
    }

    pub fn state(&self) -> &[u8] {
        &self.idx
    }

    /// ‖y − Hx‖² of the current state, maintained incrementally.
    pub fn cost(&self) -> f64 {
        self.cost
    }

    pub fn ops(&self) -> u64 {
        self.ops
    }

    pub fn sweeps(&self) -> u64 {
        self.sweeps
    }

    pub fn dim(&self) -> usize {
        self.idx.len()
    }

    /// Normalized conditional pmf of coordinate `i` given all others.
    pub fn conditional(&mut self, i: usize) -> Vec<f64> {
        let dot = self.problem.model.column_dot(i, &self.resid);
        let total = self.fill_weights(i, dot);
        self.weights.iter().map(|w| w / total).collect()
    }

    /// Fills `weights` with unnormalized conditional probabilities and
    /// returns their sum.
    fn fill_weights(&mut self, i: usize, dot: f64) -> f64 {
        let norm = self.problem.model.column_norm_sq(i);
        let xi = self.x[i];
        let mut max_logit = f64::NEG_INFINITY;
        for (w, &a) in self.weights.iter_mut().zip(self.alphabet.levels()) {
            let d = a - xi;
            let logit = -(d * d * norm - 2.0 * d * dot) * self.inv_temp;
            *w = logit;
            max_logit = max_logit.max(logit);
        }
        let mut total = 0.0;
        for w in self.weights.iter_mut() {
            *w = (*w - max_logit).exp();
            total += *w;
        }
        total
    }

    fn move_to(&mut self, i: usize, new: u8, dot: f64) {
        if new == self.idx[i] {
            return;
        }
        let a = self.alphabet.level(new);
        let d = a - self.x[i];
        let norm = self.problem.model.column_norm_sq(i);
        self.cost += d * d * norm - 2.0 * d * dot;
        self.problem.model.column_axpy(i, -d, &mut self.resid);
        self.x[i] = a;
        self.idx[i] = new;
        self.ops += self.problem.model.column_ops() + 6;
    }

    /// Draws coordinate `i` from its conditional.
    pub fn gibbs_update<R: Rng + ?Sized>(&mut self, i: usize, rng: &mut R) {
        let dot = self.problem.model.column_dot(i, &self.resid);
        let total = self.fill_weights(i, dot);
        let u = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut pick = self.weights.len() - 1;
        for (j, w) in self.weights.iter().enumerate() {
            acc += w;
            if u < acc {
                pick = j;
                break;
            }
        }
        self.ops += self.problem.model.column_ops() + OPS_PER_CANDIDATE * self.weights.len() as u64;
        self.move_to(i, pick as u8, dot);
    }

    /// Draws coordinate `i` from a freshly drawn random pmf over the
    /// alphabet, or over the current level and its neighbours.
    pub fn random_update<R: Rng + ?Sized>(&mut self, i: usize, neighbors_only: bool, rng: &mut R) {
        let size = self.alphabet.size();
        let cur = self.idx[i] as usize;
        let (lo, hi) = if neighbors_only {
            (cur.saturating_sub(1), (cur + 1).min(size - 1))
        } else {
            (0, size - 1)
        };
        let support = hi - lo + 1;
        let mut total = 0.0;
        for w in self.weights[..support].iter_mut() {
            *w = rng.random::<f64>();
            total += *w;
        }
        let u = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut pick = hi;
        for (j, w) in self.weights[..support].iter().enumerate() {
            acc += w;
            if u < acc {
                pick = lo + j;
                break;
            }
        }
        self.ops += 3 * support as u64;
        if pick != cur {
            let dot = self.problem.model.column_dot(i, &self.resid);
            self.ops += self.problem.model.column_ops();
            self.move_to(i, pick as u8, dot);
        }
    }

    /// One Gibbs pass over every coordinate in order.
    pub fn sweep<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        for i in 0..self.dim() {
            self.gibbs_update(i, rng);
        }
        self.end_sweep();
    }

    /// Marks the end of a sweep; periodically recomputes the residual to
    /// bound floating-point drift.
    pub fn end_sweep(&mut self) {
        self.sweeps += 1;
        if self.sweeps % REFRESH_PERIOD == 0 {
            self.refresh();
        }
    }

    pub fn refresh(&mut self) {
        let m = self.problem.model;
        self.resid = m.residual(self.problem.y, &self.x);
        self.cost = self.resid.iter().fold(0.0, |acc, v| acc + v * v);
        self.ops += m.coord_len() as u64 * m.column_ops() + 2 * m.obs_len() as u64;
    }
}

/// Conditional pmf of coordinate `i` under p(x) ∝ exp(−‖y − Hx‖²/(α²σ²)).
pub fn gibbs_conditional_pmf<M: ObservationModel + ?Sized>(
    problem: Problem<'_, M>,
    alphabet: &ModAlphabet,
    state: &[u8],
    i: usize,
    alpha: f64,
) -> Vec<f64> {
    GibbsChain::new(problem, alphabet, state, alpha).conditional(i)
}
