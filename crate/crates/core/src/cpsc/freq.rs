use nalgebra::DMatrix;
use num_complex::Complex64;
use rustfft::FftPlanner;

use super::block::{dft_matrix, tap_spectrum};
use super::config::FreqSelChannel;
use crate::error::Result;
use crate::system::{lift_matrix, DenseModel, ObservationModel};

/// Frequency-domain block model z̄ = D̄F̄x̄ + w̄ in lifted real form.
///
/// Unknowns follow the time-major, user-minor order x̄ = [x(0,1..K), x(1,1..K), …]
/// with all real parts first, then all imaginary parts. Observations follow
/// the bin-major order z̄ = [z(0,1..N), z(1,1..N), …], lifted the same way.
/// Columns are generated on demand from the per-bin channel matrices and the
/// unitary DFT; the 2NI × 2KI matrix is never stored.
#[derive(Clone, Debug, PartialEq)]
pub struct FreqDomainModel {
    n: usize,
    k: usize,
    i: usize,
    /// D^{j,k}(m) at `(m·N + j)·K + k`.
    d: Vec<Complex64>,
    /// Unitary DFT entries F[m, t] at `m·I + t`.
    f: Vec<Complex64>,
    norms: Vec<f64>,
}

/// Builds the frequency-domain model of `channel` for blocks of `i` symbols.
pub fn build_freq_model(channel: &FreqSelChannel, i: usize) -> FreqDomainModel {
    let (n, k) = (channel.n, channel.k);
    let mut d = vec![Complex64::new(0.0, 0.0); i * n * k];
    for j in 0..n {
        for u in 0..k {
            let taps: Vec<Complex64> = (0..channel.l).map(|l| channel.tap(j, u, l)).collect();
            for (m, v) in tap_spectrum(&taps, i).into_iter().enumerate() {
                d[(m * n + j) * k + u] = v;
            }
        }
    }
    let f = dft_matrix(i).transpose().as_slice().to_vec();
    let mut model = FreqDomainModel {
        n,
        k,
        i,
        d,
        f,
        norms: Vec::new(),
    };
    model.norms = (0..2 * k * i).map(|c| model.norm_of(c)).collect();
    model
}

impl FreqDomainModel {
    pub fn block_len(&self) -> usize {
        self.i
    }

    /// Per-bin channel D̄(m), N × K.
    pub fn bin_matrix(&self, m: usize) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.n, self.k, |j, u| self.d[(m * self.n + j) * self.k + u])
    }

    /// (time index, user, imaginary) of real coordinate `c`.
    #[inline]
    fn coord(&self, c: usize) -> (usize, usize, bool) {
        let ki = self.k * self.i;
        let (imag, z) = if c < ki { (false, c) } else { (true, c - ki) };
        (z / self.k, z % self.k, imag)
    }

    /// Lifted entry of column `c` at complex observation (m, j).
    #[inline]
    fn entry(&self, t: usize, u: usize, imag: bool, m: usize, j: usize) -> (f64, f64) {
        let v = self.d[(m * self.n + j) * self.k + u] * self.f[m * self.i + t];
        if imag {
            (-v.im, v.re)
        } else {
            (v.re, v.im)
        }
    }

    fn norm_of(&self, c: usize) -> f64 {
        let (t, u, imag) = self.coord(c);
        // real halves first, then imaginary halves, in one running sum
        let mut acc = 0.0;
        for m in 0..self.i {
            for j in 0..self.n {
                let (re, _) = self.entry(t, u, imag, m, j);
                acc += re * re;
            }
        }
        for m in 0..self.i {
            for j in 0..self.n {
                let (_, im) = self.entry(t, u, imag, m, j);
                acc += im * im;
            }
        }
        acc
    }

    /// H̄x̄ for a lifted x̄, using FFTs over each user's block.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let (n, k, i) = (self.n, self.k, self.i);
        let ki = k * i;
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(i);
        let s = 1.0 / (i as f64).sqrt();
        // b̄(m, u) after the per-user DFT
        let mut b = vec![Complex64::new(0.0, 0.0); ki];
        let mut buf = vec![Complex64::new(0.0, 0.0); i];
        for u in 0..k {
            for (t, v) in buf.iter_mut().enumerate() {
                *v = Complex64::new(x[t * k + u], x[ki + t * k + u]);
            }
            fft.process(&mut buf);
            for (m, v) in buf.iter().enumerate() {
                b[m * k + u] = v * s;
            }
        }
        let ni = n * i;
        let mut out = vec![0.0; 2 * ni];
        for m in 0..i {
            for j in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for u in 0..k {
                    acc += self.d[(m * n + j) * k + u] * b[m * k + u];
                }
                out[m * n + j] = acc.re;
                out[ni + m * n + j] = acc.im;
            }
        }
        out
    }
}

impl ObservationModel for FreqDomainModel {
    fn obs_len(&self) -> usize {
        2 * self.n * self.i
    }

    fn coord_len(&self) -> usize {
        2 * self.k * self.i
    }

    fn column_norm_sq(&self, c: usize) -> f64 {
        self.norms[c]
    }

    fn column_dot(&self, c: usize, v: &[f64]) -> f64 {
        let (t, u, imag) = self.coord(c);
        let ni = self.n * self.i;
        let (v0, v1) = v.split_at(ni);
        let mut s0 = 0.0;
        let mut s1 = 0.0;
        for m in 0..self.i {
            for j in 0..self.n {
                let (re, im) = self.entry(t, u, imag, m, j);
                s0 += re * v0[m * self.n + j];
                s1 += im * v1[m * self.n + j];
            }
        }
        s0 + s1
    }

    fn column_axpy(&self, c: usize, a: f64, v: &mut [f64]) {
        let (t, u, imag) = self.coord(c);
        let ni = self.n * self.i;
        for m in 0..self.i {
            for j in 0..self.n {
                let (re, im) = self.entry(t, u, imag, m, j);
                v[m * self.n + j] += a * re;
                v[ni + m * self.n + j] += a * im;
            }
        }
    }

    /// Solves bin by bin: x̄ = F̄ᴴ(D̄ᴴD̄ + λI)⁻¹D̄ᴴz̄.
    fn regularized_solve(&self, y: &[f64], lambda: f64) -> Result<(Vec<f64>, u64)> {
        let (n, k, i) = (self.n, self.k, self.i);
        let (ni, ki) = (n * i, k * i);
        let mut u = vec![Complex64::new(0.0, 0.0); ki];
        let mut ops = 0u64;
        let mut rhs = vec![0.0; 2 * n];
        for m in 0..i {
            for j in 0..n {
                rhs[j] = y[m * n + j];
                rhs[n + j] = y[ni + m * n + j];
            }
            let bin = DenseModel::new(lift_matrix(&self.bin_matrix(m)));
            let (sol, o) = bin.regularized_solve(&rhs, lambda)?;
            ops += o;
            for q in 0..k {
                u[m * k + q] = Complex64::new(sol[q], sol[k + q]);
            }
        }
        let mut x = vec![0.0; 2 * ki];
        for t in 0..i {
            for q in 0..k {
                let mut acc = Complex64::new(0.0, 0.0);
                for m in 0..i {
                    acc += self.f[m * i + t].conj() * u[m * k + q];
                }
                x[t * k + q] = acc.re;
                x[ki + t * k + q] = acc.im;
            }
        }
        ops += 8 * (k * i * i) as u64;
        Ok((x, ops))
    }
}
