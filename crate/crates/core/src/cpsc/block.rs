use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rustfft::FftPlanner;

use super::config::FreqSelChannel;
use crate::system::channel::complex_gaussian;

/// Received samples of one block, including the cyclic-prefix interval.
#[derive(Clone, Debug, PartialEq)]
pub struct ReceivedBlock {
    /// N × (I+L−1) samples.
    pub samples: DMatrix<Complex64>,
    /// The noise that was added, same shape.
    pub noise: DMatrix<Complex64>,
}

/// Prepends the last L−1 symbols of `x` as a cyclic prefix.
pub fn add_cyclic_prefix(x: &[Complex64], l: usize) -> Vec<Complex64> {
    let cp = l.saturating_sub(1).min(x.len());
    x[x.len() - cp..].iter().chain(x).copied().collect()
}

/// Linear convolution of every user's CP-prefixed block with the taps,
/// plus the given noise. `x` holds one I-symbol block per user.
pub fn convolve_block(channel: &FreqSelChannel, x: &[Vec<Complex64>], noise: DMatrix<Complex64>) -> ReceivedBlock {
    let l = channel.l;
    let len = x.first().map_or(0, |v| v.len()) + l - 1;
    let tx: Vec<Vec<Complex64>> = x.iter().map(|v| add_cyclic_prefix(v, l)).collect();
    let mut samples = noise.clone();
    for j in 0..channel.n {
        for (k, a) in tx.iter().enumerate() {
            for n in 0..len {
                let mut acc = Complex64::new(0.0, 0.0);
                for t in 0..l.min(n + 1) {
                    acc += channel.tap(j, k, t) * a[n - t];
                }
                samples[(j, n)] += acc;
            }
        }
    }
    ReceivedBlock { samples, noise }
}

/// Transmits one block over the multipath channel with CN(0, σ²) noise.
pub fn simulate_block<R: Rng + ?Sized>(
    channel: &FreqSelChannel,
    x: &[Vec<Complex64>],
    sigma2: f64,
    rng: &mut R,
) -> ReceivedBlock {
    let len = x.first().map_or(0, |v| v.len()) + channel.l - 1;
    let noise = DMatrix::from_fn(channel.n, len, |_, _| complex_gaussian(rng, sigma2));
    convolve_block(channel, x, noise)
}

/// Drops the first L−1 samples of every antenna, leaving N × I.
pub fn remove_cyclic_prefix(samples: &DMatrix<Complex64>, l: usize) -> DMatrix<Complex64> {
    let cp = l - 1;
    samples.columns(cp, samples.ncols() - cp).into_owned()
}

/// Dense I × I circulant matrix with first column [h(0), …, h(L−1), 0, …].
pub fn circulant(taps: &[Complex64], size: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(size, size, |r, c| {
        let d = (r + size - c) % size;
        taps.get(d).copied().unwrap_or_default()
    })
}

/// Unitary DFT matrix F[m, t] = e^{−2πi·mt/I}/√I.
pub fn dft_matrix(size: usize) -> DMatrix<Complex64> {
    let s = 1.0 / (size as f64).sqrt();
    DMatrix::from_fn(size, size, |m, t| twiddle(m * t, size) * s)
}

/// e^{−2πi·e/size}, reduced modulo `size` first.
#[inline]
pub(crate) fn twiddle(e: usize, size: usize) -> Complex64 {
    let a = -2.0 * std::f64::consts::PI * (e % size) as f64 / size as f64;
    Complex64::new(a.cos(), a.sin())
}

/// In-place unitary DFT of each row of `m`.
pub fn unitary_dft_rows(m: &mut DMatrix<Complex64>, inverse: bool) {
    let size = m.ncols();
    if size == 0 {
        return;
    }
    let mut planner = FftPlanner::new();
    let fft = if inverse {
        planner.plan_fft_inverse(size)
    } else {
        planner.plan_fft_forward(size)
    };
    let s = 1.0 / (size as f64).sqrt();
    let mut buf = vec![Complex64::new(0.0, 0.0); size];
    for r in 0..m.nrows() {
        for (c, b) in buf.iter_mut().enumerate() {
            *b = m[(r, c)];
        }
        fft.process(&mut buf);
        for (c, b) in buf.iter().enumerate() {
            m[(r, c)] = b * s;
        }
    }
}

/// Unnormalized I-point DFT of the zero-padded taps: the circulant's eigenvalues.
pub fn tap_spectrum(taps: &[Complex64], size: usize) -> Vec<Complex64> {
    (0..size)
        .map(|m| {
            taps.iter()
                .enumerate()
                .fold(Complex64::new(0.0, 0.0), |acc, (l, h)| acc + h * twiddle(m * l, size))
        })
        .collect()
}
