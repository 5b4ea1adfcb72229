use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::system::ObservationModel;

/// Full-frame linear model r = Ŝg + z with Ŝ = I_{2N} ⊗ X̂ᵀ.
///
/// `X̂` and `Y` are the `[Re −Im; Im Re]` lifts of the frame matrices, `r`
/// stacks the rows of `Y` and `g` stacks the rows of the lifted channel, so
/// coordinate `p·2K + q` of `g` is entry `(p, q)` of the 2N × 2K real
/// channel. Column `p·2K + q` of Ŝ is row `q` of `X̂` placed in segment `p`.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorizedModel {
    n: usize,
    k: usize,
    /// 2·(Q+1)K entries per segment.
    seg: usize,
    /// Rows of X̂, 2K × seg, row-major.
    xrows: Vec<f64>,
    norms: Vec<f64>,
    r: Vec<f64>,
}

/// Row `i` of the `[Re −Im; Im Re]` lift of `m`.
fn lifted_row(m: &DMatrix<Complex64>, i: usize) -> Vec<f64> {
    let (rows, cols) = m.shape();
    let mut out = Vec::with_capacity(2 * cols);
    if i < rows {
        out.extend((0..cols).map(|t| m[(i, t)].re));
        out.extend((0..cols).map(|t| -m[(i, t)].im));
    } else {
        out.extend((0..cols).map(|t| m[(i - rows, t)].im));
        out.extend((0..cols).map(|t| m[(i - rows, t)].re));
    }
    out
}

/// Builds the vectorized model from the received frame `Y_tot` (N × T) and
/// the transmit-matrix estimate `X̂_tot` (K × T).
pub fn vectorize_frame(y_tot: &DMatrix<Complex64>, x_hat: &DMatrix<Complex64>) -> Result<VectorizedModel> {
    let (n, t) = y_tot.shape();
    let (k, tx) = x_hat.shape();
    if t != tx {
        return Err(Error::Dimension(format!(
            "received frame has {t} columns, transmit estimate has {tx}"
        )));
    }
    let seg = 2 * t;
    let xrows: Vec<f64> = (0..2 * k).flat_map(|q| lifted_row(x_hat, q)).collect();
    let norms = xrows
        .chunks_exact(seg.max(1))
        .map(|c| c.iter().fold(0.0, |acc, v| acc + v * v))
        .collect();
    let r = (0..2 * n).flat_map(|p| lifted_row(y_tot, p)).collect();
    Ok(VectorizedModel {
        n,
        k,
        seg,
        xrows,
        norms,
        r,
    })
}

impl VectorizedModel {
    pub fn r(&self) -> &[f64] {
        &self.r
    }

    pub fn antennas(&self) -> usize {
        self.n
    }

    pub fn users(&self) -> usize {
        self.k
    }

    #[inline]
    fn split(&self, j: usize) -> (usize, usize) {
        (j / (2 * self.k), j % (2 * self.k))
    }

    #[inline]
    fn xrow(&self, q: usize) -> &[f64] {
        &self.xrows[q * self.seg..(q + 1) * self.seg]
    }

    /// Ŝg.
    pub fn apply(&self, g: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.obs_len()];
        for (j, &gj) in g.iter().enumerate() {
            self.column_axpy(j, gj, &mut out);
        }
        out
    }
}

impl ObservationModel for VectorizedModel {
    fn obs_len(&self) -> usize {
        2 * self.n * self.seg
    }

    fn coord_len(&self) -> usize {
        4 * self.n * self.k
    }

    fn column_norm_sq(&self, j: usize) -> f64 {
        self.norms[j % (2 * self.k)]
    }

    fn column_dot(&self, j: usize, v: &[f64]) -> f64 {
        let (p, q) = self.split(j);
        let seg = &v[p * self.seg..(p + 1) * self.seg];
        self.xrow(q).iter().zip(seg).fold(0.0, |acc, (a, b)| acc + a * b)
    }

    fn column_axpy(&self, j: usize, a: f64, v: &mut [f64]) {
        let (p, q) = self.split(j);
        let seg = &mut v[p * self.seg..(p + 1) * self.seg];
        for (o, x) in seg.iter_mut().zip(self.xrow(q)) {
            *o += a * x;
        }
    }

    fn column_ops(&self) -> u64 {
        2 * self.seg as u64
    }
}

/// Stacks the rows of a 2N × 2K real channel into g.
pub fn channel_to_g(h: &DMatrix<f64>) -> Vec<f64> {
    let (rows, cols) = h.shape();
    (0..rows).flat_map(|p| (0..cols).map(move |q| h[(p, q)])).collect()
}

/// Inverse of [`channel_to_g`] for a 2N × 2K channel.
pub fn g_to_channel(g: &[f64], n: usize, k: usize) -> DMatrix<f64> {
    DMatrix::from_row_slice(2 * n, 2 * k, g)
}
