//! Column-oriented access to a real linear observation model `y = Hx + n`.
//!
//! The detectors and the Gibbs channel estimator only ever touch one column
//! of `H` at a time, so the operator can be a dense matrix, a Kronecker
//! structure or a frequency-domain product that is never materialized.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub trait ObservationModel: Sync {
    /// Rows of `H` (real observations).
    fn obs_len(&self) -> usize;

    /// Columns of `H` (real unknowns).
    fn coord_len(&self) -> usize;

    /// ‖h_j‖².
    fn column_norm_sq(&self, j: usize) -> f64;

    /// h_jᵀ v.
    fn column_dot(&self, j: usize, v: &[f64]) -> f64;

    /// v += a · h_j.
    fn column_axpy(&self, j: usize, a: f64, v: &mut [f64]);

    /// Real operations charged for one `column_dot` or `column_axpy`.
    fn column_ops(&self) -> u64 {
        2 * self.obs_len() as u64
    }

    /// y − Hx accumulated column by column.
    fn residual(&self, y: &[f64], x: &[f64]) -> Vec<f64> {
        let mut e = y.to_vec();
        for (j, &xj) in x.iter().enumerate() {
            if xj != 0.0 {
                self.column_axpy(j, -xj, &mut e);
            }
        }
        e
    }

    /// Solves (HᵀH + λI) x = Hᵀy. Returns the solution and its op count.
    fn regularized_solve(&self, y: &[f64], lambda: f64) -> Result<(Vec<f64>, u64)> {
        let k = self.coord_len();
        let mut gram = DMatrix::<f64>::zeros(k, k);
        let dense = self.to_dense();
        for a in 0..k {
            let ca = dense.column(a);
            for b in a..k {
                let v = ca.dot(&dense.column(b));
                gram[(a, b)] = v;
                gram[(b, a)] = v;
            }
            gram[(a, a)] += lambda;
        }
        let rhs = DVector::from_iterator(k, (0..k).map(|j| self.column_dot(j, y)));
        let chol = gram
            .cholesky()
            .ok_or(Error::Singular("regularized normal equations"))?;
        let x = chol.solve(&rhs);
        let n = self.obs_len() as u64;
        let k = k as u64;
        let ops = k * (k + 1) * n + 2 * k * n + k * k * k / 3 + 2 * k * k;
        Ok((x.iter().copied().collect(), ops))
    }

    /// Materializes `H` column by column. Intended for small instances.
    fn to_dense(&self) -> DMatrix<f64> {
        let (m, k) = (self.obs_len(), self.coord_len());
        let mut out = DMatrix::<f64>::zeros(m, k);
        let mut buf = vec![0.0; m];
        for j in 0..k {
            buf.iter_mut().for_each(|v| *v = 0.0);
            self.column_axpy(j, 1.0, &mut buf);
            out.column_mut(j).copy_from_slice(&buf);
        }
        out
    }
}

/// Dense column-major real matrix with cached column norms.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseModel {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
    norms: Vec<f64>,
}

impl DenseModel {
    pub fn new(matrix: DMatrix<f64>) -> Self {
        let (rows, cols) = matrix.shape();
        let data: Vec<f64> = matrix.as_slice().to_vec();
        let norms = data
            .chunks_exact(rows.max(1))
            .take(cols)
            .map(|c| c.iter().fold(0.0, |acc, v| acc + v * v))
            .collect();
        Self {
            rows,
            cols,
            data,
            norms,
        }
    }

    #[inline]
    pub fn column(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        DMatrix::from_column_slice(self.rows, self.cols, &self.data)
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.rows];
        for (j, &xj) in x.iter().enumerate() {
            for (o, h) in out.iter_mut().zip(self.column(j)) {
                *o += h * xj;
            }
        }
        out
    }
}

/// Dot product accumulated separately over the two halves of the vectors.
///
/// Lifted complex models store `[Re; Im]` halves; structured models reproduce
/// this exact summation order, which keeps degenerate cases bit-identical.
#[inline]
pub(crate) fn split_dot(a: &[f64], b: &[f64]) -> f64 {
    let half = a.len() / 2;
    let (a0, a1) = a.split_at(half);
    let (b0, b1) = b.split_at(half);
    let mut s0 = 0.0;
    for (x, y) in a0.iter().zip(b0) {
        s0 += x * y;
    }
    let mut s1 = 0.0;
    for (x, y) in a1.iter().zip(b1) {
        s1 += x * y;
    }
    s0 + s1
}

impl ObservationModel for DenseModel {
    fn obs_len(&self) -> usize {
        self.rows
    }

    fn coord_len(&self) -> usize {
        self.cols
    }

    #[inline]
    fn column_norm_sq(&self, j: usize) -> f64 {
        self.norms[j]
    }

    #[inline]
    fn column_dot(&self, j: usize, v: &[f64]) -> f64 {
        split_dot(self.column(j), v)
    }

    #[inline]
    fn column_axpy(&self, j: usize, a: f64, v: &mut [f64]) {
        for (o, h) in v.iter_mut().zip(self.column(j)) {
            *o += a * h;
        }
    }

    fn to_dense(&self) -> DMatrix<f64> {
        self.matrix()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dense_column_ops_match_matrix_algebra() {
        let m = DMatrix::from_row_slice(4, 2, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0]);
        let model = DenseModel::new(m.clone());
        let v = [1.0, -1.0, 0.5, 2.0];
        assert_eq!(model.column_dot(0, &v), 1.0 - 3.0 + 2.5 + 14.0);
        assert_eq!(model.column_norm_sq(1), 4.0 + 16.0 + 36.0 + 64.0);
        let y = [1.0, 1.0, 1.0, 1.0];
        let r = model.residual(&y, &[1.0, -1.0]);
        assert_eq!(r, vec![2.0, 2.0, 2.0, 2.0]);
        assert_eq!(model.to_dense(), m);
    }

    #[test]
    fn regularized_solve_matches_direct_inverse() {
        let m = DMatrix::from_row_slice(3, 2, &[1.0, 0.5, -0.3, 2.0, 0.7, 0.1]);
        let y = [0.3, -1.2, 2.0];
        let model = DenseModel::new(m.clone());
        let (x, _) = model.regularized_solve(&y, 0.25).unwrap();
        let g = m.transpose() * &m + DMatrix::identity(2, 2) * 0.25;
        let expect = g.try_inverse().unwrap() * m.transpose() * DVector::from_column_slice(&y);
        for (a, b) in x.iter().zip(expect.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
