use nalgebra::DVector;

use super::DetectorResult;
use crate::error::{Error, Result};
use crate::system::{ModAlphabet, ObservationModel, Problem};

/// Default cap on the number of lattice points enumerated by [`ml_bruteforce`].
pub const ML_SEARCH_CAP: u64 = 1 << 24;

/// Exhaustive maximum-likelihood detection.
///
/// Every lattice point is visited in lexicographic order of the index
/// vector; a candidate replaces the incumbent only when its metric is
/// strictly smaller, so ties resolve to the lexicographically first vector.
/// Metrics are accumulated on the triangular factor of a QR decomposition
/// with the column order reversed, which lets the enumeration share partial
/// sums between vectors with a common prefix.
pub fn ml_bruteforce<M: ObservationModel + ?Sized>(
    problem: Problem<'_, M>,
    alphabet: &ModAlphabet,
    cap: u64,
) -> Result<DetectorResult> {
    let n = problem.model.coord_len();
    let m = problem.model.obs_len();
    let space = (alphabet.size() as f64).powi(n as i32);
    if space > cap as f64 {
        return Err(Error::SearchSpaceTooLarge { size: space, cap });
    }
    if m < n {
        return Err(Error::Dimension(format!(
            "ML enumeration needs at least as many observations ({m}) as unknowns ({n})"
        )));
    }
    let mut h = problem.model.to_dense();
    // position p of the reversed system holds original coordinate n-1-p
    for j in 0..n / 2 {
        h.swap_columns(j, n - 1 - j);
    }
    let qr = h.qr();
    let r = qr.r();
    let z = qr.q().transpose() * DVector::from_column_slice(problem.y);

    let mut search = Search {
        r: &r,
        z: z.as_slice(),
        levels: alphabet.levels(),
        xv: vec![0.0; n],
        xi: vec![0u8; n],
        best: f64::INFINITY,
        best_x: vec![0u8; n],
        nodes: 0,
    };
    if n > 0 {
        search.descend(n - 1, 0.0);
    }
    let mut x_hat = search.best_x;
    x_hat.reverse();
    let nodes = search.nodes;
    let best_cost = problem.cost(&alphabet.values(&x_hat));
    let qr_ops = 2 * (m * n * n) as u64;
    Ok(DetectorResult {
        x_hat,
        best_cost,
        sweeps_used: 0,
        restarts_used: 0,
        real_ops: qr_ops + nodes * (2 * n as u64 + 4),
    })
}

struct Search<'a> {
    r: &'a nalgebra::DMatrix<f64>,
    z: &'a [f64],
    levels: &'a [f64],
    xv: Vec<f64>,
    xi: Vec<u8>,
    best: f64,
    best_x: Vec<u8>,
    nodes: u64,
}

impl Search<'_> {
    fn descend(&mut self, p: usize, partial: f64) {
        let n = self.xv.len();
        let mut u = self.z[p];
        for q in p + 1..n {
            u -= self.r[(p, q)] * self.xv[q];
        }
        let rpp = self.r[(p, p)];
        for (a, &level) in self.levels.iter().enumerate() {
            let v = u - rpp * level;
            let metric = partial + v * v;
            self.nodes += 1;
            self.xv[p] = level;
            self.xi[p] = a as u8;
            if p == 0 {
                if metric < self.best {
                    self.best = metric;
                    self.best_x.copy_from_slice(&self.xi);
                }
            } else {
                self.descend(p - 1, metric);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::DenseModel;
    use nalgebra::DMatrix;

    #[test]
    fn rejects_oversized_search() {
        let model = DenseModel::new(DMatrix::identity(40, 40));
        let y = vec![0.0; 40];
        let a = ModAlphabet::new(4).unwrap();
        let p = Problem { model: &model, y: &y, sigma2: 1.0 };
        assert!(matches!(
            ml_bruteforce(p, &a, ML_SEARCH_CAP),
            Err(Error::SearchSpaceTooLarge { .. })
        ));
    }

    #[test]
    fn ties_resolve_to_lexicographic_first() {
        // zero channel: every vector has the same cost
        let model = DenseModel::new(DMatrix::zeros(4, 4));
        let y = vec![1.0; 4];
        let a = ModAlphabet::new(16).unwrap();
        let p = Problem { model: &model, y: &y, sigma2: 1.0 };
        assert_eq!(ml_bruteforce(p, &a, ML_SEARCH_CAP).unwrap().x_hat, vec![0, 0, 0, 0]);
    }
}
