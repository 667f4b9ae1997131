//! Self-similarity matrices: the isometry-blind proxy for a point cloud.

use rayon::prelude::*;

use crate::cloud::TimeOrderedPointCloud;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Symmetry tolerance accepted when wrapping an externally supplied matrix.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Square, symmetric, nonnegative, zero-diagonal distance matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SelfSimilarityMatrix {
    values: Matrix,
}

impl SelfSimilarityMatrix {
    pub fn new(values: Matrix) -> Result<Self> {
        let n = values.rows();
        if n != values.cols() {
            return Err(Error::invalid(format!(
                "SSM must be square, got {}x{}",
                n,
                values.cols()
            )));
        }
        if n == 0 {
            return Err(Error::invalid("SSM must not be empty"));
        }
        for i in 0..n {
            if values[(i, i)] != 0.0 {
                return Err(Error::invalid(format!("SSM diagonal entry {i} is nonzero")));
            }
            for j in 0..n {
                let v = values[(i, j)];
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::invalid(format!(
                        "SSM entry ({i},{j}) = {v} is not a finite nonnegative value"
                    )));
                }
                if (v - values[(j, i)]).abs() > SYMMETRY_TOL {
                    return Err(Error::invalid(format!("SSM is not symmetric at ({i},{j})")));
                }
            }
        }
        Ok(Self { values })
    }

    pub(crate) fn from_trusted(values: Matrix) -> Self {
        debug_assert_eq!(values.rows(), values.cols());
        Self { values }
    }

    pub fn size(&self) -> usize {
        self.values.rows()
    }

    pub fn values(&self) -> &Matrix {
        &self.values
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[(i, j)]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.values.row(i)
    }

    pub fn max(&self) -> f64 {
        self.values.max()
    }

    pub fn is_degenerate(&self) -> bool {
        self.max() == 0.0
    }

    /// Divides every entry by the matrix maximum; an all-zero matrix is
    /// returned unchanged.
    pub fn scaled_to_unit(&self) -> Self {
        let max = self.max();
        if max == 0.0 {
            return self.clone();
        }
        Self::from_trusted(self.values.map(|v| v / max))
    }

    /// SSM of the cloud followed by itself, without recomputing distances.
    pub fn concat_self(&self) -> Self {
        let n = self.size();
        Self::from_trusted(Matrix::from_fn(2 * n, 2 * n, |i, j| self.get(i % n, j % n)))
    }
}

impl From<&TimeOrderedPointCloud> for SelfSimilarityMatrix {
    fn from(cloud: &TimeOrderedPointCloud) -> Self {
        compute_ssm(cloud)
    }
}

/// Pairwise distance matrix of `cloud` under its metric.
///
/// Each upper-triangle entry is computed once and mirrored, so the result is
/// exactly symmetric. Rows are computed in parallel; every entry is
/// independent, so the output does not depend on the thread count.
pub fn compute_ssm(cloud: &TimeOrderedPointCloud) -> SelfSimilarityMatrix {
    let n = cloud.len();
    let metric = cloud.metric().metric();
    let upper: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let p = cloud.point(i);
            (i + 1..n)
                .map(|j| metric.distance(p, cloud.point(j)))
                .collect()
        })
        .collect();
    let mut values = Matrix::zeros(n, n);
    for (i, row) in upper.iter().enumerate() {
        for (k, &d) in row.iter().enumerate() {
            let j = i + 1 + k;
            values[(i, j)] = d;
            values[(j, i)] = d;
        }
    }
    SelfSimilarityMatrix::from_trusted(values)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;

    #[test]
    fn repeated_point_gives_zero_matrix() {
        let c = TimeOrderedPointCloud::euclidean(vec![vec![0.0, 0.0]; 3]).unwrap();
        let ssm = compute_ssm(&c);
        assert_eq!(ssm.values(), &Matrix::zeros(3, 3));
        assert!(ssm.is_degenerate());
    }

    #[test]
    fn figure_eight_quarter_samples() {
        let pts = [0.0, 0.25, 0.5, 0.75]
            .iter()
            .map(|t| vec![(2.0 * PI * t).cos(), (4.0 * PI * t).sin()])
            .collect();
        let ssm = compute_ssm(&TimeOrderedPointCloud::euclidean(pts).unwrap());
        assert!((ssm.get(0, 2) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_invalid_matrices() {
        let asym = Matrix::from_rows(vec![vec![0.0, 1.0], vec![2.0, 0.0]]).unwrap();
        assert!(SelfSimilarityMatrix::new(asym).is_err());
        let diag = Matrix::from_rows(vec![vec![1.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert!(SelfSimilarityMatrix::new(diag).is_err());
        let neg = Matrix::from_rows(vec![vec![0.0, -1.0], vec![-1.0, 0.0]]).unwrap();
        assert!(SelfSimilarityMatrix::new(neg).is_err());
        assert!(SelfSimilarityMatrix::new(Matrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn concat_self_tiles() {
        let c = TimeOrderedPointCloud::euclidean(vec![vec![0.0], vec![2.0], vec![5.0]]).unwrap();
        let ssm = compute_ssm(&c);
        let doubled = compute_ssm(&c.concat_self());
        assert_eq!(ssm.concat_self(), doubled);
    }
}
