//! Dynamic time warping over an arbitrary cost matrix, and the
//! point-constrained variant used to fill the cross-similarity warp matrix.

use crate::error::{Error, Result};
use crate::matrix::CostMatrix;
use crate::path::WarpingPath;

#[derive(Clone, Debug, PartialEq)]
pub struct DtwResult {
    pub cost: f64,
    pub path: WarpingPath,
}

/// Minimum-cost global warping path through `costs`.
///
/// The table has a row and column of `+inf` guards, with the origin set to 0.
/// Ties are broken toward the diagonal predecessor, then `(i-1, j)`, then
/// `(i, j-1)`, which makes the returned path deterministic.
pub fn dtw(costs: &CostMatrix) -> Result<DtwResult> {
    let (m, n) = (costs.rows(), costs.cols());
    if m == 0 || n == 0 {
        return Err(Error::invalid("DTW needs a nonempty cost matrix"));
    }
    if costs.as_slice().iter().any(|v| v.is_nan()) {
        return Err(Error::invalid("cost matrix contains NaN"));
    }
    let w = n + 1;
    let mut table = vec![f64::INFINITY; (m + 1) * w];
    table[0] = 0.0;
    for i in 0..m {
        for j in 0..n {
            let diag = table[i * w + j];
            let up = table[i * w + j + 1];
            let left = table[(i + 1) * w + j];
            table[(i + 1) * w + j + 1] = costs[(i, j)] + diag.min(up).min(left);
        }
    }

    let mut pairs = Vec::with_capacity(m + n);
    let (mut i, mut j) = (m, n);
    loop {
        pairs.push((i - 1, j - 1));
        if i == 1 && j == 1 {
            break;
        }
        let diag = table[(i - 1) * w + j - 1];
        let up = table[(i - 1) * w + j];
        let left = table[i * w + j - 1];
        if diag <= up && diag <= left {
            i -= 1;
            j -= 1;
        } else if up <= left {
            i -= 1;
        } else {
            j -= 1;
        }
    }
    pairs.reverse();
    Ok(DtwResult {
        cost: table[m * w + n],
        path: WarpingPath::new(pairs),
    })
}

/// DTW cost between two 1-D sequences under `|a - b|`, keeping one row of
/// the table in `buf`. Produces bit-identical costs to [`dtw`] on the
/// corresponding L1 cost matrix.
pub(crate) fn l1_dtw_cost(a: &[f64], b: &[f64], buf: &mut Vec<f64>) -> f64 {
    debug_assert!(!a.is_empty() && !b.is_empty());
    buf.clear();
    let mut acc = 0.0;
    let x0 = a[0];
    buf.extend(b.iter().map(|&y| {
        acc += (x0 - y).abs();
        acc
    }));
    for &x in &a[1..] {
        let mut diag = buf[0];
        buf[0] += (x - b[0]).abs();
        let mut left = buf[0];
        for (cell, &y) in buf[1..].iter_mut().zip(&b[1..]) {
            let up = *cell;
            left = diag.min(up).min(left) + (x - y).abs();
            diag = up;
            *cell = left;
        }
    }
    buf[b.len() - 1]
}

/// Minimum L1 DTW cost between `row_a` and `row_b` over global warping paths
/// that contain `(i, j)`.
///
/// Computed as the prefix DTW ending at `(i, j)` plus the suffix DTW starting
/// there, with the shared cell counted once.
pub fn constrained_dtw(row_a: &[f64], row_b: &[f64], i: usize, j: usize) -> Result<f64> {
    if i >= row_a.len() || j >= row_b.len() {
        return Err(Error::invalid(format!(
            "constraint ({i},{j}) outside {}x{}",
            row_a.len(),
            row_b.len()
        )));
    }
    let rev_a: Vec<f64> = row_a.iter().rev().copied().collect();
    let rev_b: Vec<f64> = row_b.iter().rev().copied().collect();
    let mut buf = Vec::new();
    Ok(RowPair {
        a: row_a,
        b: row_b,
        rev_a: &rev_a,
        rev_b: &rev_b,
    }
    .constrained_dtw(i, j, &mut buf))
}

/// Two rows together with their reversals, so suffix alignments run as
/// prefix alignments without allocating.
pub(crate) struct RowPair<'a> {
    pub a: &'a [f64],
    pub b: &'a [f64],
    pub rev_a: &'a [f64],
    pub rev_b: &'a [f64],
}

impl RowPair<'_> {
    pub fn constrained_dtw(&self, i: usize, j: usize, buf: &mut Vec<f64>) -> f64 {
        let (m, n) = (self.a.len(), self.b.len());
        let prefix = l1_dtw_cost(&self.a[..=i], &self.b[..=j], buf);
        let suffix = l1_dtw_cost(&self.rev_a[..m - i], &self.rev_b[..n - j], buf);
        let shared = (self.a[i] - self.b[j]).abs();
        (prefix + suffix - shared).max(0.0)
    }
}
