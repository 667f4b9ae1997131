//! Isometry-blind dynamic time warping.
//!
//! Every row of one SSM is aligned against every row of the other with an
//! L1 DTW that is forced through the cell pairing the two rows' own indices.
//! The resulting cross-similarity warp matrix (CSWM) is then aligned with an
//! ordinary DTW, and half of that cost is the dissimilarity.

use rayon::prelude::*;
use serde::Serialize;

use crate::dtw::{dtw, RowPair};
use crate::error::{Error, Result};
use crate::matrix::{CostMatrix, Matrix};
use crate::oracle;
use crate::path::WarpingPath;
use crate::ssm::SelfSimilarityMatrix;

#[derive(Clone, Debug, PartialEq)]
pub struct CswmResult {
    pub cswm: CostMatrix,
    /// Half the outer DTW cost over `cswm`.
    pub cost: f64,
    pub path: WarpingPath,
}

fn reversed_rows(ssm: &SelfSimilarityMatrix) -> Vec<Vec<f64>> {
    (0..ssm.size())
        .map(|i| ssm.row(i).iter().rev().copied().collect())
        .collect()
}

/// Builds the CSWM: entry `(i, j)` is the L1 DTW cost between row `i` of `x`
/// and row `j` of `y`, constrained to paths through `(i, j)`.
///
/// Rows are distributed over the current rayon pool. Every entry is computed
/// independently into its own slot, so the matrix is identical for any
/// thread count.
pub fn cswm(x: &SelfSimilarityMatrix, y: &SelfSimilarityMatrix) -> CostMatrix {
    let (m, n) = (x.size(), y.size());
    let rev_x = reversed_rows(x);
    let rev_y = reversed_rows(y);
    let rows: Vec<Vec<f64>> = (0..m)
        .into_par_iter()
        .map_init(Vec::new, |buf, i| {
            (0..n)
                .map(|j| {
                    RowPair {
                        a: x.row(i),
                        b: y.row(j),
                        rev_a: &rev_x[i],
                        rev_b: &rev_y[j],
                    }
                    .constrained_dtw(i, j, buf)
                })
                .collect()
        })
        .collect();
    Matrix::new(m, n, rows.into_iter().flatten().collect()).expect("cswm shape")
}

/// Isometry-blind DTW between two SSMs.
pub fn ibdtw(x: &SelfSimilarityMatrix, y: &SelfSimilarityMatrix) -> Result<CswmResult> {
    if x.size() < 2 || y.size() < 2 {
        return Err(Error::invalid("IBDTW needs at least 2 points on each side"));
    }
    if x.is_degenerate() || y.is_degenerate() {
        log::warn!("degenerate SSM (constant point cloud); IBDTW cost is trivially zero");
    }
    let cswm = cswm(x, y);
    let outer = dtw(&cswm)?;
    Ok(CswmResult {
        cswm,
        cost: 0.5 * outer.cost,
        path: outer.path,
    })
}

/// Largest side accepted by [`lower_bound_check`].
pub const LOWER_BOUND_MAX_SIZE: usize = 7;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LowerBoundReport {
    pub ibdtw_cost: f64,
    /// Half the minimum ordered 1-stress over all global warping paths.
    pub half_min_stress: f64,
    pub margin: f64,
    pub holds: bool,
}

/// Compares the IBDTW cost with the exhaustive minimum 1-stress restricted
/// to warping paths. The cost must never exceed half the minimum stress.
pub fn lower_bound_check(
    x: &SelfSimilarityMatrix,
    y: &SelfSimilarityMatrix,
) -> Result<LowerBoundReport> {
    if x.size() > LOWER_BOUND_MAX_SIZE || y.size() > LOWER_BOUND_MAX_SIZE {
        return Err(Error::invalid(format!(
            "lower bound check is exhaustive; sides must be at most {LOWER_BOUND_MAX_SIZE}, got {}x{}",
            x.size(),
            y.size()
        )));
    }
    let ib = ibdtw(x, y)?;
    let stress = oracle::min_stress(x, y, oracle::StressNorm::L1)?;
    let half = 0.5 * stress.best_stress;
    Ok(LowerBoundReport {
        ibdtw_cost: ib.cost,
        half_min_stress: half,
        margin: half - ib.cost,
        holds: ib.cost <= half + 1e-9,
    })
}
