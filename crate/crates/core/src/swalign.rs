//! Smith-Waterman local alignment and isometry-blind partial time warping
//! (IBPTW).
//!
//! IBPTW mirrors IBDTW with every DTW replaced by Smith-Waterman: each SSM
//! row pair is scored by the best local alignment forced through the pair's
//! own indices (the partial cross-similarity warp matrix, PCSWM), the PCSWM
//! is median-centred and scaled into `[-1, 1]`, and a final Smith-Waterman
//! pass over that matrix yields a partial warping path.

use std::collections::HashSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::path::WarpingPath;
use crate::ssm::SelfSimilarityMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SwParams {
    /// Bandwidth of the row-value match kernel.
    pub sigma: f64,
    #[serde(default = "default_match_offset")]
    pub match_offset: f64,
    /// Gap penalty for the row-pair alignments.
    #[serde(default = "default_gap")]
    pub gap_inner: f64,
    /// Gap penalty for the final alignment over the PCSWM.
    #[serde(default = "default_gap")]
    pub gap_outer: f64,
}

fn default_match_offset() -> f64 {
    -0.6
}

fn default_gap() -> f64 {
    -0.4
}

impl SwParams {
    pub fn new(sigma: f64) -> Result<Self> {
        let p = Self {
            sigma,
            match_offset: default_match_offset(),
            gap_inner: default_gap(),
            gap_outer: default_gap(),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_gaps(mut self, inner: f64, outer: f64) -> Result<Self> {
        self.gap_inner = inner;
        self.gap_outer = outer;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::invalid(format!("sigma must be positive, got {}", self.sigma)));
        }
        if !self.match_offset.is_finite() {
            return Err(Error::invalid("match offset must be finite"));
        }
        for (name, g) in [("inner", self.gap_inner), ("outer", self.gap_outer)] {
            if !(g <= 0.0 && g.is_finite()) {
                return Err(Error::invalid(format!("{name} gap must be <= 0, got {g}")));
            }
        }
        Ok(())
    }

    /// Row-value match score `exp(-|a - b| / sigma) + match_offset`.
    pub fn match_score(&self, a: f64, b: f64) -> f64 {
        (-(a - b).abs() / self.sigma).exp() + self.match_offset
    }
}

impl Default for SwParams {
    fn default() -> Self {
        Self::new(0.01).expect("default sigma")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SwResult {
    pub score: f64,
    /// Partial path ending at the table maximum; empty when no local
    /// alignment scores above zero.
    pub path: WarpingPath,
    pub score_table: Matrix,
    pub match_scores: Matrix,
    pub gap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScoredPath {
    pub score: f64,
    pub path: WarpingPath,
}

fn check_gap(gap: f64) -> Result<()> {
    if !(gap <= 0.0 && gap.is_finite()) {
        return Err(Error::invalid(format!("gap penalty must be <= 0, got {gap}")));
    }
    Ok(())
}

/// Fills `H[i][j] = max(H[i-1][j-1] + s(i,j), H[i-1][j] + g, H[i][j-1] + g, 0)`
/// with zero borders, then backtraces from the first maximal cell in
/// row-major order.
pub fn smith_waterman(scores: &Matrix, gap: f64) -> Result<SwResult> {
    let (m, n) = (scores.rows(), scores.cols());
    if m == 0 || n == 0 {
        return Err(Error::invalid("Smith-Waterman needs a nonempty score matrix"));
    }
    if scores.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("score matrix must be finite"));
    }
    check_gap(gap)?;

    let mut table = Matrix::zeros(m, n);
    for i in 0..m {
        for j in 0..n {
            let diag = if i > 0 && j > 0 { table[(i - 1, j - 1)] } else { 0.0 };
            let up = if i > 0 { table[(i - 1, j)] } else { 0.0 };
            let left = if j > 0 { table[(i, j - 1)] } else { 0.0 };
            table[(i, j)] = (diag + scores[(i, j)]).max(up + gap).max(left + gap).max(0.0);
        }
    }

    let mut best = (0.0, (0, 0));
    for i in 0..m {
        for j in 0..n {
            if table[(i, j)] > best.0 {
                best = (table[(i, j)], (i, j));
            }
        }
    }
    let path = if best.0 > 0.0 {
        backtrace(&table, scores, gap, best.1)
    } else {
        WarpingPath::default()
    };
    Ok(SwResult {
        score: best.0,
        path,
        score_table: table,
        match_scores: scores.clone(),
        gap,
    })
}

/// Follows predecessors from `start` (diagonal, then up, then left on ties)
/// until the next cell would be zero-valued or off the table. The
/// terminating cell is not part of the path.
fn backtrace(table: &Matrix, scores: &Matrix, gap: f64, start: (usize, usize)) -> WarpingPath {
    let mut pairs = Vec::new();
    let (mut i, mut j) = start;
    loop {
        pairs.push((i, j));
        let v = table[(i, j)];
        let diag = if i > 0 && j > 0 { table[(i - 1, j - 1)] } else { 0.0 };
        let next = if v == diag + scores[(i, j)] {
            (i > 0 && j > 0).then(|| (i - 1, j - 1))
        } else if i > 0 && v == table[(i - 1, j)] + gap {
            Some((i - 1, j))
        } else if j > 0 && v == table[(i, j - 1)] + gap {
            Some((i, j - 1))
        } else {
            None
        };
        match next {
            Some(cell) if table[cell] > 0.0 => (i, j) = cell,
            _ => break,
        }
    }
    pairs.reverse();
    WarpingPath::new(pairs)
}

/// Up to `k` cell-disjoint local paths, taken greedily from the
/// highest-valued table cells. The first is always the optimal path.
pub fn secondary_backtraces(result: &SwResult, k: usize) -> Vec<ScoredPath> {
    let table = &result.score_table;
    let mut cells: Vec<(usize, usize)> = (0..table.rows())
        .flat_map(|i| (0..table.cols()).map(move |j| (i, j)))
        .filter(|&c| table[c] > 0.0)
        .collect();
    // Stable sort keeps row-major order among equal scores, so the first
    // candidate is the optimum's start cell.
    cells.sort_by(|&a, &b| table[b].total_cmp(&table[a]));

    let mut used: HashSet<(usize, usize)> = HashSet::new();
    let mut out = Vec::new();
    for cell in cells {
        if out.len() == k {
            break;
        }
        if used.contains(&cell) {
            continue;
        }
        let path = backtrace(table, &result.match_scores, result.gap, cell);
        if path.pairs().iter().any(|c| used.contains(c)) {
            continue;
        }
        used.extend(path.pairs().iter().copied());
        out.push(ScoredPath {
            score: table[cell],
            path,
        });
    }
    out
}

/// Match-score kernel with an exact shortcut: once `exp(-x)` is absorbed by
/// the offset in floating point, the score is the offset itself.
#[derive(Clone, Copy)]
struct MatchKernel {
    inv_sigma: f64,
    offset: f64,
    cutoff: f64,
}

impl MatchKernel {
    fn new(params: &SwParams) -> Self {
        let offset = params.match_offset;
        let mut cutoff = 746.0;
        let mut x = 1.0f64;
        while x < 746.0 {
            if (-x).exp() + offset == offset {
                cutoff = x;
                break;
            }
            x += 0.25;
        }
        Self {
            inv_sigma: 1.0 / params.sigma,
            offset,
            cutoff,
        }
    }

    #[inline]
    fn score(&self, a: f64, b: f64) -> f64 {
        let x = (a - b).abs() * self.inv_sigma;
        if x >= self.cutoff {
            self.offset
        } else {
            (-x).exp() + self.offset
        }
    }
}

struct SwRowPair<'a> {
    a: &'a [f64],
    b: &'a [f64],
    rev_a: &'a [f64],
    rev_b: &'a [f64],
}

struct SwScratch {
    prev: Vec<f64>,
    cur: Vec<f64>,
}

impl SwScratch {
    fn new() -> Self {
        Self {
            prev: Vec::new(),
            cur: Vec::new(),
        }
    }
}

impl SwRowPair<'_> {
    /// Best score of a nonempty local path ending exactly at `(i, j)`.
    fn best_ending_at(&self, i: usize, j: usize, kernel: MatchKernel, gap: f64, s: &mut SwScratch) -> f64 {
        let w = j + 1;
        s.prev.clear();
        s.prev.resize(w, f64::NEG_INFINITY);
        s.cur.clear();
        s.cur.resize(w, f64::NEG_INFINITY);
        for &x in &self.a[..=i] {
            let mut left = f64::NEG_INFINITY;
            let mut diag = 0.0f64;
            for (b, &y) in self.b[..w].iter().enumerate() {
                let up = s.prev[b];
                let e = (diag + kernel.score(x, y)).max(up + gap).max(left + gap);
                s.cur[b] = e;
                diag = up.max(0.0);
                left = e;
            }
            std::mem::swap(&mut s.prev, &mut s.cur);
        }
        s.prev[j]
    }

    /// Best score of a (possibly empty) continuation after `(i, j)`.
    fn best_after(&self, i: usize, j: usize, kernel: MatchKernel, gap: f64, s: &mut SwScratch) -> f64 {
        let h = self.a.len() - i;
        let w = self.b.len() - j;
        let (ra, rb) = (&self.rev_a[..h], &self.rev_b[..w]);
        s.prev.clear();
        s.prev.resize(w, f64::NEG_INFINITY);
        s.cur.clear();
        s.cur.resize(w, f64::NEG_INFINITY);
        for p in 0..h {
            let mut left = f64::NEG_INFINITY;
            for q in 0..w {
                let mut v = 0.0f64;
                if p > 0 {
                    v = v.max(gap + s.prev[q]);
                    if q > 0 {
                        v = v.max(kernel.score(ra[p - 1], rb[q - 1]) + s.prev[q - 1]);
                    }
                }
                if q > 0 {
                    v = v.max(gap + left);
                }
                s.cur[q] = v;
                left = v;
            }
            std::mem::swap(&mut s.prev, &mut s.cur);
        }
        s.prev[w - 1]
    }

    fn constrained(&self, i: usize, j: usize, kernel: MatchKernel, gap: f64, s: &mut SwScratch) -> f64 {
        self.best_ending_at(i, j, kernel, gap, s) + self.best_after(i, j, kernel, gap, s)
    }
}

/// Best local alignment score between two rows among paths that pass
/// through `(i, j)`, using the kernel match score and `params.gap_inner`.
///
/// The path splits at `(i, j)` into a local path ending there (forward
/// Smith-Waterman on the prefixes) and a continuation after it (run on the
/// reversed suffixes), so the constrained cell is counted exactly once.
pub fn constrained_smith_waterman(
    row_a: &[f64],
    row_b: &[f64],
    i: usize,
    j: usize,
    params: &SwParams,
) -> Result<f64> {
    params.validate()?;
    if i >= row_a.len() || j >= row_b.len() {
        return Err(Error::invalid(format!(
            "constraint ({i},{j}) outside {}x{}",
            row_a.len(),
            row_b.len()
        )));
    }
    let rev_a: Vec<f64> = row_a.iter().rev().copied().collect();
    let rev_b: Vec<f64> = row_b.iter().rev().copied().collect();
    let pair = SwRowPair {
        a: row_a,
        b: row_b,
        rev_a: &rev_a,
        rev_b: &rev_b,
    };
    Ok(pair.constrained(i, j, MatchKernel::new(params), params.gap_inner, &mut SwScratch::new()))
}

/// Partial cross-similarity warp matrix between two (already normalized)
/// SSMs. Parallel over rows, deterministic for any thread count.
pub fn pcswm(x: &SelfSimilarityMatrix, y: &SelfSimilarityMatrix, params: &SwParams) -> Result<Matrix> {
    params.validate()?;
    let (m, n) = (x.size(), y.size());
    let kernel = MatchKernel::new(params);
    let gap = params.gap_inner;
    let rev = |s: &SelfSimilarityMatrix| -> Vec<Vec<f64>> {
        (0..s.size()).map(|i| s.row(i).iter().rev().copied().collect()).collect()
    };
    let (rev_x, rev_y) = (rev(x), rev(y));
    let rows: Vec<Vec<f64>> = (0..m)
        .into_par_iter()
        .map_init(SwScratch::new, |scratch, i| {
            (0..n)
                .map(|j| {
                    SwRowPair {
                        a: x.row(i),
                        b: y.row(j),
                        rev_a: &rev_x[i],
                        rev_b: &rev_y[j],
                    }
                    .constrained(i, j, kernel, gap, scratch)
                })
                .collect()
        })
        .collect();
    Matrix::new(m, n, rows.into_iter().flatten().collect())
}

/// Median over every entry (mean of the two middle values for even counts).
pub fn median(values: &[f64]) -> f64 {
    assert!(!values.is_empty(), "median of an empty slice");
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// `(S - md(S)) / max|S - md(S)|`, mapping the PCSWM into `[-1, 1]`.
pub fn median_scaled_scores(pcswm: &Matrix) -> Result<Matrix> {
    let md = median(pcswm.as_slice());
    let spread = pcswm
        .as_slice()
        .iter()
        .map(|v| (v - md).abs())
        .fold(0.0, f64::max);
    if spread == 0.0 {
        return Err(Error::DegenerateNormalization(
            "PCSWM is constant; cannot scale by max |S - median(S)|".into(),
        ));
    }
    Ok(pcswm.map(|v| (v - md) / spread))
}

#[derive(Clone, Debug, PartialEq)]
pub struct IbptwResult {
    pub pcswm: Matrix,
    /// Median-centred, scaled PCSWM used as the outer match scores.
    pub outer_scores: Matrix,
    pub alignment: SwResult,
}

/// Isometry-blind partial time warping. Each SSM is divided by its own
/// maximum before scoring; any cross-modal remapping must be applied by the
/// caller beforehand.
pub fn ibptw(x: &SelfSimilarityMatrix, y: &SelfSimilarityMatrix, params: &SwParams) -> Result<IbptwResult> {
    params.validate()?;
    let (xn, yn) = (x.scaled_to_unit(), y.scaled_to_unit());
    let pcswm = pcswm(&xn, &yn, params)?;
    let outer_scores = median_scaled_scores(&pcswm)?;
    let alignment = smith_waterman(&outer_scores, params.gap_outer)?;
    Ok(IbptwResult {
        pcswm,
        outer_scores,
        alignment,
    })
}

/// Reading of a partial path through `AA x BB` (two loops each repeated
/// twice) as a single loop correspondence.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LoopCut {
    /// Column (mod the loop length of `B`) matched to the first sample of `A`.
    pub offset: usize,
    /// One repetition of `A` (rows `0..n_a`), columns still in `BB` indices.
    pub path: WarpingPath,
}

/// Cuts one repetition of `A` out of a path over `AA x BB`.
///
/// The cut is anchored at the first pair whose row is a multiple of `n_a`
/// (a start of `A`) and keeps pairs until the row index reaches the next
/// repetition. Rows are rebased to `0..n_a`; columns are shifted by whole
/// copies of `B` so the anchor column lies in `0..n_b`. Returns `None` when
/// the path never crosses the start of `A`.
pub fn cut_loop_path(path: &WarpingPath, n_a: usize, n_b: usize) -> Option<LoopCut> {
    let pairs = path.pairs();
    let k = pairs.iter().position(|&(r, _)| r % n_a == 0)?;
    let (r0, c0) = pairs[k];
    let col_shift = (c0 / n_b) * n_b;
    let cut: Vec<(usize, usize)> = pairs[k..]
        .iter()
        .take_while(|&&(r, _)| r < r0 + n_a)
        .map(|&(r, c)| (r - r0, c - col_shift))
        .collect();
    Some(LoopCut {
        offset: c0 % n_b,
        path: WarpingPath::new(cut),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_mismatches_give_nothing() {
        let r = smith_waterman(&Matrix::from_fn(4, 5, |_, _| -1.0), -0.4).unwrap();
        assert_eq!(r.score, 0.0);
        assert!(r.path.is_empty());
    }

    #[test]
    fn identity_scores_follow_the_diagonal() {
        let s = Matrix::from_fn(5, 5, |i, j| if i == j { 1.0 } else { -1.0 });
        let r = smith_waterman(&s, -0.4).unwrap();
        assert_eq!(r.score, 5.0);
        assert_eq!(r.path, WarpingPath::diagonal(5));
    }

    #[test]
    fn local_match_skips_flanks() {
        let s = Matrix::from_fn(6, 6, |i, j| if i == j && (2..5).contains(&i) { 1.0 } else { -1.0 });
        let r = smith_waterman(&s, -0.4).unwrap();
        assert_eq!(r.score, 3.0);
        assert_eq!(r.path.pairs(), &[(2, 2), (3, 3), (4, 4)]);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(smith_waterman(&Matrix::zeros(0, 2), -0.4).is_err());
        assert!(smith_waterman(&Matrix::zeros(2, 2), 0.5).is_err());
        assert!(SwParams::new(0.0).is_err());
        assert!(SwParams::new(0.1).unwrap().with_gaps(0.1, -0.4).is_err());
    }

    #[test]
    fn match_score_range() {
        let p = SwParams::new(0.09).unwrap();
        assert!((p.match_score(0.3, 0.3) - 0.4).abs() < 1e-15);
        let far = p.match_score(0.0, 1.0);
        assert!((far + 0.6).abs() < 1e-4 && far > -0.6);
    }

    #[test]
    fn kernel_shortcut_is_exact() {
        let p = SwParams::new(0.01).unwrap();
        let k = MatchKernel::new(&p);
        for d in [0.0, 0.001, 0.05, 0.3, 0.37, 0.38, 0.5, 1.0] {
            assert_eq!(k.score(0.0, d), p.match_score(0.0, d), "d = {d}");
        }
        let zero_offset = SwParams { match_offset: 0.0, ..p };
        let k0 = MatchKernel::new(&zero_offset);
        assert!(k0.score(0.0, 1.0) > 0.0);
    }

    #[test]
    fn constrained_self_match_scores_at_least_one_match() {
        let row = [0.0, 0.2, 0.5, 0.9, 1.0, 0.4];
        let p = SwParams::new(0.09).unwrap();
        for i in 0..row.len() {
            let s = constrained_smith_waterman(&row, &row, i, i, &p).unwrap();
            assert!(s >= 0.4 - 1e-12, "i = {i}: {s}");
        }
        assert!(constrained_smith_waterman(&row, &row, 6, 0, &p).is_err());
    }

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    #[test]
    fn constant_pcswm_is_degenerate() {
        let err = median_scaled_scores(&Matrix::from_fn(3, 3, |_, _| 0.7)).unwrap_err();
        assert!(matches!(err, Error::DegenerateNormalization(_)));
    }

    #[test]
    fn scaled_scores_span_unit_interval() {
        let s = Matrix::from_fn(3, 4, |i, j| (i * 4 + j) as f64);
        let m = median_scaled_scores(&s).unwrap();
        assert!(m.as_slice().iter().all(|v| (-1.0..=1.0).contains(v)));
        assert_eq!(m.as_slice().iter().map(|v| v.abs()).fold(0.0, f64::max), 1.0);
    }

    #[test]
    fn secondary_paths_are_disjoint_and_ordered() {
        let s = Matrix::from_fn(6, 6, |i, j| {
            if i == j {
                1.0
            } else if j == i + 3 {
                0.8
            } else {
                -1.0
            }
        });
        let r = smith_waterman(&s, -0.4).unwrap();
        let paths = secondary_backtraces(&r, 3);
        assert_eq!(paths[0].path, r.path);
        assert_eq!(paths[0].score, r.score);
        assert!(paths.len() >= 2);
        for w in paths.windows(2) {
            assert!(w[1].score <= w[0].score);
            assert!(w[0].path.cells().is_disjoint(&w[1].path.cells()));
        }
        assert_eq!(secondary_backtraces(&r, 1).len(), 1);
    }

    #[test]
    fn loop_cut_rebases() {
        let path = WarpingPath::new((3..12).map(|r| (r, r + 2)).collect());
        let cut = cut_loop_path(&path, 4, 5).unwrap();
        assert_eq!(cut.offset, 1);
        assert_eq!(cut.path.pairs(), &[(0, 1), (1, 2), (2, 3), (3, 4)]);
        assert!(cut_loop_path(&WarpingPath::new(vec![(1, 1), (2, 2)]), 4, 4).is_none());
    }
}
