//! Brute-force reference computations for tiny instances.
//!
//! Everything here enumerates explicitly: every global warping path, every
//! local (free-endpoint) path, every correspondence. None of it shares code
//! with the dynamic programs it is used to check.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::path::WarpingPath;
use crate::ssm::SelfSimilarityMatrix;

/// Upper bound on the number of global paths [`enumerate_paths`] will walk.
pub const MAX_GLOBAL_PATHS: u128 = 10_000_000;
/// Largest side accepted by [`enumerate_local_paths`].
pub const MAX_LOCAL_SIDE: usize = 7;
/// Largest side accepted by [`gromov_hausdorff`].
pub const MAX_GH_SIDE: usize = 4;

/// Diagonal first, then down, then right.
const STEPS: [(usize, usize); 3] = [(1, 1), (1, 0), (0, 1)];

/// Delannoy number `D(a, b)`: the number of global warping paths on an
/// `(a+1) x (b+1)` grid. Saturates at `u128::MAX`.
pub fn delannoy(a: usize, b: usize) -> u128 {
    let mut prev = vec![1u128; b + 1];
    for _ in 0..a {
        let mut cur = vec![1u128; b + 1];
        for j in 1..=b {
            cur[j] = prev[j]
                .saturating_add(cur[j - 1])
                .saturating_add(prev[j - 1]);
        }
        prev = cur;
    }
    prev[b]
}

/// Depth-first stream over every global warping path on an `M x N` grid.
pub struct PathEnumerator {
    m: usize,
    n: usize,
    path: Vec<(usize, usize)>,
    choices: Vec<usize>,
    started: bool,
}

impl Iterator for PathEnumerator {
    type Item = WarpingPath;

    fn next(&mut self) -> Option<WarpingPath> {
        if !self.started {
            self.started = true;
            self.path.push((0, 0));
            self.choices.push(0);
        } else {
            self.path.pop();
            self.choices.pop();
        }
        loop {
            let &(i, j) = self.path.last()?;
            if (i, j) == (self.m - 1, self.n - 1) {
                return Some(WarpingPath::new(self.path.clone()));
            }
            let choice = self.choices.last_mut().expect("choice per cell");
            if *choice == STEPS.len() {
                self.path.pop();
                self.choices.pop();
                continue;
            }
            let (di, dj) = STEPS[*choice];
            *choice += 1;
            if i + di < self.m && j + dj < self.n {
                self.path.push((i + di, j + dj));
                self.choices.push(0);
            }
        }
    }
}

pub fn enumerate_paths(m: usize, n: usize) -> Result<PathEnumerator> {
    if m == 0 || n == 0 {
        return Err(Error::invalid("path enumeration needs a nonempty grid"));
    }
    let count = delannoy(m - 1, n - 1);
    if count > MAX_GLOBAL_PATHS {
        return Err(Error::SizeGuard(format!(
            "{m}x{n} grid has {count} warping paths (limit {MAX_GLOBAL_PATHS})"
        )));
    }
    Ok(PathEnumerator {
        m,
        n,
        path: Vec::with_capacity(m + n),
        choices: Vec::with_capacity(m + n),
        started: false,
    })
}

/// Stream over every contiguous monotone path with free endpoints,
/// including single cells. Start cells are visited in row-major order.
pub struct LocalPathEnumerator {
    m: usize,
    n: usize,
    next_start: usize,
    path: Vec<(usize, usize)>,
    choices: Vec<usize>,
}

impl Iterator for LocalPathEnumerator {
    type Item = WarpingPath;

    fn next(&mut self) -> Option<WarpingPath> {
        loop {
            let Some(&(i, j)) = self.path.last() else {
                if self.next_start >= self.m * self.n {
                    return None;
                }
                self.path.push((self.next_start / self.n, self.next_start % self.n));
                self.choices.push(0);
                self.next_start += 1;
                return Some(WarpingPath::new(self.path.clone()));
            };
            let choice = self.choices.last_mut().expect("choice per cell");
            if *choice == STEPS.len() {
                self.path.pop();
                self.choices.pop();
                continue;
            }
            let (di, dj) = STEPS[*choice];
            *choice += 1;
            if i + di < self.m && j + dj < self.n {
                self.path.push((i + di, j + dj));
                self.choices.push(0);
                return Some(WarpingPath::new(self.path.clone()));
            }
        }
    }
}

pub fn enumerate_local_paths(m: usize, n: usize) -> Result<LocalPathEnumerator> {
    if m > MAX_LOCAL_SIDE || n > MAX_LOCAL_SIDE {
        return Err(Error::SizeGuard(format!(
            "local path enumeration limited to {MAX_LOCAL_SIDE}x{MAX_LOCAL_SIDE}, got {m}x{n}"
        )));
    }
    Ok(LocalPathEnumerator {
        m,
        n,
        next_start: 0,
        path: Vec::new(),
        choices: Vec::new(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum StressNorm {
    #[serde(rename = "1")]
    L1,
    #[serde(rename = "infinity")]
    Infinity,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StressReport {
    pub p: StressNorm,
    pub best_path: WarpingPath,
    pub best_stress: f64,
    pub path_count: u128,
}

fn pair_distortions<'a>(
    x: &'a SelfSimilarityMatrix,
    y: &'a SelfSimilarityMatrix,
    path: &'a WarpingPath,
) -> impl Iterator<Item = f64> + 'a {
    path.pairs().iter().flat_map(move |&(i, j)| {
        path.pairs()
            .iter()
            .map(move |&(k, l)| (x.get(i, k) - y.get(j, l)).abs())
    })
}

/// 1-stress of a correspondence given as a path, summed over *ordered*
/// pairs of path entries. This is twice the unordered sum.
pub fn stress_1(x: &SelfSimilarityMatrix, y: &SelfSimilarityMatrix, path: &WarpingPath) -> f64 {
    pair_distortions(x, y, path).sum()
}

/// Largest metric distortion over pairs of path entries.
pub fn stress_inf(x: &SelfSimilarityMatrix, y: &SelfSimilarityMatrix, path: &WarpingPath) -> f64 {
    pair_distortions(x, y, path).fold(0.0, f64::max)
}

/// Minimum stress over all global warping paths between `x` and `y`.
pub fn min_stress(
    x: &SelfSimilarityMatrix,
    y: &SelfSimilarityMatrix,
    p: StressNorm,
) -> Result<StressReport> {
    let mut best: Option<(f64, WarpingPath)> = None;
    let mut count = 0u128;
    for path in enumerate_paths(x.size(), y.size())? {
        count += 1;
        let s = match p {
            StressNorm::L1 => stress_1(x, y, &path),
            StressNorm::Infinity => stress_inf(x, y, &path),
        };
        if best.as_ref().map_or(true, |(b, _)| s < *b) {
            best = Some((s, path));
        }
    }
    let (best_stress, best_path) = best.expect("at least one path");
    Ok(StressReport {
        p,
        best_path,
        best_stress,
        path_count: count,
    })
}

/// Exact Gromov-Hausdorff distance by enumerating every correspondence,
/// `1/2 * min_C max |d_X - d_Y|`. Only feasible for tiny sets.
pub fn gromov_hausdorff(x: &SelfSimilarityMatrix, y: &SelfSimilarityMatrix) -> Result<f64> {
    let (m, n) = (x.size(), y.size());
    if m > MAX_GH_SIDE || n > MAX_GH_SIDE {
        return Err(Error::SizeGuard(format!(
            "exact Gromov-Hausdorff limited to {MAX_GH_SIDE} points per side, got {m}x{n}"
        )));
    }
    let cells = m * n;
    let full_rows = (1u32 << m) - 1;
    let full_cols = (1u32 << n) - 1;
    let mut best = f64::INFINITY;
    for mask in 1u32..(1u32 << cells) {
        let (mut rows, mut cols) = (0u32, 0u32);
        for c in 0..cells {
            if mask & (1 << c) != 0 {
                rows |= 1 << (c / n);
                cols |= 1 << (c % n);
            }
        }
        if rows != full_rows || cols != full_cols {
            continue;
        }
        let mut worst = 0.0f64;
        for a in (0..cells).filter(|a| mask & (1 << a) != 0) {
            for b in (0..cells).filter(|b| mask & (1 << b) != 0) {
                let d = (x.get(a / n, b / n) - y.get(a % n, b % n)).abs();
                worst = worst.max(d);
            }
        }
        best = best.min(worst);
    }
    Ok(0.5 * best)
}

/// Minimum path sum over all global warping paths.
pub fn brute_force_dtw(costs: &Matrix) -> Result<f64> {
    Ok(enumerate_paths(costs.rows(), costs.cols())?
        .map(|p| p.pairs().iter().map(|&(i, j)| costs[(i, j)]).sum::<f64>())
        .fold(f64::INFINITY, f64::min))
}

/// Minimum L1 warping cost between two rows over global paths through `(i, j)`.
pub fn brute_force_constrained_dtw(a: &[f64], b: &[f64], i: usize, j: usize) -> Result<f64> {
    Ok(enumerate_paths(a.len(), b.len())?
        .filter(|p| p.contains((i, j)))
        .map(|p| p.pairs().iter().map(|&(k, l)| (a[k] - b[l]).abs()).sum::<f64>())
        .fold(f64::INFINITY, f64::min))
}

/// Score of a local path under Smith-Waterman step semantics: the first cell
/// contributes its match score, every later cell reached diagonally
/// contributes its match score, and every horizontal or vertical step
/// contributes `gap` instead.
pub fn local_path_score(scores: &Matrix, gap: f64, path: &WarpingPath) -> f64 {
    let pairs = path.pairs();
    let Some(&(i0, j0)) = pairs.first() else {
        return 0.0;
    };
    let mut total = scores[(i0, j0)];
    for w in pairs.windows(2) {
        let (a, b) = (w[0], w[1]);
        total += if b.0 > a.0 && b.1 > a.1 {
            scores[b]
        } else {
            gap
        };
    }
    total
}

/// Best local alignment score, floored at zero (the empty alignment).
pub fn brute_force_smith_waterman(scores: &Matrix, gap: f64) -> Result<f64> {
    Ok(enumerate_local_paths(scores.rows(), scores.cols())?
        .map(|p| local_path_score(scores, gap, &p))
        .fold(0.0, f64::max))
}

/// Best local alignment score among local paths containing `(i, j)`.
pub fn brute_force_constrained_smith_waterman(
    scores: &Matrix,
    gap: f64,
    i: usize,
    j: usize,
) -> Result<f64> {
    Ok(enumerate_local_paths(scores.rows(), scores.cols())?
        .filter(|p| p.contains((i, j)))
        .map(|p| local_path_score(scores, gap, &p))
        .fold(f64::NEG_INFINITY, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn count_local(m: usize, n: usize) -> u128 {
        // Independent count: every (start, end) pair with end >= start
        // componentwise contributes the Delannoy number of its offset.
        let mut total = 0;
        for di in 0..m {
            for dj in 0..n {
                total += ((m - di) * (n - dj)) as u128 * delannoy(di, dj);
            }
        }
        total
    }

    #[test]
    fn delannoy_values() {
        assert_eq!(delannoy(0, 0), 1);
        assert_eq!(delannoy(1, 1), 3);
        assert_eq!(delannoy(2, 2), 13);
        assert_eq!(delannoy(3, 3), 63);
        assert_eq!(delannoy(2, 5), delannoy(5, 2));
    }

    #[test]
    fn enumerates_small_grids() {
        let single: Vec<_> = enumerate_paths(1, 1).unwrap().collect();
        assert_eq!(single, vec![WarpingPath::new(vec![(0, 0)])]);

        let two: Vec<_> = enumerate_paths(2, 2).unwrap().collect();
        assert_eq!(two.len(), 3);
        assert_eq!(two[0], WarpingPath::diagonal(2));
        assert!(two.contains(&WarpingPath::new(vec![(0, 0), (0, 1), (1, 1)])));
        assert!(two.contains(&WarpingPath::new(vec![(0, 0), (1, 0), (1, 1)])));

        assert_eq!(enumerate_paths(3, 3).unwrap().count(), 13);
    }

    #[test]
    fn enumerated_paths_are_distinct_and_valid() {
        for (m, n) in [(1, 4), (3, 5), (5, 4), (6, 6)] {
            let paths: Vec<_> = enumerate_paths(m, n).unwrap().collect();
            assert_eq!(paths.len() as u128, delannoy(m - 1, n - 1));
            assert!(paths.iter().all(|p| p.is_valid(m, n, true)));
            let unique: std::collections::HashSet<_> = paths.iter().collect();
            assert_eq!(unique.len(), paths.len());
        }
    }

    #[test]
    fn size_guard() {
        assert!(matches!(enumerate_paths(14, 14), Err(Error::SizeGuard(_))));
        assert!(matches!(enumerate_local_paths(8, 2), Err(Error::SizeGuard(_))));
    }

    #[test]
    fn enumerates_local_paths() {
        assert_eq!(enumerate_local_paths(1, 1).unwrap().count(), 1);
        let one_by_two: Vec<_> = enumerate_local_paths(1, 2).unwrap().collect();
        assert_eq!(
            one_by_two,
            vec![
                WarpingPath::new(vec![(0, 0)]),
                WarpingPath::new(vec![(0, 0), (0, 1)]),
                WarpingPath::new(vec![(0, 1)]),
            ]
        );
        for (m, n) in [(3, 3), (2, 5), (4, 4)] {
            let paths: Vec<_> = enumerate_local_paths(m, n).unwrap().collect();
            assert_eq!(paths.len() as u128, count_local(m, n));
            assert!(paths.iter().all(|p| p.is_valid(m, n, false)));
        }
    }

    #[test]
    fn stress_of_identity() {
        let x = SelfSimilarityMatrix::new(
            Matrix::from_rows(vec![vec![0.0, 1.0, 2.0], vec![1.0, 0.0, 1.5], vec![2.0, 1.5, 0.0]])
                .unwrap(),
        )
        .unwrap();
        assert_eq!(stress_1(&x, &x, &WarpingPath::diagonal(3)), 0.0);
        let report = min_stress(&x, &x, StressNorm::L1).unwrap();
        assert_eq!(report.best_stress, 0.0);
        assert_eq!(report.path_count, 13);
        assert_eq!(gromov_hausdorff(&x, &x).unwrap(), 0.0);
    }

    #[test]
    fn single_points() {
        let p = SelfSimilarityMatrix::new(Matrix::zeros(1, 1)).unwrap();
        assert_eq!(min_stress(&p, &p, StressNorm::L1).unwrap().best_stress, 0.0);
        assert_eq!(min_stress(&p, &p, StressNorm::Infinity).unwrap().best_stress, 0.0);
    }

    #[test]
    fn ordered_stress_double_counts() {
        let x = SelfSimilarityMatrix::new(
            Matrix::from_rows(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap(),
        )
        .unwrap();
        let y = SelfSimilarityMatrix::new(
            Matrix::from_rows(vec![vec![0.0, 3.0], vec![3.0, 0.0]]).unwrap(),
        )
        .unwrap();
        // One unordered pair with distortion 2, counted in both orders.
        assert_eq!(stress_1(&x, &y, &WarpingPath::diagonal(2)), 4.0);
        assert_eq!(stress_inf(&x, &y, &WarpingPath::diagonal(2)), 2.0);
        assert_eq!(gromov_hausdorff(&x, &y).unwrap(), 1.0);
    }

    #[test]
    fn local_score_semantics() {
        let s = Matrix::from_rows(vec![vec![1.0, 5.0], vec![7.0, 2.0]]).unwrap();
        assert_eq!(local_path_score(&s, -0.5, &WarpingPath::new(vec![(0, 0), (1, 1)])), 3.0);
        assert_eq!(local_path_score(&s, -0.5, &WarpingPath::new(vec![(0, 0), (0, 1)])), 0.5);
        assert_eq!(brute_force_smith_waterman(&s, -0.5).unwrap(), 7.0);
    }
}
