//! Cross-modal SSM normalization by quantized CDF matching.
//!
//! Both matrices are divided by their maxima and quantized to `L` evenly
//! spaced levels in `[0, 1]`. A monotone level map then sends each level of
//! the source to the target level whose cumulative frequency is closest
//! (histogram specification). Diagonal zeros are structural and are left out
//! of the histograms, but the map is still applied to them.

use serde::Serialize;

use crate::aligner::{Aligner, Alignment};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::ssm::SelfSimilarityMatrix;

pub const DEFAULT_LEVELS: usize = 256;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Direction {
    /// Remap the first SSM onto the second's value distribution.
    #[serde(rename = "1to2")]
    OneToTwo,
    #[serde(rename = "2to1")]
    TwoToOne,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormalizationMap {
    pub levels: usize,
    /// Target level for every source level; monotone non-decreasing.
    pub mapping: Vec<usize>,
    pub direction: Direction,
}

impl NormalizationMap {
    pub fn is_monotone(&self) -> bool {
        self.mapping.windows(2).all(|w| w[0] <= w[1])
    }
}

fn check_levels(levels: usize) -> Result<()> {
    if levels < 2 {
        return Err(Error::invalid(format!("need at least 2 quantization levels, got {levels}")));
    }
    Ok(())
}

/// Quantized level of every entry after division by the matrix maximum.
pub fn quantize(ssm: &SelfSimilarityMatrix, levels: usize) -> Result<Vec<usize>> {
    check_levels(levels)?;
    let max = ssm.max();
    if max <= 0.0 {
        return Err(Error::invalid("cannot normalize an all-zero SSM"));
    }
    let top = (levels - 1) as f64;
    Ok(ssm
        .values()
        .as_slice()
        .iter()
        .map(|&v| (((v / max) * top).round() as usize).min(levels - 1))
        .collect())
}

/// Empirical CDF over levels, from off-diagonal entries only.
pub fn level_cdf(quantized: &[usize], size: usize, levels: usize) -> Vec<f64> {
    let mut hist = vec![0usize; levels];
    let mut total = 0usize;
    for i in 0..size {
        for j in 0..size {
            if i != j {
                hist[quantized[i * size + j]] += 1;
                total += 1;
            }
        }
    }
    let mut acc = 0usize;
    hist.iter()
        .map(|&h| {
            acc += h;
            if total == 0 {
                1.0
            } else {
                acc as f64 / total as f64
            }
        })
        .collect()
}

/// `f(l) = argmin_m |cdf_src(l) - cdf_dst(m)|`, ties to the smaller `m`.
fn specification_map(cdf_src: &[f64], cdf_dst: &[f64]) -> Vec<usize> {
    cdf_src
        .iter()
        .map(|&c| {
            let mut best = 0;
            for (m, &d) in cdf_dst.iter().enumerate() {
                if (d - c).abs() < (cdf_dst[best] - c).abs() {
                    best = m;
                }
            }
            best
        })
        .collect()
}

fn levels_to_ssm(levels_of: &[usize], size: usize, map: impl Fn(usize) -> usize, levels: usize) -> SelfSimilarityMatrix {
    let top = (levels - 1) as f64;
    let data = levels_of.iter().map(|&l| map(l) as f64 / top).collect();
    let mut m = Matrix::new(size, size, data).expect("square");
    for i in 0..size {
        m[(i, i)] = 0.0;
    }
    SelfSimilarityMatrix::from_trusted(m)
}

/// Quantized copy of `ssm` in `[0, 1]` without remapping.
pub fn quantized_ssm(ssm: &SelfSimilarityMatrix, levels: usize) -> Result<SelfSimilarityMatrix> {
    let q = quantize(ssm, levels)?;
    Ok(levels_to_ssm(&q, ssm.size(), |l| l, levels))
}

/// Remaps `d1` so its value CDF approximately matches that of `d2`.
///
/// Returns the remapped, quantized `d1` (values `mapping[level] / (L-1)`)
/// and the level map. The diagonal stays zero.
pub fn cdf_match(
    d1: &SelfSimilarityMatrix,
    d2: &SelfSimilarityMatrix,
    levels: usize,
) -> Result<(SelfSimilarityMatrix, NormalizationMap)> {
    let q1 = quantize(d1, levels)?;
    let q2 = quantize(d2, levels)?;
    let cdf1 = level_cdf(&q1, d1.size(), levels);
    let cdf2 = level_cdf(&q2, d2.size(), levels);
    let mapping = specification_map(&cdf1, &cdf2);
    let out = levels_to_ssm(&q1, d1.size(), |l| mapping[l], levels);
    Ok((
        out,
        NormalizationMap {
            levels,
            mapping,
            direction: Direction::OneToTwo,
        },
    ))
}

/// Maximum absolute difference between two CDFs over the same levels.
pub fn kolmogorov_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Both inputs of one normalization direction, ready for alignment.
#[derive(Clone, Debug)]
pub struct NormalizedPair {
    pub x: SelfSimilarityMatrix,
    pub y: SelfSimilarityMatrix,
    pub map: NormalizationMap,
}

/// Normalizes the pair in the given direction: the source SSM is remapped
/// onto the target's CDF and the target is quantized in place.
pub fn normalize_pair(
    x: &SelfSimilarityMatrix,
    y: &SelfSimilarityMatrix,
    levels: usize,
    direction: Direction,
) -> Result<NormalizedPair> {
    match direction {
        Direction::OneToTwo => {
            let (xn, map) = cdf_match(x, y, levels)?;
            Ok(NormalizedPair {
                x: xn,
                y: quantized_ssm(y, levels)?,
                map,
            })
        }
        Direction::TwoToOne => {
            let (yn, mut map) = cdf_match(y, x, levels)?;
            map.direction = Direction::TwoToOne;
            Ok(NormalizedPair {
                x: quantized_ssm(x, levels)?,
                y: yn,
                map,
            })
        }
    }
}

#[derive(Clone, Debug)]
pub struct BestNormalization {
    pub direction: Direction,
    pub best: Alignment,
    pub other: Alignment,
}

/// Aligns after normalizing in each direction and keeps the better result.
/// Ties go to [`Direction::OneToTwo`].
pub fn normalize_pair_best(
    x: &SelfSimilarityMatrix,
    y: &SelfSimilarityMatrix,
    levels: usize,
    aligner: &dyn Aligner,
) -> Result<BestNormalization> {
    let run = |direction| -> Result<Alignment> {
        let p = normalize_pair(x, y, levels, direction)?;
        let mut a = aligner.align(&p.x, &p.y)?;
        a.direction = Some(direction);
        Ok(a)
    };
    let (fwd, bwd) = rayon::join(|| run(Direction::OneToTwo), || run(Direction::TwoToOne));
    let (fwd, bwd) = (fwd?, bwd?);
    Ok(if aligner.objective().better(bwd.value, fwd.value) {
        BestNormalization {
            direction: Direction::TwoToOne,
            best: bwd,
            other: fwd,
        }
    } else {
        BestNormalization {
            direction: Direction::OneToTwo,
            best: fwd,
            other: bwd,
        }
    })
}

/// Independent rank transform: every off-diagonal entry is replaced by its
/// average rank among off-diagonal entries, scaled into `[0, 1]`.
pub fn rank_normalize(ssm: &SelfSimilarityMatrix) -> SelfSimilarityMatrix {
    let n = ssm.size();
    let mut entries: Vec<(f64, usize)> = (0..n)
        .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
        .map(|(i, j)| (ssm.get(i, j), i * n + j))
        .collect();
    entries.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out = Matrix::zeros(n, n);
    let denom = entries.len().saturating_sub(1).max(1) as f64;
    let mut k = 0;
    while k < entries.len() {
        let mut end = k;
        while end + 1 < entries.len() && entries[end + 1].0 == entries[k].0 {
            end += 1;
        }
        let rank = 0.5 * (k + end) as f64 / denom;
        for &(_, idx) in &entries[k..=end] {
            out[(idx / n, idx % n)] = rank;
        }
        k = end + 1;
    }
    SelfSimilarityMatrix::from_trusted(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ssm_from_upper(n: usize, f: impl Fn(usize, usize) -> f64) -> SelfSimilarityMatrix {
        let m = Matrix::from_fn(n, n, |i, j| match i.cmp(&j) {
            std::cmp::Ordering::Less => f(i, j),
            std::cmp::Ordering::Greater => f(j, i),
            std::cmp::Ordering::Equal => 0.0,
        });
        SelfSimilarityMatrix::new(m).unwrap()
    }

    #[test]
    fn self_match_is_identity_on_occupied_levels() {
        let d = ssm_from_upper(6, |i, j| ((i * 7 + j * 3) % 11) as f64 + 1.0);
        let (out, map) = cdf_match(&d, &d, 16).unwrap();
        let q = quantize(&d, 16).unwrap();
        for &l in &q {
            assert_eq!(map.mapping[l], l);
        }
        assert_eq!(out, quantized_ssm(&d, 16).unwrap());
        assert!(map.is_monotone());
    }

    #[test]
    fn zero_matrix_and_few_levels_are_rejected() {
        let z = SelfSimilarityMatrix::new(Matrix::zeros(3, 3)).unwrap();
        let d = ssm_from_upper(3, |i, j| (i + j) as f64);
        assert!(cdf_match(&z, &d, 16).is_err());
        assert!(cdf_match(&d, &z, 16).is_err());
        assert!(cdf_match(&d, &d, 1).is_err());
    }

    #[test]
    fn specification_ties_go_left() {
        assert_eq!(specification_map(&[0.5], &[0.25, 0.75, 1.0]), vec![0]);
        assert_eq!(specification_map(&[0.0, 0.6, 1.0], &[0.0, 0.5, 0.7, 1.0]), vec![0, 1, 3]);
        // A plateau in the target CDF must not stop the search early.
        assert_eq!(specification_map(&[0.5], &[0.1, 0.1, 0.5]), vec![2]);
    }

    #[test]
    fn rank_transform_orders_values() {
        let d = ssm_from_upper(3, |i, j| [[0.0, 5.0, 1.0], [0.0, 0.0, 3.0], [0.0; 3]][i][j]);
        let r = rank_normalize(&d);
        assert!(r.get(0, 2) < r.get(1, 2) && r.get(1, 2) < r.get(0, 1));
        // Each value occurs twice (both triangles), so ranks are averaged.
        assert_eq!(r.get(0, 1), 0.9);
        assert_eq!(r.get(0, 2), 0.1);
        assert_eq!(r.get(1, 1), 0.0);
    }

    #[test]
    fn direction_two_to_one_remaps_y() {
        let x = ssm_from_upper(5, |i, j| (j - i) as f64);
        let y = ssm_from_upper(5, |i, j| ((j - i) as f64).powi(3));
        let p = normalize_pair(&x, &y, 32, Direction::TwoToOne).unwrap();
        assert_eq!(p.map.direction, Direction::TwoToOne);
        assert_eq!(p.x, quantized_ssm(&x, 32).unwrap());
        assert_eq!(p.y, cdf_match(&y, &x, 32).unwrap().0);
    }
}
