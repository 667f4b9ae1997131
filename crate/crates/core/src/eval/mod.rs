//! Alignment error against ground truth and the batch experiment driver.

mod experiment;

pub use experiment::{
    reports_to_csv, run_experiment, BarConfig, ExperimentConfig, ExperimentOutput, Family, MethodSummary,
};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::path::WarpingPath;

fn nearest(from: &[(usize, usize)], to: &[(usize, usize)]) -> f64 {
    from.iter()
        .map(|&(i, j)| {
            let d2 = to
                .iter()
                .map(|&(a, b)| {
                    let (di, dj) = (i.abs_diff(a) as u128, j.abs_diff(b) as u128);
                    di * di + dj * dj
                })
                .min()
                .expect("non-empty");
            (d2 as f64).sqrt()
        })
        .sum()
}

/// Mean nearest-neighbour distance between the two paths viewed as point
/// sets in the index plane, taken in both directions, in samples.
pub fn alignment_error(path: &WarpingPath, truth: &WarpingPath) -> Result<f64> {
    if path.is_empty() || truth.is_empty() {
        return Err(Error::invalid("alignment error needs two non-empty paths"));
    }
    let (p, t) = (path.pairs(), truth.pairs());
    Ok((nearest(p, t) + nearest(t, p)) / (p.len() + t.len()) as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AlignmentReport {
    pub trial: usize,
    pub method: String,
    pub alignment_error: f64,
    pub cost_or_score: f64,
    pub runtime_ms: u64,
    pub seed: u64,
    pub provenance: String,
    /// Circular distance between recovered and true loop start.
    pub offset_error: Option<usize>,
    pub gh_diam_ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HistogramBin {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    pub median: f64,
    pub p90: f64,
    pub max: f64,
    pub histogram: Vec<HistogramBin>,
}

/// Nearest-rank percentile of sorted data, `q` in `[0, 1]`.
fn percentile(sorted: &[f64], q: f64) -> f64 {
    let rank = ((q * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    sorted[rank - 1]
}

impl Summary {
    pub const BINS: usize = 10;

    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len();
        let median = if n % 2 == 1 {
            sorted[n / 2]
        } else {
            0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
        };
        let max = sorted[n - 1];
        let width = if max > 0.0 { max / Self::BINS as f64 } else { 1.0 };
        let mut histogram: Vec<HistogramBin> = (0..Self::BINS)
            .map(|b| HistogramBin {
                lo: b as f64 * width,
                hi: (b + 1) as f64 * width,
                count: 0,
            })
            .collect();
        for &v in &sorted {
            let b = ((v / width) as usize).min(Self::BINS - 1);
            histogram[b].count += 1;
        }
        Some(Self {
            count: n,
            mean: sorted.iter().sum::<f64>() / n as f64,
            median,
            p90: percentile(&sorted, 0.9),
            max,
            histogram,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_paths() {
        let p = WarpingPath::diagonal(7);
        assert_eq!(alignment_error(&p, &p).unwrap(), 0.0);
        assert!(alignment_error(&p, &WarpingPath::default()).is_err());
    }

    #[test]
    fn shifted_diagonal() {
        let n = 200;
        let truth = WarpingPath::diagonal(n);
        let mut pairs = vec![(0, 0)];
        pairs.extend((0..n - 1).map(|k| (k + 1, k)));
        pairs.push((n - 1, n - 1));
        let shifted = WarpingPath::new(pairs);
        let e = alignment_error(&shifted, &truth).unwrap();
        // As lattice point sets every shifted cell is one sample from the
        // nearest diagonal cell and vice versa, except the shared corners.
        let nf = n as f64;
        let expect = (2.0 * nf - 3.0) / (2.0 * nf + 1.0);
        assert!((e - expect).abs() < 1e-12, "{e} vs {expect}");
    }

    #[test]
    fn summary_statistics() {
        let s = Summary::of(&[4.0, 1.0, 3.0, 2.0]).unwrap();
        assert_eq!((s.mean, s.median, s.max), (2.5, 2.5, 4.0));
        assert_eq!(s.p90, 4.0);
        assert_eq!(s.histogram.iter().map(|b| b.count).sum::<usize>(), 4);
        assert!(Summary::of(&[]).is_none());
    }
}
