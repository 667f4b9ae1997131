//! Monotone re-parameterizations of `[0, 1]` and their ground-truth paths.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cloud::TimeOrderedPointCloud;
use crate::error::{Error, Result};
use crate::metric::MetricKind;
use crate::path::WarpingPath;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WarpFamily {
    /// `t^a`
    Polynomial,
    /// `ln(1 + βt) / ln(1 + β)`
    Logarithmic,
    /// `(e^{βt} - 1) / (e^β - 1)`
    Exponential,
    /// `tanh(βt) / tanh(β)`
    Tanh,
}

impl WarpFamily {
    pub fn eval(self, param: f64, t: f64) -> f64 {
        match self {
            WarpFamily::Polynomial => t.powf(param),
            WarpFamily::Logarithmic => (param * t).ln_1p() / param.ln_1p(),
            WarpFamily::Exponential => (param * t).exp_m1() / param.exp_m1(),
            WarpFamily::Tanh => (param * t).tanh() / param.tanh(),
        }
    }

    fn param_range(self) -> (f64, f64) {
        match self {
            WarpFamily::Polynomial => (1.0, 3.0),
            WarpFamily::Logarithmic => (1.0, 9.0),
            WarpFamily::Exponential => (1.0, 4.0),
            WarpFamily::Tanh => (0.5, 2.5),
        }
    }

    pub const ALL: [WarpFamily; 4] = [
        WarpFamily::Polynomial,
        WarpFamily::Logarithmic,
        WarpFamily::Exponential,
        WarpFamily::Tanh,
    ];
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WarpComponent {
    pub family: WarpFamily,
    pub param: f64,
}

/// Convex combination of monotone `[0,1] -> [0,1]` maps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WarpSpec {
    pub components: Vec<WarpComponent>,
    pub weights: Vec<f64>,
}

impl WarpSpec {
    pub fn new(components: Vec<WarpComponent>, weights: Vec<f64>) -> Result<Self> {
        let spec = Self { components, weights };
        spec.validate()?;
        Ok(spec)
    }

    pub fn identity() -> Self {
        Self {
            components: vec![WarpComponent {
                family: WarpFamily::Polynomial,
                param: 1.0,
            }],
            weights: vec![1.0],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.components.is_empty() || self.components.len() != self.weights.len() {
            return Err(Error::invalid("warp needs one weight per component"));
        }
        if self.weights.iter().any(|w| !(*w >= 0.0)) {
            return Err(Error::invalid("warp weights must be nonnegative"));
        }
        let sum: f64 = self.weights.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!("warp weights sum to {sum}, expected 1")));
        }
        for c in &self.components {
            if !(c.param > 0.0 && c.param.is_finite()) {
                return Err(Error::invalid(format!("warp parameter {} must be positive", c.param)));
            }
        }
        Ok(())
    }

    pub fn random(rng: &mut impl Rng) -> Self {
        let k = rng.gen_range(1..=WarpFamily::ALL.len());
        let components: Vec<_> = (0..k)
            .map(|_| {
                let family = WarpFamily::ALL[rng.gen_range(0..WarpFamily::ALL.len())];
                let (lo, hi) = family.param_range();
                WarpComponent {
                    family,
                    param: rng.gen_range(lo..=hi),
                }
            })
            .collect();
        let raw: Vec<f64> = (0..k).map(|_| rng.gen_range(0.05..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let mut weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
        // Put the rounding residue on the last weight so the sum is exact.
        let head: f64 = weights[..k - 1].iter().sum();
        weights[k - 1] = 1.0 - head;
        Self { components, weights }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let t = t.clamp(0.0, 1.0);
        if t == 0.0 {
            return 0.0;
        }
        if t == 1.0 {
            return 1.0;
        }
        let v: f64 = self
            .components
            .iter()
            .zip(&self.weights)
            .map(|(c, w)| w * c.family.eval(c.param, t))
            .sum();
        v.clamp(0.0, 1.0)
    }

    /// `h^{-1}(u)` by bisection.
    pub fn inverse(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if self.eval(mid) < u {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

/// Continuous monotone path through anchor cells `(row, col)`. Between
/// consecutive anchors the surplus rows or columns are walked first and the
/// remaining steps are diagonal.
pub fn staircase(anchors: &[(usize, usize)]) -> WarpingPath {
    let mut pairs = Vec::new();
    let Some(&first) = anchors.first() else {
        return WarpingPath::default();
    };
    pairs.push(first);
    let mut cur = first;
    for &(r, c) in &anchors[1..] {
        debug_assert!(r >= cur.0 && c >= cur.1, "anchors must be monotone");
        let (dr, dc) = (r - cur.0, c - cur.1);
        let diag = dr.min(dc);
        for _ in 0..dr - diag {
            cur.0 += 1;
            pairs.push(cur);
        }
        for _ in 0..dc - diag {
            cur.1 += 1;
            pairs.push(cur);
        }
        for _ in 0..diag {
            cur = (cur.0 + 1, cur.1 + 1);
            pairs.push(cur);
        }
    }
    WarpingPath::new(pairs)
}

/// Ground truth between a uniformly sampled sequence of length `n_a` and its
/// re-parameterization of length `n_b`: warped sample `k` sits at original
/// position `h(k / (n_b - 1)) * (n_a - 1)` and is paired with the nearest
/// original index.
pub fn warp_truth(spec: &WarpSpec, n_a: usize, n_b: usize) -> WarpingPath {
    let anchors: Vec<(usize, usize)> = (0..n_b)
        .map(|k| {
            let u = spec.eval(k as f64 / (n_b - 1) as f64);
            (((u * (n_a - 1) as f64).round() as usize).min(n_a - 1), k)
        })
        .collect();
    staircase(&anchors)
}

/// Resamples `cloud` along its index parameter at the warped positions
/// `h(k / (n_out - 1))`, interpolating linearly between neighbouring points
/// (renormalizing quaternion blocks). Returns the warped cloud and the
/// ground-truth path from `cloud` indices to warped indices.
pub fn apply_warp(
    cloud: &TimeOrderedPointCloud,
    spec: &WarpSpec,
    n_out: usize,
) -> Result<(TimeOrderedPointCloud, WarpingPath)> {
    spec.validate()?;
    if n_out < 2 {
        return Err(Error::invalid("warped cloud needs at least 2 points"));
    }
    let n = cloud.len();
    let points = (0..n_out)
        .map(|k| {
            let pos = spec.eval(k as f64 / (n_out - 1) as f64) * (n - 1) as f64;
            let lo = (pos.floor() as usize).min(n - 2);
            let frac = pos - lo as f64;
            let (a, b) = (cloud.point(lo), cloud.point(lo + 1));
            let mut p: Vec<f64> = a.iter().zip(b).map(|(x, y)| x + frac * (y - x)).collect();
            if cloud.metric().kind == MetricKind::QuaternionProduct {
                for q in p.chunks_exact_mut(4) {
                    let norm = q.iter().map(|v| v * v).sum::<f64>().sqrt();
                    q.iter_mut().for_each(|v| *v /= norm);
                }
            }
            p
        })
        .collect();
    let warped = TimeOrderedPointCloud::new(points, *cloud.metric())?;
    let truth = warp_truth(spec, n, n_out);
    assert!(truth.is_valid(n, n_out, true), "warp produced an invalid truth path");
    Ok((warped, truth))
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    #[test]
    fn families_fix_endpoints_and_increase() {
        for f in WarpFamily::ALL {
            let (lo, hi) = f.param_range();
            for p in [lo, 0.5 * (lo + hi), hi] {
                assert!(f.eval(p, 0.0).abs() < 1e-15);
                assert!((f.eval(p, 1.0) - 1.0).abs() < 1e-12);
                let mut prev = 0.0;
                for k in 1..=100 {
                    let v = f.eval(p, k as f64 / 100.0);
                    assert!(v > prev, "{f:?} {p}");
                    prev = v;
                }
            }
        }
    }

    #[test]
    fn identity_warp_gives_diagonal() {
        assert_eq!(warp_truth(&WarpSpec::identity(), 20, 20), WarpingPath::diagonal(20));
    }

    #[test]
    fn square_warp_truth() {
        let spec = WarpSpec::new(
            vec![WarpComponent {
                family: WarpFamily::Polynomial,
                param: 2.0,
            }],
            vec![1.0],
        )
        .unwrap();
        let n = 30;
        let truth = warp_truth(&spec, n, n);
        assert!(truth.is_valid(n, n, true));
        for k in 0..n {
            let expect = ((k as f64 / (n - 1) as f64).powi(2) * (n - 1) as f64).round() as usize;
            assert!(truth.contains((expect, k)));
        }
    }

    #[test]
    fn invalid_specs() {
        let c = WarpComponent {
            family: WarpFamily::Tanh,
            param: 1.0,
        };
        assert!(WarpSpec::new(vec![c, c], vec![0.5, 0.6]).is_err());
        assert!(WarpSpec::new(vec![c], vec![1.0, 0.0]).is_err());
        assert!(WarpSpec::new(vec![WarpComponent { param: -1.0, ..c }], vec![1.0]).is_err());
    }

    #[test]
    fn inverse_round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let spec = WarpSpec::random(&mut rng);
            spec.validate().unwrap();
            for k in 0..=10 {
                let u = k as f64 / 10.0;
                assert!((spec.eval(spec.inverse(u)) - u).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn staircase_fills_gaps() {
        let p = staircase(&[(0, 0), (3, 1), (3, 4)]);
        assert_eq!(p.pairs(), &[(0, 0), (1, 0), (2, 0), (3, 1), (3, 2), (3, 3), (3, 4)]);
    }
}
