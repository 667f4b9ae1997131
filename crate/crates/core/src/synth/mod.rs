//! Synthetic pairs with known correspondence.

mod bar;
mod curves;
mod transform;
mod warp;

pub use bar::{oscillating_bar, BarParams};
pub use curves::{
    sample_at, sample_curve, uniform_params, ControlPointLoop, Curve, CurveRegistry, Figure8, ForkLoop,
    PinchedEllipse,
};
pub use transform::{
    apply_distortion, apply_isometry, apply_isometry_with, calibrate_magnitude, probe_ratio, probe_times,
    random_orthogonal, DistortionField,
};
pub use warp::{apply_warp, staircase, warp_truth, WarpComponent, WarpFamily, WarpSpec};

use rand::Rng;
use serde::Serialize;

use crate::cloud::TimeOrderedPointCloud;
use crate::error::{Error, Result};
use crate::path::WarpingPath;

/// Where `B` starts on the loop `A` when both are closed curves.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LoopTruth {
    pub n_a: usize,
    pub n_b: usize,
    /// Column of `B` matched to sample 0 of `A`.
    pub offset: usize,
    /// Fractional circular shift applied to `B`.
    pub shift: f64,
}

#[derive(Clone, Debug)]
pub struct GroundTruthPair {
    pub cloud_a: TimeOrderedPointCloud,
    pub cloud_b: TimeOrderedPointCloud,
    /// Global path over `A x B`, or for loops a path over `A x BB` covering
    /// one revolution of `A`.
    pub truth: WarpingPath,
    /// `d_GH / diam` between the curve and its distortion, measured exactly
    /// on at most four probe samples.
    pub gh_diam_ratio: f64,
    pub warp: WarpSpec,
    pub loop_truth: Option<LoopTruth>,
}

/// Distortion settings shared by the pair generators.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DistortionTarget {
    pub gh_diam_ratio: f64,
    pub control_points: usize,
}

const FIELD_ATTEMPTS: usize = 16;

/// Distorts `cloud` (sampled at curve parameters `params`) with a random
/// field whose magnitude gives the target `d_GH / diam` between the curve and
/// its distortion at the probe parameters.
fn distort(
    curve: &dyn Curve,
    cloud: TimeOrderedPointCloud,
    params: &[f64],
    target: Option<DistortionTarget>,
    periodic: bool,
    rng: &mut impl Rng,
) -> Result<(TimeOrderedPointCloud, f64)> {
    match target {
        Some(t) if t.gh_diam_ratio > 0.0 => {
            // Some fields saturate below the target; draw again.
            let mut last = None;
            for _ in 0..FIELD_ATTEMPTS {
                let field = DistortionField::random(curve.dimension(), t.control_points, periodic, rng)?;
                let probe = field.probe_params();
                match calibrate_magnitude(curve, &field, &probe, &probe, t.gh_diam_ratio) {
                    Ok((mag, ratio)) => return Ok((field.apply_at(&cloud, params, mag)?, ratio)),
                    Err(e) => last = Some(e),
                }
            }
            Err(last.expect("at least one attempt"))
        }
        _ => Ok((cloud, 0.0)),
    }
}

/// `A` uniformly sampled, `B` re-parameterized by a random warp, optionally
/// distorted, then moved by a random isometry.
pub fn curve_pair(
    curve: &dyn Curve,
    n: usize,
    target: Option<DistortionTarget>,
    isometry: bool,
    rng: &mut impl Rng,
) -> Result<GroundTruthPair> {
    if n < 8 {
        return Err(Error::invalid(format!("need at least 8 samples, got {n}")));
    }
    let warp = WarpSpec::random(rng);
    let params_a = uniform_params(n);
    let params_b: Vec<f64> = params_a.iter().map(|&t| warp.eval(t)).collect();
    let a = sample_at(curve, &params_a)?;
    let b = sample_at(curve, &params_b)?;
    let (b, gh_diam_ratio) = distort(curve, b, &params_b, target, false, rng)?;
    let b = if isometry { apply_isometry_with(&b, rng)? } else { b };
    let truth = warp_truth(&warp, n, n);
    Ok(GroundTruthPair {
        cloud_a: a,
        cloud_b: b,
        truth,
        gh_diam_ratio,
        warp,
        loop_truth: None,
    })
}

/// Two samplings of one closed curve: `A_i = γ(i/n)` and
/// `B_k = γ(frac(h(k/n) + shift))` for a random warp `h` and shift.
///
/// The truth pairs every `A_i` with the column of `BB` (B twice) at which `B`
/// passes through the same curve parameter, for one revolution of `A`.
pub fn loop_pair(
    curve: &dyn Curve,
    n: usize,
    target: Option<DistortionTarget>,
    isometry: bool,
    rng: &mut impl Rng,
) -> Result<GroundTruthPair> {
    let warp = WarpSpec::random(rng);
    loop_pair_with(curve, n, warp, target, isometry, rng)
}

/// [`loop_pair`] with a given warp; the shift is still random.
pub fn loop_pair_with(
    curve: &dyn Curve,
    n: usize,
    warp: WarpSpec,
    target: Option<DistortionTarget>,
    isometry: bool,
    rng: &mut impl Rng,
) -> Result<GroundTruthPair> {
    if n < 8 {
        return Err(Error::invalid(format!("need at least 8 samples, got {n}")));
    }
    if !curve.is_loop() {
        return Err(Error::invalid(format!("{} is not a closed curve", curve.name())));
    }
    warp.validate()?;
    let shift: f64 = rng.gen_range(0.0..1.0);
    let params_a: Vec<f64> = (0..n).map(|i| i as f64 / n as f64).collect();
    let params_b: Vec<f64> = (0..n)
        .map(|k| (warp.eval(k as f64 / n as f64) + shift).fract())
        .collect();
    let a = sample_at(curve, &params_a)?;
    let b = sample_at(curve, &params_b)?;
    let (b, gh_diam_ratio) = distort(curve, b, &params_b, target, true, rng)?;
    let b = if isometry { apply_isometry_with(&b, rng)? } else { b };

    let base = (1.0 - shift).fract();
    let anchors: Vec<(usize, usize)> = (0..n)
        .map(|i| {
            let phi = base + i as f64 / n as f64;
            let col = n as f64 * (phi.floor() + warp.inverse(phi.fract()));
            (i, (col.round() as usize).min(2 * n - 1))
        })
        .collect();
    let truth = staircase(&anchors);
    let offset = anchors[0].1 % n;
    Ok(GroundTruthPair {
        cloud_a: a,
        cloud_b: b,
        truth,
        gh_diam_ratio,
        warp,
        loop_truth: Some(LoopTruth {
            n_a: n,
            n_b: n,
            offset,
            shift,
        }),
    })
}

/// Lagrangian observations at uniform times over `periods` periods against
/// Eulerian observations at warped times.
pub fn bar_pair(params: &BarParams, frames: usize, periods: f64, rng: &mut impl Rng) -> Result<GroundTruthPair> {
    if frames < 4 {
        return Err(Error::invalid(format!("need at least 4 frames, got {frames}")));
    }
    if !(periods > 0.0) {
        return Err(Error::invalid("periods must be positive"));
    }
    let warp = WarpSpec::random(rng);
    let duration = periods * params.period;
    let uniform = uniform_params(frames);
    let times_a: Vec<f64> = uniform.iter().map(|&s| s * duration).collect();
    let times_b: Vec<f64> = uniform.iter().map(|&s| warp.eval(s) * duration).collect();
    let (lag, _) = params.observe(&times_a)?;
    let (_, eul) = params.observe(&times_b)?;
    Ok(GroundTruthPair {
        cloud_a: lag,
        cloud_b: eul,
        truth: warp_truth(&warp, frames, frames),
        gh_diam_ratio: 0.0,
        warp,
        loop_truth: None,
    })
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::metric::metric_distance;

    #[test]
    fn curve_pair_truth_matches_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let p = curve_pair(&PinchedEllipse, 60, None, false, &mut rng).unwrap();
        assert!(p.truth.is_valid(60, 60, true));
        // Without isometry or distortion, truth pairs are close in space.
        let step = 2.0 * std::f64::consts::TAU / 59.0 * 2.0;
        for &(i, j) in p.truth.pairs() {
            let d = metric_distance(p.cloud_a.point(i), p.cloud_b.point(j), p.cloud_a.metric()).unwrap();
            assert!(d <= step, "{i},{j}: {d}");
        }
    }

    #[test]
    fn loop_truth_lands_on_same_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let curve = ControlPointLoop::random(&mut rng, 7).unwrap();
        let n = 80;
        let p = loop_pair(&curve, n, None, false, &mut rng).unwrap();
        let lt = p.loop_truth.unwrap();
        assert!(p.truth.is_valid(n, 2 * n, false));
        assert_eq!(p.truth.first().unwrap().0, 0);
        assert_eq!(p.truth.last().unwrap().0, n - 1);
        let bb = p.cloud_b.concat_self();
        let scale = p.cloud_a.diameter();
        let mut worst = 0.0f64;
        for i in 0..n {
            let j = p.truth.pairs().iter().find(|&&(r, _)| r == i).unwrap().1;
            let d = metric_distance(p.cloud_a.point(i), bb.point(j), p.cloud_a.metric()).unwrap();
            worst = worst.max(d / scale);
        }
        assert!(worst < 0.1, "{worst}");
        assert_eq!(lt.offset, p.truth.first().unwrap().1 % n);
    }

    #[test]
    fn distorted_pair_reports_ratio() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let target = DistortionTarget {
            gh_diam_ratio: 0.18,
            control_points: 4,
        };
        for _ in 0..5 {
            let p = curve_pair(&Figure8, 50, Some(target), true, &mut rng).unwrap();
            assert!((p.gh_diam_ratio - 0.18).abs() <= 0.05, "{}", p.gh_diam_ratio);
        }
    }
}
