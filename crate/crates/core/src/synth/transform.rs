//! Rigid motions and smooth non-rigid distortions of Euclidean clouds.

use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::cloud::TimeOrderedPointCloud;
use crate::error::{Error, Result};
use crate::metric::MetricKind;
use crate::oracle::{gromov_hausdorff, MAX_GH_SIDE};
use crate::ssm::compute_ssm;

use super::curves::{sample_at, Curve};

fn require_euclidean(cloud: &TimeOrderedPointCloud) -> Result<()> {
    if cloud.metric().kind != MetricKind::EuclideanL2 {
        return Err(Error::invalid("spatial transforms need a euclidean-L2 cloud"));
    }
    Ok(())
}

/// Haar-random orthogonal matrix; a reflection with probability one half.
pub fn random_orthogonal(dim: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    let g = DMatrix::<f64>::from_fn(dim, dim, |_, _| StandardNormal.sample(rng));
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for k in 0..dim {
        if r[(k, k)] < 0.0 {
            q.column_mut(k).neg_mut();
        }
    }
    if rng.gen_bool(0.5) {
        q.column_mut(0).neg_mut();
    }
    q
}

/// `R p + t` with random orthogonal `R` and a translation of the order of the
/// cloud's diameter.
pub fn apply_isometry_with(cloud: &TimeOrderedPointCloud, rng: &mut impl Rng) -> Result<TimeOrderedPointCloud> {
    require_euclidean(cloud)?;
    let dim = cloud.dimension();
    let r = random_orthogonal(dim, rng);
    let scale = cloud.diameter().max(1.0);
    let t: Vec<f64> = (0..dim)
        .map(|_| scale * Distribution::<f64>::sample(&StandardNormal, rng))
        .collect();
    let points = cloud
        .points()
        .map(|p| {
            (0..dim)
                .map(|a| (0..dim).map(|b| r[(a, b)] * p[b]).sum::<f64>() + t[a])
                .collect()
        })
        .collect();
    let out = TimeOrderedPointCloud::new(points, *cloud.metric())?;
    Ok(match cloud.label() {
        Some(l) => out.with_label(l),
        None => out,
    })
}

pub fn apply_isometry(cloud: &TimeOrderedPointCloud, seed: u64) -> Result<TimeOrderedPointCloud> {
    apply_isometry_with(cloud, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// `exp(1 - 1 / (1 - x²))` on `|x| < 1`: smooth, peak 1 at 0, zero outside.
fn bump(x: f64) -> f64 {
    if x.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - x * x)).exp()
    }
}

/// Sum of compactly supported bumps over the curve parameter, each pushing
/// in its own random unit direction.
#[derive(Clone, Debug, PartialEq)]
pub struct DistortionField {
    pub centers: Vec<f64>,
    pub directions: Vec<Vec<f64>>,
    pub width: f64,
    /// Measure parameter distance on the circle `[0, 1)`.
    pub periodic: bool,
}

impl DistortionField {
    /// `k` control points, one per stratum of `[0, 1]`. The bump half-width
    /// is half a stratum, so each control point moves on its own.
    pub fn random(dim: usize, k: usize, periodic: bool, rng: &mut impl Rng) -> Result<Self> {
        if k == 0 || dim == 0 {
            return Err(Error::invalid("distortion needs at least one control point"));
        }
        let centers = (0..k)
            .map(|i| (i as f64 + rng.gen_range(0.2..0.8)) / k as f64)
            .collect();
        let directions = (0..k)
            .map(|_| {
                let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
                let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
                v.into_iter().map(|x| x / norm).collect()
            })
            .collect();
        Ok(Self {
            centers,
            directions,
            width: 0.5 / k as f64,
            periodic,
        })
    }

    /// Where to measure the distortion: the control points themselves when
    /// there are two to four of them, otherwise four evenly spread samples.
    pub fn probe_params(&self) -> Vec<f64> {
        if (2..=MAX_GH_SIDE).contains(&self.centers.len()) {
            self.centers.clone()
        } else {
            probe_times()
        }
    }

    pub fn dimension(&self) -> usize {
        self.directions.first().map_or(0, Vec::len)
    }

    pub fn displacement(&self, u: f64) -> Vec<f64> {
        let mut d = vec![0.0; self.dimension()];
        for (c, dir) in self.centers.iter().zip(&self.directions) {
            let mut dist = (u - c).abs();
            if self.periodic {
                dist = dist.min(1.0 - dist);
            }
            let w = bump(dist / self.width);
            if w > 0.0 {
                d.iter_mut().zip(dir).for_each(|(a, b)| *a += w * b);
            }
        }
        d
    }

    /// Moves point `k` by `magnitude * displacement(params[k])`.
    pub fn apply_at(
        &self,
        cloud: &TimeOrderedPointCloud,
        params: &[f64],
        magnitude: f64,
    ) -> Result<TimeOrderedPointCloud> {
        require_euclidean(cloud)?;
        if !(magnitude >= 0.0) {
            return Err(Error::invalid(format!("distortion magnitude {magnitude} must be >= 0")));
        }
        if params.len() != cloud.len() || self.dimension() != cloud.dimension() {
            return Err(Error::invalid("distortion field does not fit the cloud"));
        }
        let points = cloud
            .points()
            .zip(params)
            .map(|(p, &u)| {
                let d = self.displacement(u);
                p.iter().zip(&d).map(|(x, dx)| x + magnitude * dx).collect()
            })
            .collect();
        let out = TimeOrderedPointCloud::new(points, *cloud.metric())?;
        Ok(match cloud.label() {
            Some(l) => out.with_label(l),
            None => out,
        })
    }
}

/// Distorts `cloud` with a random field over its index parameter `k/(n-1)`.
pub fn apply_distortion(
    cloud: &TimeOrderedPointCloud,
    control_points: usize,
    magnitude: f64,
    seed: u64,
) -> Result<TimeOrderedPointCloud> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let field = DistortionField::random(cloud.dimension(), control_points, false, &mut rng)?;
    let n = cloud.len();
    let params: Vec<f64> = (0..n).map(|k| k as f64 / (n - 1) as f64).collect();
    field.apply_at(cloud, &params, magnitude)
}

/// Exact `d_GH / diam(X)` between `X`, the curve at `probe_x`, and `Y`, the
/// curve at `probe_y` moved by the field. At most four probes per side.
pub fn probe_ratio(
    curve: &dyn Curve,
    field: &DistortionField,
    probe_x: &[f64],
    probe_y: &[f64],
    magnitude: f64,
) -> Result<f64> {
    if probe_x.len() > MAX_GH_SIDE || probe_y.len() > MAX_GH_SIDE {
        return Err(Error::SizeGuard(format!("GH probe limited to {MAX_GH_SIDE} points")));
    }
    let x = sample_at(curve, probe_x)?;
    let y = field.apply_at(&sample_at(curve, probe_y)?, probe_y, magnitude)?;
    let diam = x.diameter();
    if diam <= 0.0 {
        return Err(Error::invalid("probe points coincide"));
    }
    Ok(gromov_hausdorff(&compute_ssm(&x), &compute_ssm(&y))? / diam)
}

/// Four probe times `(k + 0.5) / 4`.
pub fn probe_times() -> Vec<f64> {
    (0..MAX_GH_SIDE).map(|k| (k as f64 + 0.5) / MAX_GH_SIDE as f64).collect()
}

/// Smallest magnitude at which the probe ratio reaches `target`, found by a
/// coarse scan followed by bisection. Returns the magnitude and the ratio
/// achieved there; when the undistorted pair already reaches the target the
/// magnitude is 0.
pub fn calibrate_magnitude(
    curve: &dyn Curve,
    field: &DistortionField,
    probe_x: &[f64],
    probe_y: &[f64],
    target: f64,
) -> Result<(f64, f64)> {
    if !(target >= 0.0) {
        return Err(Error::invalid("target ratio must be >= 0"));
    }
    let ratio = |mag| probe_ratio(curve, field, probe_x, probe_y, mag);
    let base = ratio(0.0)?;
    if base >= target {
        return Ok((0.0, base));
    }
    let steps = 64;
    let max_mag = 2.0 * sample_at(curve, probe_x)?.diameter();
    let mut lo = 0.0;
    let mut hi = None;
    for s in 1..=steps {
        let mag = max_mag * s as f64 / steps as f64;
        if ratio(mag)? >= target {
            hi = Some(mag);
            break;
        }
        lo = mag;
    }
    let Some(mut hi) = hi else {
        return Err(Error::invalid(format!(
            "distortion field cannot reach GH/diam ratio {target}"
        )));
    };
    for _ in 0..50 {
        let mid = 0.5 * (lo + hi);
        if ratio(mid)? >= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok((hi, ratio(hi)?))
}
