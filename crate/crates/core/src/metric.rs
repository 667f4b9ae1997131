//! Ambient metrics for time-ordered point clouds.
//!
//! Each built-in metric is a [`Metric`] strategy selected by [`MetricKind`].
//! The quaternion product metric treats a point as `J` concatenated unit
//! quaternions and sums the per-joint rotation angles `acos(|q_i . p_i|)`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on the norm of each quaternion block.
pub const UNIT_QUATERNION_TOL: f64 = 1e-9;

pub trait Metric: Send + Sync {
    fn name(&self) -> &'static str;

    /// Distance between two points of matching dimension.
    ///
    /// Callers are expected to have validated the points; see
    /// [`Metric::validate_point`].
    fn distance(&self, a: &[f64], b: &[f64]) -> f64;

    /// Checks that a point belongs to the metric space.
    fn validate_point(&self, _p: &[f64]) -> Result<()> {
        Ok(())
    }

    /// Checks that `dimension` is admissible for this metric.
    fn validate_dimension(&self, dimension: usize) -> Result<()> {
        if dimension == 0 {
            return Err(Error::invalid("metric dimension must be positive"));
        }
        Ok(())
    }
}

pub struct Euclidean;

impl Metric for Euclidean {
    fn name(&self) -> &'static str {
        "euclidean"
    }

    fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt()
    }
}

pub struct Manhattan;

impl Metric for Manhattan {
    fn name(&self) -> &'static str {
        "manhattan"
    }

    fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
    }
}

pub struct QuaternionProduct;

impl Metric for QuaternionProduct {
    fn name(&self) -> &'static str {
        "quaternion"
    }

    fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        a.chunks_exact(4)
            .zip(b.chunks_exact(4))
            .map(|(q, p)| {
                let dot: f64 = q.iter().zip(p).map(|(x, y)| x * y).sum();
                // |q.p| can drift past 1 on numerically unit quaternions.
                dot.abs().clamp(0.0, 1.0).acos()
            })
            .sum()
    }

    fn validate_point(&self, p: &[f64]) -> Result<()> {
        for (joint, q) in p.chunks_exact(4).enumerate() {
            let norm = q.iter().map(|x| x * x).sum::<f64>().sqrt();
            if (norm - 1.0).abs() > UNIT_QUATERNION_TOL {
                return Err(Error::invalid(format!(
                    "quaternion block {joint} has norm {norm}, expected 1"
                )));
            }
        }
        Ok(())
    }

    fn validate_dimension(&self, dimension: usize) -> Result<()> {
        if dimension == 0 || dimension % 4 != 0 {
            return Err(Error::invalid(format!(
                "quaternion-product dimension must be a positive multiple of 4, got {dimension}"
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetricKind {
    #[serde(alias = "euclidean", alias = "l2")]
    EuclideanL2,
    #[serde(alias = "manhattan", alias = "l1")]
    ManhattanL1,
    #[serde(alias = "quaternion")]
    QuaternionProduct,
}

impl MetricKind {
    pub fn strategy(self) -> &'static dyn Metric {
        match self {
            MetricKind::EuclideanL2 => &Euclidean,
            MetricKind::ManhattanL1 => &Manhattan,
            MetricKind::QuaternionProduct => &QuaternionProduct,
        }
    }

    pub fn all() -> [MetricKind; 3] {
        [
            MetricKind::EuclideanL2,
            MetricKind::ManhattanL1,
            MetricKind::QuaternionProduct,
        ]
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.strategy().name())
    }
}

impl FromStr for MetricKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "euclidean" | "euclidean-l2" | "l2" => Ok(MetricKind::EuclideanL2),
            "manhattan" | "manhattan-l1" | "l1" => Ok(MetricKind::ManhattanL1),
            "quaternion" | "quaternion-product" => Ok(MetricKind::QuaternionProduct),
            other => Err(Error::invalid(format!("unknown metric {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricSpec {
    pub kind: MetricKind,
    pub dimension: usize,
}

impl MetricSpec {
    pub fn new(kind: MetricKind, dimension: usize) -> Result<Self> {
        kind.strategy().validate_dimension(dimension)?;
        Ok(Self { kind, dimension })
    }

    pub fn euclidean(dimension: usize) -> Self {
        Self {
            kind: MetricKind::EuclideanL2,
            dimension,
        }
    }

    pub fn metric(&self) -> &'static dyn Metric {
        self.kind.strategy()
    }

    pub fn validate_point(&self, p: &[f64]) -> Result<()> {
        if p.len() != self.dimension {
            return Err(Error::invalid(format!(
                "point has dimension {}, metric expects {}",
                p.len(),
                self.dimension
            )));
        }
        if p.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("point has non-finite coordinates"));
        }
        self.metric().validate_point(p)
    }
}

/// Distance between `a` and `b` under `metric`, validating both arguments.
pub fn metric_distance(a: &[f64], b: &[f64], metric: &MetricSpec) -> Result<f64> {
    metric.metric().validate_dimension(metric.dimension)?;
    metric.validate_point(a)?;
    metric.validate_point(b)?;
    Ok(metric.metric().distance(a, b))
}
