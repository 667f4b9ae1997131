use crate::error::{Error, Result};
use crate::metric::MetricSpec;

/// An ordered sequence of points in a declared metric space.
///
/// Immutable after construction; every point has been validated against
/// the metric (dimension, finiteness, unit quaternion blocks).
#[derive(Clone, Debug, PartialEq)]
pub struct TimeOrderedPointCloud {
    coords: Vec<f64>,
    len: usize,
    metric: MetricSpec,
    label: Option<String>,
}

impl TimeOrderedPointCloud {
    pub fn new(points: Vec<Vec<f64>>, metric: MetricSpec) -> Result<Self> {
        metric.metric().validate_dimension(metric.dimension)?;
        if points.len() < 2 {
            return Err(Error::invalid(format!(
                "a point cloud needs at least 2 points, got {}",
                points.len()
            )));
        }
        for (i, p) in points.iter().enumerate() {
            metric
                .validate_point(p)
                .map_err(|e| Error::invalid(format!("point {i}: {e}")))?;
        }
        let len = points.len();
        Ok(Self {
            coords: points.into_iter().flatten().collect(),
            len,
            metric,
            label: None,
        })
    }

    /// Euclidean cloud with the dimension taken from the first point.
    pub fn euclidean(points: Vec<Vec<f64>>) -> Result<Self> {
        let dim = points.first().map_or(0, Vec::len);
        Self::new(points, MetricSpec::euclidean(dim))
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn dimension(&self) -> usize {
        self.metric.dimension
    }

    pub fn metric(&self) -> &MetricSpec {
        &self.metric
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        let d = self.metric.dimension;
        &self.coords[i * d..(i + 1) * d]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.metric.dimension)
    }

    pub fn to_vecs(&self) -> Vec<Vec<f64>> {
        self.points().map(<[f64]>::to_vec).collect()
    }

    /// The cloud followed by itself (`AA`), used for loop alignment.
    pub fn concat_self(&self) -> Self {
        let mut coords = self.coords.clone();
        coords.extend_from_slice(&self.coords);
        Self {
            coords,
            len: 2 * self.len,
            metric: self.metric,
            label: self.label.clone(),
        }
    }

    /// Largest inter-point distance.
    pub fn diameter(&self) -> f64 {
        let metric = self.metric.metric();
        let mut diam = 0.0f64;
        for i in 0..self.len {
            for j in i + 1..self.len {
                diam = diam.max(metric.distance(self.point(i), self.point(j)));
            }
        }
        diam
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::MetricKind;

    #[test]
    fn rejects_short_and_ragged_clouds() {
        assert!(TimeOrderedPointCloud::euclidean(vec![vec![0.0, 0.0]]).is_err());
        assert!(TimeOrderedPointCloud::euclidean(vec![vec![0.0, 0.0], vec![1.0]]).is_err());
        assert!(TimeOrderedPointCloud::euclidean(vec![vec![0.0], vec![f64::NAN]]).is_err());
    }

    #[test]
    fn rejects_non_unit_quaternions() {
        let spec = MetricSpec::new(MetricKind::QuaternionProduct, 4).unwrap();
        let ok = vec![vec![1.0, 0.0, 0.0, 0.0], vec![0.0, 1.0, 0.0, 0.0]];
        assert!(TimeOrderedPointCloud::new(ok, spec).is_ok());
        let bad = vec![vec![1.0, 0.0, 0.0, 0.0], vec![0.0, 2.0, 0.0, 0.0]];
        assert!(TimeOrderedPointCloud::new(bad, spec).is_err());
    }

    #[test]
    fn concat_self_doubles() {
        let c = TimeOrderedPointCloud::euclidean(vec![vec![0.0], vec![1.0], vec![3.0]]).unwrap();
        let cc = c.concat_self();
        assert_eq!(cc.len(), 6);
        assert_eq!(cc.point(4), &[1.0]);
        assert_eq!(c.diameter(), 3.0);
    }
}
