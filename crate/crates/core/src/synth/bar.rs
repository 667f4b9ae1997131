//! A bar of length `B` sliding back and forth over `A` pixels, observed by
//! its position (Lagrangian) and by per-pixel occupancy (Eulerian).

use serde::{Deserialize, Serialize};

use crate::cloud::TimeOrderedPointCloud;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BarParams {
    pub pixels: usize,
    pub length: f64,
    pub period: f64,
}

impl BarParams {
    pub fn new(pixels: usize, length: f64, period: f64) -> Result<Self> {
        let p = Self { pixels, length, period };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.length > 0.0 && self.length < self.pixels as f64) {
            return Err(Error::invalid(format!(
                "bar length {} must lie in (0, {})",
                self.length, self.pixels
            )));
        }
        if !(self.period > 0.0 && self.period.is_finite()) {
            return Err(Error::invalid("bar period must be positive"));
        }
        Ok(())
    }

    /// `c_t = A/2 + A/2 cos(2πt/T)`.
    pub fn center(&self, t: f64) -> f64 {
        let half = 0.5 * self.pixels as f64;
        half + half * (std::f64::consts::TAU * t / self.period).cos()
    }

    /// Pixel `i` is lit when `|c_t + B/2 - i| < B/2`.
    pub fn frame(&self, t: f64) -> Vec<f64> {
        let c = self.center(t) + 0.5 * self.length;
        (0..self.pixels)
            .map(|i| if (c - i as f64).abs() < 0.5 * self.length { 1.0 } else { 0.0 })
            .collect()
    }

    /// Lagrangian (1-D positions) and Eulerian (occupancy vectors) clouds at
    /// the given times.
    pub fn observe(&self, times: &[f64]) -> Result<(TimeOrderedPointCloud, TimeOrderedPointCloud)> {
        self.validate()?;
        let lag = TimeOrderedPointCloud::euclidean(times.iter().map(|&t| vec![self.center(t)]).collect())?
            .with_label("lagrangian");
        let eul = TimeOrderedPointCloud::euclidean(times.iter().map(|&t| self.frame(t)).collect())?
            .with_label("eulerian");
        Ok((lag, eul))
    }
}

/// `frames` samples at `t = k T / frames` (one period).
pub fn oscillating_bar(
    pixels: usize,
    length: f64,
    period: f64,
    frames: usize,
) -> Result<(TimeOrderedPointCloud, TimeOrderedPointCloud)> {
    if frames < 4 {
        return Err(Error::invalid(format!("need at least 4 frames, got {frames}")));
    }
    let params = BarParams::new(pixels, length, period)?;
    let times: Vec<f64> = (0..frames).map(|k| k as f64 * period / frames as f64).collect();
    params.observe(&times)
}
