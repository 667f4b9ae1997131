//! Parametric curves on `[0, 1]`, registered by name.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::sync::Arc;

use rand::Rng;

use crate::cloud::TimeOrderedPointCloud;
use crate::error::{Error, Result};

pub trait Curve: Send + Sync {
    fn name(&self) -> &str;
    fn dimension(&self) -> usize;
    fn point(&self, t: f64) -> Vec<f64>;
    /// Whether `point(0) == point(1)`.
    fn is_loop(&self) -> bool;
}

/// `(cos 2πt, sin 4πt)`.
pub struct Figure8;

impl Curve for Figure8 {
    fn name(&self) -> &str {
        "figure8"
    }

    fn dimension(&self) -> usize {
        2
    }

    fn point(&self, t: f64) -> Vec<f64> {
        vec![(TAU * t).cos(), (2.0 * TAU * t).sin()]
    }

    fn is_loop(&self) -> bool {
        true
    }
}

/// An ellipse pinched at the ends of its minor axis:
/// `(2 cos θ, sin θ (0.3 + cos² θ))`. Its distance from the centre is a
/// strictly increasing function of `cos² θ`, so it has exactly two maxima
/// (θ = 0, π) and two minima (θ = π/2, 3π/2) per revolution.
pub struct PinchedEllipse;

impl Curve for PinchedEllipse {
    fn name(&self) -> &str {
        "pinched-ellipse"
    }

    fn dimension(&self) -> usize {
        2
    }

    fn point(&self, t: f64) -> Vec<f64> {
        let th = TAU * t;
        let c = th.cos();
        vec![2.0 * c, th.sin() * (0.3 + c * c)]
    }

    fn is_loop(&self) -> bool {
        true
    }
}

/// Three-pronged closed outline with an asymmetric handle.
pub struct ForkLoop;

impl Curve for ForkLoop {
    fn name(&self) -> &str {
        "fork-loop"
    }

    fn dimension(&self) -> usize {
        2
    }

    fn point(&self, t: f64) -> Vec<f64> {
        let th = TAU * t;
        let r = 1.0 + 0.35 * (3.0 * th).cos().max(0.0).powi(2) + 0.15 * th.sin() + 0.1 * (2.0 * th + 1.0).cos();
        vec![r * th.cos(), r * th.sin()]
    }

    fn is_loop(&self) -> bool {
        true
    }
}

/// Closed Catmull-Rom spline through planar control points, traversed at
/// uniform spline parameter (one unit of `t` per control point).
#[derive(Clone, Debug)]
pub struct ControlPointLoop {
    points: Vec<[f64; 2]>,
}

impl ControlPointLoop {
    pub fn new(points: Vec<[f64; 2]>) -> Result<Self> {
        if points.len() < 3 {
            return Err(Error::invalid("a control-point loop needs at least 3 points"));
        }
        Ok(Self { points })
    }

    /// Star-shaped random loop: `k` control points at jittered angles with
    /// random radii. Generic draws have no rotational or mirror symmetry.
    pub fn random(rng: &mut impl Rng, k: usize) -> Result<Self> {
        let points = (0..k)
            .map(|i| {
                let th = TAU * (i as f64 + rng.gen_range(-0.3..0.3)) / k as f64;
                let r = rng.gen_range(0.5..1.5);
                [r * th.cos(), r * th.sin()]
            })
            .collect();
        Self::new(points)
    }

    pub fn control_points(&self) -> &[[f64; 2]] {
        &self.points
    }
}

impl Curve for ControlPointLoop {
    fn name(&self) -> &str {
        "custom-control-points"
    }

    fn dimension(&self) -> usize {
        2
    }

    fn point(&self, t: f64) -> Vec<f64> {
        let k = self.points.len();
        let s = t.rem_euclid(1.0) * k as f64;
        let seg = (s.floor() as usize).min(k - 1);
        let u = s - seg as f64;
        let p = |o: isize| self.points[(seg as isize + o).rem_euclid(k as isize) as usize];
        let (p0, p1, p2, p3) = (p(-1), p(0), p(1), p(2));
        let (u2, u3) = (u * u, u * u * u);
        (0..2)
            .map(|d| {
                0.5 * (2.0 * p1[d]
                    + (p2[d] - p0[d]) * u
                    + (2.0 * p0[d] - 5.0 * p1[d] + 4.0 * p2[d] - p3[d]) * u2
                    + (3.0 * p1[d] - p0[d] - 3.0 * p2[d] + p3[d]) * u3)
            })
            .collect()
    }

    fn is_loop(&self) -> bool {
        true
    }
}

pub struct CurveRegistry {
    curves: BTreeMap<String, Arc<dyn Curve>>,
}

impl CurveRegistry {
    pub fn empty() -> Self {
        Self {
            curves: BTreeMap::new(),
        }
    }

    pub fn builtin() -> Self {
        let mut r = Self::empty();
        r.register(Arc::new(Figure8));
        r.register(Arc::new(PinchedEllipse));
        r.register(Arc::new(ForkLoop));
        r.register(Arc::new(
            ControlPointLoop::new(vec![
                [1.0, 0.0],
                [0.4, 0.9],
                [-0.6, 1.2],
                [-1.1, 0.1],
                [-0.5, -0.7],
                [0.6, -1.0],
            ])
            .expect("default control points"),
        ));
        r
    }

    pub fn register(&mut self, curve: Arc<dyn Curve>) {
        self.curves.insert(curve.name().to_string(), curve);
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn Curve>> {
        self.curves.get(name).cloned().ok_or_else(|| {
            Error::invalid(format!(
                "unknown curve {name:?} (known: {})",
                self.names().join(", ")
            ))
        })
    }

    pub fn names(&self) -> Vec<&str> {
        self.curves.keys().map(String::as_str).collect()
    }
}

/// Samples `curve` at the given parameters.
pub fn sample_at(curve: &dyn Curve, params: &[f64]) -> Result<TimeOrderedPointCloud> {
    TimeOrderedPointCloud::euclidean(params.iter().map(|&t| curve.point(t)).collect())
        .map(|c| c.with_label(curve.name()))
}

/// Uniform parameters `k / (n - 1)`, endpoints included.
pub fn uniform_params(n: usize) -> Vec<f64> {
    (0..n).map(|k| k as f64 / (n - 1) as f64).collect()
}

/// `n` samples of a built-in curve at uniform `t = k / (n - 1)`; loops
/// therefore repeat their first point at the end.
pub fn sample_curve(name: &str, n: usize) -> Result<TimeOrderedPointCloud> {
    if n < 8 {
        return Err(Error::invalid(format!("need at least 8 samples, got {n}")));
    }
    let curve = CurveRegistry::builtin().get(name)?;
    sample_at(curve.as_ref(), &uniform_params(n))
}
