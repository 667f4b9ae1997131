//! Alignment methods behind one interface, looked up by name.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ibdtw::ibdtw;
use crate::matrix::Matrix;
use crate::normalize::{normalize_pair_best, Direction, DEFAULT_LEVELS};
use crate::path::WarpingPath;
use crate::ssm::SelfSimilarityMatrix;
use crate::swalign::{ibptw, SwParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Objective {
    /// Lower `value` is better; the path is global.
    MinimizeCost,
    /// Higher `value` is better; the path is partial.
    MaximizeScore,
}

impl Objective {
    /// Whether `a` is strictly better than `b`.
    pub fn better(self, a: f64, b: f64) -> bool {
        match self {
            Objective::MinimizeCost => a < b,
            Objective::MaximizeScore => a > b,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Alignment {
    pub method: String,
    pub objective: Objective,
    pub value: f64,
    pub path: WarpingPath,
    /// CSWM or PCSWM the path was found in.
    pub matrix: Matrix,
    /// Set when the inputs were normalized first.
    pub direction: Option<Direction>,
}

pub trait Aligner: Send + Sync {
    fn name(&self) -> &str;
    fn objective(&self) -> Objective;
    fn align(&self, x: &SelfSimilarityMatrix, y: &SelfSimilarityMatrix) -> Result<Alignment>;
}

pub struct IbdtwAligner;

impl Aligner for IbdtwAligner {
    fn name(&self) -> &str {
        "ibdtw"
    }

    fn objective(&self) -> Objective {
        Objective::MinimizeCost
    }

    fn align(&self, x: &SelfSimilarityMatrix, y: &SelfSimilarityMatrix) -> Result<Alignment> {
        let r = ibdtw(x, y)?;
        Ok(Alignment {
            method: self.name().into(),
            objective: self.objective(),
            value: r.cost,
            path: r.path,
            matrix: r.cswm,
            direction: None,
        })
    }
}

pub struct IbptwAligner {
    pub params: SwParams,
}

impl Aligner for IbptwAligner {
    fn name(&self) -> &str {
        "ibptw"
    }

    fn objective(&self) -> Objective {
        Objective::MaximizeScore
    }

    fn align(&self, x: &SelfSimilarityMatrix, y: &SelfSimilarityMatrix) -> Result<Alignment> {
        let r = ibptw(x, y, &self.params)?;
        Ok(Alignment {
            method: self.name().into(),
            objective: self.objective(),
            value: r.alignment.score,
            path: r.alignment.path,
            matrix: r.pcswm,
            direction: None,
        })
    }
}

/// Runs `inner` on both normalization directions and keeps the better one.
pub struct NormalizedAligner {
    name: String,
    pub inner: Arc<dyn Aligner>,
    pub levels: usize,
}

impl NormalizedAligner {
    pub fn new(inner: Arc<dyn Aligner>, levels: usize) -> Self {
        Self {
            name: format!("{}n", inner.name()),
            inner,
            levels,
        }
    }
}

impl Aligner for NormalizedAligner {
    fn name(&self) -> &str {
        &self.name
    }

    fn objective(&self) -> Objective {
        self.inner.objective()
    }

    fn align(&self, x: &SelfSimilarityMatrix, y: &SelfSimilarityMatrix) -> Result<Alignment> {
        let mut best = normalize_pair_best(x, y, self.levels, self.inner.as_ref())?.best;
        best.method = self.name.clone();
        Ok(best)
    }
}

#[derive(Clone, Default)]
pub struct AlignerRegistry {
    entries: BTreeMap<String, Arc<dyn Aligner>>,
}

impl AlignerRegistry {
    pub fn empty() -> Self {
        Self::default()
    }

    /// `ibdtw`, `ibptw` and their normalized forms `ibdtwn`, `ibptwn`.
    pub fn standard(sw: SwParams, levels: usize) -> Self {
        let mut r = Self::empty();
        let ibdtw: Arc<dyn Aligner> = Arc::new(IbdtwAligner);
        let ibptw: Arc<dyn Aligner> = Arc::new(IbptwAligner { params: sw });
        r.register(Arc::new(NormalizedAligner::new(ibdtw.clone(), levels)));
        r.register(Arc::new(NormalizedAligner::new(ibptw.clone(), levels)));
        r.register(ibdtw);
        r.register(ibptw);
        r
    }

    pub fn register(&mut self, aligner: Arc<dyn Aligner>) {
        self.entries.insert(aligner.name().to_string(), aligner);
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn Aligner>> {
        self.entries.get(name).cloned().ok_or_else(|| {
            Error::invalid(format!("unknown method {name:?} (known: {})", self.names().join(", ")))
        })
    }

    pub fn names(&self) -> Vec<&str> {
        self.entries.keys().map(String::as_str).collect()
    }
}

/// Default quantization used by the normalized aligners.
pub fn standard_registry() -> AlignerRegistry {
    AlignerRegistry::standard(SwParams::default(), DEFAULT_LEVELS)
}
