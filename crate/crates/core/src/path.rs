//! Warping paths and validation of the warping axioms.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Ordered, 0-based index correspondence `(i, j)` between two sequences.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WarpingPath {
    pairs: Vec<(usize, usize)>,
}

impl WarpingPath {
    pub fn new(pairs: Vec<(usize, usize)>) -> Self {
        Self { pairs }
    }

    /// The strict diagonal `(0,0), (1,1), ..., (n-1,n-1)`.
    pub fn diagonal(n: usize) -> Self {
        Self::new((0..n).map(|k| (k, k)).collect())
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn into_pairs(self) -> Vec<(usize, usize)> {
        self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn first(&self) -> Option<(usize, usize)> {
        self.pairs.first().copied()
    }

    pub fn last(&self) -> Option<(usize, usize)> {
        self.pairs.last().copied()
    }

    pub fn contains(&self, cell: (usize, usize)) -> bool {
        self.pairs.contains(&cell)
    }

    pub fn cells(&self) -> HashSet<(usize, usize)> {
        self.pairs.iter().copied().collect()
    }

    /// Path with rows and columns swapped.
    pub fn transposed(&self) -> Self {
        Self::new(self.pairs.iter().map(|&(i, j)| (j, i)).collect())
    }

    pub fn validate(&self, m: usize, n: usize, global: bool) -> PathValidation {
        validate_warping_path(self, m, n, global)
    }

    pub fn is_valid(&self, m: usize, n: usize, global: bool) -> bool {
        self.validate(m, n, global).is_valid()
    }
}

impl From<Vec<(usize, usize)>> for WarpingPath {
    fn from(pairs: Vec<(usize, usize)>) -> Self {
        Self::new(pairs)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Axiom {
    /// A pair lies outside `[0, M) x [0, N)`.
    Range,
    BoundaryConditions,
    Continuity,
    Monotonicity,
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Axiom::Range => "index range",
            Axiom::BoundaryConditions => "boundary conditions",
            Axiom::Continuity => "continuity",
            Axiom::Monotonicity => "monotonicity",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub axiom: Axiom,
    /// Index into the pair list where the violation was detected.
    pub index: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct PathValidation {
    pub violation: Option<Violation>,
}

impl PathValidation {
    pub fn is_valid(&self) -> bool {
        self.violation.is_none()
    }
}

impl fmt::Display for PathValidation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.violation {
            None => f.write_str("valid"),
            Some(v) => write!(f, "violates {} at pair {}", v.axiom, v.index),
        }
    }
}

/// Checks the warping axioms for an `M x N` index grid.
///
/// Global paths must start at `(0,0)` and end at `(M-1,N-1)`; partial paths
/// only need continuity (which implies monotonicity). The first violation
/// found, scanning from the start, is reported. An empty partial path is valid.
pub fn validate_warping_path(path: &WarpingPath, m: usize, n: usize, global: bool) -> PathValidation {
    let fail = |axiom, index| PathValidation {
        violation: Some(Violation { axiom, index }),
    };
    let pairs = path.pairs();
    if pairs.is_empty() {
        return if global {
            fail(Axiom::BoundaryConditions, 0)
        } else {
            PathValidation { violation: None }
        };
    }
    if let Some(k) = pairs.iter().position(|&(i, j)| i >= m || j >= n) {
        return fail(Axiom::Range, k);
    }
    if global && pairs[0] != (0, 0) {
        return fail(Axiom::BoundaryConditions, 0);
    }
    for (k, w) in pairs.windows(2).enumerate() {
        let (a, b) = (w[0], w[1]);
        if b.0 < a.0 || b.1 < a.1 {
            return fail(Axiom::Monotonicity, k + 1);
        }
        let step = (b.0 - a.0, b.1 - a.1);
        if !matches!(step, (0, 1) | (1, 0) | (1, 1)) {
            return fail(Axiom::Continuity, k + 1);
        }
    }
    if global && pairs[pairs.len() - 1] != (m - 1, n - 1) {
        return fail(Axiom::BoundaryConditions, pairs.len() - 1);
    }
    PathValidation { violation: None }
}
