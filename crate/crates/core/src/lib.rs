//! Alignment of time-ordered point clouds that differ by an isometry and a
//! re-parameterization, working only from their self-similarity matrices.
//!
//! [`ibdtw`] gives a global alignment, [`ibptw`] a partial one, and
//! [`normalize`] remaps SSM values between modalities before aligning.
//! [`oracle`] holds brute-force references for tiny inputs.

pub mod aligner;
pub mod cloud;
pub mod dtw;
pub mod error;
pub mod eval;
pub mod ibdtw;
pub mod io;
pub mod matrix;
pub mod metric;
pub mod normalize;
pub mod oracle;
pub mod path;
pub mod ssm;
pub mod swalign;
pub mod synth;

pub use aligner::{standard_registry, Aligner, AlignerRegistry, Alignment, Objective};
pub use cloud::TimeOrderedPointCloud;
pub use dtw::{constrained_dtw, dtw, DtwResult};
pub use error::{Error, Result};
pub use eval::{alignment_error, run_experiment, AlignmentReport, ExperimentConfig};
pub use ibdtw::{cswm, ibdtw, lower_bound_check, CswmResult};
pub use matrix::{CostMatrix, Matrix};
pub use metric::{metric_distance, MetricKind, MetricSpec};
pub use normalize::{cdf_match, normalize_pair, normalize_pair_best, Direction, NormalizationMap};
pub use path::{validate_warping_path, Axiom, WarpingPath};
pub use ssm::{compute_ssm, SelfSimilarityMatrix};
pub use swalign::{constrained_smith_waterman, ibptw, pcswm, smith_waterman, SwParams, SwResult};
