use std::collections::BTreeMap;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{alignment_error, AlignmentReport, Summary};
use crate::aligner::{Aligner, AlignerRegistry};
use crate::error::{Error, Result};
use crate::ssm::compute_ssm;
use crate::swalign::{cut_loop_path, SwParams};
use crate::synth::{
    bar_pair, curve_pair, loop_pair, loop_pair_with, BarParams, ControlPointLoop, Curve, CurveRegistry, DistortionTarget,
    GroundTruthPair, WarpSpec,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// Open re-parameterized curves, global alignment.
    Curves,
    /// Circularly shifted closed curves aligned as `AA` against `BB`.
    Loops,
    /// Lagrangian against Eulerian oscillating bar.
    Bar,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BarConfig {
    pub pixels: usize,
    pub length: f64,
    pub period: f64,
    pub periods: f64,
}

impl Default for BarConfig {
    fn default() -> Self {
        Self {
            pixels: 100,
            length: 20.0,
            period: 1.0,
            periods: 1.25,
        }
    }
}

fn default_points() -> usize {
    200
}

fn default_levels() -> usize {
    crate::normalize::DEFAULT_LEVELS
}

fn default_control_points() -> usize {
    4
}

fn default_loop_controls() -> usize {
    7
}

fn default_true() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub family: Family,
    /// Curve names; for loops an empty list draws a random asymmetric
    /// control-point loop per trial.
    #[serde(default)]
    pub curves: Vec<String>,
    pub trials: usize,
    #[serde(default = "default_points")]
    pub points: usize,
    pub methods: Vec<String>,
    pub seed: u64,
    /// Target `d_GH / diam`; 0 disables distortion.
    #[serde(default)]
    pub gh_diam_ratio: f64,
    #[serde(default = "default_control_points")]
    pub control_points: usize,
    #[serde(default = "default_true")]
    pub isometry: bool,
    /// Loops only: false keeps `B` uniformly sampled, so it differs from
    /// `A` by the circular shift alone.
    #[serde(default = "default_true")]
    pub reparameterize: bool,
    #[serde(default)]
    pub sw: SwParams,
    #[serde(default = "default_levels")]
    pub levels: usize,
    #[serde(default = "default_loop_controls")]
    pub loop_control_points: usize,
    #[serde(default)]
    pub bar: BarConfig,
}

impl ExperimentConfig {
    pub fn validate(&self, registry: &AlignerRegistry) -> Result<()> {
        if self.methods.is_empty() {
            return Err(Error::invalid("experiment lists no methods"));
        }
        for m in &self.methods {
            registry.get(m)?;
        }
        let curves = CurveRegistry::builtin();
        for c in &self.curves {
            curves.get(c)?;
        }
        if self.family == Family::Curves && self.curves.is_empty() {
            return Err(Error::invalid("the curves family needs at least one curve"));
        }
        if self.points < 8 {
            return Err(Error::invalid("experiments need at least 8 points"));
        }
        if !(self.gh_diam_ratio >= 0.0) {
            return Err(Error::invalid("gh_diam_ratio must be >= 0"));
        }
        self.sw.validate()?;
        BarParams::new(self.bar.pixels, self.bar.length, self.bar.period)?;
        Ok(())
    }

    fn registry(&self) -> AlignerRegistry {
        AlignerRegistry::standard(self.sw, self.levels)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MethodSummary {
    pub alignment_error: Option<Summary>,
    pub offset_error: Option<Summary>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentOutput {
    pub config: ExperimentConfig,
    /// Ordered by trial, then by method as listed in the config.
    pub reports: Vec<AlignmentReport>,
    pub summaries: BTreeMap<String, MethodSummary>,
}

fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

fn generate(config: &ExperimentConfig, trial: usize, rng: &mut ChaCha8Rng) -> Result<(GroundTruthPair, String)> {
    let target = (config.gh_diam_ratio > 0.0).then_some(DistortionTarget {
        gh_diam_ratio: config.gh_diam_ratio,
        control_points: config.control_points,
    });
    let registry = CurveRegistry::builtin();
    let pick = |rng: &mut ChaCha8Rng| -> Result<(std::sync::Arc<dyn Curve>, String)> {
        if config.curves.is_empty() {
            let c = ControlPointLoop::random(rng, config.loop_control_points)?;
            Ok((std::sync::Arc::new(c), "random-loop".into()))
        } else {
            let name = &config.curves[trial % config.curves.len()];
            Ok((registry.get(name)?, name.clone()))
        }
    };
    match config.family {
        Family::Curves => {
            let (curve, name) = pick(rng)?;
            let pair = curve_pair(curve.as_ref(), config.points, target, config.isometry, rng)?;
            Ok((pair, format!("curves:{name}")))
        }
        Family::Loops => {
            let (curve, name) = pick(rng)?;
            let pair = if config.reparameterize {
                loop_pair(curve.as_ref(), config.points, target, config.isometry, rng)?
            } else {
                loop_pair_with(curve.as_ref(), config.points, WarpSpec::identity(), target, config.isometry, rng)?
            };
            Ok((pair, format!("loops:{name}")))
        }
        Family::Bar => {
            let b = config.bar;
            let params = BarParams::new(b.pixels, b.length, b.period)?;
            Ok((bar_pair(&params, config.points, b.periods, rng)?, "bar".into()))
        }
    }
}

fn run_trial(
    config: &ExperimentConfig,
    aligners: &[std::sync::Arc<dyn Aligner>],
    trial: usize,
) -> Result<Vec<AlignmentReport>> {
    let mut rng = trial_rng(config.seed, trial);
    let (pair, what) = generate(config, trial, &mut rng)?;
    let provenance = format!("{what} seed={} trial={trial}", config.seed);
    let (xa, xb) = match pair.loop_truth {
        Some(_) => (pair.cloud_a.concat_self(), pair.cloud_b.concat_self()),
        None => (pair.cloud_a.clone(), pair.cloud_b.clone()),
    };
    let (sa, sb) = (compute_ssm(&xa), compute_ssm(&xb));
    aligners
        .iter()
        .map(|aligner| {
            let start = Instant::now();
            let alignment = aligner.align(&sa, &sb)?;
            let runtime_ms = start.elapsed().as_millis() as u64;
            let (error, offset_error) = match pair.loop_truth {
                Some(lt) => match cut_loop_path(&alignment.path, lt.n_a, lt.n_b) {
                    Some(cut) if !cut.path.is_empty() => {
                        let d = cut.offset.abs_diff(lt.offset);
                        (alignment_error(&cut.path, &pair.truth)?, Some(d.min(lt.n_b - d)))
                    }
                    _ if alignment.path.is_empty() => (lt.n_a as f64, None),
                    _ => (alignment_error(&alignment.path, &pair.truth)?, None),
                },
                None => (alignment_error(&alignment.path, &pair.truth)?, None),
            };
            Ok(AlignmentReport {
                trial,
                method: aligner.name().to_string(),
                alignment_error: error,
                cost_or_score: alignment.value,
                runtime_ms,
                seed: config.seed,
                provenance: provenance.clone(),
                offset_error,
                gh_diam_ratio: pair.gh_diam_ratio,
            })
        })
        .collect()
}

/// Runs every trial on the current rayon pool. Each trial draws from its own
/// random stream, so results do not depend on scheduling.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    let registry = config.registry();
    config.validate(&registry)?;
    let aligners: Vec<_> = config
        .methods
        .iter()
        .map(|m| registry.get(m))
        .collect::<Result<_>>()?;
    let per_trial: Vec<Vec<AlignmentReport>> = (0..config.trials)
        .into_par_iter()
        .map(|t| run_trial(config, &aligners, t))
        .collect::<Result<_>>()?;
    let reports: Vec<AlignmentReport> = per_trial.into_iter().flatten().collect();
    let summaries = config
        .methods
        .iter()
        .map(|m| {
            let mine: Vec<&AlignmentReport> = reports.iter().filter(|r| &r.method == m).collect();
            let errors: Vec<f64> = mine.iter().map(|r| r.alignment_error).collect();
            let offsets: Vec<f64> = mine.iter().filter_map(|r| r.offset_error.map(|o| o as f64)).collect();
            (
                m.clone(),
                MethodSummary {
                    alignment_error: Summary::of(&errors),
                    offset_error: Summary::of(&offsets),
                },
            )
        })
        .collect();
    Ok(ExperimentOutput {
        config: config.clone(),
        reports,
        summaries,
    })
}

pub fn reports_to_csv(reports: &[AlignmentReport]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in reports {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))
}
