use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use ssmwarp::aligner::{Aligner, AlignerRegistry, IbptwAligner, NormalizedAligner};
use ssmwarp::io::{self, PathFile, SequenceInput};
use ssmwarp::normalize::{self, Direction, DEFAULT_LEVELS};
use ssmwarp::oracle::{self, StressNorm};
use ssmwarp::swalign::{cut_loop_path, median_scaled_scores, secondary_backtraces, smith_waterman, SwParams};
use ssmwarp::synth::{self, BarParams, CurveRegistry, DistortionTarget};
use ssmwarp::{compute_ssm, lower_bound_check, Error, Result, SelfSimilarityMatrix, WarpingPath};

#[derive(Parser)]
#[command(name = "ssmwarp", version, about = "Isometry-blind alignment of time-ordered point clouds")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the self-similarity matrix of a point cloud.
    Ssm {
        input: PathBuf,
        /// `.pgm` for an image, anything else for CSV.
        #[arg(long)]
        out: PathBuf,
    },
    /// Global alignment (IBDTW).
    Align {
        x: PathBuf,
        y: PathBuf,
        #[command(flatten)]
        norm: NormArgs,
        #[arg(long)]
        out_path: Option<PathBuf>,
        #[arg(long)]
        out_cswm: Option<PathBuf>,
    },
    /// Partial alignment (IBPTW).
    PartialAlign {
        x: PathBuf,
        y: PathBuf,
        /// Match kernel bandwidth; data dependent, so there is no default.
        #[arg(long)]
        sigma: f64,
        #[arg(long, default_value_t = -0.4, allow_hyphen_values = true)]
        gap_inner: f64,
        #[arg(long, default_value_t = -0.4, allow_hyphen_values = true)]
        gap_outer: f64,
        /// Treat both inputs as loops: align `XX` against `YY` and cut one
        /// revolution of `X` out of the result.
        #[arg(long)]
        loops: bool,
        /// Also report up to this many cell-disjoint local paths.
        #[arg(long, default_value_t = 1)]
        k_paths: usize,
        #[command(flatten)]
        norm: NormArgs,
        #[arg(long)]
        out_path: Option<PathBuf>,
        /// JSON list of the `--k-paths` paths with their scores.
        #[arg(long)]
        out_paths: Option<PathBuf>,
        #[arg(long)]
        out_pcswm: Option<PathBuf>,
    },
    /// Cross-modal SSM normalization.
    Normalize {
        x: PathBuf,
        y: PathBuf,
        #[arg(long, default_value_t = DEFAULT_LEVELS)]
        levels: usize,
        #[arg(long, value_enum, default_value_t = DirectionArg::Auto)]
        direction: DirectionArg,
        /// Replace each SSM by its own rank transform instead.
        #[arg(long)]
        rank: bool,
        #[arg(long)]
        out_x: PathBuf,
        #[arg(long)]
        out_y: PathBuf,
        #[arg(long)]
        out_map: Option<PathBuf>,
    },
    /// Generate a synthetic pair with ground truth.
    Synth(SynthArgs),
    /// Run an experiment described by a JSON config.
    Eval {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out_json: Option<PathBuf>,
        #[arg(long)]
        out_csv: Option<PathBuf>,
    },
    /// Brute-force checks on tiny inputs.
    Verify {
        #[command(subcommand)]
        check: VerifyCommand,
    },
}

#[derive(Args)]
struct NormArgs {
    /// CDF-match the SSMs first, keeping the better direction.
    #[arg(long)]
    normalize: bool,
    #[arg(long, default_value_t = DEFAULT_LEVELS)]
    levels: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum DirectionArg {
    Auto,
    #[value(name = "1to2")]
    OneToTwo,
    #[value(name = "2to1")]
    TwoToOne,
}

#[derive(Clone, Copy, ValueEnum)]
enum SynthKind {
    Curve,
    Loop,
    Bar,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(value_enum)]
    kind: SynthKind,
    /// Curve name; loops default to a random control-point loop.
    #[arg(long)]
    curve: Option<String>,
    #[arg(long, default_value_t = 200)]
    points: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Target d_GH / diam of the distortion (0 for none).
    #[arg(long, default_value_t = 0.0)]
    gh_ratio: f64,
    #[arg(long, default_value_t = 4)]
    control_points: usize,
    #[arg(long)]
    no_isometry: bool,
    #[arg(long, default_value_t = 100)]
    pixels: usize,
    #[arg(long, default_value_t = 20.0)]
    bar_length: f64,
    #[arg(long, default_value_t = 1.25)]
    periods: f64,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Subcommand)]
enum VerifyCommand {
    /// IBDTW cost against half the minimum 1-stress over all warping paths.
    LowerBound { x: PathBuf, y: PathBuf },
    /// Minimum stress over all warping paths.
    Stress {
        x: PathBuf,
        y: PathBuf,
        #[arg(long, value_enum, default_value_t = NormArg::One)]
        p: NormArg,
    },
    /// Exact Gromov-Hausdorff distance (at most 4 points per side).
    Gh { x: PathBuf, y: PathBuf },
    /// Check a JSON path file against the warping-path axioms.
    Path {
        path: PathBuf,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        partial: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum NormArg {
    #[value(name = "1")]
    One,
    #[value(name = "inf")]
    Inf,
}

fn load_ssm(path: &Path) -> Result<SelfSimilarityMatrix> {
    Ok(io::read_sequence(path)?.to_ssm())
}

fn print(value: serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(&value).expect("json"));
}

fn run_aligner(
    aligner: &dyn Aligner,
    x: &SelfSimilarityMatrix,
    y: &SelfSimilarityMatrix,
) -> Result<ssmwarp::Alignment> {
    let a = aligner.align(x, y)?;
    log::info!("{}: value {} over {} pairs", a.method, a.value, a.path.len());
    Ok(a)
}

fn with_normalization(inner: std::sync::Arc<dyn Aligner>, norm: &NormArgs) -> std::sync::Arc<dyn Aligner> {
    if norm.normalize {
        std::sync::Arc::new(NormalizedAligner::new(inner, norm.levels))
    } else {
        inner
    }
}

fn direction_label(d: Option<Direction>) -> serde_json::Value {
    d.map_or(serde_json::Value::Null, |d| serde_json::to_value(d).expect("json"))
}

fn cmd_align(x: &Path, y: &Path, norm: &NormArgs, out_path: Option<&Path>, out_cswm: Option<&Path>) -> Result<()> {
    let (sx, sy) = (load_ssm(x)?, load_ssm(y)?);
    let registry = AlignerRegistry::standard(SwParams::default(), norm.levels);
    let aligner = with_normalization(registry.get("ibdtw")?, norm);
    let a = run_aligner(aligner.as_ref(), &sx, &sy)?;
    if let Some(p) = out_path {
        io::write_json(&PathFile { cost: a.value, pairs: a.path.clone() }, p)?;
    }
    if let Some(p) = out_cswm {
        io::write_matrix(&a.matrix, p)?;
    }
    print(json!({
        "method": a.method,
        "cost": a.value,
        "path_length": a.path.len(),
        "direction": direction_label(a.direction),
    }));
    Ok(())
}

#[allow(clippy::too_many_arguments)]
struct PartialOutputs<'a> {
    path: Option<&'a Path>,
    paths: Option<&'a Path>,
    pcswm: Option<&'a Path>,
}

fn cmd_partial(
    x: &Path,
    y: &Path,
    params: SwParams,
    looped: bool,
    k_paths: usize,
    norm: &NormArgs,
    outputs: PartialOutputs,
) -> Result<()> {
    if k_paths == 0 {
        return Err(Error::InvalidInput("--k-paths must be at least 1".into()));
    }
    let (mut sx, mut sy) = (load_ssm(x)?, load_ssm(y)?);
    let (n_a, n_b) = (sx.size(), sy.size());
    if looped {
        sx = sx.concat_self();
        sy = sy.concat_self();
    }
    let aligner = with_normalization(std::sync::Arc::new(IbptwAligner { params }), norm);
    let a = run_aligner(aligner.as_ref(), &sx, &sy)?;
    let cut = |path: &WarpingPath| -> (WarpingPath, Option<usize>) {
        if !looped {
            return (path.clone(), None);
        }
        match cut_loop_path(path, n_a, n_b) {
            Some(c) => (c.path, Some(c.offset)),
            None => {
                log::warn!("partial path never crosses the start of a copy of the first loop");
                (path.clone(), None)
            }
        }
    };
    let (path, offset) = cut(&a.path);
    if let Some(p) = outputs.path {
        io::write_json(&PathFile { cost: a.value, pairs: path.clone() }, p)?;
    }
    let mut others = Vec::new();
    if k_paths > 1 || outputs.paths.is_some() {
        let outer = smith_waterman(&median_scaled_scores(&a.matrix)?, params.gap_outer)?;
        for sp in secondary_backtraces(&outer, k_paths) {
            let (p, off) = cut(&sp.path);
            others.push(json!({ "score": sp.score, "loop_offset": off, "pairs": p }));
        }
    }
    if let Some(p) = outputs.paths {
        io::write_json(&others, p)?;
    }
    if let Some(p) = outputs.pcswm {
        io::write_matrix(&a.matrix, p)?;
    }
    print(json!({
        "method": a.method,
        "score": a.value,
        "path_length": path.len(),
        "start": path.first(),
        "end": path.last(),
        "loop_offset": offset,
        "direction": direction_label(a.direction),
        "paths_found": others.len(),
    }));
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_normalize(
    x: &Path,
    y: &Path,
    levels: usize,
    direction: DirectionArg,
    rank: bool,
    out_x: &Path,
    out_y: &Path,
    out_map: Option<&Path>,
) -> Result<()> {
    let (sx, sy) = (load_ssm(x)?, load_ssm(y)?);
    if rank {
        io::write_matrix(normalize::rank_normalize(&sx).values(), out_x)?;
        io::write_matrix(normalize::rank_normalize(&sy).values(), out_y)?;
        print(json!({ "mode": "rank" }));
        return Ok(());
    }
    let direction = match direction {
        DirectionArg::OneToTwo => Direction::OneToTwo,
        DirectionArg::TwoToOne => Direction::TwoToOne,
        DirectionArg::Auto => {
            let registry = AlignerRegistry::standard(SwParams::default(), levels);
            normalize::normalize_pair_best(&sx, &sy, levels, registry.get("ibdtw")?.as_ref())?.direction
        }
    };
    let pair = normalize::normalize_pair(&sx, &sy, levels, direction)?;
    io::write_matrix(pair.x.values(), out_x)?;
    io::write_matrix(pair.y.values(), out_y)?;
    if let Some(p) = out_map {
        io::write_json(&pair.map, p)?;
    }
    print(json!({ "direction": pair.map.direction, "levels": levels, "monotone": pair.map.is_monotone() }));
    Ok(())
}

fn cmd_synth(a: &SynthArgs) -> Result<()> {
    std::fs::create_dir_all(&a.out_dir)?;
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let target = (a.gh_ratio > 0.0).then_some(DistortionTarget {
        gh_diam_ratio: a.gh_ratio,
        control_points: a.control_points,
    });
    let registry = CurveRegistry::builtin();
    let (pair, label) = match a.kind {
        SynthKind::Curve => {
            let name = a.curve.as_deref().unwrap_or("figure8");
            let curve = registry.get(name)?;
            (synth::curve_pair(curve.as_ref(), a.points, target, !a.no_isometry, &mut rng)?, name.to_string())
        }
        SynthKind::Loop => match a.curve.as_deref() {
            Some(name) => {
                let curve = registry.get(name)?;
                (synth::loop_pair(curve.as_ref(), a.points, target, !a.no_isometry, &mut rng)?, name.to_string())
            }
            None => {
                let curve = synth::ControlPointLoop::random(&mut rng, 7)?;
                (synth::loop_pair(&curve, a.points, target, !a.no_isometry, &mut rng)?, "random-loop".into())
            }
        },
        SynthKind::Bar => {
            let params = BarParams::new(a.pixels, a.bar_length, 1.0)?;
            (synth::bar_pair(&params, a.points, a.periods, &mut rng)?, "bar".into())
        }
    };
    io::write_cloud_csv(&pair.cloud_a, &a.out_dir.join("a.csv"))?;
    io::write_cloud_csv(&pair.cloud_b, &a.out_dir.join("b.csv"))?;
    io::write_json(&PathFile { cost: 0.0, pairs: pair.truth.clone() }, &a.out_dir.join("truth.json"))?;
    let provenance = json!({
        "kind": match a.kind { SynthKind::Curve => "curve", SynthKind::Loop => "loop", SynthKind::Bar => "bar" },
        "curve": label,
        "points": a.points,
        "seed": a.seed,
        "warp": pair.warp,
        "gh_diam_ratio": pair.gh_diam_ratio,
        "isometry": !a.no_isometry,
        "loop": pair.loop_truth,
    });
    io::write_json(&provenance, &a.out_dir.join("provenance.json"))?;
    print(provenance);
    Ok(())
}

fn cmd_eval(config: &Path, out_json: Option<&Path>, out_csv: Option<&Path>) -> Result<()> {
    let cfg: ssmwarp::ExperimentConfig = serde_json::from_str(&std::fs::read_to_string(config)?)?;
    let out = ssmwarp::run_experiment(&cfg)?;
    if let Some(p) = out_json {
        io::write_json(&out, p)?;
    }
    if let Some(p) = out_csv {
        std::fs::write(p, ssmwarp::eval::reports_to_csv(&out.reports)?)?;
    }
    print(serde_json::to_value(&out.summaries)?);
    Ok(())
}

fn cmd_verify(check: &VerifyCommand) -> Result<()> {
    match check {
        VerifyCommand::LowerBound { x, y } => {
            let r = lower_bound_check(&load_ssm(x)?, &load_ssm(y)?)?;
            print(serde_json::to_value(&r)?);
        }
        VerifyCommand::Stress { x, y, p } => {
            let norm = match p {
                NormArg::One => StressNorm::L1,
                NormArg::Inf => StressNorm::Infinity,
            };
            let r = oracle::min_stress(&load_ssm(x)?, &load_ssm(y)?, norm)?;
            print(serde_json::to_value(&r)?);
        }
        VerifyCommand::Gh { x, y } => {
            let d = oracle::gromov_hausdorff(&load_ssm(x)?, &load_ssm(y)?)?;
            print(json!({ "gromov_hausdorff": d }));
        }
        VerifyCommand::Path { path, m, n, partial } => {
            let file = io::read_path_file(path)?;
            let v = file.pairs.validate(*m, *n, !partial);
            print(serde_json::to_value(&v)?);
            if !v.is_valid() {
                return Err(Error::InvalidInput("path violates the warping-path axioms".into()));
            }
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Ssm { input, out } => {
            let ssm = match io::read_sequence(input)? {
                SequenceInput::Cloud(c) => compute_ssm(&c),
                SequenceInput::Ssm(s) => s,
            };
            io::write_matrix(ssm.values(), out)
        }
        Command::Align {
            x,
            y,
            norm,
            out_path,
            out_cswm,
        } => cmd_align(x, y, norm, out_path.as_deref(), out_cswm.as_deref()),
        Command::PartialAlign {
            x,
            y,
            sigma,
            gap_inner,
            gap_outer,
            loops,
            k_paths,
            norm,
            out_path,
            out_paths,
            out_pcswm,
        } => {
            let params = SwParams::new(*sigma)?.with_gaps(*gap_inner, *gap_outer)?;
            let outputs = PartialOutputs {
                path: out_path.as_deref(),
                paths: out_paths.as_deref(),
                pcswm: out_pcswm.as_deref(),
            };
            cmd_partial(x, y, params, *loops, *k_paths, norm, outputs)
        }
        Command::Normalize {
            x,
            y,
            levels,
            direction,
            rank,
            out_x,
            out_y,
            out_map,
        } => cmd_normalize(x, y, *levels, *direction, *rank, out_x, out_y, out_map.as_deref()),
        Command::Synth(args) => cmd_synth(args),
        Command::Eval {
            config,
            out_json,
            out_csv,
        } => cmd_eval(config, out_json.as_deref(), out_csv.as_deref()),
        Command::Verify { check } => cmd_verify(check),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot size the thread pool: {e}");
            return ExitCode::from(1);
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
