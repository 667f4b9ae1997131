//! File formats: point clouds and matrices as CSV, matrices as PGM, paths
//! as JSON.
//!
//! A cloud file `foo.csv` holds one point per row. An optional sidecar
//! `foo.json` declares `{"metric": ..., "dimension": n}`; the metric
//! `"precomputed"` marks the CSV as a square distance matrix instead.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cloud::TimeOrderedPointCloud;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::metric::{MetricKind, MetricSpec};
use crate::path::WarpingPath;
use crate::ssm::{compute_ssm, SelfSimilarityMatrix};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub metric: String,
    #[serde(default)]
    pub dimension: Option<usize>,
}

pub const PRECOMPUTED: &str = "precomputed";

/// What a sequence file turned out to contain.
#[derive(Clone, Debug)]
pub enum SequenceInput {
    Cloud(TimeOrderedPointCloud),
    Ssm(SelfSimilarityMatrix),
}

impl SequenceInput {
    pub fn to_ssm(&self) -> SelfSimilarityMatrix {
        match self {
            SequenceInput::Cloud(c) => compute_ssm(c),
            SequenceInput::Ssm(s) => s.clone(),
        }
    }
}

/// Reads numeric CSV rows. A first row that does not parse is taken as a
/// header and skipped.
pub fn read_csv_rows(path: &Path) -> Result<Vec<Vec<f64>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)?;
    let mut rows = Vec::new();
    for (k, record) in reader.records().enumerate() {
        let record = record?;
        let parsed: std::result::Result<Vec<f64>, _> = record.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(row) => rows.push(row),
            Err(_) if k == 0 => continue,
            Err(e) => {
                return Err(Error::invalid(format!("{}: row {}: {e}", path.display(), k + 1)));
            }
        }
    }
    Ok(rows)
}

fn sidecar_path(path: &Path) -> std::path::PathBuf {
    path.with_extension("json")
}

pub fn read_sidecar(path: &Path) -> Result<Option<Sidecar>> {
    let side = sidecar_path(path);
    if side == path || !side.exists() {
        return Ok(None);
    }
    Ok(Some(serde_json::from_str(&fs::read_to_string(side)?)?))
}

/// Loads a cloud or a precomputed SSM, as declared by the sidecar (a
/// Euclidean cloud when there is none).
pub fn read_sequence(path: &Path) -> Result<SequenceInput> {
    let rows = read_csv_rows(path)?;
    let sidecar = read_sidecar(path)?;
    match sidecar {
        Some(s) if s.metric == PRECOMPUTED => Ok(SequenceInput::Ssm(SelfSimilarityMatrix::new(Matrix::from_rows(rows)?)?)),
        Some(s) => {
            let kind: MetricKind = s.metric.parse()?;
            let dim = s.dimension.or_else(|| rows.first().map(Vec::len)).unwrap_or(0);
            let cloud = TimeOrderedPointCloud::new(rows, MetricSpec::new(kind, dim)?)?;
            Ok(SequenceInput::Cloud(cloud))
        }
        None => Ok(SequenceInput::Cloud(TimeOrderedPointCloud::euclidean(rows)?)),
    }
}

pub fn write_cloud_csv(cloud: &TimeOrderedPointCloud, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for p in cloud.points() {
        w.write_record(p.iter().map(|v| format!("{v:?}")))?;
    }
    w.flush()?;
    let side = Sidecar {
        metric: cloud.metric().kind.to_string(),
        dimension: Some(cloud.dimension()),
    };
    fs::write(sidecar_path(path), serde_json::to_string_pretty(&side)?)?;
    Ok(())
}

/// Full-precision CSV, one matrix row per line.
pub fn write_matrix_csv(m: &Matrix, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for i in 0..m.rows() {
        w.write_record(m.row(i).iter().map(|v| format!("{v:?}")))?;
    }
    w.flush()?;
    Ok(())
}

/// 8-bit binary PGM. Nonnegative matrices are scaled by their maximum;
/// matrices with negative entries are min-max scaled. Non-finite entries
/// render as black.
pub fn pgm_bytes(m: &Matrix) -> Vec<u8> {
    let finite = m.as_slice().iter().copied().filter(|v| v.is_finite());
    let (lo, hi) = finite.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    let lo = if lo >= 0.0 { 0.0 } else { lo };
    let span = hi - lo;
    let mut out = format!("P5\n{} {}\n255\n", m.cols(), m.rows()).into_bytes();
    out.extend(m.as_slice().iter().map(|&v| {
        if !v.is_finite() || !(span > 0.0) {
            0
        } else {
            (255.0 * (v - lo) / span).round().clamp(0.0, 255.0) as u8
        }
    }));
    out
}

pub fn write_pgm(m: &Matrix, path: &Path) -> Result<()> {
    fs::File::create(path)?.write_all(&pgm_bytes(m))?;
    Ok(())
}

/// PGM for a `.pgm` extension, CSV otherwise.
pub fn write_matrix(m: &Matrix, path: &Path) -> Result<()> {
    match path.extension().and_then(|e| e.to_str()) {
        Some(e) if e.eq_ignore_ascii_case("pgm") => write_pgm(m, path),
        _ => write_matrix_csv(m, path),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathFile {
    pub cost: f64,
    pub pairs: WarpingPath,
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(value)? + "\n")?;
    Ok(())
}

pub fn read_path_file(path: &Path) -> Result<PathFile> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tmp(name: &str) -> std::path::PathBuf {
        let dir = std::env::temp_dir().join(format!("ssmwarp-io-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        dir.join(name)
    }

    #[test]
    fn cloud_round_trip() {
        let c = TimeOrderedPointCloud::euclidean(vec![vec![0.1, 2.0], vec![-3.5, 1e-17], vec![4.0, 5.0]]).unwrap();
        let p = tmp("cloud.csv");
        write_cloud_csv(&c, &p).unwrap();
        match read_sequence(&p).unwrap() {
            SequenceInput::Cloud(back) => assert_eq!(back.to_vecs(), c.to_vecs()),
            SequenceInput::Ssm(_) => panic!("expected a cloud"),
        }
    }

    #[test]
    fn header_row_is_skipped_and_bad_rows_rejected() {
        let p = tmp("hdr.csv");
        fs::write(&p, "x,y\n0,0\n3,4\n").unwrap();
        let SequenceInput::Cloud(c) = read_sequence(&p).unwrap() else { panic!() };
        assert_eq!(c.len(), 2);
        fs::write(&p, "0,0\nfoo,4\n").unwrap();
        assert!(matches!(read_sequence(&p), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn precomputed_sidecar() {
        let p = tmp("pre.csv");
        fs::write(&p, "0,1\n1,0\n").unwrap();
        fs::write(p.with_extension("json"), r#"{"metric":"precomputed"}"#).unwrap();
        let SequenceInput::Ssm(s) = read_sequence(&p).unwrap() else { panic!() };
        assert_eq!(s.get(0, 1), 1.0);
    }

    #[test]
    fn pgm_scaling() {
        let m = Matrix::from_rows(vec![vec![0.0, 1.0], vec![2.0, 4.0]]).unwrap();
        let b = pgm_bytes(&m);
        assert!(b.starts_with(b"P5\n2 2\n255\n"));
        assert_eq!(&b[b.len() - 4..], &[0, 64, 128, 255]);
        let neg = Matrix::from_rows(vec![vec![-1.0, 1.0]]).unwrap();
        let b = pgm_bytes(&neg);
        assert_eq!(&b[b.len() - 2..], &[0, 255]);
    }
}
