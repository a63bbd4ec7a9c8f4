//! File formats and atomic writes.

use std::io::Write;
use std::path::{Path, PathBuf};

use qmix_core::classical::GridDensity;
use qmix_core::pdp::{Detector, JumpRecord, SamplePath};
use serde::Serialize;
use serde_json::Value;
use tempfile::NamedTempFile;

use crate::config::Provenance;
use crate::error::{CliError, Result};

/// Writes `bytes` to `path` through a temporary file in the same directory
/// and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    std::fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    let mut tmp = NamedTempFile::new_in(&dir).map_err(|e| CliError::io(&dir, e))?;
    tmp.write_all(bytes).map_err(|e| CliError::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

/// Scientific notation with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// CSV with provenance comment lines, a header and rows of numbers.
pub fn csv_document(prov: &Provenance, header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> String {
    let mut s = prov.comment_lines();
    s.push_str(&header.join(","));
    s.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|x| fmt_f64(*x)).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

/// Pretty JSON with the provenance fields first.
pub fn json_document<T: Serialize>(prov: &Provenance, body: &T) -> String {
    let mut m = prov.json_fields();
    match serde_json::to_value(body).expect("results serialize") {
        Value::Object(extra) => m.extend(extra),
        other => {
            m.insert("result".into(), other);
        }
    }
    let mut s = serde_json::to_string_pretty(&Value::Object(m)).expect("json");
    s.push('\n');
    s
}

/// Point-cloud CSV: `x,y,z,detector`.
pub fn cloud_csv(prov: &Provenance, points: &[[f64; 3]], detectors: &[Detector]) -> String {
    let mut s = prov.comment_lines();
    s.push_str("x,y,z,detector\n");
    for (p, d) in points.iter().zip(detectors) {
        s.push_str(&format!("{},{},{},{}\n", fmt_f64(p[0]), fmt_f64(p[1]), fmt_f64(p[2]), d.number()));
    }
    s
}

#[derive(Serialize)]
struct PathRow {
    time: f64,
    detector: Option<u8>,
    x: f64,
    y: f64,
    z: f64,
}

/// JSON lines: a provenance object, then one object per jump, starting with
/// the initial state at time zero.
pub fn path_jsonl(prov: &Provenance, path: &SamplePath) -> String {
    let mut s = serde_json::to_string(&Value::Object(prov.json_fields())).expect("json");
    s.push('\n');
    let first = path.initial.vector();
    let rows = std::iter::once(PathRow {
        time: 0.0,
        detector: None,
        x: first[0],
        y: first[1],
        z: first[2],
    })
    .chain(path.jumps.iter().map(|j: &JumpRecord| {
        let v = j.state.vector();
        PathRow {
            time: j.time,
            detector: Some(j.detector.number()),
            x: v[0],
            y: v[1],
            z: v[2],
        }
    }));
    for row in rows {
        s.push_str(&serde_json::to_string(&row).expect("json"));
        s.push('\n');
    }
    s
}

/// A point cloud read back from CSV, with the seed found in its header.
#[derive(Debug, Clone, PartialEq)]
pub struct CloudFile {
    pub points: Vec<[f64; 3]>,
    pub detectors: Vec<Option<Detector>>,
    pub seed: Option<u64>,
}

fn header_seed(text: &str) -> Option<u64> {
    text.lines()
        .take_while(|l| l.starts_with('#'))
        .find_map(|l| l.strip_prefix("# seed: "))
        .and_then(|s| s.trim().parse().ok())
}

fn csv_reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(text.as_bytes())
}

fn parse_error(path: &Path, e: &csv::Error, fallback_line: u64) -> CliError {
    let line = e.position().map_or(fallback_line, |p| p.line());
    CliError::Parse {
        path: path.to_path_buf(),
        line,
        message: e.to_string(),
    }
}

/// Reads `x,y,z[,detector]` rows.
pub fn read_cloud(path: &Path) -> Result<CloudFile> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut rdr = csv_reader(&text);
    let mut points = Vec::new();
    let mut detectors = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| parse_error(path, &e, i as u64))?;
        let line = rec.position().map_or(0, |p| p.line());
        let bad = |message: String| CliError::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };
        if rec.len() < 3 {
            return Err(bad(format!("expected at least 3 columns, found {}", rec.len())));
        }
        let mut p = [0.0; 3];
        for k in 0..3 {
            p[k] = rec[k].parse().map_err(|e| bad(format!("column {}: {e}", k + 1)))?;
        }
        points.push(p);
        detectors.push(match rec.get(3) {
            Some(d) if !d.is_empty() => {
                let n: u8 = d.parse().map_err(|e| bad(format!("detector: {e}")))?;
                Some(Detector::new(n).map_err(|e| bad(e.to_string()))?)
            }
            _ => None,
        });
    }
    Ok(CloudFile {
        points,
        detectors,
        seed: header_seed(&text),
    })
}

/// Density CSV `x,f` with `x` at the cell centres of `[0, 2 pi)`. `f` is the
/// density against `dx / 2 pi`, so the uniform density is 1.
pub fn density_csv(prov: &Provenance, g: &GridDensity) -> String {
    let m = g.cells() as f64;
    let rows = g
        .values()
        .iter()
        .enumerate()
        .map(|(j, v)| vec![2.0 * std::f64::consts::PI * (j as f64 + 0.5) / m, *v]);
    csv_document(prov, &["x", "f"], rows)
}

/// Reads a density CSV (`x,f` rows at equally spaced cell centres).
pub fn read_density(path: &Path) -> Result<GridDensity> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut rdr = csv_reader(&text);
    let mut values = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| parse_error(path, &e, i as u64))?;
        let line = rec.position().map_or(0, |p| p.line());
        let v: f64 = rec
            .get(1)
            .ok_or_else(|| CliError::Parse {
                path: path.to_path_buf(),
                line,
                message: "expected two columns".into(),
            })?
            .parse()
            .map_err(|e| CliError::Parse {
                path: path.to_path_buf(),
                line,
                message: format!("{e}"),
            })?;
        values.push(v);
    }
    Ok(GridDensity::new(values)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use qmix_core::pdp::{sample_path, PdpParams, PureSpinState};

    fn prov() -> Provenance {
        Provenance::new("test", &serde_json::json!({"a": 1}), Some(7))
    }

    #[test]
    fn cloud_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let pts = vec![[0.0, 0.0, 1.0], [1.0 / 3f64.sqrt(), -1.0 / 3f64.sqrt(), 1.0 / 3f64.sqrt()]];
        let det = vec![Detector::new(1).unwrap(), Detector::new(4).unwrap()];
        let path = dir.path().join("c.csv");
        write_atomic(&path, cloud_csv(&prov(), &pts, &det).as_bytes()).unwrap();
        let back = read_cloud(&path).unwrap();
        assert_eq!(back.points, pts);
        assert_eq!(back.detectors, vec![Some(det[0]), Some(det[1])]);
        assert_eq!(back.seed, Some(7));
    }

    #[test]
    fn density_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let g = GridDensity::from_fn(16, |u| 1.0 + 0.5 * (6.0 * u).sin()).unwrap();
        let path = dir.path().join("d.csv");
        write_atomic(&path, density_csv(&prov(), &g).as_bytes()).unwrap();
        assert_eq!(read_density(&path).unwrap(), g);
    }

    #[test]
    fn parse_errors_name_the_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "# seed: 1\nx,y,z,detector\n0,0,1,1\n0,zero,1,2\n").unwrap();
        match read_cloud(&path) {
            Err(CliError::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn jsonl_rows() {
        let p = sample_path(&PdpParams::new(1.0, 1.0, 0.7), &PureSpinState::new([0.0, 0.0, 1.0]).unwrap(), 3, 1).unwrap();
        let text = path_jsonl(&prov(), &p);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 5);
        let first: Value = serde_json::from_str(lines[1]).unwrap();
        assert_eq!(first["detector"], Value::Null);
        let last: Value = serde_json::from_str(lines[4]).unwrap();
        assert_eq!(last["time"].as_f64().unwrap(), p.jumps[2].time);
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sub/out.txt");
        write_atomic(&path, b"one").unwrap();
        write_atomic(&path, b"two").unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), b"two");
        assert_eq!(std::fs::read_dir(dir.path().join("sub")).unwrap().count(), 1);
    }
}
