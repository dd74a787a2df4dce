//! File formats: CSV grids with axis header rows, 16-bit PGM heatmaps and
//! pretty-printed JSON. Floats are written in shortest round-trip form, so
//! reading a file back reproduces the values exactly.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn write_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Write {
        path: path.to_path_buf(),
        source,
    }
}

fn fmt(v: f64) -> String {
    format!("{v:?}")
}

/// Real-valued grid with `values[i * y.len() + j]` at (x[i], y[j]).
#[derive(Debug, Clone, PartialEq)]
pub struct GridTable {
    pub corner: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub values: Vec<f64>,
}

/// Write a grid: the first row holds the corner label and the y axis, each
/// following row starts with its x value.
pub fn grid_csv_bytes(corner: &str, x: &[f64], y: &[f64], values: &[f64]) -> Result<Vec<u8>> {
    assert_eq!(values.len(), x.len() * y.len());
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = Vec::with_capacity(y.len() + 1);
    header.push(corner.to_string());
    header.extend(y.iter().map(|&v| fmt(v)));
    w.write_record(&header)?;
    for (i, &xi) in x.iter().enumerate() {
        let mut row = Vec::with_capacity(y.len() + 1);
        row.push(fmt(xi));
        row.extend(values[i * y.len()..(i + 1) * y.len()].iter().map(|&v| fmt(v)));
        w.write_record(&row)?;
    }
    w.into_inner()
        .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))
}

pub fn read_grid_csv(path: &Path) -> Result<GridTable> {
    let mut r = csv::ReaderBuilder::new().has_headers(false).from_path(path)?;
    let mut records = r.records();
    let header = records
        .next()
        .ok_or_else(|| Error::invalid(format!("{} is empty", path.display())))??;
    let corner = header.get(0).unwrap_or_default().to_string();
    let parse = |s: &str| {
        s.parse::<f64>()
            .map_err(|e| Error::invalid(format!("bad number {s:?} in {}: {e}", path.display())))
    };
    let y = header.iter().skip(1).map(parse).collect::<Result<Vec<_>>>()?;
    let mut x = Vec::new();
    let mut values = Vec::new();
    for rec in records {
        let rec = rec?;
        if rec.len() != y.len() + 1 {
            return Err(Error::invalid(format!("ragged row in {}", path.display())));
        }
        x.push(parse(&rec[0])?);
        for field in rec.iter().skip(1) {
            values.push(parse(field)?);
        }
    }
    Ok(GridTable { corner, x, y, values })
}

/// Min-max normalisation applied to a heatmap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    pub min: f64,
    pub max: f64,
    pub maxval: u16,
}

impl Normalization {
    /// Physical value of a pixel level.
    pub fn value(&self, level: u16) -> f64 {
        self.min + (self.max - self.min) * level as f64 / self.maxval as f64
    }
}

/// Convert a row-major (x outer) grid to image rows: x runs left to right,
/// y bottom to top. A constant grid maps to level 0.
pub fn heatmap_levels(values: &[f64], nx: usize, ny: usize) -> (Vec<u16>, Normalization) {
    assert_eq!(values.len(), nx * ny);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = max - min;
    let mut levels = Vec::with_capacity(nx * ny);
    for row in 0..ny {
        let j = ny - 1 - row;
        for i in 0..nx {
            let v = values[i * ny + j];
            let l = if span > 0.0 {
                ((v - min) / span * u16::MAX as f64).round() as u16
            } else {
                0
            };
            levels.push(l);
        }
    }
    (
        levels,
        Normalization {
            min,
            max,
            maxval: u16::MAX,
        },
    )
}

pub fn pgm_bytes(width: usize, height: usize, levels: &[u16]) -> Vec<u8> {
    assert_eq!(levels.len(), width * height);
    let mut out = format!("P5\n{width} {height}\n65535\n").into_bytes();
    for l in levels {
        out.extend_from_slice(&l.to_be_bytes());
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct Pgm {
    pub width: usize,
    pub height: usize,
    pub maxval: u16,
    pub levels: Vec<u16>,
}

pub fn read_pgm(path: &Path) -> Result<Pgm> {
    let bytes = fs::read(path)?;
    let bad = || Error::invalid(format!("{} is not a 16-bit binary PGM", path.display()));
    // header: magic, width, height, maxval separated by single whitespace
    let mut fields = Vec::new();
    let mut pos = 0;
    while fields.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(bad());
        }
        fields.push(std::str::from_utf8(&bytes[start..pos]).map_err(|_| bad())?.to_string());
    }
    pos += 1;
    if fields[0] != "P5" {
        return Err(bad());
    }
    let width: usize = fields[1].parse().map_err(|_| bad())?;
    let height: usize = fields[2].parse().map_err(|_| bad())?;
    let maxval: u16 = fields[3].parse().map_err(|_| bad())?;
    if maxval < 256 || bytes.len() < pos + 2 * width * height {
        return Err(bad());
    }
    let levels = bytes[pos..pos + 2 * width * height]
        .chunks_exact(2)
        .map(|c| u16::from_be_bytes([c[0], c[1]]))
        .collect();
    Ok(Pgm {
        width,
        height,
        maxval,
        levels,
    })
}

pub fn json_bytes<T: Serialize + ?Sized>(value: &T) -> Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(value)?;
    out.push(b'\n');
    Ok(out)
}

/// Write bytes to `path`, creating parent directories.
pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(write_err(parent))?;
    }
    let mut f = fs::File::create(path).map_err(write_err(path))?;
    f.write_all(bytes).map_err(write_err(path))?;
    Ok(())
}

/// Columns of a trace table: delay followed by re/im pairs per peak.
pub fn trace_csv_bytes(delays: &[f64], labels: &[String], traces: &[Vec<crate::C64>]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["tau_fs".to_string()];
    for l in labels {
        header.push(format!("{l}_re"));
        header.push(format!("{l}_im"));
    }
    w.write_record(&header)?;
    for (k, &t) in delays.iter().enumerate() {
        let mut row = vec![fmt(t)];
        for tr in traces {
            row.push(fmt(tr[k].re));
            row.push(fmt(tr[k].im));
        }
        w.write_record(&row)?;
    }
    w.into_inner()
        .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let x = vec![-2.5, 0.1 + 0.2, 1e-300];
        let y = vec![std::f64::consts::PI, -0.0];
        let values = vec![1.0 / 3.0, -7.25e-12, 6.02214076e23, f64::MIN_POSITIVE, -1.0, 2.0];
        let path = dir.path().join("g.csv");
        write_file(&path, &grid_csv_bytes("omega1\\omega3", &x, &y, &values).unwrap()).unwrap();
        let t = read_grid_csv(&path).unwrap();
        assert_eq!(t.corner, "omega1\\omega3");
        assert_eq!(t.x, x);
        assert_eq!(t.y, y);
        assert_eq!(t.values, values);
    }

    #[test]
    fn pgm_round_trip_and_orientation() {
        let dir = tempfile::tempdir().unwrap();
        // nx = 3, ny = 2; value grows with x and y
        let values = vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0];
        let (levels, norm) = heatmap_levels(&values, 3, 2);
        assert_eq!(norm.min, 0.0);
        assert_eq!(norm.max, 5.0);
        // top-left pixel is (x0, y1), bottom-right is (x2, y0)
        assert_eq!(norm.value(levels[0]), 1.0);
        assert_eq!(norm.value(levels[5]), 4.0);
        let path = dir.path().join("h.pgm");
        write_file(&path, &pgm_bytes(3, 2, &levels)).unwrap();
        let p = read_pgm(&path).unwrap();
        assert_eq!((p.width, p.height, p.maxval), (3, 2, 65535));
        assert_eq!(p.levels, levels);
        assert_eq!(*levels.iter().max().unwrap(), 65535);
    }

    #[test]
    fn constant_heatmap_is_black() {
        let (levels, norm) = heatmap_levels(&[2.0; 4], 2, 2);
        assert!(levels.iter().all(|&l| l == 0));
        assert_eq!(norm.min, norm.max);
    }

    #[test]
    fn unwritable_path_reports_the_path() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        write_file(&blocker, b"x").unwrap();
        let err = write_file(&blocker.join("child.csv"), b"y").unwrap_err();
        assert!(matches!(err, Error::Write { .. }));
    }
}
