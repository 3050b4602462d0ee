//! Map files: one CSV per matrix plus a JSON sidecar, and graymap renders.
//!
//! CSV layout: the header row holds the port-D sector centres (radians), each
//! following row starts with its port-C sector centre. Numbers use the
//! shortest decimal that round-trips an `f64`; undefined cells are `nan`.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::engine::{AngularGrid, CorrelationMap};
use crate::error::{Error, Result};
use crate::matrix::Matrix;

pub const NAN_TOKEN: &str = "nan";
const CORNER: &str = "phi_c\\phi_d";

/// Shortest round-trip representation.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        NAN_TOKEN.to_string()
    } else {
        format!("{x:?}")
    }
}

fn parse_f64(tok: &str) -> Option<f64> {
    let t = tok.trim();
    if t.eq_ignore_ascii_case(NAN_TOKEN) {
        Some(f64::NAN)
    } else {
        t.parse().ok()
    }
}

fn create(path: &Path) -> Result<BufWriter<fs::File>> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
    }
    fs::File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

pub fn write_matrix_csv(
    path: &Path,
    phi_c: &[f64],
    phi_d: &[f64],
    values: &Matrix<Option<f64>>,
) -> Result<()> {
    let mut w = create(path)?;
    let io = |e| Error::io(path, e);
    let mut header = vec![CORNER.to_string()];
    header.extend(phi_d.iter().map(|&p| fmt_f64(p)));
    writeln!(w, "{}", header.join(",")).map_err(io)?;
    for (i, &pc) in phi_c.iter().enumerate() {
        let mut line = vec![fmt_f64(pc)];
        line.extend(values.row(i).iter().map(|v| fmt_f64(v.unwrap_or(f64::NAN))));
        writeln!(w, "{}", line.join(",")).map_err(io)?;
    }
    w.flush().map_err(io)
}

/// A matrix read back from CSV, with its axis labels.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixCsv {
    pub phi_c: Vec<f64>,
    pub phi_d: Vec<f64>,
    pub values: Matrix<Option<f64>>,
}

impl MatrixCsv {
    /// Values with undefined cells replaced by `NaN`.
    pub fn dense(&self) -> Matrix<f64> {
        self.values.map(|v| v.unwrap_or(f64::NAN))
    }

    /// Checks the axis labels against sector grids.
    pub fn check_grid(&self, grid_c: AngularGrid, grid_d: AngularGrid) -> Result<()> {
        let same = |axis: &[f64], g: AngularGrid| {
            axis.len() == g.n()
                && axis
                    .iter()
                    .zip(g.centers())
                    .all(|(a, b)| (a - b).abs() <= 1e-12)
        };
        if same(&self.phi_c, grid_c) && same(&self.phi_d, grid_d) {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "file has {}x{} sectors, expected {}x{}",
                self.phi_c.len(),
                self.phi_d.len(),
                grid_c.n(),
                grid_d.n()
            )))
        }
    }
}

pub fn read_matrix_csv(path: &Path) -> Result<MatrixCsv> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let perr = |line: usize, msg: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };
    let mut lines = BufReader::new(file).lines();
    let header = match lines.next() {
        Some(l) => l.map_err(|e| Error::io(path, e))?,
        None => return Err(Error::Empty(path.display().to_string())),
    };
    let mut cols = header.split(',');
    cols.next();
    let phi_d = cols
        .map(|t| parse_f64(t).ok_or_else(|| perr(1, format!("bad header value `{t}`"))))
        .collect::<Result<Vec<_>>>()?;
    let mut phi_c = Vec::new();
    let mut data = Vec::new();
    for (k, line) in lines.enumerate() {
        let lineno = k + 2;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let toks: Vec<&str> = line.split(',').collect();
        if toks.len() != phi_d.len() + 1 {
            return Err(perr(lineno, format!("expected {} fields, got {}", phi_d.len() + 1, toks.len())));
        }
        phi_c.push(parse_f64(toks[0]).ok_or_else(|| perr(lineno, format!("bad value `{}`", toks[0])))?);
        for t in &toks[1..] {
            let v = parse_f64(t).ok_or_else(|| perr(lineno, format!("bad value `{t}`")))?;
            data.push((!v.is_nan()).then_some(v));
        }
    }
    if phi_c.is_empty() {
        return Err(Error::Empty(path.display().to_string()));
    }
    Ok(MatrixCsv {
        values: Matrix::from_vec(phi_c.len(), phi_d.len(), data),
        phi_c,
        phi_d,
    })
}

/// Sidecar describing how a map was produced.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct MapMeta {
    pub engine_version: String,
    /// `analytic` or `measured`.
    pub source: String,
    pub mode_a: serde_json::Value,
    pub mode_b: serde_json::Value,
    pub projection: serde_json::Value,
    pub grid_c: usize,
    pub grid_d: usize,
    pub eps_zero: f64,
    pub temporal: String,
    #[serde(default)]
    pub extra: serde_json::Value,
}

/// Which matrices to write.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MapFiles {
    pub c_in: bool,
    pub c_out: bool,
    pub visibility: bool,
}

impl MapFiles {
    pub const ALL: MapFiles = MapFiles {
        c_in: true,
        c_out: true,
        visibility: true,
    };
}

/// Writes the selected CSVs and `meta.json` into `dir`.
pub fn write_map(dir: &Path, map: &CorrelationMap, files: MapFiles, meta: &MapMeta) -> Result<Vec<PathBuf>> {
    let phi_c = map.grid_c.centers();
    let phi_d = map.grid_d.centers();
    let mut written = Vec::new();
    let defined = |m: &Matrix<f64>| m.map(|v| Some(*v));
    if files.c_in {
        let p = dir.join("c_in.csv");
        write_matrix_csv(&p, &phi_c, &phi_d, &defined(&map.c_in))?;
        written.push(p);
    }
    if files.c_out {
        let p = dir.join("c_out.csv");
        write_matrix_csv(&p, &phi_c, &phi_d, &defined(&map.c_out))?;
        written.push(p);
    }
    if files.visibility {
        let p = dir.join("visibility.csv");
        write_matrix_csv(&p, &phi_c, &phi_d, &map.visibility)?;
        written.push(p);
    }
    let p = dir.join("meta.json");
    write_json(&p, meta)?;
    written.push(p);
    Ok(written)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)
        .map_err(|e| Error::io(path, std::io::Error::other(e)))?;
    writeln!(w).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

/// Gray level for a visibility value: `[−1, 1] → [0, 255]`, undefined → 128.
pub fn gray_level(v: Option<f64>) -> u8 {
    match v {
        Some(v) => ((v.clamp(-1.0, 1.0) + 1.0) * 127.5).round() as u8,
        None => 128,
    }
}

/// Binary graymap of the visibility plus a mask (255 = undefined).
pub fn write_visibility_pgm(path: &Path, mask_path: &Path, vis: &Matrix<Option<f64>>) -> Result<()> {
    let write = |p: &Path, px: Vec<u8>| -> Result<()> {
        let mut w = create(p)?;
        let io = |e| Error::io(p, e);
        write!(w, "P5\n{} {}\n255\n", vis.cols(), vis.rows()).map_err(io)?;
        w.write_all(&px).map_err(io)?;
        w.flush().map_err(io)
    };
    write(path, vis.iter().map(|v| gray_level(*v)).collect())?;
    write(mask_path, vis.iter().map(|v| if v.is_some() { 0 } else { 255 }).collect())
}
