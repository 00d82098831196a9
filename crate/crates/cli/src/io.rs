//! Matrix/vector files and deterministic JSON/CSV output.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use ptsym_core::{CMatrix, CVector, Complex64};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixFile {
    pub dim: usize,
    pub rows: Vec<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VectorFile {
    pub dim: usize,
    pub vector: Vec<[f64; 2]>,
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io { path: path.to_path_buf(), source: e })
}

fn parse_json<T: for<'de> Deserialize<'de>>(path: &Path, text: &str) -> Result<T, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Parse { path: path.to_path_buf(), message: e.to_string() })
}

fn entry(path: &Path, [re, im]: [f64; 2]) -> Result<Complex64, CliError> {
    if re.is_finite() && im.is_finite() {
        Ok(Complex64::new(re, im))
    } else {
        Err(CliError::invalid(path, "non-finite entry"))
    }
}

impl MatrixFile {
    pub fn to_matrix(&self, path: &Path) -> Result<CMatrix, CliError> {
        if self.dim == 0 {
            return Err(CliError::invalid(path, "dim must be positive"));
        }
        if self.rows.len() != self.dim {
            return Err(CliError::invalid(path, &format!("expected {} rows, found {}", self.dim, self.rows.len())));
        }
        let mut m = CMatrix::zeros(self.dim, self.dim);
        for (i, row) in self.rows.iter().enumerate() {
            if row.len() != self.dim {
                return Err(CliError::invalid(path, &format!("row {i} has {} entries, expected {}", row.len(), self.dim)));
            }
            for (j, &z) in row.iter().enumerate() {
                m[(i, j)] = entry(path, z)?;
            }
        }
        Ok(m)
    }

    pub fn from_matrix(m: &CMatrix) -> Self {
        let rows = (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect();
        Self { dim: m.nrows(), rows }
    }
}

impl VectorFile {
    pub fn to_vector(&self, path: &Path) -> Result<CVector, CliError> {
        if self.dim == 0 || self.vector.len() != self.dim {
            return Err(CliError::invalid(path, &format!("expected {} entries, found {}", self.dim, self.vector.len())));
        }
        let entries = self.vector.iter().map(|&z| entry(path, z)).collect::<Result<Vec<_>, _>>()?;
        Ok(CVector::from_vec(entries))
    }
}

pub fn read_matrix(path: &Path) -> Result<CMatrix, CliError> {
    let file: MatrixFile = parse_json(path, &read_text(path)?)?;
    file.to_matrix(path)
}

pub fn read_vector(path: &Path) -> Result<CVector, CliError> {
    let file: VectorFile = parse_json(path, &read_text(path)?)?;
    file.to_vector(path)
}

/// A density matrix, or a pure state given as a vector file (|ψ⟩⟨ψ|).
pub fn read_state(path: &Path) -> Result<CMatrix, CliError> {
    let value: Value = parse_json(path, &read_text(path)?)?;
    if value.get("vector").is_some() {
        let file: VectorFile = serde_json::from_value(value)
            .map_err(|e| CliError::Parse { path: path.to_path_buf(), message: e.to_string() })?;
        let v = file.to_vector(path)?;
        Ok(&v * v.adjoint())
    } else {
        let file: MatrixFile = serde_json::from_value(value)
            .map_err(|e| CliError::Parse { path: path.to_path_buf(), message: e.to_string() })?;
        file.to_matrix(path)
    }
}

pub fn matrix_json(m: &CMatrix) -> Value {
    serde_json::to_value(MatrixFile::from_matrix(m)).expect("matrix serializes")
}

pub fn complex_json(z: Complex64) -> Value {
    json!([z.re, z.im])
}

/// Floats as 17 significant digits in lowercase scientific notation.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

struct SciFormatter(serde_json::ser::PrettyFormatter<'static>);

impl serde_json::ser::Formatter for SciFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(fmt_f64(value).as_bytes())
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn render_json(value: &Value) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SciFormatter(serde_json::ser::PrettyFormatter::new()));
    value.serialize(&mut ser).expect("in-memory write");
    out.push(b'\n');
    String::from_utf8(out).expect("json is utf-8")
}

pub fn compact_json(value: &Value) -> String {
    serde_json::to_string(value).expect("in-memory write")
}

/// Writes `text` to `path`, or to stdout when `path` is `None` or `-`.
pub fn emit(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) if p != Path::new("-") => {
            fs::write(p, text).map_err(|e| CliError::Io { path: p.to_path_buf(), source: e })
        }
        _ => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| CliError::Io { path: PathBuf::from("<stdout>"), source: e })
        }
    }
}

pub fn csv_text(header: &[String], rows: &[Vec<String>]) -> Result<String, CliError> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let csv_err = |e: csv::Error| CliError::Io { path: PathBuf::from("<csv>"), source: io::Error::other(e) };
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(row).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io { path: PathBuf::from("<csv>"), source: e.into_error() })?;
    Ok(String::from_utf8(bytes).expect("csv is utf-8"))
}
