//! File formats: headered CSV columns, CSV matrices, binary PGM, JSON
//! envelopes, and atomic file output.

use std::fs::File;
use std::io::{BufReader, Read, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::{CliError, CliResult};

/// Version stamped into every JSON document.
pub const SCHEMA_VERSION: u32 = 1;

fn data_err(path: &Path, msg: impl std::fmt::Display) -> CliError {
    CliError::Data(format!("{}: {msg}", path.display()))
}

fn parse_number(path: &Path, field: &str, line: u64, col: usize) -> CliResult<f64> {
    field
        .trim()
        .parse::<f64>()
        .map_err(|_| data_err(path, format!("line {line}, field {}: '{field}' is not a number", col + 1)))
}

fn open(path: &Path) -> CliResult<File> {
    File::open(path).map_err(|e| data_err(path, e))
}

/// One numeric column of a headered CSV file; the first column when
/// `column` is `None`.
pub fn read_column(path: &Path, column: Option<&str>) -> CliResult<Vec<f64>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(open(path)?);
    let headers = rdr.headers().map_err(|e| data_err(path, e))?.clone();
    let idx = match column {
        Some(name) => headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| data_err(path, format!("missing column '{name}'")))?,
        None => 0,
    };
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| data_err(path, e))?;
        let line = rec.position().map_or(0, |p| p.line());
        let field = rec
            .get(idx)
            .ok_or_else(|| data_err(path, format!("line {line}: missing field {}", idx + 1)))?;
        out.push(parse_number(path, field, line, idx)?);
    }
    if out.is_empty() {
        return Err(data_err(path, "no data rows"));
    }
    Ok(out)
}

/// A numeric matrix stored as header-less CSV, returned row-major with its
/// shape.
pub fn read_matrix(path: &Path) -> CliResult<(Vec<f64>, usize, usize)> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(open(path)?);
    let mut values = Vec::new();
    let mut rows = 0;
    let mut cols = 0;
    for rec in rdr.records() {
        let rec = rec.map_err(|e| data_err(path, e))?;
        let line = rec.position().map_or(0, |p| p.line());
        if rows == 0 {
            cols = rec.len();
        } else if rec.len() != cols {
            return Err(data_err(
                path,
                format!("line {line}: expected {cols} fields, found {}", rec.len()),
            ));
        }
        for (c, field) in rec.iter().enumerate() {
            values.push(parse_number(path, field, line, c)?);
        }
        rows += 1;
    }
    if rows == 0 || cols == 0 {
        return Err(data_err(path, "empty matrix"));
    }
    Ok((values, rows, cols))
}

/// Binary PGM (P5). Pixel `v` maps to `lo + (hi - lo) v / maxval`.
pub fn read_pgm(path: &Path, lo: f64, hi: f64) -> CliResult<(Vec<f64>, usize, usize)> {
    let mut bytes = Vec::new();
    BufReader::new(open(path)?)
        .read_to_end(&mut bytes)
        .map_err(|e| data_err(path, e))?;
    parse_pgm(&bytes, lo, hi).map_err(|m| data_err(path, m))
}

fn parse_pgm(bytes: &[u8], lo: f64, hi: f64) -> Result<(Vec<f64>, usize, usize), String> {
    let mut pos = 0;
    let token = |pos: &mut usize| -> Result<String, String> {
        loop {
            while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
                *pos += 1;
            }
            if *pos < bytes.len() && bytes[*pos] == b'#' {
                while *pos < bytes.len() && bytes[*pos] != b'\n' {
                    *pos += 1;
                }
            } else {
                break;
            }
        }
        let start = *pos;
        while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if start == *pos {
            return Err(format!("byte {start}: truncated header"));
        }
        Ok(String::from_utf8_lossy(&bytes[start..*pos]).into_owned())
    };
    let magic = token(&mut pos)?;
    if magic != "P5" {
        return Err(format!("byte 0: expected magic 'P5', found '{magic}'"));
    }
    let number = |pos: &mut usize, what: &str| -> Result<usize, String> {
        let at = *pos;
        let t = token(pos)?;
        t.parse::<usize>()
            .map_err(|_| format!("byte {at}: bad {what} '{t}'"))
    };
    let width = number(&mut pos, "width")?;
    let height = number(&mut pos, "height")?;
    let maxval = number(&mut pos, "maxval")?;
    if width == 0 || height == 0 || maxval == 0 || maxval > 65535 {
        return Err(format!("unsupported header {width}x{height} maxval {maxval}"));
    }
    // exactly one whitespace byte before the raster
    pos += 1;
    let depth = if maxval < 256 { 1 } else { 2 };
    let need = width * height * depth;
    let raster = bytes.get(pos..pos + need).ok_or_else(|| {
        format!(
            "byte {pos}: raster needs {need} bytes, found {}",
            bytes.len().saturating_sub(pos)
        )
    })?;
    let scale = (hi - lo) / maxval as f64;
    let values = if depth == 1 {
        raster.iter().map(|&b| lo + scale * f64::from(b)).collect()
    } else {
        raster
            .chunks_exact(2)
            .map(|c| lo + scale * f64::from(u16::from_be_bytes([c[0], c[1]])))
            .collect()
    };
    Ok((values, height, width))
}

/// Encode row-major values as P5, mapping `[lo, hi]` linearly onto
/// `0..=maxval` and clamping outside values.
pub fn encode_pgm(values: &[f64], rows: usize, cols: usize, lo: f64, hi: f64, maxval: u16) -> Vec<u8> {
    let mut out = format!("P5\n{cols} {rows}\n{maxval}\n").into_bytes();
    let m = f64::from(maxval);
    for &v in values {
        let x = ((v - lo) / (hi - lo) * m).round().clamp(0.0, m) as u16;
        if maxval < 256 {
            out.push(x as u8);
        } else {
            out.extend_from_slice(&x.to_be_bytes());
        }
    }
    out
}

/// Write `bytes` to `path` through a temporary file in the same directory,
/// so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    // devices, pipes and the like are written in place
    if let Ok(meta) = std::fs::metadata(path) {
        if !meta.is_file() {
            let mut f = std::fs::OpenOptions::new()
                .write(true)
                .open(path)
                .map_err(|e| data_err(path, e))?;
            f.write_all(bytes).map_err(|e| data_err(path, e))?;
            return Ok(());
        }
    }
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| data_err(path, e))?;
    tmp.write_all(bytes).map_err(|e| data_err(path, e))?;
    tmp.as_file().sync_all().map_err(|e| data_err(path, e))?;
    tmp.persist(path).map_err(|e| data_err(path, e.error))?;
    Ok(())
}

/// Write to `path`, or to standard output when `path` is `None`.
pub fn emit(path: Option<&Path>, bytes: &[u8]) -> CliResult<()> {
    match path {
        Some(p) => write_atomic(p, bytes),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    schema_version: u32,
    kind: &'a str,
    data: &'a T,
}

/// Pretty JSON wrapped with the schema version and a document kind.
pub fn json_document<T: Serialize>(kind: &str, data: &T) -> CliResult<Vec<u8>> {
    let mut v = serde_json::to_vec_pretty(&Envelope {
        schema_version: SCHEMA_VERSION,
        kind,
        data,
    })
    .map_err(|e| CliError::Data(e.to_string()))?;
    v.push(b'\n');
    Ok(v)
}

/// CSV text from a header and rows of already formatted fields.
pub fn csv_bytes<R, F>(header: &[&str], rows: R) -> CliResult<Vec<u8>>
where
    R: IntoIterator<Item = Vec<F>>,
    F: AsRef<[u8]>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(|e| CliError::Data(e.to_string()))?;
    for row in rows {
        w.write_record(&row).map_err(|e| CliError::Data(e.to_string()))?;
    }
    w.into_inner().map_err(|e| CliError::Data(e.to_string()))
}
