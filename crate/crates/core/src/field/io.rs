use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dim::Dim;
use crate::error::{Error, Result};

use super::GridField;

/// JSON header accompanying a little-endian `f64` sample file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldHeader {
    pub dim: Dim,
    pub origin: Vec<f64>,
    pub h: f64,
    pub extents: Vec<usize>,
    /// Sample file, relative to the header. Defaults to the header path
    /// with extension `bin`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<String>,
}

/// Writes `header_path` and the sample file next to it.
pub fn write_field_binary(field: &GridField, header_path: &Path) -> Result<()> {
    let data_path = header_path.with_extension("bin");
    let header = FieldHeader {
        dim: field.dim(),
        origin: field.origin().to_vec(),
        h: field.spacing(),
        extents: field.extents().to_vec(),
        data: data_path.file_name().map(|s| s.to_string_lossy().into_owned()),
    };
    fs::write(header_path, serde_json::to_string_pretty(&header)? + "\n")?;
    let mut bytes = Vec::with_capacity(8 * field.len());
    for v in field.samples() {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(data_path, bytes)?;
    Ok(())
}

fn read_field_binary(header_path: &Path) -> Result<GridField> {
    let header: FieldHeader = serde_json::from_str(&fs::read_to_string(header_path)?)?;
    let data_path: PathBuf = match &header.data {
        Some(name) => header_path.parent().unwrap_or(Path::new(".")).join(name),
        None => header_path.with_extension("bin"),
    };
    let bytes = fs::read(&data_path)?;
    if bytes.len() % 8 != 0 {
        return Err(Error::Parse(format!(
            "{}: length {} is not a multiple of 8",
            data_path.display(),
            bytes.len()
        )));
    }
    let samples = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    GridField::new(header.dim, &header.origin, header.h, &header.extents, samples)
}

/// CSV with one index column per axis (`i0,i1,...`) and a `value` column.
pub fn write_field_csv(field: &GridField, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    let d = field.dim().get();
    let names: Vec<String> = (0..d).map(|a| format!("i{a}")).collect();
    writeln!(w, "{},value", names.join(","))?;
    for (i, v) in field.samples().iter().enumerate() {
        let idx = field.multi_index(i);
        for a in idx.iter().take(d) {
            write!(w, "{a},")?;
        }
        writeln!(w, "{v:.16e}")?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a CSV written by [`write_field_csv`]. Geometry that the file
/// does not carry is supplied by the caller.
pub fn read_field_csv(path: &Path, origin: &[f64], h: f64) -> Result<GridField> {
    let reader = BufReader::new(fs::File::open(path)?);
    let mut lines = reader.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse(format!("{}: empty file", path.display())))??;
    let cols: Vec<&str> = header.trim().split(',').map(str::trim).collect();
    if cols.len() < 2 || cols.last() != Some(&"value") {
        return Err(Error::Parse(format!(
            "{}: expected header i0[,i1[,i2]],value",
            path.display()
        )));
    }
    let dim = Dim::new(cols.len() - 1)?;
    let d = dim.get();
    let mut rows: Vec<([usize; 3], f64)> = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').map(str::trim).collect();
        if parts.len() != d + 1 {
            return Err(Error::Parse(format!(
                "{}:{}: expected {} columns",
                path.display(),
                lineno + 2,
                d + 1
            )));
        }
        let mut idx = [0usize; 3];
        for a in 0..d {
            idx[a] = parts[a].parse().map_err(|e| {
                Error::Parse(format!("{}:{}: bad index: {e}", path.display(), lineno + 2))
            })?;
        }
        let v: f64 = parts[d].parse().map_err(|e| {
            Error::Parse(format!("{}:{}: bad value: {e}", path.display(), lineno + 2))
        })?;
        rows.push((idx, v));
    }
    let mut extents = vec![0usize; d];
    for (idx, _) in &rows {
        for a in 0..d {
            extents[a] = extents[a].max(idx[a] + 1);
        }
    }
    let len: usize = extents.iter().product();
    if rows.len() != len {
        return Err(Error::Parse(format!(
            "{}: {} rows do not fill a grid of extents {extents:?}",
            path.display(),
            rows.len()
        )));
    }
    let mut samples = vec![f64::NAN; len];
    for (idx, v) in rows {
        let mut flat = 0;
        for a in 0..d {
            flat = flat * extents[a] + idx[a];
        }
        samples[flat] = v;
    }
    GridField::new(dim, origin, h, &extents, samples)
}

/// Reads a field by extension: `.json` header plus binary samples, or
/// `.csv` with the geometry from `csv_geometry`.
pub fn read_field(path: &Path, csv_geometry: Option<(&[f64], f64)>) -> Result<GridField> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("json") => read_field_binary(path),
        Some("csv") => {
            let (origin, h) = csv_geometry.ok_or_else(|| {
                Error::InvalidConfig(format!(
                    "{}: CSV fields need an origin and a spacing",
                    path.display()
                ))
            })?;
            read_field_csv(path, origin, h)
        }
        _ => Err(Error::InvalidConfig(format!(
            "{}: unknown field format (expected .json or .csv)",
            path.display()
        ))),
    }
}
