//! Dataset files.
//!
//! Both formats put the three model inputs first, then the targets.
//!
//! - CSV: one header row of column names, then one decimal row per sample.
//! - Binary columnar: one ASCII header line
//!   `TMDS 1 <rows> <n_inputs> <comma-separated column names>\n`, then every
//!   column in header order as `rows` little-endian f64 values.

use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::{s, Array2};

use super::Dataset;
use crate::error::{Error, Result};
use crate::nn::INPUT_DIM;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DatasetFormat {
    Csv,
    Binary,
}

impl DatasetFormat {
    /// `.csv` is CSV; anything else is binary.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("csv") => DatasetFormat::Csv,
            _ => DatasetFormat::Binary,
        }
    }
}

fn format_err(path: &Path, msg: impl std::fmt::Display) -> Error {
    Error::DatasetFormat(format!("{}: {msg}", path.display()))
}

pub fn write_dataset(ds: &Dataset, path: impl AsRef<Path>, format: DatasetFormat) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let columns: Vec<&str> = ds.input_names.iter().chain(&ds.target_names).map(String::as_str).collect();
    match format {
        DatasetFormat::Csv => {
            let mut w = csv::Writer::from_writer(BufWriter::new(file));
            let err = |e: csv::Error| format_err(path, e);
            w.write_record(&columns).map_err(err)?;
            for (x, y) in ds.inputs.outer_iter().zip(ds.targets.outer_iter()) {
                w.write_record(x.iter().chain(y.iter()).map(|v| format!("{v:e}"))).map_err(err)?;
            }
            w.flush().map_err(|e| Error::io(path, e))
        }
        DatasetFormat::Binary => {
            let mut w = BufWriter::new(file);
            let io = |e| Error::io(path, e);
            writeln!(w, "TMDS 1 {} {} {}", ds.len(), ds.input_names.len(), columns.join(",")).map_err(io)?;
            for m in [&ds.inputs, &ds.targets] {
                for col in m.columns() {
                    for v in col {
                        w.write_all(&v.to_le_bytes()).map_err(io)?;
                    }
                }
            }
            w.flush().map_err(io)
        }
    }
}

fn assemble(path: &Path, columns: Vec<String>, n_inputs: usize, rows: usize, data: Array2<f64>) -> Result<Dataset> {
    if n_inputs > columns.len() {
        return Err(format_err(path, "more inputs than columns"));
    }
    debug_assert_eq!(data.dim(), (rows, columns.len()));
    Dataset::new(
        columns[..n_inputs].to_vec(),
        columns[n_inputs..].to_vec(),
        data.slice(s![.., ..n_inputs]).to_owned(),
        data.slice(s![.., n_inputs..]).to_owned(),
    )
}

pub fn read_dataset(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    match DatasetFormat::from_path(path) {
        DatasetFormat::Csv => {
            let mut r = csv::Reader::from_reader(BufReader::new(file));
            let columns: Vec<String> = r.headers().map_err(|e| format_err(path, e))?.iter().map(String::from).collect();
            let mut flat = Vec::new();
            let mut rows = 0;
            for rec in r.records() {
                let rec = rec.map_err(|e| format_err(path, e))?;
                if rec.len() != columns.len() {
                    return Err(format_err(path, format!("row {rows} has {} fields", rec.len())));
                }
                for field in rec.iter() {
                    flat.push(field.trim().parse::<f64>().map_err(|e| format_err(path, format!("row {rows}: {e}")))?);
                }
                rows += 1;
            }
            let data = Array2::from_shape_vec((rows, columns.len()), flat).expect("rows are complete");
            assemble(path, columns, INPUT_DIM, rows, data)
        }
        DatasetFormat::Binary => {
            let mut r = BufReader::new(file);
            let mut header = String::new();
            r.read_line(&mut header).map_err(|e| Error::io(path, e))?;
            let parts: Vec<&str> = header.trim_end().splitn(5, ' ').collect();
            if parts.len() != 5 || parts[0] != "TMDS" {
                return Err(format_err(path, "missing TMDS header"));
            }
            if parts[1] != "1" {
                return Err(format_err(path, format!("unsupported version {}", parts[1])));
            }
            let rows: usize = parts[2].parse().map_err(|_| format_err(path, "bad row count"))?;
            let n_inputs: usize = parts[3].parse().map_err(|_| format_err(path, "bad input count"))?;
            let columns: Vec<String> = parts[4].split(',').map(String::from).collect();
            let mut bytes = Vec::new();
            r.read_to_end(&mut bytes).map_err(|e| Error::io(path, e))?;
            if bytes.len() != rows * columns.len() * 8 {
                return Err(format_err(path, format!("expected {} data bytes, found {}", rows * columns.len() * 8, bytes.len())));
            }
            let mut data = Array2::zeros((rows, columns.len()));
            for (j, col) in bytes.chunks_exact(rows.max(1) * 8).enumerate().take(columns.len()) {
                for (i, v) in col.chunks_exact(8).enumerate() {
                    data[[i, j]] = f64::from_le_bytes(v.try_into().expect("8 bytes"));
                }
            }
            assemble(path, columns, n_inputs, rows, data)
        }
    }
}
