//! CSV ingestion and emission.
//!
//! Files are comma-separated UTF-8 with an optional single header row. Cells
//! are decimal floats (scientific notation accepted). The writer uses Rust's
//! shortest round-trip formatting, so `read ∘ write` is exact.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// Reads a numeric CSV file. When `label_column` is given (0-based), that
/// column becomes the label vector and is dropped from the features.
pub fn read_csv(path: impl AsRef<Path>, has_header: bool, label_column: Option<usize>) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::Csv {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    read_csv_from(file, path, has_header, label_column)
}

pub fn read_csv_from<R: Read>(
    reader: R,
    path: &Path,
    has_header: bool,
    label_column: Option<usize>,
) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let fail = |message: String| Error::Csv {
        path: path.to_path_buf(),
        message,
    };
    let cell_err = |row: usize, column: usize, message: String| Error::CsvCell {
        path: path.to_path_buf(),
        row,
        column,
        message,
    };

    let mut width: Option<usize> = None;
    let mut data = Vec::new();
    let mut labels = Vec::new();
    let mut rows = 0usize;
    for record in rdr.records() {
        let record = record.map_err(|e| fail(e.to_string()))?;
        let line = record.position().map_or(rows + 1, |p| p.line() as usize);
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        match width {
            None => {
                if let Some(lc) = label_column {
                    if lc >= record.len() {
                        return Err(cell_err(line, lc + 1, format!(
                            "label column {} is out of range for {} column(s)",
                            lc + 1,
                            record.len()
                        )));
                    }
                    if record.len() < 2 {
                        return Err(fail("a label column needs at least one feature column".into()));
                    }
                }
                width = Some(record.len());
            }
            Some(w) if w != record.len() => {
                return Err(cell_err(line, record.len().min(w) + 1, format!(
                    "ragged row: expected {w} columns, found {}",
                    record.len()
                )));
            }
            Some(_) => {}
        }
        for (col, cell) in record.iter().enumerate() {
            if Some(col) == label_column {
                labels.push(parse_label(cell).map_err(|m| cell_err(line, col + 1, m))?);
                continue;
            }
            let v: f64 = cell
                .parse()
                .map_err(|_| cell_err(line, col + 1, format!("`{cell}` is not a number")))?;
            if !v.is_finite() {
                return Err(cell_err(line, col + 1, format!("`{cell}` is not finite")));
            }
            data.push(v);
        }
        rows += 1;
    }
    let Some(width) = width else {
        return Err(fail("file contains no data rows".into()));
    };
    let cols = width - usize::from(label_column.is_some());
    let ds = Dataset::new(rows, cols, data)?;
    if label_column.is_some() {
        ds.with_labels(labels)
    } else {
        Ok(ds)
    }
}

fn parse_label(cell: &str) -> std::result::Result<usize, String> {
    if let Ok(v) = cell.parse::<usize>() {
        return Ok(v);
    }
    match cell.parse::<f64>() {
        Ok(v) if v >= 0.0 && v.fract() == 0.0 && v < u32::MAX as f64 => Ok(v as usize),
        _ => Err(format!("`{cell}` is not a nonnegative integer label")),
    }
}

/// Writes `data` with a header row (`x0,…,x{d-1}[,label]`). Labels, when
/// present, go in the last column.
pub fn write_csv(path: impl AsRef<Path>, data: &Dataset) -> Result<()> {
    let mut file = std::io::BufWriter::new(File::create(path)?);
    write_csv_to(&mut file, data)?;
    file.flush()?;
    Ok(())
}

pub fn write_csv_to<W: Write>(out: &mut W, data: &Dataset) -> Result<()> {
    let mut header: Vec<String> = (0..data.cols()).map(|j| format!("x{j}")).collect();
    if data.labels().is_some() {
        header.push("label".into());
    }
    writeln!(out, "{}", header.join(","))?;
    let mut line = String::new();
    for (i, row) in data.iter_rows().enumerate() {
        line.clear();
        for (j, v) in row.iter().enumerate() {
            if j > 0 {
                line.push(',');
            }
            line.push_str(&v.to_string());
        }
        if let Some(labels) = data.labels() {
            line.push(',');
            line.push_str(&labels[i].to_string());
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}
