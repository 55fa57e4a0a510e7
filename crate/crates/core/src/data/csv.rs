// Dataset CSV: header `id,domain,label,f0,...,f{d-1}`, no quoting, LF endings.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use super::{DataError, Dataset, Domain, FeatureRecord};

pub fn load_dataset(path: impl AsRef<Path>) -> Result<Dataset, DataError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| DataError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_dataset(&text)
}

/// Parses dataset text. Line numbers in errors are 1-based and count the header.
pub fn parse_dataset(text: &str) -> Result<Dataset, DataError> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(DataError::MissingHeader)?;
    let dim = parse_header(header)?;
    let width = dim + 3;

    let mut records = Vec::new();
    let mut max_label = 0usize;
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != width {
            return Err(DataError::DimensionMismatch {
                line: line_no,
                expected: width,
                found: cols.len(),
            });
        }
        let id = cols[0].parse::<u64>().map_err(|_| DataError::BadId {
            line: line_no,
            value: cols[0].to_string(),
        })?;
        let domain = match cols[1] {
            "source" => Domain::Source,
            "target" => Domain::Target,
            other => {
                return Err(DataError::BadDomain {
                    line: line_no,
                    value: other.to_string(),
                })
            }
        };
        let label = cols[2].parse::<i64>().map_err(|_| DataError::BadLabel {
            line: line_no,
            value: cols[2].to_string(),
        })?;
        if label < 0 {
            return Err(DataError::NegativeLabel {
                line: line_no,
                value: label,
            });
        }
        let label = label as usize;
        let mut features = Vec::with_capacity(dim);
        for (column, raw) in cols[3..].iter().enumerate() {
            let v = raw.parse::<f64>().map_err(|_| DataError::NonNumericFeature {
                line: line_no,
                column,
                value: raw.to_string(),
            })?;
            if !v.is_finite() {
                return Err(DataError::NonFiniteFeature { line: line_no, column });
            }
            features.push(v);
        }
        if features.iter().all(|&v| v == 0.0) {
            return Err(DataError::ZeroNorm { line: line_no });
        }
        max_label = max_label.max(label);
        records.push(FeatureRecord {
            id,
            domain,
            true_label: label,
            features,
        });
    }
    Dataset::new(records, max_label + 1)
}

fn parse_header(header: &str) -> Result<usize, DataError> {
    let cols: Vec<&str> = header.split(',').collect();
    if cols.len() < 4 || cols[0] != "id" || cols[1] != "domain" || cols[2] != "label" {
        return Err(DataError::BadHeader(header.to_string()));
    }
    for (j, name) in cols[3..].iter().enumerate() {
        if *name != format!("f{j}") {
            return Err(DataError::BadHeader(header.to_string()));
        }
    }
    Ok(cols.len() - 3)
}

pub fn write_dataset<W: Write>(dataset: &Dataset, mut out: W) -> io::Result<()> {
    write!(out, "id,domain,label")?;
    for j in 0..dataset.dim() {
        write!(out, ",f{j}")?;
    }
    writeln!(out)?;
    for r in dataset.records() {
        write!(out, "{},{},{}", r.id, r.domain, r.true_label)?;
        for v in &r.features {
            write!(out, ",{v}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}
