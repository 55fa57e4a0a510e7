// Checkpoint layout:
//   C=<classes>,d=<dim>
//   format=gp-ada-model-v1
//   one CSV line per weight row (d values), C lines
//   one CSV line of C bias values

use std::io::{self, BufRead, Write};

use super::{ModelError, ModelState};

pub const CHECKPOINT_FORMAT: &str = "gp-ada-model-v1";

pub fn write_checkpoint<W: Write>(model: &ModelState, mut out: W) -> io::Result<()> {
    writeln!(out, "C={},d={}", model.classes(), model.dim())?;
    writeln!(out, "format={CHECKPOINT_FORMAT}")?;
    for row in model.weights().chunks_exact(model.dim()) {
        write_row(&mut out, row)?;
    }
    write_row(&mut out, model.bias())
}

fn write_row<W: Write>(out: &mut W, row: &[f64]) -> io::Result<()> {
    let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
    writeln!(out, "{}", line.join(","))
}

pub fn read_checkpoint<R: BufRead>(input: R) -> Result<ModelState, ModelError> {
    let err = |m: String| ModelError::Checkpoint(m);
    let mut lines = input.lines();
    let mut next = |what: &str| -> Result<String, ModelError> {
        lines
            .next()
            .ok_or_else(|| err(format!("missing {what}")))?
            .map_err(|e| err(e.to_string()))
    };

    let shape = next("shape header")?;
    let (classes, dim) = parse_shape(&shape).ok_or_else(|| err(format!("bad shape header {shape:?}")))?;
    let format = next("format header")?;
    if format != format!("format={CHECKPOINT_FORMAT}") {
        return Err(err(format!("unsupported format {format:?}")));
    }
    let mut weights = Vec::with_capacity(classes * dim);
    for c in 0..classes {
        weights.extend(parse_row(&next(&format!("weight row {c}"))?, dim)?);
    }
    let bias = parse_row(&next("bias row")?, classes)?;
    ModelState::from_parts(classes, dim, weights, bias)
}

fn parse_shape(line: &str) -> Option<(usize, usize)> {
    let (c, d) = line.split_once(',')?;
    let c = c.strip_prefix("C=")?.parse().ok()?;
    let d = d.strip_prefix("d=")?.parse().ok()?;
    (c > 0 && d > 0).then_some((c, d))
}

fn parse_row(line: &str, expected: usize) -> Result<Vec<f64>, ModelError> {
    let row = line
        .split(',')
        .map(|v| v.parse::<f64>().ok().filter(|x| x.is_finite()))
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| ModelError::Checkpoint(format!("bad value in {line:?}")))?;
    if row.len() != expected {
        return Err(ModelError::Checkpoint(format!(
            "expected {expected} values, found {}",
            row.len()
        )));
    }
    Ok(row)
}
