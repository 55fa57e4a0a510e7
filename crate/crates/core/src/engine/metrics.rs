use std::io::{self, Write};

use super::EngineError;

pub const METRICS_HEADER: &str =
    "round,queried_ids,plcs_count,budget_spent,target_accuracy,mean_pv,selection_ms,train_loss";

/// Measurements of one selection round.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundMetrics {
    pub round: usize,
    pub queried_ids: Vec<u64>,
    /// Samples harvested by PLCS in this round.
    pub plcs_count: usize,
    /// Cumulative queries after this round.
    pub budget_spent: usize,
    pub target_accuracy: f64,
    pub mean_pv: f64,
    /// Wall time of selection (harvest + GP + ranking), milliseconds.
    pub selection_ms: f64,
    /// Mean total loss over the last epoch of the round.
    pub train_loss: f64,
}

pub fn write_metrics_csv<W: Write>(rows: &[RoundMetrics], mut out: W) -> io::Result<()> {
    writeln!(out, "{METRICS_HEADER}")?;
    for r in rows {
        let ids: Vec<String> = r.queried_ids.iter().map(u64::to_string).collect();
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.round,
            ids.join(";"),
            r.plcs_count,
            r.budget_spent,
            r.target_accuracy,
            r.mean_pv,
            r.selection_ms,
            r.train_loss
        )?;
    }
    Ok(())
}

pub fn parse_metrics_csv(text: &str) -> Result<Vec<RoundMetrics>, EngineError> {
    let err = |line: usize, message: String| EngineError::Metrics { line, message };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == METRICS_HEADER => {}
        Some((_, h)) => return Err(err(1, format!("unexpected header {h:?}"))),
        None => return Err(err(1, "empty metrics file".into())),
    }
    let mut rows = Vec::new();
    for (idx, line) in lines {
        let n = idx + 1;
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 8 {
            return Err(err(n, format!("expected 8 columns, found {}", cols.len())));
        }
        let int = |i: usize| cols[i].parse::<usize>().map_err(|e| err(n, format!("column {i}: {e}")));
        let float = |i: usize| cols[i].parse::<f64>().map_err(|e| err(n, format!("column {i}: {e}")));
        let queried_ids = if cols[1].is_empty() {
            Vec::new()
        } else {
            cols[1]
                .split(';')
                .map(|s| s.parse::<u64>().map_err(|e| err(n, format!("queried id {s:?}: {e}"))))
                .collect::<Result<_, _>>()?
        };
        rows.push(RoundMetrics {
            round: int(0)?,
            queried_ids,
            plcs_count: int(2)?,
            budget_spent: int(3)?,
            target_accuracy: float(4)?,
            mean_pv: float(5)?,
            selection_ms: float(6)?,
            train_loss: float(7)?,
        });
    }
    Ok(rows)
}
