use nalgebra::DMatrix;

use super::GpError;

/// Cosine bound tolerance for kernel entries.
pub const KERNEL_TOL: f64 = 1e-12;

/// Normalized linear kernel between the rows of `p` and `q`:
/// `K[j, k] = p_j . q_k / (|p_j| |q_k|)`.
pub fn cosine_kernel(p: &DMatrix<f64>, q: &DMatrix<f64>) -> Result<DMatrix<f64>, GpError> {
    if p.ncols() != q.ncols() {
        return Err(GpError::DimensionMismatch {
            left: p.ncols(),
            right: q.ncols(),
        });
    }
    let pn = normalize_rows(p)?;
    let qn = normalize_rows(q)?;
    Ok(&pn * qn.transpose())
}

/// Scales every row to unit length.
pub fn normalize_rows(m: &DMatrix<f64>) -> Result<DMatrix<f64>, GpError> {
    let mut out = m.clone();
    for (j, mut row) in out.row_iter_mut().enumerate() {
        let norm = row.norm();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(GpError::ZeroNorm { row: j });
        }
        row /= norm;
    }
    Ok(out)
}

/// A kernel block together with the sample ids indexing its axes.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix {
    pub entries: DMatrix<f64>,
    pub row_ids: Vec<u64>,
    pub col_ids: Vec<u64>,
}

impl KernelMatrix {
    pub fn between(p: &DMatrix<f64>, row_ids: &[u64], q: &DMatrix<f64>, col_ids: &[u64]) -> Result<Self, GpError> {
        debug_assert_eq!(p.nrows(), row_ids.len());
        debug_assert_eq!(q.nrows(), col_ids.len());
        Ok(Self {
            entries: cosine_kernel(p, q)?,
            row_ids: row_ids.to_vec(),
            col_ids: col_ids.to_vec(),
        })
    }

    pub fn within_cosine_bounds(&self) -> bool {
        self.entries.iter().all(|v| v.abs() <= 1.0 + KERNEL_TOL)
    }
}
