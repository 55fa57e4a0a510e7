use nalgebra::{Cholesky, DMatrix, Dyn};

use super::kernel::{cosine_kernel, normalize_rows};
use super::partition::ClassSplit;
use super::GpError;

pub const DEFAULT_JITTER: f64 = 1e-4;
/// Largest jitter tried before a factorization failure is reported.
pub const MAX_JITTER: f64 = 1e-1;

/// Posterior over the unlabeled rows given the labeled rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Posterior {
    /// `K(U,L) A^-1 F_l`, one row per unlabeled sample, width `d`.
    pub mean: DMatrix<f64>,
    /// `K(U,U) - K(U,L) A^-1 K(L,U)`.
    pub covariance: DMatrix<f64>,
    /// Jitter that made `A = K(L,L) + jitter I` factorizable.
    pub jitter: f64,
}

/// Class-wise posterior with the ids of its unlabeled members in row order.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassGpPosterior {
    pub class_id: usize,
    pub member_ids: Vec<u64>,
    pub mean: DMatrix<f64>,
    pub covariance: DMatrix<f64>,
    pub jitter: f64,
}

/// Clamped posterior variances of one class.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassVariance {
    pub class_id: usize,
    pub ids: Vec<u64>,
    pub pv: Vec<f64>,
}

/// Cholesky factor of `K(L,L) + jitter I`, escalating the jitter tenfold on
/// failure up to [`MAX_JITTER`]. The requested jitter is always tried once.
fn factor_labeled(k_ll: &DMatrix<f64>, jitter: f64) -> Result<(Cholesky<f64, Dyn>, f64), GpError> {
    if !(jitter > 0.0 && jitter.is_finite()) {
        return Err(GpError::InvalidJitter(jitter));
    }
    let mut j = jitter;
    loop {
        let mut a = k_ll.clone();
        for i in 0..a.nrows() {
            a[(i, i)] += j;
        }
        if let Some(chol) = Cholesky::new(a) {
            return Ok((chol, j));
        }
        j *= 10.0;
        if j > MAX_JITTER * (1.0 + 1e-9) {
            return Err(GpError::NotPositiveDefinite {
                class: None,
                max_jitter: MAX_JITTER.max(jitter),
            });
        }
    }
}

/// Full posterior mean and covariance of `f_u` conditioned on `f_l`.
///
/// The mean regresses the labeled feature matrix itself, so it has one
/// column per feature dimension.
pub fn gp_posterior(f_u: &DMatrix<f64>, f_l: &DMatrix<f64>, jitter: f64) -> Result<Posterior, GpError> {
    if f_l.nrows() == 0 {
        return Err(GpError::EmptyConditioning);
    }
    let k_ll = cosine_kernel(f_l, f_l)?;
    let k_lu = cosine_kernel(f_l, f_u)?;
    let k_uu = cosine_kernel(f_u, f_u)?;
    let (chol, used) = factor_labeled(&k_ll, jitter)?;

    let alpha = chol.solve(f_l);
    let mean = k_lu.transpose() * alpha;

    let mut v = k_lu;
    chol.l_dirty().solve_lower_triangular_mut(&mut v);
    let mut covariance = k_uu - v.transpose() * &v;
    symmetrize(&mut covariance);
    Ok(Posterior {
        mean,
        covariance,
        jitter: used,
    })
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = avg;
            m[(j, i)] = avg;
        }
    }
}

/// Full posterior for one class. With no labeled rows every member keeps its
/// prior: zero mean and covariance `K(U,U)`.
pub fn class_posterior(split: &ClassSplit, jitter: f64) -> Result<ClassGpPosterior, GpError> {
    let f_u = &split.unlabeled.features;
    let (mean, covariance, used) = if split.labeled.is_empty() {
        (
            DMatrix::zeros(f_u.nrows(), f_u.ncols()),
            cosine_kernel(f_u, f_u)?,
            jitter,
        )
    } else {
        let p = gp_posterior(f_u, &split.labeled.features, jitter).map_err(|e| e.in_class(split.class_id))?;
        (p.mean, p.covariance, p.jitter)
    };
    Ok(ClassGpPosterior {
        class_id: split.class_id,
        member_ids: split.unlabeled.ids.clone(),
        mean,
        covariance,
        jitter: used,
    })
}

/// Diagonal of the posterior covariance, clamped at zero.
pub fn posterior_variance(posterior: &ClassGpPosterior) -> ClassVariance {
    ClassVariance {
        class_id: posterior.class_id,
        ids: posterior.member_ids.clone(),
        pv: posterior.covariance.diagonal().iter().map(|v| v.max(0.0)).collect(),
    }
}

/// Posterior variances of one class without forming the full covariance:
/// `pv_j = K(u_j,u_j) - |L^-1 K(L,u_j)|^2`, clamped at zero.
pub fn class_variance(split: &ClassSplit, jitter: f64) -> Result<ClassVariance, GpError> {
    let ids = split.unlabeled.ids.clone();
    if ids.is_empty() {
        return Ok(ClassVariance {
            class_id: split.class_id,
            ids,
            pv: Vec::new(),
        });
    }
    let u_hat = normalize_rows(&split.unlabeled.features)?;
    let prior: Vec<f64> = u_hat.row_iter().map(|r| r.dot(&r)).collect();
    if split.labeled.is_empty() {
        return Ok(ClassVariance {
            class_id: split.class_id,
            ids,
            pv: prior,
        });
    }
    let l_hat = normalize_rows(&split.labeled.features)?;
    let k_ll = &l_hat * l_hat.transpose();
    let mut v = &l_hat * u_hat.transpose();
    let (chol, _) = factor_labeled(&k_ll, jitter).map_err(|e| e.in_class(split.class_id))?;
    chol.l_dirty().solve_lower_triangular_mut(&mut v);
    let pv = v
        .column_iter()
        .zip(prior)
        .map(|(col, k)| (k - col.norm_squared()).max(0.0))
        .collect();
    Ok(ClassVariance {
        class_id: split.class_id,
        ids,
        pv,
    })
}
