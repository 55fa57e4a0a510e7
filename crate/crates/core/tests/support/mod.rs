//! Reference implementations used as test oracles. Nothing here calls into
//! the library's linear algebra: matrices are plain nested vectors and the
//! inverse is Gauss-Jordan elimination with partial pivoting.

#![allow(dead_code)]

pub type Mat = Vec<Vec<f64>>;

/// Deterministic uniform draws in [0, 1) from a counter-based hash.
pub struct Stream {
    state: u64,
}

impl Stream {
    pub fn new(seed: u64) -> Self {
        Self {
            state: seed ^ 0x9e37_79b9_7f4a_7c15,
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Uniform in [lo, hi).
    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Integer in [lo, hi].
    pub fn int(&mut self, lo: usize, hi: usize) -> usize {
        lo + (self.next_u64() % (hi - lo + 1) as u64) as usize
    }

    /// A row with entries in [-1, 1) and norm bounded away from zero.
    pub fn row(&mut self, d: usize) -> Vec<f64> {
        loop {
            let r: Vec<f64> = (0..d).map(|_| self.range(-1.0, 1.0)).collect();
            if r.iter().map(|v| v * v).sum::<f64>() > 1e-2 {
                return r;
            }
        }
    }

    pub fn rows(&mut self, n: usize, d: usize) -> Mat {
        (0..n).map(|_| self.row(d)).collect()
    }

    /// Between `lo` and `hi` rows, inclusive.
    pub fn rows_in(&mut self, lo: usize, hi: usize, d: usize) -> Mat {
        let n = self.int(lo, hi);
        self.rows(n, d)
    }

    /// Fisher-Yates permutation of `0..n`.
    pub fn permutation(&mut self, n: usize) -> Vec<usize> {
        let mut p: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            p.swap(i, self.int(0, i));
        }
        p
    }
}

pub fn cosine(p: &[f64], q: &[f64]) -> f64 {
    let dot: f64 = p.iter().zip(q).map(|(a, b)| a * b).sum();
    let np = p.iter().map(|v| v * v).sum::<f64>().sqrt();
    let nq = q.iter().map(|v| v * v).sum::<f64>().sqrt();
    dot / (np * nq)
}

pub fn gram(a: &Mat, b: &Mat) -> Mat {
    a.iter().map(|p| b.iter().map(|q| cosine(p, q)).collect()).collect()
}

pub fn matmul(a: &Mat, b: &Mat) -> Mat {
    let inner = b.len();
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| (0..cols).map(|j| (0..inner).map(|k| row[k] * b[k][j]).sum()).collect())
        .collect()
}

pub fn transpose(a: &Mat) -> Mat {
    let cols = a.first().map_or(0, Vec::len);
    (0..cols).map(|j| a.iter().map(|r| r[j]).collect()).collect()
}

/// Gauss-Jordan inverse with partial pivoting. Panics on a singular pivot.
pub fn invert(a: &Mat) -> Mat {
    let n = a.len();
    let mut m: Mat = a
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = r.clone();
            row.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            row
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&x, &y| m[x][col].abs().total_cmp(&m[y][col].abs()))
            .unwrap();
        assert!(m[pivot][col].abs() > 1e-300, "singular matrix");
        m.swap(col, pivot);
        let p = m[col][col];
        for v in m[col].iter_mut() {
            *v /= p;
        }
        let pivot_row = m[col].clone();
        for (r, row) in m.iter_mut().enumerate() {
            let f = row[col];
            if r != col && f != 0.0 {
                for (v, p) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * p;
                }
            }
        }
    }
    m.into_iter().map(|r| r[n..].to_vec()).collect()
}

/// Posterior mean `K_ul A^-1 F_l` and covariance `K_uu - K_ul A^-1 K_lu`
/// with `A = K_ll + jitter I`, by direct inversion.
pub fn posterior(f_u: &Mat, f_l: &Mat, jitter: f64) -> (Mat, Mat) {
    let mut a = gram(f_l, f_l);
    for (i, row) in a.iter_mut().enumerate() {
        row[i] += jitter;
    }
    let a_inv = invert(&a);
    let k_ul = gram(f_u, f_l);
    let w = matmul(&k_ul, &a_inv);
    let mean = matmul(&w, f_l);
    let reduction = matmul(&w, &transpose(&k_ul));
    let k_uu = gram(f_u, f_u);
    let cov = k_uu
        .iter()
        .zip(&reduction)
        .map(|(k, r)| k.iter().zip(r).map(|(a, b)| a - b).collect())
        .collect();
    (mean, cov)
}

pub fn to_dmatrix(m: &Mat) -> nalgebra::DMatrix<f64> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    nalgebra::DMatrix::from_fn(rows, cols, |i, j| m[i][j])
}

pub fn max_abs_diff(a: &nalgebra::DMatrix<f64>, b: &Mat) -> f64 {
    assert_eq!(a.nrows(), b.len());
    let mut worst: f64 = 0.0;
    for (i, row) in b.iter().enumerate() {
        assert_eq!(a.ncols(), row.len());
        for (j, v) in row.iter().enumerate() {
            worst = worst.max((a[(i, j)] - v).abs());
        }
    }
    worst
}

/// `|a - n| / max(|a| + |n|, 1e-12)` over the flattened gradient.
pub fn relative_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    let diff: f64 = analytic
        .iter()
        .zip(numeric)
        .map(|(a, n)| (a - n).powi(2))
        .sum::<f64>()
        .sqrt();
    let a: f64 = analytic.iter().map(|v| v * v).sum::<f64>().sqrt();
    let n: f64 = numeric.iter().map(|v| v * v).sum::<f64>().sqrt();
    diff / (a + n).max(1e-12)
}

/// Central differences with step 1e-6 over every model parameter.
pub fn central_difference(model: &gpada::ModelState, f: impl Fn(&gpada::ModelState) -> f64) -> Vec<f64> {
    let h = 1e-6;
    (0..model.num_params())
        .map(|i| {
            let mut plus = model.clone();
            plus.set_param(i, model.param(i) + h);
            let mut minus = model.clone();
            minus.set_param(i, model.param(i) - h);
            (f(&plus) - f(&minus)) / (2.0 * h)
        })
        .collect()
}

pub fn random_model(rng: &mut Stream, classes: usize, dim: usize) -> gpada::ModelState {
    let w = (0..classes * dim).map(|_| rng.range(-1.5, 1.5)).collect();
    let b = (0..classes).map(|_| rng.range(-0.5, 0.5)).collect();
    gpada::ModelState::from_parts(classes, dim, w, b).unwrap()
}
