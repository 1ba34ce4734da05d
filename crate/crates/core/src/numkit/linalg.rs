use super::matrix::{axpy, dot, Matrix};
use crate::error::{Error, Result};

const SYMMETRY_TOL: f64 = 1e-10;
const JITTER_START: f64 = 1e-8;
const JITTER_CAP: f64 = 1e-2;

/// Lower-triangular Cholesky factor together with the diagonal jitter that
/// was needed to obtain it.
#[derive(Clone, Debug)]
pub struct Cholesky {
    pub factor: Matrix,
    pub jitter: f64,
}

impl Cholesky {
    pub fn dim(&self) -> usize {
        self.factor.rows()
    }

    /// Solves `(L Lᵀ) x = b`.
    pub fn solve_vec(&self, b: &[f64]) -> Result<Vec<f64>> {
        let z = solve_lower_vec(&self.factor, b)?;
        solve_upper_vec(&self.factor, &z)
    }

    pub fn log_det(&self) -> f64 {
        log_det_from_cholesky(&self.factor)
    }
}

/// Factorizes `A + jitter·I = L Lᵀ`.
///
/// If the factorization fails the jitter is escalated geometrically (×10),
/// starting from `1e-8 × mean diagonal` when `jitter` is zero, until it
/// succeeds or the jitter would exceed `1e-2 × mean diagonal`.
pub fn cholesky(a: &Matrix, jitter: f64) -> Result<Cholesky> {
    let n = a.rows();
    if a.cols() != n {
        return Err(Error::DimensionMismatch(format!("cholesky of a {}x{} matrix", n, a.cols())));
    }
    if n == 0 {
        return Ok(Cholesky { factor: Matrix::zeros(0, 0), jitter });
    }
    check_symmetric(a)?;

    let mean_diag = a.diagonal().iter().sum::<f64>() / n as f64;
    let scale = if mean_diag.is_finite() && mean_diag > 0.0 { mean_diag } else { 1.0 };
    let cap = JITTER_CAP * scale;

    let mut current = jitter.max(0.0);
    loop {
        if let Some(factor) = try_cholesky(a, current) {
            return Ok(Cholesky { factor, jitter: current });
        }
        let next = if current <= 0.0 { JITTER_START * scale } else { current * 10.0 };
        if next > cap * (1.0 + 1e-9) {
            return Err(Error::NotPositiveDefinite { jitter: current });
        }
        current = next;
    }
}

fn check_symmetric(a: &Matrix) -> Result<()> {
    let n = a.rows();
    let max_abs = a.as_slice().iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..i {
            worst = worst.max((a[(i, j)] - a[(j, i)]).abs());
        }
    }
    let rel = worst / max_abs.max(f64::MIN_POSITIVE);
    if rel > SYMMETRY_TOL {
        return Err(Error::NotSymmetric(rel));
    }
    Ok(())
}

/// Row-oriented Cholesky–Banachiewicz; reads only the lower triangle.
fn try_cholesky(a: &Matrix, jitter: f64) -> Option<Matrix> {
    let n = a.rows();
    let mut l = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let (ri, rj) = if i == j {
                let r = l.row(i);
                (&r[..j], &r[..j])
            } else {
                // rows i and j live in disjoint parts of the buffer
                let data = l.as_slice();
                (&data[i * n..i * n + j], &data[j * n..j * n + j])
            };
            let s = a[(i, j)] - dot(ri, rj);
            if i == j {
                let d = s + jitter;
                if !(d > 0.0) || !d.is_finite() {
                    return None;
                }
                l[(i, i)] = d.sqrt();
            } else {
                l[(i, j)] = s / l[(j, j)];
            }
        }
    }
    Some(l)
}

/// Solves `L X = B` (or `Lᵀ X = B` when `transposed`) for lower-triangular `L`.
pub fn tri_solve(l: &Matrix, b: &Matrix, transposed: bool) -> Result<Matrix> {
    let n = l.rows();
    if l.cols() != n || b.rows() != n {
        return Err(Error::DimensionMismatch(format!(
            "tri_solve with L {}x{} and B {}x{}",
            n,
            l.cols(),
            b.rows(),
            b.cols()
        )));
    }
    check_diagonal(l)?;
    let m = b.cols();
    let mut x = b.clone();
    if !transposed {
        for i in 0..n {
            let (done, rest) = x.as_mut_slice().split_at_mut(i * m);
            let xi = &mut rest[..m];
            for k in 0..i {
                let lik = l[(i, k)];
                if lik != 0.0 {
                    axpy(-lik, &done[k * m..(k + 1) * m], xi);
                }
            }
            let inv = 1.0 / l[(i, i)];
            xi.iter_mut().for_each(|v| *v *= inv);
        }
    } else {
        for i in (0..n).rev() {
            let (head, tail) = x.as_mut_slice().split_at_mut((i + 1) * m);
            let xi = &mut head[i * m..];
            for k in i + 1..n {
                let lki = l[(k, i)];
                if lki != 0.0 {
                    axpy(-lki, &tail[(k - i - 1) * m..(k - i) * m], xi);
                }
            }
            let inv = 1.0 / l[(i, i)];
            xi.iter_mut().for_each(|v| *v *= inv);
        }
    }
    Ok(x)
}

fn check_diagonal(l: &Matrix) -> Result<()> {
    for i in 0..l.rows() {
        let d = l[(i, i)];
        if d == 0.0 || !d.is_finite() {
            return Err(Error::SingularTriangular(i));
        }
    }
    Ok(())
}

/// Forward substitution `L x = b`.
pub fn solve_lower_vec(l: &Matrix, b: &[f64]) -> Result<Vec<f64>> {
    let n = l.rows();
    if b.len() != n {
        return Err(Error::DimensionMismatch(format!("solve_lower_vec: {} vs {}", n, b.len())));
    }
    let mut x = vec![0.0; n];
    for i in 0..n {
        let d = l[(i, i)];
        if d == 0.0 || !d.is_finite() {
            return Err(Error::SingularTriangular(i));
        }
        x[i] = (b[i] - dot(&l.row(i)[..i], &x[..i])) / d;
    }
    Ok(x)
}

/// Back substitution `Lᵀ x = b`.
pub fn solve_upper_vec(l: &Matrix, b: &[f64]) -> Result<Vec<f64>> {
    let n = l.rows();
    if b.len() != n {
        return Err(Error::DimensionMismatch(format!("solve_upper_vec: {} vs {}", n, b.len())));
    }
    check_diagonal(l)?;
    let mut x = b.to_vec();
    for i in (0..n).rev() {
        x[i] /= l[(i, i)];
        let xi = x[i];
        let row = l.row(i);
        for k in 0..i {
            x[k] -= row[k] * xi;
        }
    }
    Ok(x)
}

/// `(L Lᵀ)⁻¹` from a Cholesky factor.
pub fn cholesky_inverse(l: &Matrix) -> Result<Matrix> {
    let w = tri_solve(l, &Matrix::identity(l.rows()), false)?;
    Ok(w.matmul_tn(&w))
}

pub fn log_det_from_cholesky(l: &Matrix) -> f64 {
    2.0 * l.diagonal().iter().map(|d| d.ln()).sum::<f64>()
}

/// Next row of a semidefinite Cholesky factor.
///
/// Given a factor whose first `cross.len()` rows are filled, the new column `cross`
/// (covariances with the leading variables) and `diag` (the new variance),
/// returns the row entries and the new pivot. Pivots at or below
/// `tol` are treated as zero and their columns skipped, so rank-deficient
/// covariances factor without jitter.
pub fn semidefinite_row(l: &Matrix, cross: &[f64], diag: f64, tol: f64) -> (Vec<f64>, f64) {
    let k = cross.len();
    debug_assert!(l.rows() >= k);
    let mut row = vec![0.0; k];
    for j in 0..k {
        let ljj = l[(j, j)];
        if ljj > tol {
            row[j] = (cross[j] - dot(&l.row(j)[..j], &row[..j])) / ljj;
        }
    }
    let rest = diag - dot(&row, &row);
    let pivot = if rest > tol * tol { rest.sqrt() } else { 0.0 };
    (row, pivot)
}

/// Semidefinite Cholesky factor built row by row with [`semidefinite_row`].
pub fn semidefinite_cholesky(a: &Matrix) -> Result<Matrix> {
    let n = a.rows();
    if a.cols() != n {
        return Err(Error::DimensionMismatch(format!("cholesky of a {}x{} matrix", n, a.cols())));
    }
    let tol = semidefinite_tol(&a.diagonal());
    let mut l = Matrix::zeros(n, n);
    for i in 0..n {
        let (row, pivot) = semidefinite_row(&l, &a.row(i)[..i], a[(i, i)], tol);
        l.row_mut(i)[..i].copy_from_slice(&row);
        l[(i, i)] = pivot;
    }
    Ok(l)
}

/// Pivot threshold relative to the largest variance.
pub fn semidefinite_tol(diag: &[f64]) -> f64 {
    let scale = diag.iter().fold(0.0f64, |m, &d| m.max(d.abs()));
    1e-7 * scale.max(1e-300).sqrt()
}
