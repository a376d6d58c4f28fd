use super::sparse::CsrMatrix;
use super::SolverError;
use crate::par::Exec;

#[derive(Debug, Clone, PartialEq)]
pub struct CgInfo {
    pub iterations: usize,
    /// Final relative residual `|r| / |b|`.
    pub residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Jacobi-preconditioned conjugate gradients from a zero initial guess,
/// stopped when `|r| <= tol |b|`.
pub fn solve_cg(a: &CsrMatrix, b: &[f64], tol: f64, max_iter: usize, exec: Exec) -> Result<(Vec<f64>, CgInfo), SolverError> {
    let n = a.n;
    let mut x = vec![0.0; n];
    let bnorm = dot(b, b).sqrt();
    if bnorm == 0.0 {
        return Ok((x, CgInfo { iterations: 0, residual: 0.0 }));
    }
    let inv_diag: Vec<f64> = a.diagonal().iter().map(|&d| if d > 0.0 { 1.0 / d } else { 1.0 }).collect();
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut res = 1.0;
    for it in 0..max_iter {
        let ap = a.matvec(&p, exec);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(SolverError::NoConvergence { iterations: it, residual: res });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        res = dot(&r, &r).sqrt() / bnorm;
        if res <= tol {
            return Ok((x, CgInfo { iterations: it + 1, residual: res }));
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(SolverError::NoConvergence { iterations: max_iter, residual: res })
}
