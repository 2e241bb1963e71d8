//! Dominant eigenpair of a nonnegative matrix.

use crate::error::{Error, Result};

/// Dominant eigenvalue and unit-norm eigenvector.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigenpair {
    pub value: f64,
    pub vector: Vec<f64>,
    pub iterations: usize,
}

fn mat_vec(matrix: &[Vec<f64>], x: &[f64], out: &mut [f64]) {
    for (o, row) in out.iter_mut().zip(matrix) {
        *o = row.iter().zip(x).map(|(a, b)| a * b).sum();
    }
}

fn normalize(v: &mut [f64]) -> f64 {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    norm
}

/// Power iteration for the Perron root of a square nonnegative matrix.
///
/// Converges when the Rayleigh quotient and the eigen-residual both fall
/// below `tol`. A deflated second iteration then checks that the found value
/// really is the largest in magnitude.
pub fn dominant_eigenpair(matrix: &[Vec<f64>], tol: f64, max_iter: usize) -> Result<Eigenpair> {
    let n = matrix.len();
    if n == 0 || matrix.iter().any(|row| row.len() != n) {
        return Err(Error::InvalidParameter { name: "matrix", value: n as f64, reason: "must be square and non-empty" });
    }
    let mut x = vec![1.0 / (n as f64).sqrt(); n];
    let mut y = vec![0.0; n];
    let mut lambda = 0.0;
    let mut residual = f64::INFINITY;
    for it in 1..=max_iter {
        mat_vec(matrix, &x, &mut y);
        let rq: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        residual = x.iter().zip(&y).map(|(a, b)| (b - rq * a).powi(2)).sum::<f64>().sqrt();
        let norm = normalize(&mut y);
        if norm == 0.0 {
            return Ok(Eigenpair { value: 0.0, vector: x, iterations: it });
        }
        std::mem::swap(&mut x, &mut y);
        let change = (rq - lambda).abs();
        lambda = rq;
        if change <= tol * rq.abs().max(1e-300) && residual <= tol * rq.abs().max(1e-300) {
            check_deflated(matrix, &x, lambda, tol, max_iter)?;
            return Ok(Eigenpair { value: lambda, vector: x, iterations: it });
        }
    }
    Err(Error::NoConvergence { what: "power iteration", residual })
}

// Hotelling deflation of a symmetric-like operator: the next eigenvalue must
// not exceed the dominant one.
fn check_deflated(matrix: &[Vec<f64>], v: &[f64], lambda: f64, tol: f64, max_iter: usize) -> Result<()> {
    let n = matrix.len();
    if n < 2 {
        return Ok(());
    }
    let mut x: Vec<f64> = (0..n).map(|i| if i % 2 == 0 { 1.0 } else { -0.5 }).collect();
    let mut y = vec![0.0; n];
    let proj = |x: &mut [f64]| {
        let d: f64 = x.iter().zip(v).map(|(a, b)| a * b).sum();
        x.iter_mut().zip(v).for_each(|(a, b)| *a -= d * b);
    };
    proj(&mut x);
    if normalize(&mut x) == 0.0 {
        return Ok(());
    }
    let mut mu = 0.0;
    for _ in 0..max_iter.min(200) {
        mat_vec(matrix, &x, &mut y);
        proj(&mut y);
        mu = x.iter().zip(&y).map(|(a, b)| a * b).sum::<f64>();
        if normalize(&mut y) == 0.0 {
            return Ok(());
        }
        std::mem::swap(&mut x, &mut y);
    }
    if mu.abs() > lambda.abs() * (1.0 + tol.sqrt()) {
        return Err(Error::NoConvergence { what: "power iteration (deflated eigenvalue exceeds dominant)", residual: mu });
    }
    Ok(())
}
