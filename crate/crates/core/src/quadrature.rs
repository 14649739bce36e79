//! Gauss–Jacobi quadrature for the weight `(1 - x)^gamma (1 + x)^alpha`.
//!
//! Nodes start from the eigenvalues of the symmetric Jacobi matrix
//! (Golub–Welsch), are polished by Newton steps on the orthonormal polynomial
//! of degree `n`, and the weights come from the Christoffel function
//! `1 / sum_{i<n} p_i(x)^2`, which avoids the eigenvector round-off of the
//! textbook weight formula.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::jacobi::{recurrence, JacobiParams, Recurrence};

#[derive(Debug, Clone, PartialEq)]
pub struct GaussJacobi {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussJacobi {
    /// `n`-point rule, exact for polynomials of degree `2n - 1`. Nodes ascend.
    pub fn new(params: JacobiParams, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain(format!(
                "Gauss-Jacobi rule needs at least 2 nodes, got {n}"
            )));
        }
        let rec = recurrence(params, n);
        let mut nodes = jacobi_matrix_eigenvalues(&rec, n);
        for x in nodes.iter_mut() {
            *x = newton_polish(&rec, n, *x);
        }
        nodes.sort_by(f64::total_cmp);
        let weights = nodes.iter().map(|&x| christoffel(&rec, n, x)).collect();
        Ok(Self { nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

fn jacobi_matrix_eigenvalues(rec: &Recurrence, n: usize) -> Vec<f64> {
    let mut m = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = rec.diag[i];
        if i + 1 < n {
            m[(i, i + 1)] = rec.off[i];
            m[(i + 1, i)] = rec.off[i];
        }
    }
    m.symmetric_eigenvalues().iter().copied().collect()
}

/// Orthonormal `p_n(x)` and `p_n'(x)` by the three-term recurrence.
fn orthonormal_with_derivative(rec: &Recurrence, n: usize, x: f64) -> (f64, f64) {
    let (mut p_prev, mut p) = (0.0, rec.p0);
    let (mut d_prev, mut d) = (0.0, 0.0);
    for i in 0..n {
        let b_prev = if i == 0 { 0.0 } else { rec.off[i - 1] };
        let p_next = ((x - rec.diag[i]) * p - b_prev * p_prev) / rec.off[i];
        let d_next = ((x - rec.diag[i]) * d + p - b_prev * d_prev) / rec.off[i];
        p_prev = p;
        p = p_next;
        d_prev = d;
        d = d_next;
    }
    (p, d)
}

fn newton_polish(rec: &Recurrence, n: usize, mut x: f64) -> f64 {
    for _ in 0..8 {
        let (p, d) = orthonormal_with_derivative(rec, n, x);
        if d == 0.0 {
            break;
        }
        let step = p / d;
        let next = (x - step).clamp(-1.0, 1.0);
        let moved = (next - x).abs();
        x = next;
        if moved <= 4.0 * f64::EPSILON * x.abs().max(1e-300) {
            break;
        }
    }
    x
}

fn christoffel(rec: &Recurrence, n: usize, x: f64) -> f64 {
    let (mut p_prev, mut p) = (0.0, rec.p0);
    let mut sum = p * p;
    for i in 0..n - 1 {
        let b_prev = if i == 0 { 0.0 } else { rec.off[i - 1] };
        let p_next = ((x - rec.diag[i]) * p - b_prev * p_prev) / rec.off[i];
        p_prev = p;
        p = p_next;
        sum += p * p;
    }
    1.0 / sum
}
