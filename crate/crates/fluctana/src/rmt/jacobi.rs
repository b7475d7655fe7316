//! Cyclic Jacobi eigensolver for real symmetric matrices.
//!
//! Plane rotations annihilate one off-diagonal element at a time; repeated
//! sweeps drive the off-diagonal norm below tolerance. Only eigenvalues
//! are accumulated. Rotation formulas follow Numerical Recipes Section 11.1.

use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 60;

fn off_diagonal_norm(a: &[f64], n: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            s += a[i * n + j] * a[i * n + j];
        }
    }
    (2.0 * s).sqrt()
}

/// Eigenvalues of a symmetric matrix in ascending order.
///
/// `matrix` is row-major n x n; symmetry is checked up to 1e-12 on the
/// magnitude of the largest element.
pub fn eigenvalues_sym(matrix: &[f64], n: usize) -> Result<Vec<f64>> {
    if matrix.len() != n * n {
        return Err(Error::Parameter(format!(
            "matrix buffer has {} entries, expected {}",
            matrix.len(),
            n * n
        )));
    }
    let scale = matrix.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for i in 0..n {
        for j in i + 1..n {
            if (matrix[i * n + j] - matrix[j * n + i]).abs() > 1e-12 * scale.max(1.0) {
                return Err(Error::Parameter(format!(
                    "matrix not symmetric at ({i}, {j})"
                )));
            }
        }
    }

    let mut a = matrix.to_vec();
    let frob = (matrix.iter().map(|v| v * v).sum::<f64>()).sqrt();
    let tol = 1e-12 * frob.max(1.0);

    for _sweep in 0..MAX_SWEEPS {
        if off_diagonal_norm(&a, n) <= tol {
            let mut eigs: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
            eigs.sort_by(|x, y| x.partial_cmp(y).unwrap());
            return Ok(eigs);
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (theta * theta + 1.0).sqrt())
                } else {
                    -1.0 / (-theta + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let tau = s / (1.0 + c);
                a[p * n + p] = app - t * apq;
                a[q * n + q] = aqq + t * apq;
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for i in 0..n {
                    if i == p || i == q {
                        continue;
                    }
                    let aip = a[i * n + p];
                    let aiq = a[i * n + q];
                    let new_ip = aip - s * (aiq + tau * aip);
                    let new_iq = aiq + s * (aip - tau * aiq);
                    a[i * n + p] = new_ip;
                    a[p * n + i] = new_ip;
                    a[i * n + q] = new_iq;
                    a[q * n + i] = new_iq;
                }
            }
        }
    }
    Err(Error::Numerical(format!(
        "Jacobi did not converge in {MAX_SWEEPS} sweeps (off-diagonal norm {:.3e})",
        off_diagonal_norm(&a, n)
    )))
}
