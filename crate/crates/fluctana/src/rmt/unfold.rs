//! Eigenvalue unfolding by a smooth polynomial fit of the cumulative
//! spectral function, plus nearest-neighbor spacings.

use serde::Serialize;

use crate::error::{Error, Result};

/// Unfolded spectrum: raw sorted eigenvalues, their images under the
/// smooth cumulative fit, and consecutive spacings (mean approximately 1).
#[derive(Debug, Clone, Serialize)]
pub struct UnfoldedSpectrum {
    pub raw: Vec<f64>,
    pub unfolded: Vec<f64>,
    pub spacings: Vec<f64>,
    pub unfolding_degree: usize,
}

/// Chebyshev-basis least squares of y on x mapped to [-1, 1].
/// Returns coefficients plus the normal-matrix pivot ratio used as a
/// conditioning estimate.
fn cheb_fit(x: &[f64], y: &[f64], degree: usize) -> Result<(Vec<f64>, f64, f64)> {
    let n = x.len();
    let m = degree + 1;
    let lo = x[0];
    let hi = x[n - 1];
    if hi <= lo {
        return Err(Error::Unfolding("eigenvalue range is empty".into()));
    }
    let map = |v: f64| 2.0 * (v - lo) / (hi - lo) - 1.0;

    // design matrix rows: T_0(u) .. T_degree(u)
    let mut gram = vec![0.0; m * m];
    let mut rhs = vec![0.0; m];
    let mut row = vec![0.0; m];
    for (xi, yi) in x.iter().zip(y) {
        let u = map(*xi);
        row[0] = 1.0;
        if m > 1 {
            row[1] = u;
        }
        for k in 2..m {
            row[k] = 2.0 * u * row[k - 1] - row[k - 2];
        }
        for i in 0..m {
            for j in 0..m {
                gram[i * m + j] += row[i] * row[j];
            }
            rhs[i] += row[i] * yi;
        }
    }

    // Gaussian elimination with partial pivoting
    let mut a = gram;
    let mut b = rhs;
    let mut max_pivot = 0.0f64;
    let mut min_pivot = f64::INFINITY;
    for col in 0..m {
        let (pr, pv) = (col..m)
            .map(|r| (r, a[r * m + col].abs()))
            .max_by(|x, y| x.1.partial_cmp(&y.1).unwrap())
            .unwrap();
        if pv == 0.0 {
            return Err(Error::Unfolding(
                "singular normal equations; try a lower degree".into(),
            ));
        }
        if pr != col {
            for k in 0..m {
                a.swap(col * m + k, pr * m + k);
            }
            b.swap(col, pr);
        }
        max_pivot = max_pivot.max(pv);
        min_pivot = min_pivot.min(pv);
        for r in col + 1..m {
            let f = a[r * m + col] / a[col * m + col];
            for k in col..m {
                a[r * m + k] -= f * a[col * m + k];
            }
            b[r] -= f * b[col];
        }
    }
    let mut coeffs = vec![0.0; m];
    for col in (0..m).rev() {
        let mut v = b[col];
        for k in col + 1..m {
            v -= a[col * m + k] * coeffs[k];
        }
        coeffs[col] = v / a[col * m + col];
    }

    if min_pivot < 1e-13 * max_pivot {
        return Err(Error::Unfolding(format!(
            "ill-conditioned fit (pivot ratio {:.2e}); try a lower degree",
            min_pivot / max_pivot
        )));
    }
    Ok((coeffs, lo, hi))
}

fn cheb_eval(coeffs: &[f64], lo: f64, hi: f64, v: f64) -> f64 {
    let u = 2.0 * (v - lo) / (hi - lo) - 1.0;
    let mut acc = coeffs[0];
    if coeffs.len() > 1 {
        acc += coeffs[1] * u;
    }
    let mut t_prev = 1.0;
    let mut t = u;
    for c in coeffs.iter().skip(2) {
        let t_next = 2.0 * u * t - t_prev;
        acc += c * t_next;
        t_prev = t;
        t = t_next;
    }
    acc
}

/// Fit the empirical cumulative spectral function with a smooth polynomial
/// and map each eigenvalue through it.
///
/// The input must be sorted ascending. A running maximum keeps the
/// unfolded sequence non-decreasing where the fit wiggles; repeated
/// eigenvalues keep their zero spacings.
pub fn unfold_eigenvalues(eigs: &[f64], degree: usize) -> Result<UnfoldedSpectrum> {
    let n = eigs.len();
    if n < 20 {
        return Err(Error::Unfolding(format!(
            "need at least 20 eigenvalues, got {n}"
        )));
    }
    if degree < 3 {
        return Err(Error::Unfolding(format!(
            "unfolding degree {degree} < 3"
        )));
    }
    if eigs.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Unfolding("eigenvalues must be sorted ascending".into()));
    }
    // staircase midpoints of the cumulative count
    let counts: Vec<f64> = (0..n).map(|i| i as f64 + 0.5).collect();
    let (coeffs, lo, hi) = cheb_fit(eigs, &counts, degree)?;
    let mut unfolded: Vec<f64> = eigs
        .iter()
        .map(|v| cheb_eval(&coeffs, lo, hi, *v))
        .collect();
    // running maximum: the fit may wiggle locally, the unfolded sequence
    // must not decrease; repeated raw eigenvalues already map to identical
    // unfolded values
    let mut running = f64::NEG_INFINITY;
    for v in unfolded.iter_mut() {
        if *v < running {
            *v = running;
        }
        running = *v;
    }
    let spacings = unfolded.windows(2).map(|w| w[1] - w[0]).collect();
    Ok(UnfoldedSpectrum {
        raw: eigs.to_vec(),
        unfolded,
        spacings,
        unfolding_degree: degree,
    })
}

/// Nearest-neighbor spacings of an unfolded spectrum (k = 1).
pub fn nn_spacings(unfolded: &UnfoldedSpectrum) -> &[f64] {
    &unfolded.spacings
}
