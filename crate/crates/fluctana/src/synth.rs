//! Seeded synthetic generators used as analytic oracles: white noise,
//! deterministic binomial cascades, GOE matrices and Wishart-type panels.
//!
//! All randomness comes from ChaCha8 seeded with a 64-bit value, and
//! Gaussians are produced by the Box-Muller transform, so a fixed number
//! of uniform draws maps to a fixed output sequence on every platform.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::wbfe::FluctuationPanel;

/// Parameters of one synthetic fixture.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SyntheticSpec {
    WhiteNoise { length: usize, seed: u64 },
    BinomialCascade { levels: u32, p: f64 },
    Goe { size: usize, seed: u64 },
    WishartPanel { n_series: usize, length: usize, seed: u64 },
}

pub fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// One standard Gaussian via Box-Muller; consumes exactly two uniforms.
pub fn gaussian<R: RngCore>(rng: &mut R) -> f64 {
    let u1: f64 = 1.0 - rng.gen::<f64>(); // (0, 1]
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// i.i.d. standard Gaussian vector, deterministic per seed.
pub fn white_noise(length: usize, seed: u64) -> Vec<f64> {
    let mut rng = rng_for(seed);
    (0..length).map(|_| gaussian(&mut rng)).collect()
}

/// Deterministic multiplicative binomial cascade: at every level the left
/// half of each cell receives weight p and the right half 1 - p. The
/// output has length 2^levels and sums to 1.
///
/// Its generalized Hurst exponent has the closed form
/// `h(q) = 1/q - ln(p^q + (1-p)^q) / (q ln 2)`.
pub fn binomial_cascade(levels: u32, p: f64) -> Result<Vec<f64>> {
    // p = 0.5 is the flat monofractal limit; allowed for the collapse tests
    if !(0.5..1.0).contains(&p) {
        return Err(Error::Parameter(format!(
            "cascade weight p = {p} outside [0.5, 1)"
        )));
    }
    if levels < 1 {
        return Err(Error::Parameter("cascade needs at least 1 level".into()));
    }
    let n = 1usize << levels;
    let mut values = vec![1.0; n];
    let mut cell = n;
    for _ in 0..levels {
        let half = cell / 2;
        for start in (0..n).step_by(cell) {
            for v in &mut values[start..start + half] {
                *v *= p;
            }
            for v in &mut values[start + half..start + cell] {
                *v *= 1.0 - p;
            }
        }
        cell = half;
    }
    Ok(values)
}

/// Closed-form h(q) of the binomial cascade, used as the oracle for the
/// multifractal estimates. Only valid for q != 0.
pub fn cascade_hurst_exact(p: f64, q: f64) -> f64 {
    1.0 / q - (p.powf(q) + (1.0 - p).powf(q)).ln() / (q * std::f64::consts::LN_2)
}

/// GOE-distributed symmetric matrix (M + M^T)/2 with i.i.d. standard
/// Gaussian M; diagonal variance is twice the off-diagonal variance.
/// Returned in row-major order.
pub fn goe_matrix(size: usize, seed: u64) -> Result<Vec<f64>> {
    if size < 2 {
        return Err(Error::Parameter(format!("GOE size {size} < 2")));
    }
    let mut rng = rng_for(seed);
    let m: Vec<f64> = (0..size * size).map(|_| gaussian(&mut rng)).collect();
    let mut a = vec![0.0; size * size];
    for i in 0..size {
        for j in 0..size {
            a[i * size + j] = 0.5 * (m[i * size + j] + m[j * size + i]);
        }
    }
    Ok(a)
}

/// Panel of i.i.d. standard Gaussian rows; its correlation spectrum is the
/// Marchenko-Pastur oracle.
pub fn wishart_panel(n_series: usize, length: usize, seed: u64) -> Result<FluctuationPanel> {
    if length <= n_series {
        return Err(Error::Parameter(format!(
            "need length > n_series, got {length} <= {n_series}"
        )));
    }
    let mut rng = rng_for(seed);
    let tickers = (0..n_series).map(|i| format!("SYN{i:04}")).collect();
    let rows = (0..n_series)
        .map(|_| (0..length).map(|_| gaussian(&mut rng)).collect())
        .collect();
    FluctuationPanel::from_rows(0, tickers, rows)
}
