//! Multifractal detrended fluctuation analysis of extracted fluctuations.
//!
//! Segment variances are taken about zero (the extraction already removed
//! the local trend), the series is segmented from both ends, and the
//! q-order fluctuation function uses the analytic q -> 0 limit
//! `F_0(s) = exp[(1/(4 N_s)) sum ln sigma^2]`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ingest::Profile;
use crate::wavelet::{max_levels, WaveletFilter};
use crate::wbfe::extract_fluctuations;

/// q values treated as the q = 0 limit.
const Q_ZERO_EPS: f64 = 1e-12;

/// Default moment grid: -5 to 5 in steps of 0.25.
pub fn default_q_grid() -> Vec<f64> {
    (0..=40).map(|i| -5.0 + 0.25 * i as f64).collect()
}

/// Per-segment mean-square fluctuation about zero, 2*N_s segments:
/// N_s = floor(T/s) from the start and the same count from the end.
pub fn segment_variances(values: &[f64], s: usize) -> Result<Vec<f64>> {
    if s == 0 {
        return Err(Error::Parameter("segment size must be positive".into()));
    }
    let t = values.len();
    let n_s = t / s;
    if 2 * n_s < 4 {
        return Err(Error::InsufficientData(format!(
            "segment size {s} on length {t} gives {} segments, need at least 4",
            2 * n_s
        )));
    }
    let mut out = Vec::with_capacity(2 * n_s);
    for k in 0..n_s {
        let seg = &values[k * s..(k + 1) * s];
        out.push(seg.iter().map(|v| v * v).sum::<f64>() / s as f64);
    }
    for k in 0..n_s {
        let end = t - k * s;
        let seg = &values[end - s..end];
        out.push(seg.iter().map(|v| v * v).sum::<f64>() / s as f64);
    }
    Ok(out)
}

/// F_q(s) over a grid of moments and segment sizes.
#[derive(Debug, Clone, Serialize)]
pub struct FluctuationFunction {
    pub q_grid: Vec<f64>,
    pub s_grid: Vec<usize>,
    /// values[qi][si] = F_{q_grid[qi]}(s_grid[si])
    pub values: Vec<Vec<f64>>,
}

fn f_q_from_variances(variances: &[f64], q: f64, s: usize) -> Result<f64> {
    let n = variances.len() as f64;
    if q.abs() < Q_ZERO_EPS || q < 0.0 {
        if let Some(idx) = variances.iter().position(|v| *v == 0.0) {
            return Err(Error::DegenerateSegment { index: idx, s });
        }
    }
    if q.abs() < Q_ZERO_EPS {
        // analytic limit of the generalized mean
        let mean_log: f64 = variances.iter().map(|v| v.ln()).sum::<f64>() / (2.0 * n);
        return Ok(mean_log.exp());
    }
    // log-sum-exp keeps extreme moments finite
    let half_q = 0.5 * q;
    let logs: Vec<f64> = variances.iter().map(|v| half_q * v.ln()).collect();
    let m = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        // every sigma^2 = 0 with q > 0
        return Ok(0.0);
    }
    let sum: f64 = logs.iter().map(|l| (l - m).exp()).sum();
    Ok(((m + (sum / n).ln()) / q).exp())
}

/// Evaluate F_q(s) for one fluctuation series over explicit grids.
pub fn fluctuation_function(
    values: &[f64],
    q_grid: &[f64],
    s_grid: &[usize],
) -> Result<FluctuationFunction> {
    if !s_grid.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::Grid("s grid must be strictly increasing".into()));
    }
    let per_s: Vec<Vec<f64>> = s_grid
        .iter()
        .map(|&s| segment_variances(values, s))
        .collect::<Result<_>>()?;
    let mut out = vec![vec![0.0; s_grid.len()]; q_grid.len()];
    for (qi, &q) in q_grid.iter().enumerate() {
        for (si, variances) in per_s.iter().enumerate() {
            out[qi][si] = f_q_from_variances(variances, q, s_grid[si])?;
        }
    }
    Ok(FluctuationFunction {
        q_grid: q_grid.to_vec(),
        s_grid: s_grid.to_vec(),
        values: out,
    })
}

/// Scale-coupled fluctuation function: for each wavelet scale `a`, extract
/// the fluctuation series at that scale and evaluate F_q at the single
/// segment size s = 2^(a-1) * W tied to it.
///
/// This is the pooled route used for h(q) estimation: a fluctuation series
/// extracted at scale `a` is band-limited, so its segment statistics only
/// scale when the window matches the scale.
pub fn multiscale_fluctuation_function(
    profile: &Profile,
    filter: &WaveletFilter,
    scales: &[usize],
    q_grid: &[f64],
) -> Result<FluctuationFunction> {
    if scales.is_empty() {
        return Err(Error::Grid("no scales given".into()));
    }
    let t = profile.len();
    let max = max_levels(t);
    let w = filter.support_width();
    let mut s_grid = Vec::with_capacity(scales.len());
    let mut columns = Vec::with_capacity(scales.len());
    for &a in scales {
        if a == 0 || a > max {
            return Err(Error::ScaleRange {
                scale: a,
                max,
                len: t,
            });
        }
        let s = (1usize << (a - 1)) * w;
        if t / s < 2 {
            break; // deeper scales have too few segments
        }
        let z = extract_fluctuations(profile, filter, a)?;
        let variances = segment_variances(z.values(), s)?;
        s_grid.push(s);
        let col: Vec<f64> = q_grid
            .iter()
            .map(|&q| f_q_from_variances(&variances, q, s))
            .collect::<Result<_>>()?;
        columns.push(col);
    }
    if s_grid.len() < 2 {
        return Err(Error::InsufficientData(
            "fewer than 2 usable scales for the multiscale fluctuation function".into(),
        ));
    }
    let values = (0..q_grid.len())
        .map(|qi| columns.iter().map(|c| c[qi]).collect())
        .collect();
    Ok(FluctuationFunction {
        q_grid: q_grid.to_vec(),
        s_grid,
        values,
    })
}

/// Generalized Hurst exponents with per-q fit quality.
#[derive(Debug, Clone, Serialize)]
pub struct HurstEstimate {
    pub q_grid: Vec<f64>,
    pub h: Vec<f64>,
    pub r_squared: Vec<f64>,
}

fn log_log_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - (my + slope * (x - mx))).powi(2))
        .sum();
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let r2 = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    (slope, r2)
}

/// h(q) = slope of ln F_q(s) against ln s inside `fit_range` (inclusive).
pub fn generalized_hurst(
    ff: &FluctuationFunction,
    fit_range: (f64, f64),
) -> Result<HurstEstimate> {
    let (lo, hi) = fit_range;
    let idx: Vec<usize> = ff
        .s_grid
        .iter()
        .enumerate()
        .filter(|(_, s)| (**s as f64) >= lo && (**s as f64) <= hi)
        .map(|(i, _)| i)
        .collect();
    if idx.len() < 4 {
        return Err(Error::FitRange(format!(
            "only {} s-points inside [{lo}, {hi}], need at least 4",
            idx.len()
        )));
    }
    let xs: Vec<f64> = idx.iter().map(|&i| (ff.s_grid[i] as f64).ln()).collect();
    let mut h = Vec::with_capacity(ff.q_grid.len());
    let mut r_squared = Vec::with_capacity(ff.q_grid.len());
    for row in &ff.values {
        let ys: Vec<f64> = idx.iter().map(|&i| row[i].ln()).collect();
        if ys.iter().any(|y| !y.is_finite()) {
            return Err(Error::Numerical(
                "nonpositive fluctuation function value in fit range".into(),
            ));
        }
        let (slope, r2) = log_log_fit(&xs, &ys);
        h.push(slope);
        r_squared.push(r2);
    }
    Ok(HurstEstimate {
        q_grid: ff.q_grid.clone(),
        h,
        r_squared,
    })
}

/// tau(q) = q h(q) - 1, pointwise.
pub fn scaling_exponent(q_grid: &[f64], h: &[f64]) -> Vec<f64> {
    q_grid.iter().zip(h).map(|(q, h)| q * h - 1.0).collect()
}

/// Singularity strengths and spectrum from the Legendre transform.
#[derive(Debug, Clone, Serialize)]
pub struct SingularitySpectrum {
    pub beta: Vec<f64>,
    pub f_beta: Vec<f64>,
}

/// beta = dtau/dq by central differences (one-sided at the endpoints),
/// f(beta) = q beta - tau(q). Requires a uniform q grid of at least 5 points.
pub fn singularity_spectrum(q_grid: &[f64], tau: &[f64]) -> Result<SingularitySpectrum> {
    let n = q_grid.len();
    if n < 5 {
        return Err(Error::Grid(format!("need at least 5 q points, got {n}")));
    }
    let step = q_grid[1] - q_grid[0];
    if q_grid
        .windows(2)
        .any(|w| ((w[1] - w[0]) - step).abs() > 1e-9 * step.abs().max(1.0))
    {
        return Err(Error::Grid("q grid is not uniform".into()));
    }
    let mut beta = Vec::with_capacity(n);
    for i in 0..n {
        let d = if i == 0 {
            (tau[1] - tau[0]) / step
        } else if i == n - 1 {
            (tau[n - 1] - tau[n - 2]) / step
        } else {
            (tau[i + 1] - tau[i - 1]) / (2.0 * step)
        };
        beta.push(d);
    }
    let f_beta = (0..n).map(|i| q_grid[i] * beta[i] - tau[i]).collect();
    Ok(SingularitySpectrum { beta, f_beta })
}

/// Full multifractal summary for one fluctuation function.
#[derive(Debug, Clone, Serialize)]
pub struct MultifractalSpectrum {
    pub q_grid: Vec<f64>,
    pub h: Vec<f64>,
    pub tau: Vec<f64>,
    pub beta: Vec<f64>,
    pub f_beta: Vec<f64>,
    pub fit_quality: Vec<f64>,
}

pub fn multifractal_spectrum(
    ff: &FluctuationFunction,
    fit_range: (f64, f64),
) -> Result<MultifractalSpectrum> {
    let hurst = generalized_hurst(ff, fit_range)?;
    let tau = scaling_exponent(&hurst.q_grid, &hurst.h);
    let spectrum = singularity_spectrum(&hurst.q_grid, &tau)?;
    Ok(MultifractalSpectrum {
        q_grid: hurst.q_grid,
        h: hurst.h,
        tau,
        beta: spectrum.beta,
        f_beta: spectrum.f_beta,
        fit_quality: hurst.r_squared,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_series_gives_zero_variances() {
        let v = segment_variances(&vec![0.0; 40], 5).unwrap();
        assert!(v.iter().all(|x| *x == 0.0));
        assert_eq!(v.len(), 16);
    }

    #[test]
    fn floor_segmentation_from_both_ends() {
        // T = 10, s = 3: three forward segments over 1..9, three backward
        // over 2..10
        let values: Vec<f64> = (1..=10).map(|i| i as f64).collect();
        let v = segment_variances(&values, 3).unwrap();
        assert_eq!(v.len(), 6);
        let ms = |a: f64, b: f64, c: f64| (a * a + b * b + c * c) / 3.0;
        assert_abs_diff_eq!(v[0], ms(1.0, 2.0, 3.0), epsilon = 1e-12);
        assert_abs_diff_eq!(v[2], ms(7.0, 8.0, 9.0), epsilon = 1e-12);
        assert_abs_diff_eq!(v[3], ms(8.0, 9.0, 10.0), epsilon = 1e-12);
        assert_abs_diff_eq!(v[5], ms(2.0, 3.0, 4.0), epsilon = 1e-12);
    }

    #[test]
    fn alternating_unit_series_has_unit_variances() {
        let values: Vec<f64> = (0..64).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        for s in [4, 8, 16] {
            let v = segment_variances(&values, s).unwrap();
            assert!(v.iter().all(|x| (*x - 1.0).abs() < 1e-12));
        }
    }

    #[test]
    fn too_few_segments_rejected() {
        assert!(matches!(
            segment_variances(&vec![1.0; 10], 6),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn constant_variances_collapse_all_moments() {
        // alternating +-c: every segment mean-square is c^2, so
        // F_q = c for every q including 0
        let c = 1.7;
        let values: Vec<f64> = (0..128)
            .map(|i| if i % 2 == 0 { c } else { -c })
            .collect();
        let qs = [-4.0, -1.0, 0.0, 1.0, 2.0, 4.0];
        let ff = fluctuation_function(&values, &qs, &[4, 8, 16]).unwrap();
        for row in &ff.values {
            for v in row {
                assert_abs_diff_eq!(*v, c, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn q_two_matches_rms_of_segment_sigmas() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let values: Vec<f64> = (0..256).map(|_| rng.gen::<f64>() - 0.5).collect();
        let s = 16;
        let ff = fluctuation_function(&values, &[2.0], &[8, s, 32]).unwrap();
        let variances = segment_variances(&values, s).unwrap();
        let rms = (variances.iter().sum::<f64>() / variances.len() as f64).sqrt();
        assert_abs_diff_eq!(ff.values[0][1], rms, epsilon = 1e-12);
    }

    #[test]
    fn continuity_at_q_zero_on_white_noise() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let values: Vec<f64> = (0..4096).map(|_| rng.gen::<f64>() - 0.5).collect();
        let ff = fluctuation_function(&values, &[-0.01, 0.0, 0.01], &[16, 32, 64]).unwrap();
        for si in 0..3 {
            let f0 = ff.values[1][si];
            for qi in [0usize, 2] {
                assert!((ff.values[qi][si] - f0).abs() / f0 <= 1e-3);
            }
        }
    }

    #[test]
    fn zero_variance_segment_with_negative_q_is_an_error() {
        let mut values = vec![0.0; 64];
        for (i, v) in values.iter_mut().enumerate().skip(32) {
            *v = (i as f64 * 0.3).sin();
        }
        let err = fluctuation_function(&values, &[-2.0], &[8]).unwrap_err();
        assert!(matches!(err, Error::DegenerateSegment { .. }));
    }

    #[test]
    fn moment_monotonicity_in_q() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let values: Vec<f64> = (0..2048).map(|_| rng.gen::<f64>() - 0.5).collect();
        let qs: Vec<f64> = (0..=16).map(|i| -4.0 + 0.5 * i as f64).collect();
        let ff = fluctuation_function(&values, &qs, &[16, 32, 64, 128]).unwrap();
        for si in 0..ff.s_grid.len() {
            for qi in 1..qs.len() {
                assert!(
                    ff.values[qi][si] >= ff.values[qi - 1][si] - 1e-12,
                    "F not monotone at s index {si}"
                );
            }
        }
    }

    #[test]
    fn exact_power_law_recovers_exponent() {
        let s_grid = vec![8usize, 16, 32, 64, 128, 256];
        let q_grid = vec![-2.0, 0.0, 2.0];
        let values: Vec<Vec<f64>> = q_grid
            .iter()
            .map(|_| s_grid.iter().map(|s| (*s as f64).powf(0.7)).collect())
            .collect();
        let ff = FluctuationFunction {
            q_grid,
            s_grid,
            values,
        };
        let est = generalized_hurst(&ff, (8.0, 256.0)).unwrap();
        for (h, r2) in est.h.iter().zip(&est.r_squared) {
            assert_abs_diff_eq!(*h, 0.7, epsilon = 1e-12);
            assert_abs_diff_eq!(*r2, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn narrow_fit_range_rejected() {
        let s_grid = vec![8usize, 16, 32, 64];
        let ff = FluctuationFunction {
            q_grid: vec![2.0],
            s_grid: s_grid.clone(),
            values: vec![s_grid.iter().map(|s| *s as f64).collect()],
        };
        assert!(matches!(
            generalized_hurst(&ff, (10.0, 40.0)),
            Err(Error::FitRange(_))
        ));
    }

    #[test]
    fn tau_of_constant_h_is_a_line() {
        let q: Vec<f64> = (0..=20).map(|i| -5.0 + 0.5 * i as f64).collect();
        let h = vec![0.5; q.len()];
        let tau = scaling_exponent(&q, &h);
        for (qi, t) in q.iter().zip(&tau) {
            assert_abs_diff_eq!(*t, qi / 2.0 - 1.0, epsilon = 1e-12);
        }
        // tau(0) = -1, tau(2) = 2h(2) - 1
        let zero_idx = q.iter().position(|v| *v == 0.0).unwrap();
        assert_abs_diff_eq!(tau[zero_idx], -1.0, epsilon = 1e-12);
        let two_idx = q.iter().position(|v| *v == 2.0).unwrap();
        assert_abs_diff_eq!(tau[two_idx], 2.0 * 0.5 - 1.0, epsilon = 1e-12);
    }

    #[test]
    fn monofractal_spectrum_collapses() {
        let q: Vec<f64> = (0..=40).map(|i| -5.0 + 0.25 * i as f64).collect();
        let hurst = 0.62;
        let tau: Vec<f64> = q.iter().map(|qi| qi * hurst - 1.0).collect();
        let sp = singularity_spectrum(&q, &tau).unwrap();
        let bmin = sp.beta.iter().cloned().fold(f64::INFINITY, f64::min);
        let bmax = sp.beta.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!(bmax - bmin <= 2.0 * 0.25 + 1e-9);
        let fmax = sp.f_beta.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert_abs_diff_eq!(fmax, 1.0, epsilon = 0.25);
        for f in &sp.f_beta {
            assert!(*f <= 1.0 + 1e-6);
        }
    }

    #[test]
    fn non_uniform_grid_rejected() {
        let q = vec![-2.0, -1.0, 0.0, 1.5, 2.0];
        let tau = vec![0.0; 5];
        assert!(matches!(
            singularity_spectrum(&q, &tau),
            Err(Error::Grid(_))
        ));
    }
}
