//! Spectral analysis of scale-resolved correlation matrices:
//! Marchenko-Pastur comparison, unfolding, nearest-neighbor spacing
//! statistics and the GOE-form fit.

mod jacobi;
mod spacing;
mod unfold;

pub use jacobi::eigenvalues_sym;
pub use spacing::{
    fit_spacing_density, histogram, ks_against_surmise, wigner_cdf, wigner_pdf, BinRule,
    FitConvention, GoeFit, Histogram,
};
pub use unfold::{nn_spacings, unfold_eigenvalues, UnfoldedSpectrum};

use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::wbfe::FluctuationPanel;

/// Equal-time correlation matrix C = (1/T) X X^T of standardized rows.
#[derive(Debug, Clone)]
pub struct CorrelationMatrix {
    data: Vec<f64>,
    n_series: usize,
    length: usize,
}

impl CorrelationMatrix {
    pub fn n_series(&self) -> usize {
        self.n_series
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n_series + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Aspect ratio Q = T/N.
    pub fn q_ratio(&self) -> f64 {
        self.length as f64 / self.n_series as f64
    }

    /// Sorted eigenvalues via the cyclic Jacobi solver.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        eigenvalues_sym(&self.data, self.n_series)
    }
}

/// Build the correlation matrix of a fluctuation panel.
///
/// With `standardize` each row is first centered and scaled to unit
/// population variance, making the Marchenko-Pastur comparison
/// parameter-free (sigma^2 = 1, unit diagonal).
pub fn correlation_matrix_opts(
    panel: &FluctuationPanel,
    standardize: bool,
) -> Result<CorrelationMatrix> {
    let n = panel.n_series();
    let t = panel.series_len();
    if n < 2 {
        return Err(Error::Parameter(format!("need at least 2 series, got {n}")));
    }
    if t <= n {
        return Err(Error::Constraint(format!(
            "need T > N for Q > 1, got T = {t}, N = {n}"
        )));
    }
    let rows: Vec<Vec<f64>> = panel
        .rows()
        .iter()
        .enumerate()
        .map(|(i, row)| {
            if !standardize {
                return Ok(row.clone());
            }
            let mean = row.iter().sum::<f64>() / t as f64;
            let var = row.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / t as f64;
            if var == 0.0 {
                let ticker = panel
                    .tickers()
                    .get(i)
                    .cloned()
                    .unwrap_or_else(|| format!("row {i}"));
                return Err(Error::DegenerateSeries(ticker));
            }
            let sd = var.sqrt();
            Ok(row.iter().map(|v| (v - mean) / sd).collect())
        })
        .collect::<Result<_>>()?;

    let mut data = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let c: f64 =
                rows[i].iter().zip(&rows[j]).map(|(a, b)| a * b).sum::<f64>() / t as f64;
            data[i * n + j] = c;
            data[j * n + i] = c;
        }
    }
    Ok(CorrelationMatrix {
        data,
        n_series: n,
        length: t,
    })
}

/// [`correlation_matrix_opts`] with row standardization on.
pub fn correlation_matrix(panel: &FluctuationPanel) -> Result<CorrelationMatrix> {
    correlation_matrix_opts(panel, true)
}

/// Marchenko-Pastur support parameters.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MpParams {
    pub q_ratio: f64,
    pub sigma2: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
}

/// Support edges lambda_{min,max} = sigma^2 (1 + 1/Q -+ 2 sqrt(1/Q)).
pub fn mp_bounds(q_ratio: f64, sigma2: f64) -> Result<MpParams> {
    if q_ratio < 1.0 {
        return Err(Error::Constraint(format!("Q = {q_ratio} < 1")));
    }
    if sigma2 <= 0.0 {
        return Err(Error::Parameter(format!("sigma^2 = {sigma2} <= 0")));
    }
    let inv = 1.0 / q_ratio;
    let root = 2.0 * inv.sqrt();
    Ok(MpParams {
        q_ratio,
        sigma2,
        lambda_min: (sigma2 * (1.0 + inv - root)).max(0.0),
        lambda_max: sigma2 * (1.0 + inv + root),
    })
}

/// Marchenko-Pastur density; zero outside the support.
pub fn mp_density(lambda: f64, params: &MpParams) -> f64 {
    if lambda <= params.lambda_min || lambda >= params.lambda_max || lambda <= 0.0 {
        return 0.0;
    }
    let num = ((params.lambda_max - lambda) * (lambda - params.lambda_min)).sqrt();
    params.q_ratio / (2.0 * std::f64::consts::PI * params.sigma2) * num / lambda
}

/// Probability mass of the MP law on [x0, x1] (clipped to the support).
///
/// Uses the substitution lambda = l_min + (l_max - l_min) sin^2(theta),
/// which removes both square-root edge singularities, then composite
/// Simpson on theta.
pub fn mp_bin_mass(params: &MpParams, x0: f64, x1: f64) -> f64 {
    let lo = x0.max(params.lambda_min);
    let hi = x1.min(params.lambda_max);
    if hi <= lo {
        return 0.0;
    }
    let span = params.lambda_max - params.lambda_min;
    let to_theta = |x: f64| ((x - params.lambda_min) / span).clamp(0.0, 1.0).sqrt().asin();
    let (t0, t1) = (to_theta(lo), to_theta(hi));
    let pref = params.q_ratio / (2.0 * std::f64::consts::PI * params.sigma2) * span * span;
    let integrand = |theta: f64| {
        let s = theta.sin();
        let c = theta.cos();
        let lambda = params.lambda_min + span * s * s;
        if lambda == 0.0 {
            // Q = 1 hard edge: s^2/lambda -> 1/span as theta -> 0
            return pref * 2.0 * c * c / span;
        }
        pref * 2.0 * s * s * c * c / lambda
    };
    let n = 128;
    let h = (t1 - t0) / n as f64;
    let mut acc = integrand(t0) + integrand(t1);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * integrand(t0 + i as f64 * h);
    }
    acc * h / 3.0
}

/// Fraction of eigenvalues inside the MP support.
pub fn mp_inside_fraction(eigs: &[f64], params: &MpParams) -> f64 {
    let inside = eigs
        .iter()
        .filter(|l| **l >= params.lambda_min && **l <= params.lambda_max)
        .count();
    inside as f64 / eigs.len() as f64
}

/// Chi-square goodness of fit of the inside-support eigenvalues against
/// the MP density. Bins with expected count below 5 are merged rightward.
/// Returns (statistic, degrees of freedom, p-value).
pub fn mp_chi_square(eigs: &[f64], params: &MpParams, rule: BinRule) -> Result<(f64, usize, f64)> {
    let inside: Vec<f64> = eigs
        .iter()
        .copied()
        .filter(|l| *l >= params.lambda_min && *l <= params.lambda_max)
        .collect();
    if inside.len() < 50 {
        return Err(Error::InsufficientData(format!(
            "only {} eigenvalues inside the MP support",
            inside.len()
        )));
    }
    let n = inside.len();
    let bins = match rule {
        BinRule::Fixed(b) => b.max(2),
        BinRule::FreedmanDiaconis => {
            let mut sorted = inside.clone();
            sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let q1 = sorted[n / 4];
            let q3 = sorted[3 * n / 4];
            let iqr = q3 - q1;
            if iqr <= 0.0 {
                return Err(Error::Fit("zero interquartile range".into()));
            }
            let width = 2.0 * iqr / (n as f64).cbrt();
            (((params.lambda_max - params.lambda_min) / width).ceil() as usize).max(2)
        }
    };
    let width = (params.lambda_max - params.lambda_min) / bins as f64;
    let mut observed = vec![0.0f64; bins];
    for l in &inside {
        let mut idx = ((l - params.lambda_min) / width) as usize;
        if idx >= bins {
            idx = bins - 1;
        }
        observed[idx] += 1.0;
    }
    let mut expected: Vec<f64> = (0..bins)
        .map(|i| {
            let x0 = params.lambda_min + i as f64 * width;
            n as f64 * mp_bin_mass(params, x0, x0 + width)
        })
        .collect();

    // merge sparse bins to keep the chi-square approximation valid
    let mut obs_m = Vec::new();
    let mut exp_m = Vec::new();
    let mut o_acc = 0.0;
    let mut e_acc = 0.0;
    for i in 0..bins {
        o_acc += observed[i];
        e_acc += expected[i];
        if e_acc >= 5.0 {
            obs_m.push(o_acc);
            exp_m.push(e_acc);
            o_acc = 0.0;
            e_acc = 0.0;
        }
    }
    if e_acc > 0.0 || o_acc > 0.0 {
        if let (Some(o), Some(e)) = (obs_m.last_mut(), exp_m.last_mut()) {
            *o += o_acc;
            *e += e_acc;
        }
    }
    expected = exp_m;
    let observed = obs_m;
    if expected.len() < 2 {
        return Err(Error::InsufficientData(
            "too few populated bins for a chi-square test".into(),
        ));
    }
    let stat: f64 = observed
        .iter()
        .zip(&expected)
        .map(|(o, e)| (o - e).powi(2) / e)
        .sum();
    let dof = expected.len() - 1;
    let dist = ChiSquared::new(dof as f64)
        .map_err(|e| Error::Numerical(format!("chi-square dof {dof}: {e}")))?;
    let p = 1.0 - dist.cdf(stat);
    Ok((stat, dof, p))
}

/// Sweep configuration shared by every per-scale analysis.
#[derive(Debug, Clone, Copy)]
pub struct SweepConfig {
    pub unfolding_degree: usize,
    pub bin_rule: BinRule,
    pub fit_convention: FitConvention,
    pub standardize: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            unfolding_degree: 5,
            bin_rule: BinRule::FreedmanDiaconis,
            fit_convention: FitConvention::Density,
            standardize: true,
        }
    }
}

/// Marchenko-Pastur summary for one spectrum.
#[derive(Debug, Clone, Serialize)]
pub struct MpSummary {
    pub q_ratio: f64,
    pub sigma2: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub inside_fraction: f64,
    pub chi2_p: Option<f64>,
}

/// Full spectral analysis of one scale.
#[derive(Debug, Clone, Serialize)]
pub struct SpectralResult {
    pub scale: usize,
    pub eigenvalues: Vec<f64>,
    pub mp: MpSummary,
    pub spacings: Vec<f64>,
    pub mean_spacing: f64,
    pub ks_to_surmise: f64,
    pub goe_fit: Option<GoeFit>,
    pub goe_fit_error: Option<String>,
}

/// One per-scale slot of a sweep; failures are recorded, not fatal.
#[derive(Debug, Clone, Serialize)]
pub struct ScaleOutcome {
    pub scale: usize,
    pub result: Option<SpectralResult>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub scales: Vec<ScaleOutcome>,
}

impl SweepReport {
    pub fn n_failed(&self) -> usize {
        self.scales.iter().filter(|s| s.error.is_some()).count()
    }
}

/// Analyze a single fluctuation panel end to end.
pub fn analyze_panel(panel: &FluctuationPanel, config: &SweepConfig) -> Result<SpectralResult> {
    let corr = correlation_matrix_opts(panel, config.standardize)?;
    let eigs = corr.eigenvalues()?;
    let params = mp_bounds(corr.q_ratio(), 1.0)?;
    let inside = mp_inside_fraction(&eigs, &params);
    let chi2_p = mp_chi_square(&eigs, &params, config.bin_rule)
        .ok()
        .map(|(_, _, p)| p);
    let unfolded = unfold_eigenvalues(&eigs, config.unfolding_degree)?;
    let spacings = unfolded.spacings.clone();
    let mean_spacing = spacings.iter().sum::<f64>() / spacings.len() as f64;
    let ks = ks_against_surmise(&spacings);
    let (goe_fit, goe_fit_error) =
        match fit_spacing_density(&spacings, config.bin_rule, config.fit_convention) {
            Ok(f) => (Some(f), None),
            Err(e) => (None, Some(e.to_string())),
        };
    Ok(SpectralResult {
        scale: panel.scale(),
        eigenvalues: eigs,
        mp: MpSummary {
            q_ratio: params.q_ratio,
            sigma2: params.sigma2,
            lambda_min: params.lambda_min,
            lambda_max: params.lambda_max,
            inside_fraction: inside,
            chi2_p,
        },
        spacings,
        mean_spacing,
        ks_to_surmise: ks,
        goe_fit,
        goe_fit_error,
    })
}

/// Per-scale spectral analysis over a set of fluctuation panels.
/// Scales run in parallel; per-scale failures are recorded in the report
/// and the sweep continues.
pub fn scale_sweep(panels: &[FluctuationPanel], config: &SweepConfig) -> Result<SweepReport> {
    if panels.len() < 2 {
        return Err(Error::Parameter(format!(
            "sweep needs at least 2 scales, got {}",
            panels.len()
        )));
    }
    let scales: Vec<ScaleOutcome> = panels
        .par_iter()
        .map(|panel| match analyze_panel(panel, config) {
            Ok(result) => ScaleOutcome {
                scale: panel.scale(),
                result: Some(result),
                error: None,
            },
            Err(e) => ScaleOutcome {
                scale: panel.scale(),
                result: None,
                error: Some(e.to_string()),
            },
        })
        .collect();
    Ok(SweepReport { scales })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn panel_from(rows: Vec<Vec<f64>>) -> FluctuationPanel {
        let tickers = (0..rows.len()).map(|i| format!("T{i}")).collect();
        FluctuationPanel::from_rows(1, tickers, rows).unwrap()
    }

    #[test]
    fn identical_rows_are_perfectly_correlated() {
        let row: Vec<f64> = (0..64).map(|i| (i as f64 * 0.7).sin()).collect();
        let p = panel_from(vec![row.clone(), row]);
        let c = correlation_matrix(&p).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert_abs_diff_eq!(c.get(i, j), 1.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn negated_row_gives_minus_one() {
        let row: Vec<f64> = (0..64).map(|i| (i as f64 * 0.7).sin()).collect();
        let neg: Vec<f64> = row.iter().map(|v| -v).collect();
        let p = panel_from(vec![row, neg]);
        let c = correlation_matrix(&p).unwrap();
        assert_abs_diff_eq!(c.get(0, 1), -1.0, epsilon = 1e-12);
    }

    #[test]
    fn unit_diagonal_after_standardization() {
        let p = crate::synth::wishart_panel(8, 200, 3).unwrap();
        let c = correlation_matrix(&p).unwrap();
        for i in 0..8 {
            assert_abs_diff_eq!(c.get(i, i), 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn independent_rows_have_small_cross_correlations() {
        // Monte-Carlo: |c_ij| = O(1/sqrt(T))
        let mut worst: f64 = 0.0;
        for seed in 0..100 {
            let t = 400;
            let p = crate::synth::wishart_panel(4, t, seed).unwrap();
            let c = correlation_matrix(&p).unwrap();
            for i in 0..4 {
                for j in i + 1..4 {
                    worst = worst.max(c.get(i, j).abs());
                }
            }
        }
        assert!(worst <= 5.0 / (400f64).sqrt(), "worst |c| = {worst}");
    }

    #[test]
    fn zero_variance_row_names_the_series() {
        let row: Vec<f64> = (0..64).map(|i| (i as f64 * 0.7).sin()).collect();
        let flat = vec![2.0; 64];
        let p = FluctuationPanel::from_rows(1, vec!["OK".into(), "FLAT".into()], vec![row, flat])
            .unwrap();
        let err = correlation_matrix(&p).unwrap_err();
        assert!(err.to_string().contains("FLAT"));
    }

    #[test]
    fn mp_bounds_at_q_one() {
        let p = mp_bounds(1.0, 1.0).unwrap();
        assert_abs_diff_eq!(p.lambda_min, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p.lambda_max, 4.0, epsilon = 1e-12);
    }

    #[test]
    fn mp_bounds_at_production_aspect_ratio() {
        // Q = 29.58: direct evaluation of the edge formula
        let p = mp_bounds(29.58, 1.0).unwrap();
        assert_abs_diff_eq!(p.lambda_min, 0.66608, epsilon = 1e-4);
        assert_abs_diff_eq!(p.lambda_max, 1.40152, epsilon = 1e-4);
    }

    #[test]
    fn mp_bounds_collapse_at_large_q() {
        let p = mp_bounds(1e12, 2.5).unwrap();
        assert_abs_diff_eq!(p.lambda_min, 2.5, epsilon = 1e-4);
        assert_abs_diff_eq!(p.lambda_max, 2.5, epsilon = 1e-4);
    }

    #[test]
    fn q_below_one_rejected() {
        assert!(matches!(mp_bounds(0.5, 1.0), Err(Error::Constraint(_))));
    }

    #[test]
    fn mp_density_zero_outside_and_at_edges() {
        let p = mp_bounds(5.0, 1.0).unwrap();
        assert_eq!(mp_density(p.lambda_min - 0.1, &p), 0.0);
        assert_eq!(mp_density(p.lambda_max + 0.1, &p), 0.0);
        assert_eq!(mp_density(p.lambda_min, &p), 0.0);
        assert_eq!(mp_density(p.lambda_max, &p), 0.0);
    }

    #[test]
    fn mp_density_integrates_to_one() {
        for q in [1.0, 2.0, 5.0, 29.58] {
            let p = mp_bounds(q, 1.0).unwrap();
            let mass = mp_bin_mass(&p, p.lambda_min, p.lambda_max);
            assert_abs_diff_eq!(mass, 1.0, epsilon = 1e-6);
        }
    }

    #[test]
    fn perfectly_correlated_panel_is_rank_one() {
        let base: Vec<f64> = (0..256).map(|i| (i as f64 * 0.37).sin()).collect();
        let rows: Vec<Vec<f64>> = (0..6)
            .map(|k| base.iter().map(|v| v * (k + 1) as f64).collect())
            .collect();
        let p = panel_from(rows);
        let c = correlation_matrix(&p).unwrap();
        let eigs = c.eigenvalues().unwrap();
        assert_abs_diff_eq!(eigs[5], 6.0, epsilon = 1e-9);
        for e in &eigs[..5] {
            assert!(e.abs() <= 1e-9);
        }
    }
}
