//! Nearest-neighbor spacing statistics: the normalized Wigner surmise,
//! Kolmogorov-Smirnov distance, histogramming and the a*l*exp(-b*l^2) fit.

use serde::Serialize;

use crate::error::{Error, Result};

/// Normalized GOE Wigner surmise p(l) = (pi l / 2) exp(-pi l^2 / 4).
/// Integrates to 1 with unit mean spacing.
pub fn wigner_pdf(lambda: f64) -> Result<f64> {
    if lambda < 0.0 {
        return Err(Error::Parameter(format!(
            "spacing must be nonnegative, got {lambda}"
        )));
    }
    let pi = std::f64::consts::PI;
    Ok(0.5 * pi * lambda * (-0.25 * pi * lambda * lambda).exp())
}

/// CDF of the surmise: 1 - exp(-pi l^2 / 4).
pub fn wigner_cdf(lambda: f64) -> f64 {
    let pi = std::f64::consts::PI;
    1.0 - (-0.25 * pi * lambda * lambda).exp()
}

/// Two-sided KS distance of a sample against the surmise CDF.
pub fn ks_against_surmise(spacings: &[f64]) -> f64 {
    let mut sorted = spacings.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, x) in sorted.iter().enumerate() {
        let f = wigner_cdf(*x);
        d = d.max((f - i as f64 / n).abs());
        d = d.max((f - (i as f64 + 1.0) / n).abs());
    }
    d
}

/// Histogram bin-count rule.
#[derive(Debug, Clone, Copy, Serialize)]
pub enum BinRule {
    /// Freedman-Diaconis: width = 2 IQR / n^(1/3).
    FreedmanDiaconis,
    Fixed(usize),
}

/// Whether the fitted curve targets density-normalized bars or raw counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FitConvention {
    Density,
    RawCount,
}

#[derive(Debug, Clone)]
pub struct Histogram {
    pub centers: Vec<f64>,
    pub counts: Vec<usize>,
    pub width: f64,
    pub n_samples: usize,
}

impl Histogram {
    pub fn heights(&self, convention: FitConvention) -> Vec<f64> {
        match convention {
            FitConvention::RawCount => self.counts.iter().map(|c| *c as f64).collect(),
            FitConvention::Density => {
                let norm = self.n_samples as f64 * self.width;
                self.counts.iter().map(|c| *c as f64 / norm).collect()
            }
        }
    }
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] * (1.0 - frac) + sorted[hi] * frac
}

/// Histogram of nonnegative samples on [0, max].
pub fn histogram(samples: &[f64], rule: BinRule) -> Result<Histogram> {
    if samples.is_empty() {
        return Err(Error::Parameter("no samples to histogram".into()));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let max = *sorted.last().unwrap();
    let n = samples.len();
    let bins = match rule {
        BinRule::Fixed(b) => {
            if b == 0 {
                return Err(Error::Parameter("bin count must be positive".into()));
            }
            b
        }
        BinRule::FreedmanDiaconis => {
            let iqr = quantile(&sorted, 0.75) - quantile(&sorted, 0.25);
            if iqr <= 0.0 {
                return Err(Error::Fit(
                    "degenerate sample: zero interquartile range".into(),
                ));
            }
            let width = 2.0 * iqr / (n as f64).cbrt();
            ((max / width).ceil() as usize).max(1)
        }
    };
    let width = max / bins as f64;
    if width <= 0.0 {
        return Err(Error::Fit("degenerate sample: zero range".into()));
    }
    let mut counts = vec![0usize; bins];
    for x in samples {
        let mut idx = (x / width) as usize;
        if idx >= bins {
            idx = bins - 1;
        }
        counts[idx] += 1;
    }
    let centers = (0..bins).map(|i| (i as f64 + 0.5) * width).collect();
    Ok(Histogram {
        centers,
        counts,
        width,
        n_samples: n,
    })
}

/// Fitted coefficients of rho(l) = a l exp(-b l^2).
#[derive(Debug, Clone, Serialize)]
pub struct GoeFit {
    pub a: f64,
    pub b: f64,
    /// 95% confidence bounds on a.
    pub a_bounds: (f64, f64),
    /// 95% confidence bounds on b.
    pub b_bounds: (f64, f64),
    pub ks_stat: f64,
    pub convention: FitConvention,
    pub bins: usize,
}

/// Histogram the spacings and fit a l exp(-b l^2) by log-linearized seed
/// plus Gauss-Newton refinement.
pub fn fit_spacing_density(
    spacings: &[f64],
    rule: BinRule,
    convention: FitConvention,
) -> Result<GoeFit> {
    if spacings.len() < 100 {
        return Err(Error::Fit(format!(
            "need at least 100 spacings, got {}",
            spacings.len()
        )));
    }
    let hist = histogram(spacings, rule)?;
    let ys = hist.heights(convention);
    let xs = &hist.centers;

    // seed: ln(y/x) = ln a - b x^2 on strictly positive bins
    let mut sx = Vec::new();
    let mut sy = Vec::new();
    for (x, y) in xs.iter().zip(&ys) {
        if *y > 0.0 && *x > 0.0 {
            sx.push(x * x);
            sy.push((y / x).ln());
        }
    }
    if sx.len() < 3 {
        return Err(Error::Fit("too few populated bins to seed the fit".into()));
    }
    let n = sx.len() as f64;
    let mx = sx.iter().sum::<f64>() / n;
    let my = sy.iter().sum::<f64>() / n;
    let sxy: f64 = sx.iter().zip(&sy).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = sx.iter().map(|x| (x - mx).powi(2)).sum();
    let mut b = -sxy / sxx;
    let mut a = (my + b * mx).exp();

    // Gauss-Newton on r_i = a x e^{-b x^2} - y_i
    for _ in 0..100 {
        let mut jtj = [0.0f64; 4];
        let mut jtr = [0.0f64; 2];
        for (x, y) in xs.iter().zip(&ys) {
            let e = (-b * x * x).exp();
            let model = a * x * e;
            let r = model - y;
            let da = x * e;
            let db = -a * x * x * x * e;
            jtj[0] += da * da;
            jtj[1] += da * db;
            jtj[2] += da * db;
            jtj[3] += db * db;
            jtr[0] += da * r;
            jtr[1] += db * r;
        }
        let det = jtj[0] * jtj[3] - jtj[1] * jtj[2];
        if det.abs() < 1e-300 {
            return Err(Error::Fit("singular Gauss-Newton step".into()));
        }
        let step_a = (jtj[3] * jtr[0] - jtj[1] * jtr[1]) / det;
        let step_b = (jtj[0] * jtr[1] - jtj[2] * jtr[0]) / det;
        a -= step_a;
        b -= step_b;
        if !a.is_finite() || !b.is_finite() {
            return Err(Error::Fit(format!(
                "diverged: a = {a}, b = {b}"
            )));
        }
        if step_a.abs() <= 1e-12 * a.abs().max(1e-12)
            && step_b.abs() <= 1e-12 * b.abs().max(1e-12)
        {
            break;
        }
    }
    if a <= 0.0 || b <= 0.0 {
        let ssr: f64 = xs
            .iter()
            .zip(&ys)
            .map(|(x, y)| (a * x * (-b * x * x).exp() - y).powi(2))
            .sum();
        return Err(Error::Fit(format!(
            "degenerate fit: a = {a:.4e}, b = {b:.4e}, residual {ssr:.4e}"
        )));
    }

    // linearized 95% bounds from the final Jacobian
    let m = xs.len() as f64;
    let mut jtj = [0.0f64; 4];
    let mut ssr = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        let e = (-b * x * x).exp();
        let r = a * x * e - y;
        ssr += r * r;
        let da = x * e;
        let db = -a * x * x * x * e;
        jtj[0] += da * da;
        jtj[1] += da * db;
        jtj[2] += da * db;
        jtj[3] += db * db;
    }
    let det = jtj[0] * jtj[3] - jtj[1] * jtj[2];
    let sigma2 = ssr / (m - 2.0).max(1.0);
    let var_a = sigma2 * jtj[3] / det;
    let var_b = sigma2 * jtj[0] / det;
    let ci_a = 1.96 * var_a.max(0.0).sqrt();
    let ci_b = 1.96 * var_b.max(0.0).sqrt();

    Ok(GoeFit {
        a,
        b,
        a_bounds: (a - ci_a, a + ci_a),
        b_bounds: (b - ci_b, b + ci_b),
        ks_stat: ks_against_surmise(spacings),
        convention,
        bins: hist.centers.len(),
    })
}
