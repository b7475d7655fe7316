//! Wavelet-based fluctuation extraction.
//!
//! The fluctuation at scale `a` is the profile minus its low-pass trend at
//! that scale. Edge distortion from the periodic wrap is corrected by
//! repeating the extraction on the time-reversed profile and averaging the
//! two series.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ingest::{build_profile, compute_normalized_returns, PricePanel, Profile};
use crate::wavelet::{trend_at_scale, WaveletFilter};

/// Edge-corrected detrended fluctuation series Z_a(t).
#[derive(Debug, Clone)]
pub struct FluctuationSeries {
    scale: usize,
    values: Vec<f64>,
    edge_corrected: bool,
}

impl FluctuationSeries {
    pub fn scale(&self) -> usize {
        self.scale
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn edge_corrected(&self) -> bool {
        self.edge_corrected
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Wrap a raw vector (used when feeding externally generated series
    /// straight into the segment statistics).
    pub fn from_values(scale: usize, values: Vec<f64>) -> Self {
        Self {
            scale,
            values,
            edge_corrected: false,
        }
    }
}

fn detrend_once(values: &[f64], filter: &WaveletFilter, scale: usize) -> Result<Vec<f64>> {
    let trend = trend_at_scale(values, filter, scale)?;
    Ok(values.iter().zip(&trend).map(|(y, t)| y - t).collect())
}

/// Extract the fluctuation series at `scale`: forward pass, reversed pass,
/// average of the two.
pub fn extract_fluctuations(
    profile: &Profile,
    filter: &WaveletFilter,
    scale: usize,
) -> Result<FluctuationSeries> {
    let fwd = detrend_once(profile.values(), filter, scale)?;
    let reversed: Vec<f64> = profile.values().iter().rev().copied().collect();
    let mut rev = detrend_once(&reversed, filter, scale)?;
    rev.reverse();
    let values = fwd
        .iter()
        .zip(&rev)
        .map(|(f, r)| 0.5 * (f + r))
        .collect();
    Ok(FluctuationSeries {
        scale,
        values,
        edge_corrected: true,
    })
}

/// N x T matrix of edge-corrected fluctuations, one row per scrip.
#[derive(Debug, Clone)]
pub struct FluctuationPanel {
    scale: usize,
    tickers: Vec<String>,
    matrix: Vec<Vec<f64>>,
}

impl FluctuationPanel {
    pub fn scale(&self) -> usize {
        self.scale
    }

    pub fn tickers(&self) -> &[String] {
        &self.tickers
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.matrix
    }

    pub fn n_series(&self) -> usize {
        self.matrix.len()
    }

    pub fn series_len(&self) -> usize {
        self.matrix.first().map_or(0, Vec::len)
    }

    /// Build a panel directly from raw rows (synthetic corpora).
    pub fn from_rows(scale: usize, tickers: Vec<String>, matrix: Vec<Vec<f64>>) -> Result<Self> {
        if matrix.len() != tickers.len() {
            return Err(Error::Inconsistent("ticker/row count mismatch".into()));
        }
        if let Some(bad) = matrix.iter().find(|r| r.len() != matrix[0].len()) {
            return Err(Error::Inconsistent(format!(
                "ragged rows: {} vs {}",
                bad.len(),
                matrix[0].len()
            )));
        }
        Ok(Self {
            scale,
            tickers,
            matrix,
        })
    }
}

/// Run the full returns -> profile -> extraction chain for every scrip in
/// the panel. Rows are computed in parallel; row order follows the panel's
/// ticker order.
pub fn fluctuation_panel(
    panel: &PricePanel,
    filter: &WaveletFilter,
    scale: usize,
) -> Result<FluctuationPanel> {
    let rows: Vec<Result<Vec<f64>>> = panel
        .rows()
        .par_iter()
        .zip(panel.tickers().par_iter())
        .map(|(prices, ticker)| {
            let chain = || -> Result<Vec<f64>> {
                let returns = compute_normalized_returns(prices)?;
                let profile = build_profile(&returns);
                Ok(extract_fluctuations(&profile, filter, scale)?.values)
            };
            chain().map_err(|e| Error::Ingest(format!("scrip {ticker}: {e}")))
        })
        .collect();
    let matrix = rows.into_iter().collect::<Result<Vec<_>>>()?;
    FluctuationPanel::from_rows(scale, panel.tickers().to_vec(), matrix)
}
