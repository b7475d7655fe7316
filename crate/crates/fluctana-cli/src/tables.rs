//! Readers for the plain numeric CSV shapes the CLI accepts besides
//! ticker/date/price files: single-column series and row-per-series
//! matrices. Lines starting with `#` are comments; a non-numeric first
//! line is treated as a header and skipped.

use std::path::Path;

use fluctana::ingest::Profile;
use fluctana::wavelet::WaveletFilter;
use fluctana::wbfe::{extract_fluctuations, FluctuationPanel};

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

/// Read one value per line (first column if several).
pub fn read_series(path: &Path) -> Result<Vec<f64>, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let mut out = Vec::new();
    let mut first = true;
    for (n, line) in data_lines(&text) {
        let field = line.split(',').next().unwrap_or("");
        match field.trim().parse::<f64>() {
            Ok(v) if v.is_finite() => out.push(v),
            _ if first => {} // header line
            _ => return Err(format!("{}:{n}: not a number: {field:?}", path.display())),
        }
        first = false;
    }
    if out.len() < 8 {
        return Err(format!("{}: only {} samples", path.display(), out.len()));
    }
    Ok(out)
}

/// Read a row-per-series numeric matrix.
pub fn read_matrix(path: &Path) -> Result<Vec<Vec<f64>>, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut first = true;
    for (n, line) in data_lines(&text) {
        let mut row = Vec::new();
        let mut ok = true;
        for field in line.split(',') {
            match field.trim().parse::<f64>() {
                Ok(v) if v.is_finite() => row.push(v),
                _ => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            if first {
                first = false;
                continue; // header line
            }
            return Err(format!("{}:{n}: non-numeric row", path.display()));
        }
        first = false;
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(format!(
                    "{}:{n}: ragged row ({} vs {} fields)",
                    path.display(),
                    row.len(),
                    first.len()
                ));
            }
        }
        rows.push(row);
    }
    if rows.len() < 2 {
        return Err(format!("{}: need at least 2 rows", path.display()));
    }
    Ok(rows)
}

/// Standardize a raw series to zero mean / unit variance and accumulate it
/// into a profile.
pub fn profile_from_returns(values: &[f64]) -> Result<Profile, String> {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let sd = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
    if sd == 0.0 || !sd.is_finite() {
        return Err("series is constant; cannot standardize".into());
    }
    let mut acc = 0.0;
    Ok(Profile::from_values(
        values
            .iter()
            .map(|v| {
                acc += (v - mean) / sd;
                acc
            })
            .collect(),
    ))
}

/// Build the fluctuation panel at one scale from a raw return matrix
/// (rows already being return series rather than prices).
pub fn panel_from_return_matrix(
    rows: &[Vec<f64>],
    filter: &WaveletFilter,
    scale: usize,
) -> Result<FluctuationPanel, String> {
    let tickers: Vec<String> = (0..rows.len()).map(|i| format!("R{i:04}")).collect();
    let mut out = Vec::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        let profile = profile_from_returns(row).map_err(|e| format!("row {}: {e}", i + 1))?;
        let fluct = extract_fluctuations(&profile, filter, scale)
            .map_err(|e| format!("row {}: {e}", i + 1))?;
        out.push(fluct.values().to_vec());
    }
    FluctuationPanel::from_rows(scale, tickers, out).map_err(|e| e.to_string())
}
