//! Price-panel loading and the return/profile transforms.
//!
//! The loader aligns all tickers on the strict intersection of their dates;
//! no interpolation or forward-fill is performed. Rows with nonpositive or
//! unparseable prices are rejected individually and reported.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Minimum number of common dates per ticker: the smallest length that
/// still admits three usable dyadic scales with the Db-4 filter.
pub const MIN_PANEL_DATES: usize = 32;

/// Column mapping and delimiter for the delimited input file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ColumnMap {
    pub ticker: String,
    pub date: String,
    pub price: String,
    pub delimiter: char,
}

impl Default for ColumnMap {
    fn default() -> Self {
        Self {
            ticker: "ticker".into(),
            date: "date".into(),
            price: "price".into(),
            delimiter: ',',
        }
    }
}

/// Aligned panel of strictly positive prices, one row per scrip.
#[derive(Debug, Clone)]
pub struct PricePanel {
    tickers: Vec<String>,
    dates: Vec<NaiveDate>,
    prices: Vec<Vec<f64>>,
}

impl PricePanel {
    /// Assemble a panel from pre-aligned rows, checking every invariant.
    pub fn new(tickers: Vec<String>, dates: Vec<NaiveDate>, prices: Vec<Vec<f64>>) -> Result<Self> {
        if tickers.len() < 2 {
            return Err(Error::Ingest(format!(
                "need at least 2 tickers, got {}",
                tickers.len()
            )));
        }
        if tickers.len() != prices.len() {
            return Err(Error::Ingest("ticker/row count mismatch".into()));
        }
        if dates.len() < MIN_PANEL_DATES {
            return Err(Error::Ingest(format!(
                "need at least {MIN_PANEL_DATES} dates, got {}",
                dates.len()
            )));
        }
        if !dates.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Ingest("dates are not strictly increasing".into()));
        }
        for (t, row) in tickers.iter().zip(&prices) {
            if row.len() != dates.len() {
                return Err(Error::Ingest(format!(
                    "row for {t} has {} entries, expected {}",
                    row.len(),
                    dates.len()
                )));
            }
            if let Some(p) = row.iter().find(|p| !p.is_finite() || **p <= 0.0) {
                return Err(Error::Ingest(format!("nonpositive price {p} for {t}")));
            }
        }
        Ok(Self {
            tickers,
            dates,
            prices,
        })
    }

    pub fn tickers(&self) -> &[String] {
        &self.tickers
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn n_scrips(&self) -> usize {
        self.tickers.len()
    }

    /// Number of returns per scrip (one less than the date count).
    pub fn n_returns(&self) -> usize {
        self.dates.len() - 1
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.prices[i]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.prices
    }
}

/// One rejected input row with the reason.
#[derive(Debug, Clone, Serialize)]
pub struct RowRejection {
    pub line: u64,
    pub reason: String,
}

/// Loader outcome: the aligned panel plus per-row and per-ticker diagnostics.
#[derive(Debug)]
pub struct LoadOutcome {
    pub panel: PricePanel,
    pub rejected_rows: Vec<RowRejection>,
    /// Tickers dropped for having fewer than [`MIN_PANEL_DATES`] usable dates,
    /// with the date count they had.
    pub dropped_tickers: Vec<(String, usize)>,
    pub dropped_dates: usize,
}

/// Load a delimited ticker/date/price file and align it on the common dates.
pub fn load_price_panel(path: &Path, map: &ColumnMap) -> Result<LoadOutcome> {
    let file = std::fs::File::open(path)?;
    load_price_panel_from(file, map)
}

/// Same as [`load_price_panel`] but from any reader.
pub fn load_price_panel_from<R: Read>(reader: R, map: &ColumnMap) -> Result<LoadOutcome> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(map.delimiter as u8)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let headers = rdr.headers()?.clone();
    let col = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Ingest(format!("column '{name}' not found in header")))
    };
    let (ci_ticker, ci_date, ci_price) = (col(&map.ticker)?, col(&map.date)?, col(&map.price)?);

    let mut rejected = Vec::new();
    let mut by_ticker: BTreeMap<String, BTreeMap<NaiveDate, f64>> = BTreeMap::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let ticker = record.get(ci_ticker).unwrap_or("").to_string();
        let date_raw = record.get(ci_date).unwrap_or("");
        let price_raw = record.get(ci_price).unwrap_or("");
        let date = match date_raw.parse::<NaiveDate>() {
            Ok(d) => d,
            Err(_) => {
                rejected.push(RowRejection {
                    line,
                    reason: format!("unparseable ISO-8601 date '{date_raw}'"),
                });
                continue;
            }
        };
        let price = match price_raw.parse::<f64>() {
            Ok(p) if p.is_finite() && p > 0.0 => p,
            Ok(p) => {
                rejected.push(RowRejection {
                    line,
                    reason: format!("nonpositive price {p} for {ticker}"),
                });
                continue;
            }
            Err(_) => {
                rejected.push(RowRejection {
                    line,
                    reason: format!("non-numeric price '{price_raw}' for {ticker}"),
                });
                continue;
            }
        };
        by_ticker.entry(ticker).or_default().insert(date, price);
    }

    // Drop tickers that cannot meet the minimum length even before
    // intersection, then intersect dates across the survivors.
    let mut dropped: Vec<(String, usize)> = Vec::new();
    let mut common: Option<Vec<NaiveDate>> = None;
    for (ticker, series) in &by_ticker {
        if series.len() < MIN_PANEL_DATES {
            dropped.push((ticker.clone(), series.len()));
            continue;
        }
        let dates: Vec<NaiveDate> = series.keys().copied().collect();
        common = Some(match common {
            None => dates,
            Some(prev) => prev.into_iter().filter(|d| series.contains_key(d)).collect(),
        });
    }
    let common = common.unwrap_or_default();

    // A ticker that survived the pre-filter may still fall below the
    // minimum on the common grid; with strict intersection the grid is
    // shared, so this only happens when the grid itself is too short.
    let survivors: Vec<&String> = by_ticker
        .keys()
        .filter(|t| !dropped.iter().any(|(d, _)| &d == t))
        .collect();
    if survivors.len() < 2 {
        return Err(Error::Ingest(format!(
            "fewer than 2 tickers survived (dropped: {:?})",
            dropped
        )));
    }
    if common.len() < MIN_PANEL_DATES {
        return Err(Error::Ingest(format!(
            "only {} dates common to all tickers, need {MIN_PANEL_DATES}",
            common.len()
        )));
    }

    let union_dates: usize = {
        let mut all: Vec<NaiveDate> = by_ticker
            .values()
            .flat_map(|s| s.keys().copied())
            .collect();
        all.sort_unstable();
        all.dedup();
        all.len()
    };

    let tickers: Vec<String> = survivors.into_iter().cloned().collect();
    let prices: Vec<Vec<f64>> = tickers
        .iter()
        .map(|t| {
            let series = &by_ticker[t];
            common.iter().map(|d| series[d]).collect()
        })
        .collect();
    let dropped_dates = union_dates - common.len();
    let panel = PricePanel::new(tickers, common, prices)?;
    Ok(LoadOutcome {
        panel,
        rejected_rows: rejected,
        dropped_tickers: dropped,
        dropped_dates,
    })
}

/// Zero-mean, unit-variance log-return series.
#[derive(Debug, Clone)]
pub struct ReturnSeries {
    values: Vec<f64>,
    mean_raw: f64,
    volatility: f64,
}

impl ReturnSeries {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Time average of the raw log-returns.
    pub fn mean_raw(&self) -> f64 {
        self.mean_raw
    }

    /// Standard deviation of the raw log-returns (population convention).
    pub fn volatility(&self) -> f64 {
        self.volatility
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Log-returns, centered and scaled to unit population variance.
pub fn compute_normalized_returns(prices: &[f64]) -> Result<ReturnSeries> {
    if prices.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "need at least 2 prices, got {}",
            prices.len()
        )));
    }
    if let Some(p) = prices.iter().find(|p| !p.is_finite() || **p <= 0.0) {
        return Err(Error::Ingest(format!("nonpositive price {p} in series")));
    }
    let raw: Vec<f64> = prices.windows(2).map(|w| w[1].ln() - w[0].ln()).collect();
    let t = raw.len() as f64;
    let mean = raw.iter().sum::<f64>() / t;
    let var = raw.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / t;
    let sigma = var.sqrt();
    if sigma == 0.0 {
        return Err(Error::DegenerateSeries("constant price series".into()));
    }
    let values = raw.iter().map(|r| (r - mean) / sigma).collect();
    Ok(ReturnSeries {
        values,
        mean_raw: mean,
        volatility: sigma,
    })
}

/// Cumulative sum of a normalized return series.
#[derive(Debug, Clone)]
pub struct Profile {
    values: Vec<f64>,
}

impl Profile {
    /// Wrap an arbitrary vector as a profile (used by synthetic fixtures).
    pub fn from_values(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Running sum Y(t) of the returns; same length as the input.
pub fn build_profile(returns: &ReturnSeries) -> Profile {
    let mut acc = 0.0;
    let values = returns
        .values()
        .iter()
        .map(|r| {
            acc += r;
            acc
        })
        .collect();
    Profile { values }
}
