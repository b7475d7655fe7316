//! Run configuration: TOML file, defaults, and the artifact hash.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use fluctana::ingest::ColumnMap;
use fluctana::rmt::BinRule;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Everything a run needs besides the subcommand itself. All fields have
/// defaults, so an empty (or missing) config file is valid.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Input column names and delimiter for price files.
    pub ticker_column: String,
    pub date_column: String,
    pub price_column: String,
    pub delimiter: char,
    /// Daubechies filter index (tap count, even, 2..=20).
    pub wavelet: usize,
    /// Dyadic wavelet scales to analyze.
    pub scales: Vec<usize>,
    /// Moment-order grid q_min..=q_max in steps of q_step.
    pub q_min: f64,
    pub q_max: f64,
    pub q_step: f64,
    /// Segment-size fit window; fit_max = 0 means T/4.
    pub fit_min: f64,
    pub fit_max: f64,
    /// Chebyshev degree for eigenvalue unfolding.
    pub unfolding_degree: usize,
    /// Spacing-histogram bin count; 0 selects Freedman-Diaconis.
    pub histogram_bins: usize,
    pub output_dir: PathBuf,
    /// Seed for the synth subcommand.
    pub seed: u64,
    /// Worker threads; 0 uses every core.
    pub threads: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            ticker_column: "ticker".into(),
            date_column: "date".into(),
            price_column: "price".into(),
            delimiter: ',',
            wavelet: 4,
            scales: (1..=12).collect(),
            q_min: -5.0,
            q_max: 5.0,
            q_step: 0.25,
            fit_min: 16.0,
            fit_max: 0.0,
            unfolding_degree: 5,
            histogram_bins: 0,
            output_dir: PathBuf::from("out"),
            seed: 0,
            threads: 0,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        toml::from_str(&text).map_err(|e| format!("config {}: {e}", path.display()))
    }

    pub fn column_map(&self) -> ColumnMap {
        ColumnMap {
            ticker: self.ticker_column.clone(),
            date: self.date_column.clone(),
            price: self.price_column.clone(),
            delimiter: self.delimiter,
        }
    }

    pub fn q_grid(&self) -> Vec<f64> {
        let mut qs = Vec::new();
        let mut q = self.q_min;
        while q <= self.q_max + 1e-9 {
            qs.push(q);
            q += self.q_step;
        }
        qs
    }

    /// Fit window with the T/4 default applied.
    pub fn fit_range(&self, series_len: usize) -> (f64, f64) {
        let hi = if self.fit_max > 0.0 {
            self.fit_max
        } else {
            series_len as f64 / 4.0
        };
        (self.fit_min, hi)
    }

    pub fn bin_rule(&self) -> BinRule {
        if self.histogram_bins == 0 {
            BinRule::FreedmanDiaconis
        } else {
            BinRule::Fixed(self.histogram_bins)
        }
    }

    /// Hash of the effective configuration, embedded in every artifact so
    /// outputs are traceable to the exact settings that produced them.
    /// The output directory is plumbing, not an analysis setting, so it is
    /// excluded: the same analysis written elsewhere hashes the same.
    pub fn digest(&self) -> String {
        let mut hashed = self.clone();
        hashed.output_dir = Self::default().output_dir;
        let canonical = toml::to_string(&hashed).expect("config serializes");
        let mut h = Sha256::new();
        h.update(canonical.as_bytes());
        let out = h.finalize();
        out.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}
