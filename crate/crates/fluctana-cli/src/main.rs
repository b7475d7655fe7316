//! `fluctana`: batch pipeline from price panels to multifractal and
//! random-matrix summaries, plus the seeded synthetic generators.
//!
//! Exit codes: 0 success, 1 fatal error, 2 sweep finished with per-scale
//! failures recorded in the report.

mod config;
mod emit;
mod tables;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

use fluctana::ingest::{
    build_profile, compute_normalized_returns, load_price_panel, PricePanel, RowRejection,
};
use fluctana::mfdfa::{multifractal_spectrum, multiscale_fluctuation_function};
use fluctana::rmt::{analyze_panel, FitConvention, ScaleOutcome, SweepConfig, SweepReport};
use fluctana::synth;
use fluctana::wavelet::{daubechies_filter, max_levels, WaveletFilter};
use fluctana::wbfe::{fluctuation_panel, FluctuationPanel};

use config::RunConfig;
use emit::{row, Emitter};

#[derive(Parser)]
#[command(name = "fluctana", version, about = "Scale-resolved fluctuation analysis of price panels")]
struct Cli {
    /// TOML run configuration; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override the configured output directory.
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    /// Suppress progress logging on stderr.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Load and align a ticker/date/price file; emit the normalized
    /// return panel and a load report.
    Ingest {
        #[arg(long)]
        input: PathBuf,
    },
    /// Extract detrended fluctuation series per wavelet scale.
    Wbfe {
        #[arg(long)]
        input: PathBuf,
        /// Scales to extract (default: the configured scale list).
        #[arg(long)]
        scale: Vec<usize>,
    },
    /// Multifractal analysis of one series: h(q), tau(q), f(beta).
    Mfdfa {
        /// Price file; analyzed scrip chosen with --ticker.
        #[arg(long, conflicts_with = "series")]
        input: Option<PathBuf>,
        /// Plain one-column series (raw returns or measure).
        #[arg(long)]
        series: Option<PathBuf>,
        /// Scrip to analyze from --input (default: first).
        #[arg(long)]
        ticker: Option<String>,
    },
    /// Spectral statistics of one cross-series correlation matrix.
    Rmt {
        /// Price file; requires --scale for the extraction level.
        #[arg(long, conflicts_with = "panel")]
        input: Option<PathBuf>,
        /// Row-per-series numeric matrix, used as the panel directly.
        #[arg(long)]
        panel: Option<PathBuf>,
        #[arg(long)]
        scale: Option<usize>,
    },
    /// Full per-scale analysis over the configured scale list.
    Sweep {
        #[arg(long, conflicts_with = "panel")]
        input: Option<PathBuf>,
        /// Row-per-series return matrix instead of a price file.
        #[arg(long)]
        panel: Option<PathBuf>,
    },
    /// Generate a seeded synthetic fixture.
    Synth {
        /// white_noise | binomial_cascade | goe | wishart_panel
        #[arg(long)]
        kind: String,
        #[arg(long)]
        seed: Option<u64>,
        /// Sample count for white_noise / wishart_panel columns.
        #[arg(long, default_value_t = 65536)]
        length: usize,
        /// Cascade depth.
        #[arg(long, default_value_t = 14)]
        levels: u32,
        /// Cascade left weight.
        #[arg(long, default_value_t = 0.75)]
        p: f64,
        /// Matrix size for goe.
        #[arg(long, default_value_t = 196)]
        size: usize,
        /// Row count for wishart_panel.
        #[arg(long, default_value_t = 196)]
        n_series: usize,
    },
}

struct Log {
    quiet: bool,
}

impl Log {
    fn note(&self, msg: &str) {
        if !self.quiet {
            eprintln!("{msg}");
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut cfg = match &cli.config {
        Some(path) => match RunConfig::load(path) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(1);
            }
        },
        None => RunConfig::default(),
    };
    if let Some(dir) = &cli.output_dir {
        cfg.output_dir = dir.clone();
    }
    if let Cmd::Synth { seed: Some(s), .. } = &cli.cmd {
        cfg.seed = *s;
    }
    if cfg.threads > 0 {
        // Ignore failure: the global pool may already exist in tests.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build_global();
    }
    let log = Log { quiet: cli.quiet };
    match run(&cli.cmd, &cfg, &log) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run(cmd: &Cmd, cfg: &RunConfig, log: &Log) -> Result<u8, String> {
    let out = Emitter::new(&cfg.output_dir, &cfg.digest())?;
    match cmd {
        Cmd::Ingest { input } => cmd_ingest(input, cfg, log, &out),
        Cmd::Wbfe { input, scale } => cmd_wbfe(input, scale, cfg, log, &out),
        Cmd::Mfdfa {
            input,
            series,
            ticker,
        } => cmd_mfdfa(input.as_deref(), series.as_deref(), ticker.as_deref(), cfg, log, &out),
        Cmd::Rmt {
            input,
            panel,
            scale,
        } => cmd_rmt(input.as_deref(), panel.as_deref(), *scale, cfg, log, &out),
        Cmd::Sweep { input, panel } => cmd_sweep(input.as_deref(), panel.as_deref(), cfg, log, &out),
        Cmd::Synth {
            kind,
            length,
            levels,
            p,
            size,
            n_series,
            ..
        } => cmd_synth(kind, *length, *levels, *p, *size, *n_series, cfg, log, &out),
    }
}

fn load_panel(path: &std::path::Path, cfg: &RunConfig, log: &Log) -> Result<PricePanel, String> {
    let outcome = load_price_panel(path, &cfg.column_map()).map_err(|e| e.to_string())?;
    log.note(&format!(
        "[ingest] scrips={} dates={} rejected_rows={} dropped_tickers={}",
        outcome.panel.n_scrips(),
        outcome.panel.dates().len(),
        outcome.rejected_rows.len(),
        outcome.dropped_tickers.len()
    ));
    Ok(outcome.panel)
}

#[derive(Serialize)]
struct IngestReport {
    n_scrips: usize,
    n_dates: usize,
    n_returns: usize,
    tickers: Vec<String>,
    first_date: String,
    last_date: String,
    rejected_rows: Vec<RowRejection>,
    dropped_tickers: Vec<(String, usize)>,
    dropped_dates: usize,
}

fn cmd_ingest(
    input: &std::path::Path,
    cfg: &RunConfig,
    log: &Log,
    out: &Emitter,
) -> Result<u8, String> {
    let outcome = load_price_panel(input, &cfg.column_map()).map_err(|e| e.to_string())?;
    let panel = &outcome.panel;
    let mut rows = Vec::with_capacity(panel.n_scrips());
    for (ticker, prices) in panel.tickers().iter().zip(panel.rows()) {
        let r = compute_normalized_returns(prices)
            .map_err(|e| format!("scrip {ticker}: {e}"))?;
        log.note(&format!("[ingest] scrip={ticker} returns={}", r.len()));
        rows.push(format!("{ticker},{}", row(r.values())));
    }
    let path = out.csv("returns.csv", "", rows)?;
    log.note(&format!("[ingest] wrote {}", path.display()));
    let dates = panel.dates();
    let report = IngestReport {
        n_scrips: panel.n_scrips(),
        n_dates: dates.len(),
        n_returns: panel.n_returns(),
        tickers: panel.tickers().to_vec(),
        first_date: dates[0].to_string(),
        last_date: dates[dates.len() - 1].to_string(),
        rejected_rows: outcome.rejected_rows,
        dropped_tickers: outcome.dropped_tickers,
        dropped_dates: outcome.dropped_dates,
    };
    let path = out.json("ingest_report.json", report)?;
    log.note(&format!("[ingest] wrote {}", path.display()));
    Ok(0)
}

fn cmd_wbfe(
    input: &std::path::Path,
    scale_args: &[usize],
    cfg: &RunConfig,
    log: &Log,
    out: &Emitter,
) -> Result<u8, String> {
    let panel = load_panel(input, cfg, log)?;
    let filter = filter_from(cfg)?;
    let scales = if scale_args.is_empty() {
        cfg.scales.clone()
    } else {
        scale_args.to_vec()
    };
    for &a in &scales {
        let fp = fluctuation_panel(&panel, &filter, a).map_err(|e| e.to_string())?;
        let rows = fp
            .tickers()
            .iter()
            .zip(fp.rows())
            .map(|(t, r)| format!("{t},{}", row(r)));
        let path = out.csv(&format!("fluctuations_scale{a:02}.csv"), "", rows)?;
        log.note(&format!(
            "[wbfe] scale={a} scrips={} wrote {}",
            fp.n_series(),
            path.display()
        ));
    }
    Ok(0)
}

fn cmd_mfdfa(
    input: Option<&std::path::Path>,
    series: Option<&std::path::Path>,
    ticker: Option<&str>,
    cfg: &RunConfig,
    log: &Log,
    out: &Emitter,
) -> Result<u8, String> {
    let (label, profile) = match (input, series) {
        (None, Some(path)) => {
            let values = tables::read_series(path)?;
            ("series".to_string(), tables::profile_from_returns(&values)?)
        }
        (Some(path), None) => {
            let panel = load_panel(path, cfg, log)?;
            let idx = match ticker {
                Some(t) => panel
                    .tickers()
                    .iter()
                    .position(|x| x == t)
                    .ok_or_else(|| format!("ticker {t} not in panel"))?,
                None => 0,
            };
            let name = panel.tickers()[idx].clone();
            let r = compute_normalized_returns(panel.row(idx))
                .map_err(|e| format!("scrip {name}: {e}"))?;
            (name, build_profile(&r))
        }
        _ => return Err("mfdfa needs exactly one of --input or --series".into()),
    };
    let filter = filter_from(cfg)?;
    let t = profile.len();
    let max = max_levels(t);
    let scales: Vec<usize> = cfg.scales.iter().copied().filter(|&a| a <= max).collect();
    log.note(&format!(
        "[mfdfa] series={label} length={t} scales={scales:?}"
    ));
    let ff = multiscale_fluctuation_function(&profile, &filter, &scales, &cfg.q_grid())
        .map_err(|e| e.to_string())?;
    let spectrum =
        multifractal_spectrum(&ff, cfg.fit_range(t)).map_err(|e| e.to_string())?;
    let rows = (0..spectrum.q_grid.len()).map(|i| {
        row(&[
            spectrum.q_grid[i],
            spectrum.h[i],
            spectrum.tau[i],
            spectrum.beta[i],
            spectrum.f_beta[i],
            spectrum.fit_quality[i],
        ])
    });
    let path = out.csv("mfdfa.csv", "q,h,tau,beta,f_beta,r_squared", rows)?;
    log.note(&format!("[mfdfa] wrote {}", path.display()));

    #[derive(Serialize)]
    struct MfdfaReport<'a> {
        series: &'a str,
        length: usize,
        s_grid: &'a [usize],
        spectrum: &'a fluctana::mfdfa::MultifractalSpectrum,
    }
    let path = out.json(
        "mfdfa_report.json",
        MfdfaReport {
            series: &label,
            length: t,
            s_grid: &ff.s_grid,
            spectrum: &spectrum,
        },
    )?;
    log.note(&format!("[mfdfa] wrote {}", path.display()));
    Ok(0)
}

fn sweep_settings(cfg: &RunConfig) -> SweepConfig {
    SweepConfig {
        unfolding_degree: cfg.unfolding_degree,
        bin_rule: cfg.bin_rule(),
        fit_convention: FitConvention::Density,
        standardize: true,
    }
}

fn emit_spectrum(
    result: &fluctana::rmt::SpectralResult,
    out: &Emitter,
    log: &Log,
    tag: &str,
) -> Result<(), String> {
    let a = result.scale;
    let eig_rows = result
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(i, l)| format!("{i},{l}"));
    let path = out.csv(&format!("eigenvalues_{tag}.csv"), "index,eigenvalue", eig_rows)?;
    log.note(&format!("[rmt] scale={a} wrote {}", path.display()));
    let sp_rows = result.spacings.iter().map(|s| s.to_string());
    let path = out.csv(&format!("spacings_{tag}.csv"), "spacing", sp_rows)?;
    log.note(&format!("[rmt] scale={a} wrote {}", path.display()));
    Ok(())
}

fn cmd_rmt(
    input: Option<&std::path::Path>,
    panel_path: Option<&std::path::Path>,
    scale: Option<usize>,
    cfg: &RunConfig,
    log: &Log,
    out: &Emitter,
) -> Result<u8, String> {
    let filter = filter_from(cfg)?;
    let panel: FluctuationPanel = match (input, panel_path) {
        (Some(path), None) => {
            let a = scale.ok_or("rmt --input requires --scale")?;
            let prices = load_panel(path, cfg, log)?;
            fluctuation_panel(&prices, &filter, a).map_err(|e| e.to_string())?
        }
        (None, Some(path)) => {
            let rows = tables::read_matrix(path)?;
            let tickers = (0..rows.len()).map(|i| format!("R{i:04}")).collect();
            FluctuationPanel::from_rows(scale.unwrap_or(0), tickers, rows)
                .map_err(|e| e.to_string())?
        }
        _ => return Err("rmt needs exactly one of --input or --panel".into()),
    };
    log.note(&format!(
        "[rmt] scale={} series={} length={}",
        panel.scale(),
        panel.n_series(),
        panel.series_len()
    ));
    let result = analyze_panel(&panel, &sweep_settings(cfg)).map_err(|e| e.to_string())?;
    emit_spectrum(&result, out, log, &format!("scale{:02}", result.scale))?;
    let path = out.json("rmt_report.json", &result)?;
    log.note(&format!("[rmt] wrote {}", path.display()));
    Ok(0)
}

fn cmd_sweep(
    input: Option<&std::path::Path>,
    panel_path: Option<&std::path::Path>,
    cfg: &RunConfig,
    log: &Log,
    out: &Emitter,
) -> Result<u8, String> {
    let filter = filter_from(cfg)?;
    enum Source {
        Prices(PricePanel),
        Returns(Vec<Vec<f64>>),
    }
    let source = match (input, panel_path) {
        (Some(path), None) => Source::Prices(load_panel(path, cfg, log)?),
        (None, Some(path)) => Source::Returns(tables::read_matrix(path)?),
        _ => return Err("sweep needs exactly one of --input or --panel".into()),
    };
    let settings = sweep_settings(cfg);
    let outcomes: Vec<ScaleOutcome> = cfg
        .scales
        .par_iter()
        .map(|&a| {
            let built = match &source {
                Source::Prices(p) => fluctuation_panel(p, &filter, a).map_err(|e| e.to_string()),
                Source::Returns(rows) => tables::panel_from_return_matrix(rows, &filter, a),
            };
            match built.and_then(|p| analyze_panel(&p, &settings).map_err(|e| e.to_string())) {
                Ok(r) => ScaleOutcome {
                    scale: a,
                    result: Some(r),
                    error: None,
                },
                Err(e) => ScaleOutcome {
                    scale: a,
                    result: None,
                    error: Some(e),
                },
            }
        })
        .collect();
    for o in &outcomes {
        match (&o.result, &o.error) {
            (Some(r), _) => {
                log.note(&format!(
                    "[sweep] scale={} inside_mp={:.4} ks={:.4} mean_spacing={:.4}",
                    o.scale, r.mp.inside_fraction, r.ks_to_surmise, r.mean_spacing
                ));
                emit_spectrum(r, out, log, &format!("scale{:02}", o.scale))?;
            }
            (None, Some(e)) => log.note(&format!("[sweep] scale={} FAILED: {e}", o.scale)),
            _ => unreachable!(),
        }
    }
    let report = SweepReport { scales: outcomes };
    let failed = report.n_failed();
    let total = report.scales.len();
    let path = out.json("sweep_report.json", &report)?;
    log.note(&format!(
        "[sweep] wrote {} ({total} scales, {failed} failed)",
        path.display()
    ));
    if failed == 0 {
        Ok(0)
    } else if failed < total {
        Ok(2)
    } else {
        Err("every scale failed".into())
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_synth(
    kind: &str,
    length: usize,
    levels: u32,
    p: f64,
    size: usize,
    n_series: usize,
    cfg: &RunConfig,
    log: &Log,
    out: &Emitter,
) -> Result<u8, String> {
    let path = match kind {
        "white_noise" => {
            let x = synth::white_noise(length, cfg.seed);
            out.csv(
                "synth_white_noise.csv",
                "value",
                x.iter().map(|v| v.to_string()),
            )?
        }
        "binomial_cascade" => {
            let x = synth::binomial_cascade(levels, p).map_err(|e| e.to_string())?;
            out.csv(
                "synth_binomial_cascade.csv",
                "value",
                x.iter().map(|v| v.to_string()),
            )?
        }
        "goe" => {
            let m = synth::goe_matrix(size, cfg.seed).map_err(|e| e.to_string())?;
            let rows = (0..size).map(|i| row(&m[i * size..(i + 1) * size]));
            out.csv("synth_goe.csv", "", rows)?
        }
        "wishart_panel" => {
            let panel =
                synth::wishart_panel(n_series, length, cfg.seed).map_err(|e| e.to_string())?;
            let rows = panel.rows().iter().map(|r| row(r));
            out.csv("synth_wishart_panel.csv", "", rows)?
        }
        other => {
            return Err(format!(
                "unknown kind {other:?}; expected white_noise, binomial_cascade, goe or wishart_panel"
            ))
        }
    };
    log.note(&format!("[synth] kind={kind} seed={} wrote {}", cfg.seed, path.display()));
    Ok(0)
}

fn filter_from(cfg: &RunConfig) -> Result<WaveletFilter, String> {
    daubechies_filter(cfg.wavelet).map_err(|e| e.to_string())
}
