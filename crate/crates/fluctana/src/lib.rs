//! Scale-resolved fluctuation analysis of price panels.
//!
//! The pipeline: load an aligned price panel, compute normalized
//! log-returns and their cumulative profiles, extract detrended
//! fluctuations per dyadic wavelet scale with a Daubechies filter bank,
//! then characterize them two ways: multifractal detrended fluctuation
//! analysis (generalized Hurst exponents, scaling exponents, singularity
//! spectrum) and random-matrix spectral statistics of the cross-scrip
//! correlation matrices (Marchenko-Pastur comparison, unfolded
//! nearest-neighbor spacings, GOE-form fit).
//!
//! The `synth` module provides the seeded generators used as analytic
//! oracles by the test suite and the CLI.

pub mod error;
pub mod ingest;
pub mod mfdfa;
pub mod rmt;
pub mod synth;
pub mod wavelet;
pub mod wbfe;

pub use error::{Error, Result};
