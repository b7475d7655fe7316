//! Daubechies filter bank and the one-dimensional discrete wavelet
//! transform with periodic boundary extension.
//!
//! The pyramid transform accepts arbitrary signal lengths: a level whose
//! input length is odd is extended by repeating its last sample before the
//! convolve-and-downsample step, and the inverse drops the duplicate again,
//! so the forward/inverse pair is an exact round trip at every length.

mod coeffs;

use crate::error::{Error, Result};

/// Orthonormal Daubechies filter pair Db-N, N even in 2..=20.
///
/// `index` is the tap count N; the filter has N/2 vanishing moments, so it
/// annihilates polynomial trends of degree < N/2.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletFilter {
    index: usize,
    lowpass: Vec<f64>,
    highpass: Vec<f64>,
}

impl WaveletFilter {
    pub fn index(&self) -> usize {
        self.index
    }

    pub fn lowpass(&self) -> &[f64] {
        &self.lowpass
    }

    pub fn highpass(&self) -> &[f64] {
        &self.highpass
    }

    /// Support width W = N.
    pub fn support_width(&self) -> usize {
        self.index
    }

    pub fn vanishing_moments(&self) -> usize {
        self.index / 2
    }

    fn check_invariants(&self) -> Result<()> {
        let n = self.lowpass.len();
        let sum_low: f64 = self.lowpass.iter().sum();
        let sum_high: f64 = self.highpass.iter().sum();
        if (sum_low - std::f64::consts::SQRT_2).abs() > 1e-12 || sum_high.abs() > 1e-12 {
            return Err(Error::InvalidFilter(self.index));
        }
        // orthonormality under even shifts
        for shift in (0..n).step_by(2) {
            let dot: f64 = (0..n - shift)
                .map(|k| self.lowpass[k] * self.lowpass[k + shift])
                .sum();
            let expect = if shift == 0 { 1.0 } else { 0.0 };
            if (dot - expect).abs() > 1e-12 {
                return Err(Error::InvalidFilter(self.index));
            }
        }
        let cross: f64 = (0..n).map(|k| self.lowpass[k] * self.highpass[k]).sum();
        if cross.abs() > 1e-12 {
            return Err(Error::InvalidFilter(self.index));
        }
        Ok(())
    }
}

/// Build the Db-N filter pair from the embedded coefficient table.
///
/// The high-pass filter is the quadrature mirror
/// `g[k] = (-1)^k h[N-1-k]`.
pub fn daubechies_filter(index: usize) -> Result<WaveletFilter> {
    let low = coeffs::lowpass(index).ok_or(Error::InvalidFilter(index))?;
    let n = low.len();
    let highpass: Vec<f64> = (0..n)
        .map(|k| if k % 2 == 0 { low[n - 1 - k] } else { -low[n - 1 - k] })
        .collect();
    let filter = WaveletFilter {
        index,
        lowpass: low.to_vec(),
        highpass,
    };
    filter.check_invariants()?;
    Ok(filter)
}

/// Pyramid decomposition: coarsest approximation plus per-level details.
///
/// `detail[0]` is the finest level (level 1). `padded[j]` records whether
/// the input to level j+1 had odd length and was extended by one sample.
#[derive(Debug, Clone)]
pub struct DwtDecomposition {
    approx: Vec<f64>,
    detail: Vec<Vec<f64>>,
    levels: usize,
    original_length: usize,
    padded: Vec<bool>,
    filter_index: usize,
}

impl DwtDecomposition {
    pub fn approx(&self) -> &[f64] {
        &self.approx
    }

    pub fn detail(&self) -> &[Vec<f64>] {
        &self.detail
    }

    /// Detail coefficients of `level` (1-based, 1 = finest).
    pub fn detail_level(&self, level: usize) -> &[f64] {
        &self.detail[level - 1]
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn original_length(&self) -> usize {
        self.original_length
    }

    /// Zero every detail level, keeping only the low-pass trend content.
    pub fn zero_details(&mut self) {
        for d in &mut self.detail {
            for v in d.iter_mut() {
                *v = 0.0;
            }
        }
    }
}

/// Maximum decomposition depth for a signal of this length.
pub fn max_levels(len: usize) -> usize {
    if len < 2 {
        0
    } else {
        (usize::BITS - 1 - len.leading_zeros()) as usize
    }
}

fn analysis_step(signal: &[f64], filter: &WaveletFilter) -> (Vec<f64>, Vec<f64>, bool) {
    let padded = signal.len() % 2 == 1;
    let mut buf;
    let x: &[f64] = if padded {
        buf = Vec::with_capacity(signal.len() + 1);
        buf.extend_from_slice(signal);
        buf.push(*signal.last().unwrap());
        &buf
    } else {
        signal
    };
    let m = x.len();
    let half = m / 2;
    let h = filter.lowpass();
    let g = filter.highpass();
    let w = h.len();
    let mut approx = vec![0.0; half];
    let mut detail = vec![0.0; half];
    for k in 0..half {
        let mut a = 0.0;
        let mut d = 0.0;
        let base = 2 * k;
        for j in 0..w {
            let xv = x[(base + j) % m];
            a += h[j] * xv;
            d += g[j] * xv;
        }
        approx[k] = a;
        detail[k] = d;
    }
    (approx, detail, padded)
}

fn synthesis_step(
    approx: &[f64],
    detail: &[f64],
    filter: &WaveletFilter,
    padded: bool,
) -> Vec<f64> {
    let half = approx.len();
    let m = 2 * half;
    let h = filter.lowpass();
    let g = filter.highpass();
    let w = h.len();
    let mut x = vec![0.0; m];
    for k in 0..half {
        let base = 2 * k;
        for j in 0..w {
            let idx = (base + j) % m;
            x[idx] += h[j] * approx[k] + g[j] * detail[k];
        }
    }
    if padded {
        x.truncate(m - 1);
    }
    x
}

/// Forward DWT to `levels` of depth via convolve-and-downsample with
/// periodic extension.
pub fn dwt_forward(
    signal: &[f64],
    filter: &WaveletFilter,
    levels: usize,
) -> Result<DwtDecomposition> {
    let len = signal.len();
    if len < filter.support_width() {
        return Err(Error::SignalTooShort {
            len,
            support: filter.support_width(),
        });
    }
    let max = max_levels(len);
    if levels == 0 || levels > max {
        return Err(Error::ScaleRange {
            scale: levels,
            max,
            len,
        });
    }
    let mut current = signal.to_vec();
    let mut detail = Vec::with_capacity(levels);
    let mut padded = Vec::with_capacity(levels);
    for _ in 0..levels {
        let (a, d, p) = analysis_step(&current, filter);
        detail.push(d);
        padded.push(p);
        current = a;
    }
    Ok(DwtDecomposition {
        approx: current,
        detail,
        levels,
        original_length: len,
        padded,
        filter_index: filter.index(),
    })
}

/// Inverse DWT. Exact round trip with [`dwt_forward`] up to floating error.
pub fn dwt_inverse(decomp: &DwtDecomposition, filter: &WaveletFilter) -> Result<Vec<f64>> {
    if decomp.filter_index != filter.index() {
        return Err(Error::Inconsistent(format!(
            "decomposition built with Db-{}, inverse requested with Db-{}",
            decomp.filter_index,
            filter.index()
        )));
    }
    if decomp.detail.len() != decomp.levels || decomp.padded.len() != decomp.levels {
        return Err(Error::Inconsistent(
            "level count does not match stored coefficient vectors".into(),
        ));
    }
    let mut current = decomp.approx.clone();
    for level in (0..decomp.levels).rev() {
        let d = &decomp.detail[level];
        if d.len() != current.len() {
            return Err(Error::Inconsistent(format!(
                "detail level {} has length {}, expected {}",
                level + 1,
                d.len(),
                current.len()
            )));
        }
        current = synthesis_step(&current, d, filter, decomp.padded[level]);
    }
    if current.len() != decomp.original_length {
        return Err(Error::Inconsistent(format!(
            "reconstructed length {} does not match original {}",
            current.len(),
            decomp.original_length
        )));
    }
    Ok(current)
}

/// Low-pass trend of the signal at dyadic scale `a`: forward transform to
/// depth a, zero all detail levels, inverse transform.
pub fn trend_at_scale(signal: &[f64], filter: &WaveletFilter, scale: usize) -> Result<Vec<f64>> {
    let mut decomp = dwt_forward(signal, filter, scale)?;
    decomp.zero_details();
    dwt_inverse(&decomp, filter)
}
