//! Real-input discrete Fourier transform, energy bookkeeping, and
//! variance-based coefficient selection.
//!
//! The transform uses orthonormal scaling (`1/sqrt(n)`), so Parseval holds:
//! the energy of the full symmetric spectrum equals the energy of the time
//! domain. Under that scaling, the weighted squared difference over any
//! subset of spectrum positions lower-bounds the squared Euclidean
//! distance, with weight 2 for every complex coefficient except DC (k=0)
//! and, for even `n`, Nyquist (k=n/2), which appear once in the symmetric
//! spectrum and get weight 1.

use std::sync::Arc;

use rustfft::{num_complex::Complex, Fft, FftPlanner};

use crate::error::{Error, Result};

/// Number of retained complex coefficients for a series of length `n`.
pub fn coefficient_count(n: usize) -> usize {
    n / 2 + 1
}

/// Length of the interleaved real/imaginary layout for a series of length `n`.
pub fn layout_len(n: usize) -> usize {
    2 * coefficient_count(n)
}

/// LBD weight of an interleaved layout position: 1 for positions belonging
/// to DC and (even `n`) Nyquist, 2 otherwise.
pub fn position_weight(position: usize, n: usize) -> f64 {
    let coeff = position / 2;
    if coeff == 0 || (n % 2 == 0 && coeff == n / 2) {
        1.0
    } else {
        2.0
    }
}

/// Forward DFT of a real series with a cached plan.
///
/// Output is the non-redundant half spectrum in interleaved layout:
/// position `2k` is the real part and `2k+1` the imaginary part of complex
/// coefficient `k`, for `k in 0..=n/2`.
pub struct RealDft {
    n: usize,
    fft: Arc<dyn Fft<f64>>,
    scale: f64,
}

impl RealDft {
    pub fn new(n: usize) -> Result<Self> {
        if n < 4 {
            return Err(Error::SeriesTooShort { got: n, min: 4 });
        }
        let fft = FftPlanner::new().plan_fft_forward(n);
        Ok(RealDft {
            n,
            fft,
            scale: 1.0 / (n as f64).sqrt(),
        })
    }

    pub fn series_length(&self) -> usize {
        self.n
    }

    /// Transform one series into the interleaved half spectrum.
    pub fn transform(&self, series: &[f32]) -> Result<Vec<f64>> {
        if series.len() != self.n {
            return Err(Error::LengthMismatch {
                left: series.len(),
                right: self.n,
            });
        }
        let mut buf: Vec<Complex<f64>> = series
            .iter()
            .map(|&v| Complex::new(v as f64, 0.0))
            .collect();
        self.fft.process(&mut buf);
        let mut out = Vec::with_capacity(layout_len(self.n));
        for c in buf.iter().take(coefficient_count(self.n)) {
            out.push(c.re * self.scale);
            out.push(c.im * self.scale);
        }
        Ok(out)
    }
}

/// Naive O(n^2) DFT with the same scaling and layout as [`RealDft`].
///
/// Reference implementation; kept independent of the FFT path so it can
/// serve as its oracle.
pub fn naive_dft(series: &[f32]) -> Vec<f64> {
    let n = series.len();
    let scale = 1.0 / (n as f64).sqrt();
    let mut out = Vec::with_capacity(layout_len(n));
    for k in 0..coefficient_count(n) {
        let mut re = 0.0f64;
        let mut im = 0.0f64;
        for (t, &v) in series.iter().enumerate() {
            let angle = -2.0 * std::f64::consts::PI * (k * t) as f64 / n as f64;
            re += v as f64 * angle.cos();
            im += v as f64 * angle.sin();
        }
        out.push(re * scale);
        out.push(im * scale);
    }
    out
}

/// The positions of the interleaved layout retained by feature selection,
/// with their per-position LBD weights.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectedIndices {
    pub indices: Vec<usize>,
    pub weights: Vec<f64>,
}

impl SelectedIndices {
    pub fn new(indices: Vec<usize>, series_length: usize) -> Self {
        let weights = indices
            .iter()
            .map(|&p| position_weight(p, series_length))
            .collect();
        SelectedIndices { indices, weights }
    }

    /// Every position of the half spectrum, weighted so that the weighted
    /// squared spectral distance equals the squared Euclidean distance.
    pub fn full_spectrum(series_length: usize) -> Self {
        Self::new((0..layout_len(series_length)).collect(), series_length)
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Gather the selected positions out of a full interleaved spectrum.
    pub fn project(&self, spectrum: &[f64]) -> Vec<f64> {
        self.indices.iter().map(|&p| spectrum[p]).collect()
    }
}

/// Per-column sample variance (n-1 denominator) of a row-major matrix.
fn column_variances(rows: &[Vec<f64>], width: usize) -> Vec<f64> {
    let s = rows.len() as f64;
    let mut mean = vec![0.0f64; width];
    for row in rows {
        for (m, &v) in mean.iter_mut().zip(row.iter().take(width)) {
            *m += v;
        }
    }
    for m in mean.iter_mut() {
        *m /= s;
    }
    let mut var = vec![0.0f64; width];
    for row in rows {
        for ((v, &x), &m) in var.iter_mut().zip(row.iter().take(width)).zip(&mean) {
            let d = x - m;
            *v += d * d;
        }
    }
    for v in var.iter_mut() {
        *v /= s - 1.0;
    }
    var
}

/// Rank layout positions of a sample spectrum matrix by descending sample
/// variance; ties break toward the lower index. Returns all positions.
pub fn variance_ranking(spectra: &[Vec<f64>], width: usize) -> Result<Vec<usize>> {
    if spectra.len() < 2 {
        return Err(Error::SampleTooSmall {
            got: spectra.len(),
            min: 2,
        });
    }
    let var = column_variances(spectra, width);
    let mut order: Vec<usize> = (0..width).collect();
    order.sort_by(|&a, &b| var[b].partial_cmp(&var[a]).unwrap().then(a.cmp(&b)));
    Ok(order)
}

/// Select the `l` highest-variance positions of a sample spectrum matrix.
///
/// `spectra` holds one row per sampled series; only the first `width`
/// positions of each row are candidates (`width = 2 * candidate_limit`).
pub fn select_by_variance(
    spectra: &[Vec<f64>],
    width: usize,
    l: usize,
    series_length: usize,
) -> Result<SelectedIndices> {
    if l > width {
        return Err(Error::SelectionTooLarge {
            requested: l,
            available: width,
        });
    }
    let order = variance_ranking(spectra, width)?;
    Ok(SelectedIndices::new(
        order.into_iter().take(l).collect(),
        series_length,
    ))
}

/// Mean complex-coefficient index of a selection (layout position / 2).
pub fn mean_selected_index(sel: &SelectedIndices) -> Result<f64> {
    if sel.is_empty() {
        return Err(Error::Empty("selection"));
    }
    let sum: usize = sel.indices.iter().map(|&p| p / 2).sum();
    Ok(sum as f64 / sel.len() as f64)
}
