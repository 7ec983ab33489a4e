//! Fixed-length data series, z-normalization, and the in-memory dataset layout.
//!
//! All series in a [`Dataset`] share one length `n` and are stored
//! series-major in a single contiguous `Vec<f32>`. Values are z-normalized
//! once at ingest; every downstream distance is plain Euclidean distance
//! over the normalized values. Accumulation is done in f64.

use crate::error::{Error, Result};

/// Threshold below which a series' standard deviation is treated as zero.
pub const SIGMA_EPS: f64 = 1e-12;

/// Mean and standard deviation of a source series, retained for reporting.
///
/// `sigma == 0.0` flags a degenerate constant series that was mapped to
/// the all-zero vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormStats {
    pub mu: f64,
    pub sigma: f64,
}

impl NormStats {
    pub fn is_constant(&self) -> bool {
        self.sigma == 0.0
    }
}

/// z-normalize a series in place: subtract the mean, divide by the
/// population standard deviation (divide by `n`).
///
/// A constant series (sigma below [`SIGMA_EPS`]) becomes the all-zero
/// series with `sigma` recorded as 0 in the returned stats.
pub fn z_normalize(values: &mut [f32]) -> Result<NormStats> {
    if values.len() < 2 {
        return Err(Error::SeriesTooShort {
            got: values.len(),
            min: 2,
        });
    }
    let n = values.len() as f64;
    let mut sum = 0.0f64;
    for &v in values.iter() {
        sum += v as f64;
    }
    let mu = sum / n;
    let mut ss = 0.0f64;
    for &v in values.iter() {
        let d = v as f64 - mu;
        ss += d * d;
    }
    let sigma = (ss / n).sqrt();
    if sigma < SIGMA_EPS {
        for v in values.iter_mut() {
            *v = 0.0;
        }
        return Ok(NormStats { mu, sigma: 0.0 });
    }
    for v in values.iter_mut() {
        *v = ((*v as f64 - mu) / sigma) as f32;
    }
    Ok(NormStats { mu, sigma })
}

/// Euclidean distance between two equal-length series (f64 accumulation).
pub fn euclidean_distance(a: &[f32], b: &[f32]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(squared_distance(a, b).sqrt())
}

/// Squared Euclidean distance with the fixed accumulation-order contract:
/// sequential chunks of 8 values, each chunk summed left to right, chunk
/// sums added left to right. Every exact-distance path in the crate uses
/// this order so results are bitwise comparable across engines.
pub fn squared_distance(a: &[f32], b: &[f32]) -> f64 {
    squared_distance_early_abandon(a, b, f64::INFINITY)
}

/// Squared Euclidean distance with early abandoning.
///
/// Returns the exact squared distance when it is below `bsf`. Once the
/// running sum reaches `bsf` after a chunk, returns the partial sum, which
/// is `>= bsf` and `<=` the full sum.
pub fn squared_distance_early_abandon(a: &[f32], b: &[f32], bsf: f64) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut total = 0.0f64;
    let mut i = 0;
    let len = a.len();
    while i < len {
        let end = (i + 8).min(len);
        let mut chunk = 0.0f64;
        for j in i..end {
            let d = a[j] as f64 - b[j] as f64;
            chunk += d * d;
        }
        total += chunk;
        if total >= bsf {
            return total;
        }
        i = end;
    }
    total
}

/// A collection of `N` equal-length series, z-normalized at ingest.
#[derive(Debug, Clone)]
pub struct Dataset {
    series_length: usize,
    storage: Vec<f32>,
    stats: Vec<NormStats>,
}

impl Dataset {
    /// Ingest raw values (series-major, `N x n`) and z-normalize each series.
    pub fn from_raw(mut storage: Vec<f32>, series_length: usize) -> Result<Self> {
        if series_length < 2 {
            return Err(Error::SeriesTooShort {
                got: series_length,
                min: 2,
            });
        }
        if storage.is_empty() {
            return Err(Error::Empty("dataset"));
        }
        if storage.len() % series_length != 0 {
            return Err(Error::RaggedStorage {
                storage: storage.len(),
                n: series_length,
            });
        }
        let mut stats = Vec::with_capacity(storage.len() / series_length);
        for chunk in storage.chunks_mut(series_length) {
            stats.push(z_normalize(chunk)?);
        }
        Ok(Dataset {
            series_length,
            storage,
            stats,
        })
    }

    /// Wrap values that are already z-normalized, skipping re-normalization.
    pub fn from_normalized(storage: Vec<f32>, series_length: usize) -> Result<Self> {
        if storage.len() % series_length != 0 || storage.is_empty() {
            return Err(Error::RaggedStorage {
                storage: storage.len(),
                n: series_length,
            });
        }
        let count = storage.len() / series_length;
        Ok(Dataset {
            series_length,
            storage,
            stats: vec![NormStats { mu: 0.0, sigma: 1.0 }; count],
        })
    }

    pub fn len(&self) -> usize {
        self.stats.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stats.is_empty()
    }

    pub fn series_length(&self) -> usize {
        self.series_length
    }

    pub fn series(&self, i: usize) -> &[f32] {
        let n = self.series_length;
        &self.storage[i * n..(i + 1) * n]
    }

    pub fn stats(&self, i: usize) -> NormStats {
        self.stats[i]
    }

    pub fn storage(&self) -> &[f32] {
        &self.storage
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f32]> {
        self.storage.chunks(self.series_length)
    }
}
