//! Baseline summarizer: PAA segment means quantized against fixed
//! standard-normal quantile breakpoints, with the classical mindist lower
//! bound. Shares the word and cardinality machinery with the learned
//! summarizer so the same tree index works on top of either.

use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::summarizer::Summarizer;
use crate::wire::{self, Reader};
use crate::word::Word;

const MODEL_MAGIC: &[u8; 4] = b"SXM1";
const TAG_SAX: u8 = 1;

/// `a-1` quantiles of N(0,1), exactly symmetric about 0.
pub fn gaussian_breakpoints(a: usize) -> Result<Vec<f64>> {
    if a < 2 || !a.is_power_of_two() || a > 256 {
        return Err(Error::BadAlphabet(a));
    }
    let normal = Normal::new(0.0, 1.0).unwrap();
    let mut row: Vec<f64> = (1..a)
        .map(|i| normal.inverse_cdf(i as f64 / a as f64))
        .collect();
    // pin symmetry: average each quantile with its mirrored counterpart
    let m = row.len();
    for i in 0..m / 2 {
        let v = 0.5 * (row[i] - row[m - 1 - i]);
        row[i] = v;
        row[m - 1 - i] = -v;
    }
    if m % 2 == 1 {
        row[m / 2] = 0.0;
    }
    Ok(row)
}

/// Piecewise aggregate approximation: per-segment means. Segments are
/// `n / l` long; when `l` does not divide `n`, the last segment absorbs
/// the remainder.
pub fn paa(series: &[f32], l: usize) -> Result<Vec<f64>> {
    let n = series.len();
    if l > n || l == 0 {
        return Err(Error::WordTooLong { l, n });
    }
    let seg = n / l;
    let mut out = Vec::with_capacity(l);
    for j in 0..l {
        let start = j * seg;
        let end = if j == l - 1 { n } else { start + seg };
        let sum: f64 = series[start..end].iter().map(|&v| v as f64).sum();
        out.push(sum / (end - start) as f64);
    }
    Ok(out)
}

/// PAA plus shared Gaussian-quantile quantization.
pub struct SaxModel {
    series_length: usize,
    word_length: usize,
    alphabet_size: usize,
    breakpoints: Vec<f64>,
}

impl std::fmt::Debug for SaxModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SaxModel")
            .field("series_length", &self.series_length)
            .field("word_length", &self.word_length)
            .field("alphabet_size", &self.alphabet_size)
            .finish_non_exhaustive()
    }
}

impl SaxModel {
    pub fn new(series_length: usize, word_length: usize, alphabet_size: usize) -> Result<Self> {
        if word_length > series_length || word_length == 0 {
            return Err(Error::WordTooLong {
                l: word_length,
                n: series_length,
            });
        }
        Ok(SaxModel {
            series_length,
            word_length,
            alphabet_size,
            breakpoints: gaussian_breakpoints(alphabet_size)?,
        })
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    /// True length of segment `j` (only the last can differ).
    fn segment_length(&self, j: usize) -> usize {
        let seg = self.series_length / self.word_length;
        if j == self.word_length - 1 {
            self.series_length - seg * (self.word_length - 1)
        } else {
            seg
        }
    }

    /// Same serialization envelope as the learned model, with a distinct
    /// type tag; round-trips bit-exactly.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        buf.extend_from_slice(MODEL_MAGIC);
        wire::put_u8(&mut buf, TAG_SAX);
        wire::put_u8(&mut buf, 0);
        wire::put_u64(&mut buf, self.series_length as u64);
        wire::put_u64(&mut buf, self.word_length as u64);
        wire::put_u64(&mut buf, self.alphabet_size as u64);
        for &b in &self.breakpoints {
            wire::put_f64(&mut buf, b);
        }
        buf
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes, "sax model");
        r.expect_magic(MODEL_MAGIC)?;
        let tag = r.u8()?;
        if tag != TAG_SAX {
            return Err(r.corrupt(format!("expected sax model, got tag {tag}")));
        }
        let _reserved = r.u8()?;
        let n = r.u64()? as usize;
        let l = r.u64()? as usize;
        let a = r.u64()? as usize;
        if a < 2 || !a.is_power_of_two() || a > 256 {
            return Err(Error::BadAlphabet(a));
        }
        let breakpoints = (0..a - 1).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
        r.done()?;
        if l > n || l == 0 {
            return Err(Error::WordTooLong { l, n });
        }
        Ok(SaxModel {
            series_length: n,
            word_length: l,
            alphabet_size: a,
            breakpoints,
        })
    }
}

impl Summarizer for SaxModel {
    fn series_length(&self) -> usize {
        self.series_length
    }

    fn word_length(&self) -> usize {
        self.word_length
    }

    fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    fn project(&self, series: &[f32]) -> Vec<f64> {
        paa(series, self.word_length).expect("length checked at ingest")
    }

    fn breakpoint_row(&self, _pos: usize) -> &[f64] {
        &self.breakpoints
    }

    /// Per-segment mindist scaling: the squared per-segment gap is
    /// multiplied by the segment's true length.
    fn weight(&self, pos: usize) -> f64 {
        self.segment_length(pos) as f64
    }
}

/// iSAX word of one series (PAA values against the shared row).
pub fn isax_transform(series: &[f32], model: &SaxModel) -> Word {
    model.transform(series)
}

/// mindist lower bound of the squared Euclidean distance, chunked with
/// early abandoning against `bsf`.
pub fn sax_mindist(query_paa: &[f64], word: &Word, model: &SaxModel, bsf: f64) -> f64 {
    model.word_lower_bound(query_paa, word, bsf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::{squared_distance, z_normalize, Dataset};
    use rand::prelude::*;

    #[test]
    fn paa_examples() {
        assert_eq!(paa(&[2.0; 8], 4).unwrap(), vec![2.0; 4]);
        assert_eq!(paa(&[1.0, 1.0, -1.0, -1.0], 2).unwrap(), vec![1.0, -1.0]);
        // alternating series flattens to zero
        let alt: Vec<f32> = (0..32).map(|t| if t % 2 == 0 { 1.0 } else { -1.0 }).collect();
        for l in [2usize, 4, 8] {
            assert!(paa(&alt, l).unwrap().iter().all(|&v| v == 0.0));
        }
        assert!(paa(&[1.0, 2.0], 4).is_err());
    }

    #[test]
    fn paa_remainder_goes_to_last_segment() {
        // n=10, l=4: segments of 2,2,2,4
        let s: Vec<f32> = (0..10).map(|v| v as f32).collect();
        let p = paa(&s, 4).unwrap();
        assert_eq!(p, vec![0.5, 2.5, 4.5, 7.5]);
    }

    #[test]
    fn gaussian_breakpoint_examples() {
        assert_eq!(gaussian_breakpoints(2).unwrap(), vec![0.0]);
        let row = gaussian_breakpoints(4).unwrap();
        for (got, want) in row.iter().zip([-0.6745, 0.0, 0.6745]) {
            assert!((got - want).abs() < 1e-4, "{got} vs {want}");
        }
        assert!(gaussian_breakpoints(3).is_err());
    }

    #[test]
    fn gaussian_breakpoints_symmetric() {
        for a in [4usize, 8, 16, 64, 256] {
            let row = gaussian_breakpoints(a).unwrap();
            assert!(row.windows(2).all(|w| w[0] < w[1]));
            for i in 0..row.len() {
                assert!(
                    (row[i] + row[row.len() - 1 - i]).abs() < 1e-9,
                    "a={a} i={i}"
                );
            }
        }
    }

    #[test]
    fn transform_conventions() {
        let model = SaxModel::new(16, 4, 8).unwrap();
        // all-zero series -> middle symbol everywhere
        let word = isax_transform(&[0.0; 16], &model);
        assert!(word.symbols.iter().all(|&s| s == 4));
        // deeply negative series -> symbol 0
        let word = isax_transform(&[-100.0; 16], &model);
        assert!(word.symbols.iter().all(|&s| s == 0));
    }

    #[test]
    fn transform_matches_linear_scan_oracle() {
        let model = SaxModel::new(32, 8, 16).unwrap();
        let mut rng = StdRng::seed_from_u64(20);
        for _ in 0..200 {
            let s: Vec<f32> = (0..32).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let word = isax_transform(&s, &model);
            for (j, &v) in paa(&s, 8).unwrap().iter().enumerate() {
                let scan = model.breakpoints().iter().filter(|&&b| b <= v).count() as u8;
                assert_eq!(word.symbols[j], scan);
            }
        }
    }

    #[test]
    fn mindist_zero_for_own_word() {
        let model = SaxModel::new(64, 16, 256).unwrap();
        let mut rng = StdRng::seed_from_u64(21);
        let mut s: Vec<f32> = (0..64).map(|_| rng.gen_range(-2.0..2.0)).collect();
        z_normalize(&mut s).unwrap();
        let word = isax_transform(&s, &model);
        let proj = model.project(&s);
        assert_eq!(sax_mindist(&proj, &word, &model, f64::INFINITY), 0.0);
    }

    #[test]
    fn mindist_lower_bounds_on_random_pairs() {
        let n = 64;
        let model = SaxModel::new(n, 16, 256).unwrap();
        let mut rng = StdRng::seed_from_u64(22);
        let raw: Vec<f32> = (0..200 * n).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let ds = Dataset::from_raw(raw, n).unwrap();
        for _ in 0..10_000 {
            let q = rng.gen_range(0..ds.len());
            let c = rng.gen_range(0..ds.len());
            let proj = model.project(ds.series(q));
            let word = isax_transform(ds.series(c), &model);
            let lb = sax_mindist(&proj, &word, &model, f64::INFINITY);
            let d2 = squared_distance(ds.series(q), ds.series(c));
            assert!(lb <= d2 + 1e-5, "lb={lb} d2={d2}");
        }
    }

    #[test]
    fn paa_contraction() {
        // scaled PAA distance never exceeds the raw distance
        let n = 60; // l does not divide n
        let l = 16;
        let mut rng = StdRng::seed_from_u64(23);
        let model = SaxModel::new(n, l, 256).unwrap();
        for _ in 0..1000 {
            let a: Vec<f32> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let b: Vec<f32> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let pa = paa(&a, l).unwrap();
            let pb = paa(&b, l).unwrap();
            let paa_d2: f64 = pa
                .iter()
                .zip(&pb)
                .enumerate()
                .map(|(j, (x, y))| model.weight(j) * (x - y).powi(2))
                .sum();
            let d2 = squared_distance(&a, &b);
            assert!(paa_d2 <= d2 + 1e-9);
        }
    }

    #[test]
    fn high_frequency_square_waves_defeat_paa() {
        // period-2 square waves: PAA is identically zero so the mindist
        // between any two such series collapses toward zero
        let n = 64;
        let model = SaxModel::new(n, 16, 256).unwrap();
        let mk = |phase: usize| -> Vec<f32> {
            (0..n)
                .map(|t| if (t + phase) % 2 == 0 { 1.0 } else { -1.0 })
                .collect()
        };
        let a = mk(0);
        let b = mk(1);
        let proj = model.project(&a);
        let word = isax_transform(&b, &model);
        let lb = sax_mindist(&proj, &word, &model, f64::INFINITY);
        let d2 = squared_distance(&a, &b);
        assert!(d2 > 100.0);
        assert!(lb < 1e-9, "flat-line PAA should see no distance, got {lb}");
    }

    #[test]
    fn serialization_round_trip() {
        let model = SaxModel::new(100, 12, 64).unwrap();
        let bytes = model.to_bytes();
        let back = SaxModel::from_bytes(&bytes).unwrap();
        assert_eq!(bytes, back.to_bytes());
    }
}
