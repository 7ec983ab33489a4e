//! Learned symbolic summarization: per-dimension breakpoint learning over
//! a data sample (MCB), symbolic Fourier words, and the SFA lower bound.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::series::Dataset;
use crate::spectral::{variance_ranking, RealDft, SelectedIndices};
use crate::summarizer::Summarizer;
use crate::wire::{self, Reader};
use crate::word::Word;

pub use crate::word::mind;

const MODEL_MAGIC: &[u8; 4] = b"SXM1";
const TAG_SFA: u8 = 0;

pub const DEFAULT_WORD_LENGTH: usize = 16;
pub const DEFAULT_ALPHABET: usize = 256;
pub const DEFAULT_SAMPLING_RATIO: f64 = 0.01;
pub const DEFAULT_CANDIDATE_LIMIT: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Binning {
    EquiWidth,
    EquiDepth,
}

impl Binning {
    pub fn tag(self) -> u8 {
        match self {
            Binning::EquiWidth => 0,
            Binning::EquiDepth => 1,
        }
    }

    pub fn from_tag(t: u8) -> Option<Self> {
        match t {
            0 => Some(Binning::EquiWidth),
            1 => Some(Binning::EquiDepth),
            _ => None,
        }
    }
}

impl std::str::FromStr for Binning {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ew" | "equi-width" => Ok(Binning::EquiWidth),
            "ed" | "equi-depth" => Ok(Binning::EquiDepth),
            other => Err(Error::Unknown {
                what: "binning mode",
                got: other.to_string(),
            }),
        }
    }
}

fn check_alphabet(a: usize) -> Result<()> {
    if a < 2 || a > 256 || !a.is_power_of_two() {
        return Err(Error::BadAlphabet(a));
    }
    Ok(())
}

/// `a-1` breakpoints splitting `[min, max]` of the sample into `a` equal
/// widths. Errors on an all-equal sample (zero-width dimension).
pub fn equi_width_bins(values: &[f64], a: usize) -> Result<Vec<f64>> {
    if values.len() < 2 {
        return Err(Error::SampleTooSmall {
            got: values.len(),
            min: 2,
        });
    }
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !(lo < hi) {
        return Err(Error::DegenerateSample { value: lo });
    }
    let width = (hi - lo) / a as f64;
    Ok((1..a).map(|i| lo + i as f64 * width).collect())
}

/// `a-1` breakpoints at sample ranks `ceil(i*S/a)` (0-based), i.e. the
/// first element of each subsequent equal-count bin. Duplicate sample
/// values can collapse breakpoints; collapsed entries are nudged up to the
/// next representable value to keep the row strictly increasing.
pub fn equi_depth_bins(values: &[f64], a: usize) -> Result<Vec<f64>> {
    Ok(equi_depth_bins_flagged(values, a)?.0)
}

pub(crate) fn equi_depth_bins_flagged(values: &[f64], a: usize) -> Result<(Vec<f64>, bool)> {
    if values.len() < a {
        return Err(Error::SampleTooSmall {
            got: values.len(),
            min: a,
        });
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let s = sorted.len();
    let mut edges = Vec::with_capacity(a.saturating_sub(1));
    let mut nudged = false;
    for i in 1..a {
        let rank = (i * s).div_ceil(a);
        let mut bp = sorted[rank.min(s - 1)];
        while let Some(&prev) = edges.last() {
            if bp > prev {
                break;
            }
            bp = prev_next_up(prev);
            nudged = true;
        }
        edges.push(bp);
    }
    Ok((edges, nudged))
}

fn prev_next_up(v: f64) -> f64 {
    let up = v.next_up();
    if up.is_finite() {
        up
    } else {
        v
    }
}

/// Parameters of MCB learning.
#[derive(Debug, Clone, Copy)]
pub struct McbParams {
    pub word_length: usize,
    pub alphabet_size: usize,
    pub sampling_ratio: f64,
    pub binning: Binning,
    /// Highest complex coefficient index (exclusive) eligible for selection.
    pub candidate_limit: usize,
    pub seed: u64,
}

impl Default for McbParams {
    fn default() -> Self {
        McbParams {
            word_length: DEFAULT_WORD_LENGTH,
            alphabet_size: DEFAULT_ALPHABET,
            sampling_ratio: DEFAULT_SAMPLING_RATIO,
            binning: Binning::EquiWidth,
            candidate_limit: DEFAULT_CANDIDATE_LIMIT,
            seed: 0,
        }
    }
}

/// Learned per-dimension breakpoint tables plus the selected Fourier
/// positions (the output of MCB).
pub struct QuantizationModel {
    series_length: usize,
    word_length: usize,
    alphabet_size: usize,
    binning: Binning,
    selected: SelectedIndices,
    /// One strictly increasing row of `a-1` breakpoints per word position.
    breakpoints: Vec<Vec<f64>>,
    /// Rows where equi-depth duplicate collapse forced a nudge.
    nudged_rows: Vec<u32>,
    /// Candidate positions skipped as degenerate during selection.
    skipped_positions: Vec<u32>,
    dft: RealDft,
}

impl std::fmt::Debug for QuantizationModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("QuantizationModel")
            .field("series_length", &self.series_length)
            .field("word_length", &self.word_length)
            .field("alphabet_size", &self.alphabet_size)
            .field("binning", &self.binning)
            .field("selected", &self.selected.indices)
            .finish_non_exhaustive()
    }
}

impl QuantizationModel {
    pub fn binning(&self) -> Binning {
        self.binning
    }

    pub fn selected(&self) -> &SelectedIndices {
        &self.selected
    }

    pub fn nudged_rows(&self) -> &[u32] {
        &self.nudged_rows
    }

    pub fn skipped_positions(&self) -> &[u32] {
        &self.skipped_positions
    }

    /// Versioned binary model blob; round-trips bit-exactly.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        buf.extend_from_slice(MODEL_MAGIC);
        wire::put_u8(&mut buf, TAG_SFA);
        wire::put_u8(&mut buf, self.binning.tag());
        wire::put_u64(&mut buf, self.series_length as u64);
        wire::put_u64(&mut buf, self.word_length as u64);
        wire::put_u64(&mut buf, self.alphabet_size as u64);
        for (&idx, &w) in self.selected.indices.iter().zip(&self.selected.weights) {
            wire::put_u64(&mut buf, idx as u64);
            wire::put_f64(&mut buf, w);
        }
        wire::put_u64(&mut buf, self.nudged_rows.len() as u64);
        for &r in &self.nudged_rows {
            wire::put_u32(&mut buf, r);
        }
        wire::put_u64(&mut buf, self.skipped_positions.len() as u64);
        for &p in &self.skipped_positions {
            wire::put_u32(&mut buf, p);
        }
        for row in &self.breakpoints {
            for &b in row {
                wire::put_f64(&mut buf, b);
            }
        }
        buf
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes, "quantization model");
        r.expect_magic(MODEL_MAGIC)?;
        let tag = r.u8()?;
        if tag != TAG_SFA {
            return Err(r.corrupt(format!("expected sfa model, got tag {tag}")));
        }
        let binning = Binning::from_tag(r.u8()?)
            .ok_or_else(|| r.corrupt("bad binning tag".into()))?;
        let n = r.u64()? as usize;
        let l = r.u64()? as usize;
        let a = r.u64()? as usize;
        check_alphabet(a)?;
        let mut indices = Vec::with_capacity(l);
        let mut weights = Vec::with_capacity(l);
        for _ in 0..l {
            indices.push(r.u64()? as usize);
            weights.push(r.f64()?);
        }
        let nn = r.u64()? as usize;
        let nudged_rows = (0..nn).map(|_| r.u32()).collect::<Result<Vec<_>>>()?;
        let ns = r.u64()? as usize;
        let skipped_positions = (0..ns).map(|_| r.u32()).collect::<Result<Vec<_>>>()?;
        let mut breakpoints = Vec::with_capacity(l);
        for _ in 0..l {
            let row = (0..a - 1).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
            breakpoints.push(row);
        }
        r.done()?;
        Ok(QuantizationModel {
            series_length: n,
            word_length: l,
            alphabet_size: a,
            binning,
            selected: SelectedIndices { indices, weights },
            breakpoints,
            nudged_rows,
            skipped_positions,
            dft: RealDft::new(n)?,
        })
    }
}

impl Summarizer for QuantizationModel {
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
        let spectrum = self.dft.transform(series).expect("length checked at ingest");
        self.selected.project(&spectrum)
    }

    fn breakpoint_row(&self, pos: usize) -> &[f64] {
        &self.breakpoints[pos]
    }

    fn weight(&self, pos: usize) -> f64 {
        self.selected.weights[pos]
    }
}

/// Learn an SFA quantization model from a seeded sample of the dataset:
/// sample, DFT, variance-based position selection, then per-dimension
/// binning over the sample's projected values.
///
/// Degenerate (all-equal) dimensions are skipped and the next position in
/// variance order takes their place.
pub fn learn_mcb(dataset: &Dataset, params: &McbParams) -> Result<QuantizationModel> {
    check_alphabet(params.alphabet_size)?;
    let n = dataset.series_length();
    let dft = RealDft::new(n)?;
    // candidate_limit is the highest eligible complex coefficient index
    // (inclusive), so Nyquist is selectable when the limit reaches n/2
    let max_coefficient = params.candidate_limit.min(n / 2).max(1);
    let width = 2 * (max_coefficient + 1);
    if params.word_length > width {
        return Err(Error::SelectionTooLarge {
            requested: params.word_length,
            available: width,
        });
    }

    let sample_ids = sample_indices(dataset.len(), params.sampling_ratio, params.seed);
    let min_sample = match params.binning {
        Binning::EquiWidth => 2,
        Binning::EquiDepth => params.alphabet_size.max(2),
    };
    if sample_ids.len() < min_sample {
        return Err(Error::SampleTooSmall {
            got: sample_ids.len(),
            min: min_sample,
        });
    }

    let spectra: Vec<Vec<f64>> = sample_ids
        .iter()
        .map(|&i| {
            let mut s = dft.transform(dataset.series(i))?;
            s.truncate(width);
            Ok(s)
        })
        .collect::<Result<_>>()?;

    let ranking = variance_ranking(&spectra, width)?;
    let mut chosen = Vec::with_capacity(params.word_length);
    let mut breakpoints = Vec::with_capacity(params.word_length);
    let mut nudged_rows = Vec::new();
    let mut skipped = Vec::new();
    for &pos in &ranking {
        if chosen.len() == params.word_length {
            break;
        }
        let column: Vec<f64> = spectra.iter().map(|row| row[pos]).collect();
        let row = match params.binning {
            Binning::EquiWidth => match equi_width_bins(&column, params.alphabet_size) {
                Ok(row) => row,
                Err(Error::DegenerateSample { .. }) => {
                    skipped.push(pos as u32);
                    continue;
                }
                Err(e) => return Err(e),
            },
            Binning::EquiDepth => {
                let (row, nudged) = equi_depth_bins_flagged(&column, params.alphabet_size)?;
                if nudged {
                    nudged_rows.push(chosen.len() as u32);
                }
                row
            }
        };
        chosen.push(pos);
        breakpoints.push(row);
    }
    if chosen.len() < params.word_length {
        return Err(Error::NotEnoughDimensions {
            wanted: params.word_length,
            usable: chosen.len(),
        });
    }

    Ok(QuantizationModel {
        series_length: n,
        word_length: params.word_length,
        alphabet_size: params.alphabet_size,
        binning: params.binning,
        selected: SelectedIndices::new(chosen, n),
        breakpoints,
        nudged_rows,
        skipped_positions: skipped,
        dft,
    })
}

fn sample_indices(count: usize, ratio: f64, seed: u64) -> Vec<usize> {
    if ratio >= 1.0 {
        return (0..count).collect();
    }
    let take = ((ratio * count as f64).ceil() as usize).clamp(1, count);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ids = rand::seq::index::sample(&mut rng, count, take).into_vec();
    ids.sort_unstable();
    ids
}

/// SFA word of one series under a learned model.
pub fn sfa_transform(series: &[f32], model: &QuantizationModel) -> Word {
    model.transform(series)
}

/// Lower bound of the squared Euclidean distance between the query
/// (projected with `model.selected()`) and the source series of `word`,
/// chunked with early abandoning against `bsf`.
pub fn sfa_lower_bound(query_proj: &[f64], word: &Word, model: &QuantizationModel, bsf: f64) -> f64 {
    model.word_lower_bound(query_proj, word, bsf)
}
