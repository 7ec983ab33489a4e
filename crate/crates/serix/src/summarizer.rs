//! The common surface a summarization method exposes to the tree index
//! and the query engine: a projection of a series into `l` reals, a
//! per-position breakpoint row to quantize against, and a per-position
//! weight for the lower-bound distance.

use crate::word::{bin_edges, lower_bound_early_abandon, quantize, Word};

pub trait Summarizer: Send + Sync {
    fn series_length(&self) -> usize;
    fn word_length(&self) -> usize;
    fn alphabet_size(&self) -> usize;

    /// Bits per symbol at full cardinality (`log2(alphabet_size)`).
    fn full_bits(&self) -> u8 {
        self.alphabet_size().trailing_zeros() as u8
    }

    /// The `l` real values the word of `series` quantizes.
    fn project(&self, series: &[f32]) -> Vec<f64>;

    /// Strictly increasing breakpoints for word position `pos`.
    fn breakpoint_row(&self, pos: usize) -> &[f64];

    /// Multiplier of position `pos` in the squared lower bound.
    fn weight(&self, pos: usize) -> f64;

    /// Full-cardinality word of a series.
    fn transform(&self, series: &[f32]) -> Word {
        let proj = self.project(series);
        Word::new(
            proj.iter()
                .enumerate()
                .map(|(j, &v)| quantize(self.breakpoint_row(j), v))
                .collect(),
        )
    }

    /// Lower bound of the squared Euclidean distance between the query
    /// (given by its projection) and any series whose word matches the
    /// given per-position `(symbol prefix, cardinality)` signature.
    ///
    /// Chunked with early abandoning against `bsf` (see
    /// [`lower_bound_early_abandon`]).
    fn signature_lower_bound<F>(&self, proj: &[f64], symbol_at: F, bsf: f64) -> f64
    where
        F: Fn(usize) -> (u8, u8),
    {
        let fb = self.full_bits();
        lower_bound_early_abandon(
            proj.len(),
            |j| {
                let (sym, card) = symbol_at(j);
                let (lower, upper) = bin_edges(self.breakpoint_row(j), sym, card, fb);
                let d = (lower - proj[j]).max(0.0) + (proj[j] - upper).max(0.0);
                self.weight(j) * d * d
            },
            bsf,
        )
    }

    /// Lower bound against a full-cardinality word.
    fn word_lower_bound(&self, proj: &[f64], word: &Word, bsf: f64) -> f64 {
        let fb = self.full_bits();
        self.signature_lower_bound(proj, |j| (word.symbols[j], fb), bsf)
    }
}
