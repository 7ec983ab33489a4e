//! Symbolic words with per-symbol variable cardinality and the shared
//! chunked lower-bound kernel.
//!
//! A full-cardinality word uses `full_bits` bits per symbol against a row
//! of `2^full_bits - 1` breakpoints. Reducing a symbol to `c` bits keeps
//! its `c`-bit prefix; the reduced symbol's quantization interval is
//! bounded by every `2^(full_bits-c)`-th breakpoint of the full row, so
//! intervals only widen as cardinality drops (the prefix property the
//! tree splitting relies on).

/// Number of positions accumulated per early-abandon check in every
/// distance kernel (mirrors an 8-lane vector register of 32-bit values).
pub const CHUNK: usize = 8;

/// An l-symbol word at full cardinality.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Word {
    pub symbols: Box<[u8]>,
}

impl Word {
    pub fn new(symbols: Vec<u8>) -> Self {
        Word {
            symbols: symbols.into_boxed_slice(),
        }
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// The `card`-bit prefix of the symbol at `pos`.
    pub fn prefix(&self, pos: usize, card: u8, full_bits: u8) -> u8 {
        self.symbols[pos] >> (full_bits - card)
    }
}

/// Quantize a value against a strictly increasing breakpoint row using
/// left-closed half-open bins: the symbol is the number of breakpoints
/// `<=` the value, so a value exactly on a breakpoint goes right.
pub fn quantize(row: &[f64], value: f64) -> u8 {
    row.partition_point(|&b| b <= value) as u8
}

/// Interval bounds of `symbol` (already reduced to `card` bits) over the
/// full breakpoint row. Outer bins are unbounded.
pub fn bin_edges(row: &[f64], symbol: u8, card: u8, full_bits: u8) -> (f64, f64) {
    debug_assert!(card >= 1 && card <= full_bits);
    let step = 1usize << (full_bits - card);
    let sym = symbol as usize;
    let lower = if sym == 0 {
        f64::NEG_INFINITY
    } else {
        row[sym * step - 1]
    };
    let upper = if sym == (1usize << card) - 1 {
        f64::INFINITY
    } else {
        row[(sym + 1) * step - 1]
    };
    (lower, upper)
}

/// Distance from `value` to the quantization interval of `symbol` at the
/// given cardinality: 0 inside, gap to the violated boundary outside.
pub fn mind(row: &[f64], value: f64, symbol: u8, card: u8, full_bits: u8) -> f64 {
    let (lower, upper) = bin_edges(row, symbol, card, full_bits);
    // branch-free UPPER/LOWER/ZERO selection: at most one max is positive
    (lower - value).max(0.0) + (value - upper).max(0.0)
}

/// Chunked early-abandoning accumulation of per-position weighted squared
/// terms. `term(j)` must return `weight_j * mind_j^2`.
///
/// With `bsf = INFINITY` this is the full lower bound. Once the running
/// sum reaches `bsf` after a chunk, the partial sum is returned; it is
/// `>= bsf` and `<=` the full sum.
pub fn lower_bound_early_abandon<F>(len: usize, mut term: F, bsf: f64) -> f64
where
    F: FnMut(usize) -> f64,
{
    let mut total = 0.0f64;
    let mut i = 0;
    while i < len {
        let end = (i + CHUNK).min(len);
        let mut chunk = 0.0f64;
        for j in i..end {
            chunk += term(j);
        }
        total += chunk;
        if total >= bsf {
            return total;
        }
        i = end;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    // 2-bit alphabet, row [-1, 0, 1]
    const ROW: [f64; 3] = [-1.0, 0.0, 1.0];

    #[test]
    fn quantize_conventions() {
        assert_eq!(quantize(&ROW, -5.0), 0);
        assert_eq!(quantize(&ROW, -1.0), 1); // on-breakpoint goes right
        assert_eq!(quantize(&ROW, 0.5), 2);
        assert_eq!(quantize(&ROW, 7.0), 3);
    }

    #[test]
    fn quantize_matches_linear_scan_oracle() {
        use rand::prelude::*;
        let mut rng = StdRng::seed_from_u64(1);
        let row: Vec<f64> = {
            let mut v: Vec<f64> = (0..255).map(|_| rng.gen_range(-3.0..3.0)).collect();
            v.sort_by(f64::total_cmp);
            v.dedup();
            v
        };
        for _ in 0..1000 {
            let x = rng.gen_range(-4.0..4.0);
            let scan = row.iter().filter(|&&b| b <= x).count() as u8;
            assert_eq!(quantize(&row, x), scan);
        }
    }

    #[test]
    fn mind_cases() {
        // inside the interval
        assert_eq!(mind(&ROW, -0.5, 1, 2, 2), 0.0);
        // above the upper bound: distance value - upper
        let row = [0.25, 0.5, 0.75];
        assert_eq!(mind(&row, 1.0, 0, 2, 2), 0.75);
        // below the lower bound
        assert_eq!(mind(&ROW, -2.0, 2, 2, 2), 2.0);
    }

    #[test]
    fn mind_monotone_in_cardinality() {
        use rand::prelude::*;
        let mut rng = StdRng::seed_from_u64(2);
        let full_bits = 4u8;
        let mut row: Vec<f64> = (0..15).map(|_| rng.gen_range(-2.0..2.0)).collect();
        row.sort_by(f64::total_cmp);
        for _ in 0..500 {
            let v: f64 = rng.gen_range(-3.0..3.0);
            let sym = quantize(&row, v.clamp(-1.9, 1.9));
            let probe = rng.gen_range(-3.0..3.0);
            for c in 1..full_bits {
                let lo = mind(&row, probe, sym >> (full_bits - c), c, full_bits);
                let hi = mind(&row, probe, sym >> (full_bits - c - 1), c + 1, full_bits);
                assert!(lo <= hi + 1e-12, "card {c}: {lo} > {hi}");
            }
        }
    }

    #[test]
    fn kernel_matches_unchunked_sum() {
        use rand::prelude::*;
        let mut rng = StdRng::seed_from_u64(3);
        for _ in 0..200 {
            let terms: Vec<f64> = (0..rng.gen_range(1..40))
                .map(|_| rng.gen_range(0.0..3.0))
                .collect();
            let full: f64 = terms.iter().sum();
            let chunked = lower_bound_early_abandon(terms.len(), |j| terms[j], f64::INFINITY);
            assert!((chunked - full).abs() <= 1e-6 * full.max(1.0));
            let bsf = rng.gen_range(0.0..full.max(1e-9));
            let v = lower_bound_early_abandon(terms.len(), |j| terms[j], bsf);
            assert!(v >= bsf && v <= full + 1e-9);
        }
    }
}
