//! serix: exact k-nearest-neighbor search over fixed-length data series
//! under z-normalized Euclidean distance.
//!
//! Series are summarized into short symbolic words — either by a learned
//! frequency-domain summarizer (variance-ranked Fourier coefficients with
//! per-dimension quantization learned from a data sample) or by the
//! classical mean-based summarizer with fixed Gaussian breakpoints. Words
//! index into a binary prefix tree whose node signatures admit cheap
//! lower bounds on the true distance, so most of the data is pruned
//! without ever touching raw values; answers are always exact.
//!
//! Start with [`gen`] to synthesize a corpus, [`sfa::learn_mcb`] or
//! [`sax::SaxModel::new`] for a summarizer, [`query::Engine`] to build
//! and search, and [`eval`] to measure lower-bound tightness and pruning
//! power. The `serix` binary exposes the same capabilities as
//! subcommands; the `examples/` directory shows each one as a program.

pub mod cli;
pub mod error;
pub mod eval;
pub mod gen;
pub mod index;
pub mod io;
pub mod query;
pub mod sax;
pub mod series;
pub mod sfa;
pub mod spectral;
pub mod summarizer;
pub mod wire;
pub mod word;

pub use error::{Error, Result};
pub use gen::Profile;
pub use index::{build_index, IndexConfig, IndexTree};
pub use query::{parallel_scan_knn, Engine, Neighbor, QueryStats};
pub use sax::SaxModel;
pub use series::Dataset;
pub use sfa::{learn_mcb, Binning, McbParams, QuantizationModel};
pub use summarizer::Summarizer;
