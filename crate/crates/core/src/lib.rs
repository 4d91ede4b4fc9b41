//! A random-text null model for word statistics.
//!
//! Text is a stream of i.i.d. symbols drawn from `m` letters plus one space
//! symbol, with space probability `q`. A word is a maximal run of non-space
//! symbols. This crate generates such streams, segments them, counts
//! word/type/hapax statistics in mergeable accumulators, evaluates the
//! closed-form predictions of the model (geometric length law, vocabulary
//! growth, critical length, Zipf exponent) and compares the two.
//!
//! Everything public uses one parameter convention: `q` is the probability
//! of the space symbol and `m` the number of letters. See [`analytic::appendix`]
//! for the mapping from the per-position convention (`p` = space probability,
//! `A` = alphabet size).

pub mod analytic;
pub mod compare;
pub mod corpus;
mod error;
pub mod generator;
mod params;
pub mod segmenter;
pub mod simulate;
pub mod stats;
pub mod zipf_fit;
mod zeta;

pub use analytic::AnalyticReport;
pub use compare::{ComparisonReport, Tolerances};
pub use corpus::{CorpusProfile, NormalizationOptions, SeparatorPolicy};
pub use error::{Error, Result};
pub use generator::{StreamSpec, SymbolId};
pub use params::ModelParams;
pub use segmenter::WordToken;
pub use stats::{CorpusStats, StatsAccumulator};
pub use zipf_fit::{FitMethod, FitResult, FitWindow, RankSampling, RankTable};

/// Version string recorded in every emitted report.
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
