//! SP-style multiple alignment, encoding, grammar learning and redundancy
//! detection.
//!
//! All numeric work is generic over [`Bits`]; [`Exact`] gives exact rational
//! arithmetic, `f64` and `f32` trade exactness for speed.

pub mod alignment;
pub mod encoder;
pub mod error;
pub mod grammar_io;
pub mod learner;
pub mod pattern;
pub mod redundancy;
pub mod scalar;

pub use alignment::{
    build_alignments, dump, match_reversed, pairwise_match, parse_render, render, score, Cell,
    CellKind, Column, CompressionScore, MultipleAlignment, PairwiseMatch, RenderedColumn,
    RowInstance, RowMatch, ScoredAlignment, SearchConfig, Violation, ViolationKind,
};
pub use encoder::{
    compression_metrics, decode, derive_code_pattern, encode, encode_with, CompressionMetrics,
    Encoding,
};
pub use error::{Error, Result};
pub use grammar_io::{load_grammar, load_grammar_str, save_grammar, save_grammar_string};
pub use learner::{
    derive_patterns_from_partial_match, grammar_cost, ingest, learn, select_grammar,
    update_frequencies, IdGenerator, LearnConfig, LearnState,
};
pub use pattern::{
    parse_pattern, pattern_size_bits, symbol_cost, symbols_size_bits, CostMode, CostModel, Grammar,
    Origin, PatternId, Role, SpPattern, Symbol,
};
pub use redundancy::{
    classify_grammar_pattern, count_occurrences, default_threshold, detect_chunks,
    detect_dependencies, detect_mirrors, detect_runs, expected_count, is_significant, CountMode,
    Kind, Location, RedundancyReport,
};
pub use scalar::Bits;

/// Exact rational bit counts.
pub type Exact = num_rational::Ratio<i64>;

pub type GrammarExact = Grammar<Exact>;
pub type GrammarF64 = Grammar<f64>;
pub type GrammarF32 = Grammar<f32>;
pub type EncodingExact = Encoding<Exact>;
pub type EncodingF64 = Encoding<f64>;
