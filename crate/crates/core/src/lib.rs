//! Developmental negation corpus construction.
//!
//! NLI pairs arrive with a CoNLL-U parse per span. Pairs whose premise or
//! hypothesis carries an explicit negation marker (`no`, `not`, `n't`) are
//! matched against seven syntactic categories (possession, existence,
//! labeling, prohibition, inability, epistemic, rejection). Sparse categories
//! are grown by WordNet synonym substitution of a shared root word, each
//! category is split into diagnostic train/test sets, and negation-free
//! pairs form an NLI train set with a label-balanced dev slice.
//!
//! Per-pair work runs on rayon when the `parallel` feature (on by default)
//! is enabled; outputs are identical either way.

pub mod augment;
pub mod conllu;
pub mod corpus;
pub mod error;
pub mod output;
pub mod par;
pub mod pipeline;
pub mod rng;
pub mod rules;
pub mod split;
pub mod stats;
pub mod wordnet;

pub use augment::{augment_category, augment_pair, shared_root, AugmentedPair};
pub use conllu::{parse_conllu, ConlluError, DepTree, Token};
pub use corpus::{
    ingest_pairs, tag_corpus, tag_corpus_sequential, DiagRecord, Ingested, Label, NliPair,
    ParsedPair, TaggedCorpus,
};
pub use error::{Error, Result};
pub use pipeline::{build_corpus, write_outputs, LazyLexicon, PipelineConfig, PipelineResult};
pub use rules::{
    assign_pair, classify_span, find_negation_markers, CategoryAssignment, MatchedSpan,
    NegCategory, PairOutcome, SpanRole,
};
pub use split::{carve_dev, split_diagnostics, undersample, CorpusSplits, DiagSplit};
pub use stats::{stats_report, StatsReport};
pub use wordnet::{load_wordnet, SynsetLexicon, WordNetError};
