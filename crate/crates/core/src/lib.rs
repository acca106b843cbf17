//! Time-aware passage retrieval.
//!
//! Ranks timestamped passages by the sum of a semantic similarity score
//! (dot product of encoder representations) and a temporal proximity score
//! (reciprocal of the query-document day difference, z-normalized onto the
//! semantic score distribution), with passages dated after the query masked
//! out entirely. Ships a deterministic lexical-hash encoder, a synthetic
//! tournament-QA benchmark generator, and a recall@k / exact-match
//! evaluation harness that compares the temporal retriever against a
//! semantic-only baseline.

pub mod corpus;
pub mod datagen;
pub mod date;
pub mod embedding;
pub mod evaluation;
pub mod retriever;
pub mod temporal;

pub use corpus::{load_corpus, save_corpus, Corpus, EventRow, Passage};
pub use datagen::{generate_dataset, Dataset, GenSpec, QuerySetPair, QueryType};
pub use date::CivilDate;
pub use embedding::{semantic_score, EmbeddingVector, Encoder, LexicalHashEncoder};
pub use evaluation::{run_eval, EvalReport, Query};
pub use retriever::{
    build_index, load_index, retrieve, save_index, Index, Mode, RetrievalConfig, ScoredPassage,
    StatsScope,
};
pub use temporal::{compute_stats, normalize_temporal, raw_temporal_score, ScoreStats, TemporalConfig};
