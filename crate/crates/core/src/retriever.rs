//! End-to-end time-aware retrieval pipeline.
//!
//! Queries are over-retrieved by exhaustive semantic scoring, future
//! documents are masked out, surviving candidates' temporal scores are
//! normalized onto the semantic distribution and summed with the semantic
//! score, and the top-k by combined score are returned. A semantic-only
//! mode skips the temporal steps and serves as the baseline.

use std::cmp::Ordering;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Corpus;
use crate::date::CivilDate;
use crate::embedding::{semantic_score, EmbeddingVector, Encoder};
use crate::temporal::{compute_stats, normalize_temporal, raw_temporal_score_unchecked, TemporalConfig};

#[derive(Debug, Error)]
pub enum IndexError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("index file parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("encoder fingerprint mismatch: index built with {index}, loaded with {current}")]
    FingerprintMismatch { index: String, current: String },
    #[error("corpus hash mismatch: index built over {index}, loaded corpus is {current}")]
    CorpusMismatch { index: String, current: String },
    #[error("index is misaligned: {0}")]
    Misaligned(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    SemanticOnly,
    Temporal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatsScope {
    /// Normalization statistics computed over the query's surviving
    /// over-retrieved candidates.
    Query,
    /// Statistics computed over every non-masked passage in the corpus.
    Global,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrievalConfig {
    pub top_k: usize,
    /// Candidates fetched = over_retrieve_factor * top_k, capped at corpus size.
    pub over_retrieve_factor: usize,
    pub mask_future: bool,
    pub mode: Mode,
    pub temporal: TemporalConfig,
    pub stats_scope: StatsScope,
}

impl Default for RetrievalConfig {
    fn default() -> Self {
        RetrievalConfig {
            top_k: 5,
            over_retrieve_factor: 5,
            mask_future: true,
            mode: Mode::Temporal,
            temporal: TemporalConfig::default(),
            stats_scope: StatsScope::Query,
        }
    }
}

/// One ranked retrieval result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredPassage {
    pub passage_id: String,
    pub semantic: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub temporal_normalized: Option<f64>,
    pub combined: f64,
    pub rank: usize,
}

/// Immutable searchable index: one vector and one epoch day per passage,
/// aligned by position with the corpus.
#[derive(Debug, Clone)]
pub struct Index {
    corpus: Corpus,
    vectors: Vec<EmbeddingVector>,
    dates: Vec<i64>,
    encoder_fingerprint: String,
}

impl Index {
    pub fn corpus(&self) -> &Corpus {
        &self.corpus
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn encoder_fingerprint(&self) -> &str {
        &self.encoder_fingerprint
    }
}

pub fn build_index(corpus: Corpus, encoder: &dyn Encoder) -> Index {
    let vectors: Vec<EmbeddingVector> = corpus
        .passages()
        .iter()
        .map(|p| encoder.encode(&p.text))
        .collect();
    let dates: Vec<i64> = corpus
        .passages()
        .iter()
        .map(|p| p.date.epoch_day())
        .collect();
    Index {
        corpus,
        vectors,
        dates,
        encoder_fingerprint: encoder.fingerprint(),
    }
}

/// Exhaustive top-n candidates by semantic score, descending. Ties order by
/// later passage date first, then lexicographic id.
pub fn candidate_set(index: &Index, q_vec: &EmbeddingVector, n: usize) -> Vec<(usize, f64)> {
    let mut scored: Vec<(usize, f64)> = index
        .vectors
        .iter()
        .enumerate()
        .map(|(pos, v)| {
            let s = semantic_score(q_vec, v).expect("index vectors share the encoder dimension");
            (pos, s)
        })
        .collect();
    scored.sort_by(|a, b| compare_candidates(index, a.1, a.0, b.1, b.0));
    scored.truncate(n);
    scored
}

fn compare_candidates(index: &Index, score_a: f64, pos_a: usize, score_b: f64, pos_b: usize) -> Ordering {
    score_b
        .partial_cmp(&score_a)
        .unwrap_or(Ordering::Equal)
        .then_with(|| index.dates[pos_b].cmp(&index.dates[pos_a]))
        .then_with(|| {
            index.corpus.passages()[pos_a]
                .id
                .cmp(&index.corpus.passages()[pos_b].id)
        })
}

/// Combined retrieval score: semantic plus normalized temporal, or `None`
/// when the document postdates the query and masking is on. `None` means
/// the passage is excluded from ranking entirely.
pub fn temp_ret_score(
    semantic: f64,
    tau_normalized: f64,
    qt: i64,
    dt: i64,
    mask_future: bool,
) -> Option<f64> {
    if mask_future && qt < dt {
        return None;
    }
    Some(semantic + tau_normalized)
}

/// Run the full retrieval pipeline for one query.
///
/// The query timestamp is appended to the question text before encoding:
/// queries are posed as time-suffixed text, so the baseline retriever sees
/// the timestamp tokens too and can only exploit them by token matching.
pub fn retrieve(
    index: &Index,
    query_text: &str,
    query_ts: CivilDate,
    cfg: &RetrievalConfig,
    encoder: &dyn Encoder,
) -> Vec<ScoredPassage> {
    let q_vec = encoder.encode(&query_expansion(query_text, query_ts));
    let n = cfg
        .over_retrieve_factor
        .saturating_mul(cfg.top_k)
        .min(index.len());
    let candidates = candidate_set(index, &q_vec, n);

    match cfg.mode {
        Mode::SemanticOnly => candidates
            .into_iter()
            .take(cfg.top_k)
            .enumerate()
            .map(|(i, (pos, semantic))| ScoredPassage {
                passage_id: index.corpus.passages()[pos].id.clone(),
                semantic,
                temporal_normalized: None,
                combined: semantic,
                rank: i + 1,
            })
            .collect(),
        Mode::Temporal => {
            let qt = query_ts.epoch_day();
            let survivors: Vec<(usize, f64)> = candidates
                .into_iter()
                .filter(|&(pos, _)| !(cfg.mask_future && index.dates[pos] > qt))
                .collect();
            if survivors.is_empty() {
                return Vec::new();
            }
            // alpha_scale cancels exactly in the z-normalization; computing
            // the raw reciprocals with unit alpha keeps rankings bit-identical
            // across alpha values instead of merely equal up to rounding.
            let unit_alpha = TemporalConfig {
                alpha_scale: 1.0,
                min_delta_days: cfg.temporal.min_delta_days,
            };
            let tau_raw: Vec<f64> = survivors
                .iter()
                .map(|&(pos, _)| raw_temporal_score_unchecked(qt, index.dates[pos], &unit_alpha))
                .collect();
            let (tau_stats, sem_stats) = match cfg.stats_scope {
                StatsScope::Query => {
                    let sems: Vec<f64> = survivors.iter().map(|&(_, s)| s).collect();
                    (
                        compute_stats(&tau_raw).expect("survivors non-empty"),
                        compute_stats(&sems).expect("survivors non-empty"),
                    )
                }
                StatsScope::Global => {
                    // Statistics over every non-masked corpus passage for this query.
                    let mut all_tau = Vec::with_capacity(index.len());
                    let mut all_sem = Vec::with_capacity(index.len());
                    for (pos, v) in index.vectors.iter().enumerate() {
                        if cfg.mask_future && index.dates[pos] > qt {
                            continue;
                        }
                        all_tau.push(raw_temporal_score_unchecked(qt, index.dates[pos], &unit_alpha));
                        all_sem.push(semantic_score(&q_vec, v).expect("aligned dimensions"));
                    }
                    (
                        compute_stats(&all_tau).expect("survivors imply non-empty"),
                        compute_stats(&all_sem).expect("survivors imply non-empty"),
                    )
                }
            };
            let tau_norm = normalize_temporal(&tau_raw, &tau_stats, &sem_stats);
            let mut combined: Vec<(usize, f64, f64, f64)> = survivors
                .iter()
                .zip(&tau_norm)
                .map(|(&(pos, semantic), &tn)| {
                    let c = temp_ret_score(semantic, tn, qt, index.dates[pos], cfg.mask_future)
                        .expect("future passages were filtered before scoring");
                    (pos, semantic, tn, c)
                })
                .collect();
            combined.sort_by(|a, b| compare_candidates(index, a.3, a.0, b.3, b.0));
            combined
                .into_iter()
                .take(cfg.top_k)
                .enumerate()
                .map(|(i, (pos, semantic, tn, c))| ScoredPassage {
                    passage_id: index.corpus.passages()[pos].id.clone(),
                    semantic,
                    temporal_normalized: Some(tn),
                    combined: c,
                    rank: i + 1,
                })
                .collect()
        }
    }
}

/// Text actually fed to the encoder for a query.
pub fn query_expansion(query_text: &str, query_ts: CivilDate) -> String {
    format!("{query_text} {query_ts}")
}

const INDEX_SCHEMA_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct IndexFile {
    schema_version: u32,
    corpus_hash: String,
    encoder_fingerprint: String,
    dimension: usize,
    vectors: Vec<Vec<f64>>,
    dates: Vec<i64>,
}

/// Serialize an index to a single JSON file. The corpus itself is not
/// embedded; loading requires the corpus plus a matching encoder.
pub fn save_index(index: &Index, path: impl AsRef<Path>) -> Result<(), IndexError> {
    let dimension = index.vectors.first().map_or(0, |v| v.dimension());
    let file = IndexFile {
        schema_version: INDEX_SCHEMA_VERSION,
        corpus_hash: index.corpus.content_hash(),
        encoder_fingerprint: index.encoder_fingerprint.clone(),
        dimension,
        vectors: index.vectors.iter().map(|v| v.0.clone()).collect(),
        dates: index.dates.clone(),
    };
    let json = serde_json::to_string(&file)?;
    fs::write(path, json)?;
    Ok(())
}

/// Load an index, verifying the corpus hash and encoder fingerprint.
pub fn load_index(
    path: impl AsRef<Path>,
    corpus: Corpus,
    encoder: &dyn Encoder,
) -> Result<Index, IndexError> {
    let content = fs::read_to_string(path)?;
    let file: IndexFile = serde_json::from_str(&content)?;
    if file.encoder_fingerprint != encoder.fingerprint() {
        return Err(IndexError::FingerprintMismatch {
            index: file.encoder_fingerprint,
            current: encoder.fingerprint(),
        });
    }
    let corpus_hash = corpus.content_hash();
    if file.corpus_hash != corpus_hash {
        return Err(IndexError::CorpusMismatch {
            index: file.corpus_hash,
            current: corpus_hash,
        });
    }
    if file.vectors.len() != corpus.len() || file.dates.len() != corpus.len() {
        return Err(IndexError::Misaligned(format!(
            "{} vectors / {} dates for {} passages",
            file.vectors.len(),
            file.dates.len(),
            corpus.len()
        )));
    }
    if file.vectors.iter().any(|v| v.len() != file.dimension) {
        return Err(IndexError::Misaligned("vector dimension drift".to_string()));
    }
    Ok(Index {
        corpus,
        vectors: file.vectors.into_iter().map(EmbeddingVector).collect(),
        dates: file.dates,
        encoder_fingerprint: file.encoder_fingerprint,
    })
}
