//! Text encoders and the semantic relevance score.
//!
//! The default encoder is a deterministic signed-hash bag of word unigrams
//! and character trigrams, L2-normalized. It stands in for a dense neural
//! encoder so that every downstream ranking number is reproducible; anything
//! implementing [`Encoder`] can be dropped in instead.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EmbeddingError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
}

/// Fixed-dimension real vector produced by an encoder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingVector(pub Vec<f64>);

impl EmbeddingVector {
    pub fn dimension(&self) -> usize {
        self.0.len()
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Deterministic text encoder. Equal text must produce equal vectors, and
/// every produced vector has the declared dimension.
pub trait Encoder: Send + Sync {
    fn encode(&self, text: &str) -> EmbeddingVector;
    fn dimension(&self) -> usize;
    /// Stable identifier for the encoder configuration; serialized indexes
    /// record it and refuse to load under a different encoder.
    fn fingerprint(&self) -> String;
}

/// Dot product of two encoder representations.
pub fn semantic_score(q: &EmbeddingVector, d: &EmbeddingVector) -> Result<f64, EmbeddingError> {
    if q.dimension() != d.dimension() {
        return Err(EmbeddingError::DimensionMismatch {
            left: q.dimension(),
            right: d.dimension(),
        });
    }
    Ok(q.0.iter().zip(&d.0).map(|(a, b)| a * b).sum())
}

pub const DEFAULT_DIMENSION: usize = 1024;

/// Fixed hash seed so index builds are bit-stable across runs and machines.
pub const DEFAULT_HASH_SEED: u64 = 0x9e37_79b9_7f4a_7c15;

/// Signed feature hashing over lowercase word unigrams plus character
/// trigrams within each word.
#[derive(Debug, Clone)]
pub struct LexicalHashEncoder {
    dimension: usize,
    seed: u64,
}

impl Default for LexicalHashEncoder {
    fn default() -> Self {
        Self::new(DEFAULT_DIMENSION, DEFAULT_HASH_SEED)
    }
}

impl LexicalHashEncoder {
    pub fn new(dimension: usize, seed: u64) -> Self {
        assert!(dimension > 0, "dimension must be positive");
        LexicalHashEncoder { dimension, seed }
    }

    pub fn with_dimension(dimension: usize) -> Self {
        Self::new(dimension, DEFAULT_HASH_SEED)
    }

    fn accumulate(&self, out: &mut [f64], tag: u8, feature: &str) {
        let h = fnv1a(self.seed, tag, feature.as_bytes());
        let bucket = (h % self.dimension as u64) as usize;
        let sign = if h >> 63 == 0 { 1.0 } else { -1.0 };
        out[bucket] += sign;
    }
}

/// FNV-1a, seeded, with a tag byte separating feature namespaces.
fn fnv1a(seed: u64, tag: u8, bytes: &[u8]) -> u64 {
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut h = seed ^ 0xcbf2_9ce4_8422_2325;
    h ^= u64::from(tag);
    h = h.wrapping_mul(PRIME);
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(PRIME);
    }
    h
}

fn tokenize(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(|t| t.to_lowercase())
}

impl Encoder for LexicalHashEncoder {
    fn encode(&self, text: &str) -> EmbeddingVector {
        let mut values = vec![0.0; self.dimension];
        let mut any = false;
        for token in tokenize(text) {
            any = true;
            self.accumulate(&mut values, b'u', &token);
            let chars: Vec<char> = token.chars().collect();
            for window in chars.windows(3) {
                let trigram: String = window.iter().collect();
                self.accumulate(&mut values, b't', &trigram);
            }
        }
        if any {
            let norm = values.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 0.0 {
                for v in &mut values {
                    *v /= norm;
                }
            }
        }
        EmbeddingVector(values)
    }

    fn dimension(&self) -> usize {
        self.dimension
    }

    fn fingerprint(&self) -> String {
        format!("lexhash-v1-d{}-s{:016x}", self.dimension, self.seed)
    }
}
