//! Temporal proximity scoring and its rescaling to the semantic score range.
//!
//! A candidate's raw temporal score is the reciprocal of the query-document
//! day difference, scaled by `alpha_scale`. Raw scores are z-normalized over
//! the candidate population and mapped onto the semantic score distribution
//! (multiply by the semantic std, add the semantic mean) so the two scores
//! are commensurable before summing.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TemporalError {
    #[error("document timestamp {dt} is in the future of query timestamp {qt}")]
    FutureDocument { qt: i64, dt: i64 },
    #[error("cannot compute statistics over an empty population")]
    EmptyPopulation,
    #[error("invalid temporal config: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TemporalConfig {
    /// Scale factor on the reciprocal time difference. Ranking-irrelevant
    /// under per-candidate-set normalization, but exposed for ablations.
    pub alpha_scale: f64,
    /// Denominator clamp in days; a same-day document scores as if it were
    /// this many days old instead of dividing by zero.
    pub min_delta_days: i64,
}

impl Default for TemporalConfig {
    fn default() -> Self {
        TemporalConfig {
            alpha_scale: 1.0,
            min_delta_days: 1,
        }
    }
}

impl TemporalConfig {
    pub fn validate(&self) -> Result<(), TemporalError> {
        if self.alpha_scale.is_nan() || self.alpha_scale <= 0.0 {
            return Err(TemporalError::InvalidConfig(format!(
                "alpha_scale must be > 0, got {}",
                self.alpha_scale
            )));
        }
        if self.min_delta_days < 1 {
            return Err(TemporalError::InvalidConfig(format!(
                "min_delta_days must be >= 1, got {}",
                self.min_delta_days
            )));
        }
        Ok(())
    }
}

/// Population mean and standard deviation of one score population.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreStats {
    pub mean: f64,
    pub std: f64,
}

/// Reciprocal time-proximity score for a non-future document.
pub fn raw_temporal_score(qt: i64, dt: i64, cfg: &TemporalConfig) -> Result<f64, TemporalError> {
    if qt < dt {
        return Err(TemporalError::FutureDocument { qt, dt });
    }
    Ok(raw_temporal_score_unchecked(qt, dt, cfg))
}

/// Same reciprocal score without the future check; the clamp makes it total.
/// Used when future masking is explicitly disabled.
pub(crate) fn raw_temporal_score_unchecked(qt: i64, dt: i64, cfg: &TemporalConfig) -> f64 {
    let delta = (qt - dt).max(cfg.min_delta_days);
    cfg.alpha_scale / delta as f64
}

/// Population statistics (std divides by N, not N-1).
pub fn compute_stats(values: &[f64]) -> Result<ScoreStats, TemporalError> {
    if values.is_empty() {
        return Err(TemporalError::EmptyPopulation);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    Ok(ScoreStats {
        mean,
        std: var.sqrt(),
    })
}

/// Map raw temporal scores onto the semantic score distribution:
/// `((tau - mean_tau) / std_tau) * std_sem + mean_sem`.
///
/// Degenerate populations (either std is zero) map every value to the
/// semantic mean, which leaves the combined ranking purely semantic.
pub fn normalize_temporal(
    tau_raw: &[f64],
    tau_stats: &ScoreStats,
    sem_stats: &ScoreStats,
) -> Vec<f64> {
    if tau_stats.std == 0.0 || sem_stats.std == 0.0 {
        return vec![sem_stats.mean; tau_raw.len()];
    }
    tau_raw
        .iter()
        .map(|&t| ((t - tau_stats.mean) / tau_stats.std) * sem_stats.std + sem_stats.mean)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::date::CivilDate;
    use proptest::prelude::*;

    #[test]
    fn one_day_difference_scores_one() {
        let cfg = TemporalConfig::default();
        assert_eq!(raw_temporal_score(10, 9, &cfg).unwrap(), 1.0);
    }

    #[test]
    fn reciprocal_of_date_difference() {
        let qt = CivilDate::new(2020, 1, 1).unwrap().epoch_day();
        let dt = CivilDate::new(2019, 9, 8).unwrap().epoch_day();
        assert_eq!(qt - dt, 115);
        let score = raw_temporal_score(qt, dt, &TemporalConfig::default()).unwrap();
        assert!((score - 1.0 / 115.0).abs() < 1e-9);
    }

    #[test]
    fn same_day_clamps_to_min_delta() {
        let cfg = TemporalConfig::default();
        assert_eq!(raw_temporal_score(100, 100, &cfg).unwrap(), 1.0);
    }

    #[test]
    fn future_document_is_an_error() {
        let cfg = TemporalConfig::default();
        assert_eq!(
            raw_temporal_score(9, 10, &cfg),
            Err(TemporalError::FutureDocument { qt: 9, dt: 10 })
        );
    }

    #[test]
    fn stats_hand_computed() {
        let s = compute_stats(&[1.0, 3.0]).unwrap();
        assert_eq!(s.mean, 2.0);
        assert_eq!(s.std, 1.0); // population sigma
        let single = compute_stats(&[5.0]).unwrap();
        assert_eq!((single.mean, single.std), (5.0, 0.0));
        let constant = compute_stats(&[2.0, 2.0, 2.0]).unwrap();
        assert_eq!((constant.mean, constant.std), (2.0, 0.0));
    }

    #[test]
    fn stats_reject_empty_population() {
        assert_eq!(compute_stats(&[]), Err(TemporalError::EmptyPopulation));
    }

    #[test]
    fn normalize_hand_computed() {
        let tau = [1.0, 3.0];
        let tau_stats = ScoreStats { mean: 2.0, std: 1.0 };
        let sem_stats = ScoreStats { mean: 10.0, std: 2.0 };
        assert_eq!(normalize_temporal(&tau, &tau_stats, &sem_stats), vec![8.0, 12.0]);
    }

    #[test]
    fn normalize_is_alpha_invariant() {
        // The same raw scores scaled by 2, with stats recomputed, normalize identically.
        let sem_stats = ScoreStats { mean: 10.0, std: 2.0 };
        let a = [1.0, 3.0];
        let b = [2.0, 6.0];
        let na = normalize_temporal(&a, &compute_stats(&a).unwrap(), &sem_stats);
        let nb = normalize_temporal(&b, &compute_stats(&b).unwrap(), &sem_stats);
        for (x, y) in na.iter().zip(&nb) {
            assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn degenerate_sigma_maps_to_semantic_mean() {
        let sem_stats = ScoreStats { mean: 0.7, std: 0.1 };
        let tau = [4.0, 4.0, 4.0];
        let out = normalize_temporal(&tau, &compute_stats(&tau).unwrap(), &sem_stats);
        assert_eq!(out, vec![0.7, 0.7, 0.7]);

        let zero_sem = ScoreStats { mean: 0.7, std: 0.0 };
        let tau2 = [1.0, 2.0];
        let out2 = normalize_temporal(&tau2, &compute_stats(&tau2).unwrap(), &zero_sem);
        assert_eq!(out2, vec![0.7, 0.7]);
    }

    proptest! {
        #[test]
        fn normalized_population_matches_semantic_stats(
            tau in proptest::collection::vec(0.0001f64..1.0, 2..50),
            sem_mean in -1.0f64..1.0,
            sem_std in 0.01f64..1.0,
        ) {
            let tau_stats = compute_stats(&tau).unwrap();
            prop_assume!(tau_stats.std > 1e-12);
            let sem_stats = ScoreStats { mean: sem_mean, std: sem_std };
            let out = normalize_temporal(&tau, &tau_stats, &sem_stats);
            let out_stats = compute_stats(&out).unwrap();
            prop_assert!((out_stats.mean - sem_mean).abs() < 1e-9);
            prop_assert!((out_stats.std - sem_std).abs() < 1e-9);
        }

        #[test]
        fn normalization_preserves_order(
            deltas in proptest::collection::vec(1i64..10_000, 2..40),
            alpha in 0.1f64..10.0,
        ) {
            let cfg = TemporalConfig { alpha_scale: alpha, min_delta_days: 1 };
            let qt = 20_000i64;
            let raw: Vec<f64> = deltas
                .iter()
                .map(|&d| raw_temporal_score(qt, qt - d, &cfg).unwrap())
                .collect();
            let tau_stats = compute_stats(&raw).unwrap();
            prop_assume!(tau_stats.std > 1e-15);
            let sem_stats = ScoreStats { mean: 0.5, std: 0.2 };
            let out = normalize_temporal(&raw, &tau_stats, &sem_stats);
            // Smaller day difference must yield a strictly larger normalized score.
            for i in 0..deltas.len() {
                for j in 0..deltas.len() {
                    if deltas[i] < deltas[j] {
                        prop_assert!(out[i] > out[j]);
                    }
                }
            }
        }
    }
}
