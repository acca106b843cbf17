//! Randomized equivalence tests against an independent brute-force
//! implementation of the full scoring pipeline.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use timerank::corpus::{Corpus, Passage};
use timerank::retriever::{build_index, retrieve, Mode, RetrievalConfig, StatsScope};
use timerank::temporal::TemporalConfig;
use timerank::{CivilDate, Encoder, LexicalHashEncoder};

const VOCAB: &[&str] = &[
    "open", "final", "tournament", "winner", "champion", "singles", "doubles", "match", "score",
    "season", "court", "title", "trophy", "player", "defeated", "set", "rally", "serve", "ace",
    "break",
];

struct Instance {
    corpus: Corpus,
    query_text: String,
    query_ts: CivilDate,
}

fn random_instance(rng: &mut ChaCha8Rng, max_passages: usize) -> Instance {
    let n = rng.gen_range(1..=max_passages);
    let passages: Vec<Passage> = (0..n)
        .map(|i| {
            let len = rng.gen_range(3..10);
            let words: Vec<&str> = (0..len)
                .map(|_| VOCAB[rng.gen_range(0..VOCAB.len())])
                .collect();
            Passage {
                id: format!("p{i:03}"),
                text: words.join(" "),
                date: random_date(rng),
            }
        })
        .collect();
    let qlen = rng.gen_range(2..8);
    let query_text: Vec<&str> = (0..qlen)
        .map(|_| VOCAB[rng.gen_range(0..VOCAB.len())])
        .collect();
    Instance {
        corpus: Corpus::from_passages(passages).unwrap(),
        query_text: query_text.join(" "),
        query_ts: random_date(rng),
    }
}

fn random_date(rng: &mut ChaCha8Rng) -> CivilDate {
    CivilDate::new(
        rng.gen_range(2000..=2020),
        rng.gen_range(1..=12),
        rng.gen_range(1..=28),
    )
    .unwrap()
}

/// Brute force over the whole corpus: own dot product, own statistics, own
/// sort. Mirrors the published scoring rules, not the library code paths.
fn brute_force(
    corpus: &Corpus,
    query_text: &str,
    query_ts: CivilDate,
    cfg: &RetrievalConfig,
    encoder: &dyn Encoder,
) -> Vec<String> {
    let q = encoder.encode(&format!("{query_text} {query_ts}"));
    let qt = query_ts.epoch_day();

    let mut rows: Vec<(String, i64, f64)> = corpus
        .passages()
        .iter()
        .map(|p| {
            let v = encoder.encode(&p.text);
            let sem: f64 = q
                .as_slice()
                .iter()
                .zip(v.as_slice())
                .map(|(a, b)| a * b)
                .sum();
            (p.id.clone(), p.date.epoch_day(), sem)
        })
        .collect();
    if cfg.mask_future {
        rows.retain(|&(_, dt, _)| dt <= qt);
    }
    if rows.is_empty() {
        return Vec::new();
    }

    let tau: Vec<f64> = rows
        .iter()
        .map(|&(_, dt, _)| cfg.temporal.alpha_scale / (qt - dt).max(cfg.temporal.min_delta_days) as f64)
        .collect();
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let std = |v: &[f64], m: f64| {
        (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / v.len() as f64).sqrt()
    };
    let sems: Vec<f64> = rows.iter().map(|r| r.2).collect();
    let (mu_t, mu_s) = (mean(&tau), mean(&sems));
    let (sd_t, sd_s) = (std(&tau, mu_t), std(&sems, mu_s));

    let mut scored: Vec<(String, i64, f64)> = rows
        .iter()
        .zip(&tau)
        .map(|(&(ref id, dt, sem), &t)| {
            let tn = if sd_t == 0.0 || sd_s == 0.0 {
                mu_s
            } else {
                ((t - mu_t) / sd_t) * sd_s + mu_s
            };
            (id.clone(), dt, sem + tn)
        })
        .collect();
    scored.sort_by(|a, b| {
        b.2.partial_cmp(&a.2)
            .unwrap()
            .then_with(|| b.1.cmp(&a.1))
            .then_with(|| a.0.cmp(&b.0))
    });
    scored
        .into_iter()
        .take(cfg.top_k)
        .map(|(id, _, _)| id)
        .collect()
}

#[test]
fn retrieve_matches_brute_force_on_randomized_instances() {
    let encoder = LexicalHashEncoder::with_dimension(64);
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for trial in 0..150 {
        let inst = random_instance(&mut rng, 200);
        let cfg = RetrievalConfig {
            top_k: rng.gen_range(1..=10),
            over_retrieve_factor: 200, // always covers the corpus
            mask_future: true,
            mode: Mode::Temporal,
            temporal: TemporalConfig::default(),
            stats_scope: StatsScope::Query,
        };
        let index = build_index(inst.corpus.clone(), &encoder);
        let got: Vec<String> = retrieve(&index, &inst.query_text, inst.query_ts, &cfg, &encoder)
            .into_iter()
            .map(|sp| sp.passage_id)
            .collect();
        let expected = brute_force(&inst.corpus, &inst.query_text, inst.query_ts, &cfg, &encoder);
        assert_eq!(got, expected, "trial {trial}");
    }
}

#[test]
fn masking_never_returns_future_passages() {
    let encoder = LexicalHashEncoder::with_dimension(32);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let cfg = RetrievalConfig::default();
    for _ in 0..1000 {
        let inst = random_instance(&mut rng, 30);
        let index = build_index(inst.corpus.clone(), &encoder);
        let qt = inst.query_ts.epoch_day();
        for sp in retrieve(&index, &inst.query_text, inst.query_ts, &cfg, &encoder) {
            let pos = inst.corpus.position_of(&sp.passage_id).unwrap();
            assert!(inst.corpus.passages()[pos].date.epoch_day() <= qt);
        }
    }
}

#[test]
fn ranking_is_invariant_to_alpha_scale() {
    let encoder = LexicalHashEncoder::with_dimension(64);
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..100 {
        let inst = random_instance(&mut rng, 60);
        let mut outputs = Vec::new();
        for alpha in [0.5, 1.0, 10.0] {
            let cfg = RetrievalConfig {
                temporal: TemporalConfig {
                    alpha_scale: alpha,
                    min_delta_days: 1,
                },
                ..RetrievalConfig::default()
            };
            let index = build_index(inst.corpus.clone(), &encoder);
            let ids: Vec<String> =
                retrieve(&index, &inst.query_text, inst.query_ts, &cfg, &encoder)
                    .into_iter()
                    .map(|sp| sp.passage_id)
                    .collect();
            outputs.push(ids);
        }
        assert_eq!(outputs[0], outputs[1]);
        assert_eq!(outputs[1], outputs[2]);
    }
}

#[test]
fn global_stats_scope_also_matches_brute_force_when_covering() {
    // With over-retrieval covering the corpus, query scope and global scope
    // normalize over the same population and must agree.
    let encoder = LexicalHashEncoder::with_dimension(64);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..50 {
        let inst = random_instance(&mut rng, 80);
        let index = build_index(inst.corpus.clone(), &encoder);
        let base = RetrievalConfig {
            over_retrieve_factor: 100,
            ..RetrievalConfig::default()
        };
        let global = RetrievalConfig {
            stats_scope: StatsScope::Global,
            ..base.clone()
        };
        let a: Vec<String> = retrieve(&index, &inst.query_text, inst.query_ts, &base, &encoder)
            .into_iter()
            .map(|sp| sp.passage_id)
            .collect();
        let b: Vec<String> = retrieve(&index, &inst.query_text, inst.query_ts, &global, &encoder)
            .into_iter()
            .map(|sp| sp.passage_id)
            .collect();
        assert_eq!(a, b);
    }
}
