//! Seeded synthetic dataset generation: tournament event tables, the passage
//! corpus, paired early/late timestamped query sets, and disjoint few-shot
//! splits. Everything is driven by a single seeded RNG stream, so a fixed
//! spec yields byte-identical output.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{row_to_passage, Corpus, CorpusError, EventRow, TEMPLATE_IDS};
use crate::date::CivilDate;
use crate::evaluation::Query;

#[derive(Debug, Error)]
pub enum DatagenError {
    #[error("invalid generation spec: {0}")]
    InvalidSpec(String),
    #[error("rows span multiple years: expected {expected}, found {found}")]
    MixedYears { expected: i32, found: i32 },
    #[error("not enough rows: need {needed} distinct (row, query type) pairs, have {available}")]
    InsufficientRows { needed: usize, available: usize },
    #[error(transparent)]
    Corpus(#[from] CorpusError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QueryType {
    Winner,
    RunnerUp,
    Finalists,
    Score,
}

impl QueryType {
    pub const ALL: [QueryType; 4] = [
        QueryType::Winner,
        QueryType::RunnerUp,
        QueryType::Finalists,
        QueryType::Score,
    ];

    pub fn slug(self) -> &'static str {
        match self {
            QueryType::Winner => "winner",
            QueryType::RunnerUp => "runner-up",
            QueryType::Finalists => "finalists",
            QueryType::Score => "score",
        }
    }

    pub fn question(self, row: &EventRow) -> String {
        let EventRow {
            tournament,
            category,
            ..
        } = row;
        match self {
            QueryType::Winner => {
                format!("Who won the {category} final at the {tournament}?")
            }
            QueryType::RunnerUp => {
                format!("Who was the runner-up in the {category} final at the {tournament}?")
            }
            QueryType::Finalists => {
                format!("Who were the finalists in the {category} final at the {tournament}?")
            }
            QueryType::Score => {
                format!("What was the score in the {category} final at the {tournament}?")
            }
        }
    }

    pub fn answer(self, row: &EventRow) -> String {
        match self {
            QueryType::Winner => row.winner.clone(),
            QueryType::RunnerUp => row.runner_up.clone(),
            QueryType::Finalists => format!("{} and {}", row.winner, row.runner_up),
            QueryType::Score => row.score.clone(),
        }
    }
}

/// Generation parameters. `year_range` is the training era; evaluation
/// queries target events of the following year, and the generated corpus
/// covers both.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenSpec {
    pub tournaments: Vec<String>,
    pub categories: Vec<String>,
    pub year_range: (i32, i32),
    pub seed: u64,
    pub query_types: Vec<QueryType>,
    pub passages_per_row: usize,
    /// Months in which finals are held; tournaments cycle through this list
    /// by position, so a single entry puts every final in the same month.
    #[serde(default = "default_final_months")]
    pub final_months: Vec<u32>,
}

impl Default for GenSpec {
    fn default() -> Self {
        GenSpec {
            tournaments: vec![
                "Australian Open".to_string(),
                "Roland Garros".to_string(),
                "Wimbledon".to_string(),
                "US Open".to_string(),
            ],
            categories: vec!["men's singles".to_string(), "women's singles".to_string()],
            year_range: (1978, 2018),
            seed: 42,
            query_types: QueryType::ALL.to_vec(),
            passages_per_row: 1,
            final_months: FINAL_MONTHS.to_vec(),
        }
    }
}

impl GenSpec {
    pub fn validate(&self) -> Result<(), DatagenError> {
        if self.year_range.0 > self.year_range.1 {
            return Err(DatagenError::InvalidSpec(format!(
                "year range start {} exceeds end {}",
                self.year_range.0, self.year_range.1
            )));
        }
        if self.tournaments.is_empty() || self.categories.is_empty() {
            return Err(DatagenError::InvalidSpec(
                "need at least one tournament and one category".to_string(),
            ));
        }
        if self.query_types.is_empty() {
            return Err(DatagenError::InvalidSpec(
                "need at least one query type".to_string(),
            ));
        }
        if self.passages_per_row == 0 {
            return Err(DatagenError::InvalidSpec(
                "passages_per_row must be positive".to_string(),
            ));
        }
        if self.final_months.is_empty() || self.final_months.iter().any(|&m| !(1..=12).contains(&m))
        {
            return Err(DatagenError::InvalidSpec(
                "final_months must be non-empty with entries in 1..=12".to_string(),
            ));
        }
        Ok(())
    }

    /// Year whose events the paired evaluation sets ask about.
    pub fn test_year(&self) -> i32 {
        self.year_range.1 + 1
    }
}

// Name pools are deliberately length-uniform (5-letter first names,
// 6-letter surnames) so every rendered passage has the same token-length
// profile; otherwise name-length variance dominates the encoder's
// similarity noise between yearly versions of the same event.
const FIRST_NAMES: &[&str] = &[
    "Alice", "Boris", "Clara", "Diego", "Elena", "Fiona", "Gavin", "Helga", "Ivana", "Jonas",
    "Karim", "Laura", "Marco", "Nadia", "Oscar", "Paulo", "Quinn", "Renee", "Simon", "Tanya",
    "Ulric", "Vanda", "Xenia", "Zelda",
];

const LAST_NAMES: &[&str] = &[
    "Archer", "Balogh", "Castro", "Dvorak", "Engman", "Farkas", "Graves", "Hansen", "Ibarra",
    "Jensen", "Kovacs", "Larsen", "Moreau", "Norris", "Olsson", "Petrov", "Quirke", "Romero",
    "Santos", "Tanaka", "Urbano", "Vargas", "Webber", "Yilmaz",
];

/// Final months cycle over the classic tournament calendar.
const FINAL_MONTHS: &[u32] = &[1, 6, 7, 9];

fn default_final_months() -> Vec<u32> {
    FINAL_MONTHS.to_vec()
}

fn gen_name(rng: &mut ChaCha8Rng) -> String {
    let first = FIRST_NAMES.choose(rng).unwrap();
    let last = LAST_NAMES.choose(rng).unwrap();
    format!("{first} {last}")
}

// Always three sets, each "d-d": like the name pools, a fixed token shape
// keeps passage norms uniform across rows.
fn gen_score(rng: &mut ChaCha8Rng) -> String {
    let sets = 3;
    let mut parts = Vec::with_capacity(sets);
    for _ in 0..sets {
        let set = match rng.gen_range(0..4) {
            0 => format!("6-{}", rng.gen_range(0..=4)),
            1 => "7-5".to_string(),
            2 => "7-6".to_string(),
            _ => format!("6-{}", rng.gen_range(0..=4)),
        };
        parts.push(set);
    }
    parts.join(" ")
}

/// One event row per (tournament, category, year) over the spec's year range.
/// Each tournament keeps a fixed final month; days and names come from the
/// seeded stream.
pub fn gen_event_table(spec: &GenSpec) -> Result<Vec<EventRow>, DatagenError> {
    spec.validate()?;
    gen_event_table_for_years(spec, spec.year_range.0, spec.year_range.1)
}

fn gen_event_table_for_years(
    spec: &GenSpec,
    start: i32,
    end: i32,
) -> Result<Vec<EventRow>, DatagenError> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut rows = Vec::new();
    for year in start..=end {
        for (ti, tournament) in spec.tournaments.iter().enumerate() {
            let month = spec.final_months[ti % spec.final_months.len()];
            for category in &spec.categories {
                let day = rng.gen_range(1..=28);
                let winner = gen_name(&mut rng);
                let mut runner_up = gen_name(&mut rng);
                while runner_up == winner {
                    runner_up = gen_name(&mut rng);
                }
                let score = gen_score(&mut rng);
                let final_date = CivilDate::new(year, month, day).expect("day <= 28 is valid");
                rows.push(
                    EventRow::new(tournament, category, year, winner, runner_up, score, final_date)
                        .expect("date year matches row year"),
                );
            }
        }
    }
    Ok(rows)
}

/// Build the passage corpus from event rows, applying the first
/// `passages_per_row` wording templates to each row.
pub fn rows_to_corpus(rows: &[EventRow], passages_per_row: usize) -> Result<Corpus, DatagenError> {
    if passages_per_row > TEMPLATE_IDS.len() {
        return Err(DatagenError::InvalidSpec(format!(
            "passages_per_row {} exceeds available templates {}",
            passages_per_row,
            TEMPLATE_IDS.len()
        )));
    }
    let mut passages = Vec::with_capacity(rows.len() * passages_per_row);
    for row in rows {
        for template_id in &TEMPLATE_IDS[..passages_per_row] {
            passages.push(row_to_passage(row, template_id)?);
        }
    }
    Ok(Corpus::from_passages(passages)?)
}

/// Gold passage id for a row: the first template's passage.
pub fn gold_passage_id(row: &EventRow) -> String {
    format!("{}-{}", row.event_slug(), TEMPLATE_IDS[0])
}

/// Paired query sets over the same test-year events: identical questions,
/// answers, and gold ids; only the timestamps differ.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuerySetPair {
    /// Timestamped Dec 31 of the event year.
    pub tpq_early: Vec<Query>,
    /// Timestamped Jan 1 of the following year.
    pub tpq_late: Vec<Query>,
}

/// Build the paired evaluation sets from the test-year rows: one query per
/// (row, query type), early timestamp Y-12-31, late timestamp (Y+1)-01-01.
pub fn gen_tpq_pair(rows: &[EventRow], spec: &GenSpec) -> Result<QuerySetPair, DatagenError> {
    spec.validate()?;
    let year = match rows.first() {
        Some(r) => r.year,
        None => return Ok(QuerySetPair { tpq_early: Vec::new(), tpq_late: Vec::new() }),
    };
    if let Some(bad) = rows.iter().find(|r| r.year != year) {
        return Err(DatagenError::MixedYears {
            expected: year,
            found: bad.year,
        });
    }
    let early_ts = CivilDate::new(year, 12, 31).expect("Dec 31 is always valid");
    let late_ts = CivilDate::new(year + 1, 1, 1).expect("Jan 1 is always valid");
    let mut tpq_early = Vec::new();
    let mut tpq_late = Vec::new();
    for row in rows {
        for &qt in &spec.query_types {
            let base = Query {
                id: format!("{}-{}", row.event_slug(), qt.slug()),
                question: qt.question(row),
                timestamp: early_ts,
                answer: qt.answer(row),
                gold_passage_id: gold_passage_id(row),
            };
            let mut late = base.clone();
            late.timestamp = late_ts;
            tpq_early.push(base);
            tpq_late.push(late);
        }
    }
    Ok(QuerySetPair { tpq_early, tpq_late })
}

/// Disjoint few-shot training splits, balanced across query types and
/// tournaments. Timestamps are drawn uniformly between the event date and
/// the end of the event year.
pub fn gen_fewshot_splits(
    rows: &[EventRow],
    sizes: &[usize],
    seed: u64,
) -> Result<Vec<Vec<Query>>, DatagenError> {
    let types = QueryType::ALL;
    let needed: usize = sizes.iter().sum();
    let available = rows.len() * types.len();
    if needed > available {
        return Err(DatagenError::InsufficientRows { needed, available });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // Per (type, tournament) queues of rows, shuffled once, consumed
    // round-robin over tournaments so each split stays balanced. BTreeMap
    // keeps shuffle order independent of hash iteration order.
    let mut queues: BTreeMap<(&'static str, String), Vec<EventRow>> = BTreeMap::new();
    let mut tournaments: Vec<String> = Vec::new();
    for row in rows {
        if !tournaments.contains(&row.tournament) {
            tournaments.push(row.tournament.clone());
        }
        for &qt in &types {
            queues
                .entry((qt.slug(), row.tournament.clone()))
                .or_default()
                .push(row.clone());
        }
    }
    for queue in queues.values_mut() {
        queue.shuffle(&mut rng);
    }

    let mut splits = Vec::with_capacity(sizes.len());
    for &size in sizes {
        let mut split = Vec::with_capacity(size);
        // Per-type quota: size / #types, remainder to the earliest types.
        for (qi, &qt) in types.iter().enumerate() {
            let quota = size / types.len() + usize::from(qi < size % types.len());
            let mut taken = 0;
            let mut ti = 0;
            let mut stalled = 0;
            while taken < quota {
                let tournament = &tournaments[ti % tournaments.len()];
                ti += 1;
                let queue = queues.get_mut(&(qt.slug(), tournament.clone())).unwrap();
                if let Some(row) = queue.pop() {
                    let year_end = CivilDate::new(row.year, 12, 31).unwrap();
                    let lo = row.final_date.epoch_day();
                    let hi = year_end.epoch_day();
                    let offset = rng.gen_range(lo..=hi) - lo;
                    let timestamp = offset_within_year(row.final_date, offset);
                    split.push(Query {
                        id: format!("{}-{}-fs", row.event_slug(), qt.slug()),
                        question: qt.question(&row),
                        timestamp,
                        answer: qt.answer(&row),
                        gold_passage_id: gold_passage_id(&row),
                    });
                    taken += 1;
                    stalled = 0;
                } else {
                    stalled += 1;
                    if stalled >= tournaments.len() {
                        return Err(DatagenError::InsufficientRows {
                            needed,
                            available,
                        });
                    }
                }
            }
        }
        // Deterministic output order regardless of queue layout.
        split.sort_by(|a, b| a.id.cmp(&b.id));
        splits.push(split);
    }
    Ok(splits)
}

fn offset_within_year(date: CivilDate, days: i64) -> CivilDate {
    // Walk forward day by day; callers bound the offset by year end.
    let mut cursor = date;
    for _ in 0..days {
        cursor = next_day(cursor);
    }
    debug_assert_eq!(cursor.year(), date.year());
    cursor
}

fn next_day(d: CivilDate) -> CivilDate {
    CivilDate::new(d.year(), d.month(), d.day() + 1)
        .or_else(|_| CivilDate::new(d.year(), d.month() + 1, 1))
        .or_else(|_| CivilDate::new(d.year() + 1, 1, 1))
        .expect("successor of a valid date exists")
}

/// Everything one generation run produces.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub rows: Vec<EventRow>,
    pub corpus: Corpus,
    pub tpq: QuerySetPair,
    pub fewshot: Vec<Vec<Query>>,
}

pub const FEWSHOT_SIZES: [usize; 3] = [32, 64, 128];

/// Full pipeline: event table over the training era plus the test year,
/// passage corpus, paired test sets, and few-shot splits from training-era
/// rows only.
pub fn generate_dataset(spec: &GenSpec) -> Result<Dataset, DatagenError> {
    spec.validate()?;
    let rows = gen_event_table_for_years(spec, spec.year_range.0, spec.test_year())?;
    let corpus = rows_to_corpus(&rows, spec.passages_per_row)?;
    let test_rows: Vec<EventRow> = rows
        .iter()
        .filter(|r| r.year == spec.test_year())
        .cloned()
        .collect();
    let train_rows: Vec<EventRow> = rows
        .iter()
        .filter(|r| r.year <= spec.year_range.1)
        .cloned()
        .collect();
    let tpq = gen_tpq_pair(&test_rows, spec)?;
    let fewshot = gen_fewshot_splits(&train_rows, &FEWSHOT_SIZES, spec.seed)?;
    Ok(Dataset {
        rows,
        corpus,
        tpq,
        fewshot,
    })
}
