//! Timestamped passage corpus: parsing, validation, and conversion of
//! tabular event rows into natural-language passages.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::date::{CivilDate, DateError};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("duplicate passage id {0:?}")]
    DuplicateId(String),
    #[error("passage {0:?} has empty text")]
    EmptyText(String),
    #[error("unknown passage template {0:?}")]
    UnknownTemplate(String),
    #[error("event row {tournament:?}/{category:?}: final date year {date_year} != row year {year}")]
    YearMismatch {
        tournament: String,
        category: String,
        year: i32,
        date_year: i32,
    },
    #[error(transparent)]
    Date(#[from] DateError),
}

/// One timestamped text unit of the document index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Passage {
    pub id: String,
    pub text: String,
    pub date: CivilDate,
}

/// A row of the (synthetic) tournament results table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventRow {
    pub tournament: String,
    pub category: String,
    pub year: i32,
    pub winner: String,
    pub runner_up: String,
    pub score: String,
    pub final_date: CivilDate,
}

impl EventRow {
    pub fn new(
        tournament: impl Into<String>,
        category: impl Into<String>,
        year: i32,
        winner: impl Into<String>,
        runner_up: impl Into<String>,
        score: impl Into<String>,
        final_date: CivilDate,
    ) -> Result<Self, CorpusError> {
        let tournament = tournament.into();
        let category = category.into();
        if final_date.year() != year {
            return Err(CorpusError::YearMismatch {
                tournament,
                category,
                year,
                date_year: final_date.year(),
            });
        }
        Ok(EventRow {
            tournament,
            category,
            year,
            winner: winner.into(),
            runner_up: runner_up.into(),
            score: score.into(),
            final_date,
        })
    }

    /// Stable slug identifying the event: `us-open-womens-singles-2019`.
    pub fn event_slug(&self) -> String {
        format!(
            "{}-{}-{}",
            slugify(&self.tournament),
            slugify(&self.category),
            self.year
        )
    }
}

/// ASCII slug: lowercase, apostrophes dropped, other non-alphanumeric runs
/// collapsed to single dashes.
pub fn slugify(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut pending_dash = false;
    for c in s.chars() {
        if c == '\'' {
            continue;
        }
        let c = c.to_ascii_lowercase();
        if c.is_ascii_alphanumeric() {
            if pending_dash && !out.is_empty() {
                out.push('-');
            }
            pending_dash = false;
            out.push(c);
        } else {
            pending_dash = true;
        }
    }
    out
}

/// Fixed passage wording templates. Every template mentions the tournament,
/// category, year, winner, runner-up, score, the `YYYY-MM-DD` date, and the
/// phrase "<winner> and <runner_up>" so that every query type's answer occurs
/// verbatim in the text.
pub const TEMPLATE_IDS: &[&str] = &["t0", "t1", "t2", "t3", "t4", "t5"];

fn render_template(template_id: &str, row: &EventRow) -> Option<String> {
    let EventRow {
        tournament,
        category,
        year,
        winner,
        runner_up,
        score,
        final_date,
    } = row;
    let date = final_date.to_string();
    let text = match template_id {
        "t0" => format!(
            "The {tournament} {category} final in {year} was won by {winner}, \
             who defeated {runner_up} with a score of {score}. The {year} \
             final was played on {date}. The finalists were {winner} and \
             {runner_up}."
        ),
        "t1" => format!(
            "On {date}, {winner} and {runner_up} contested the {year} \
             {tournament} {category} final. {winner} prevailed over \
             {runner_up}, {score}, taking the {year} title."
        ),
        "t2" => format!(
            "{winner} claimed the {tournament} {category} title in {year}, \
             beating {runner_up} {score} in the {year} final on {date}. The \
             match brought together {winner} and {runner_up}."
        ),
        "t3" => format!(
            "The {year} edition of the {tournament} saw {winner} and \
             {runner_up} meet in the {category} final on {date}, with \
             {winner} winning {score} to close the {year} event."
        ),
        "t4" => format!(
            "{runner_up} finished runner-up to {winner} in the {category} \
             final of the {tournament} in {year}, losing {score} on {date}. \
             {winner} and {runner_up} were the {year} finalists."
        ),
        "t5" => format!(
            "In {year} the {tournament} crowned {winner} as its {category} \
             champion after a {score} victory over {runner_up} on {date}. \
             The {year} final featured {winner} and {runner_up}."
        ),
        _ => return None,
    };
    Some(text)
}

/// Deterministically instantiate one passage from an event row.
///
/// The passage id is derived from (tournament, category, year, template).
pub fn row_to_passage(row: &EventRow, template_id: &str) -> Result<Passage, CorpusError> {
    let text = render_template(template_id, row)
        .ok_or_else(|| CorpusError::UnknownTemplate(template_id.to_string()))?;
    let mut id = row.event_slug();
    write!(id, "-{template_id}").unwrap();
    Ok(Passage {
        id,
        text,
        date: row.final_date,
    })
}

/// An immutable, order-preserving collection of passages with id lookup.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    passages: Vec<Passage>,
    by_id: HashMap<String, usize>,
}

impl Corpus {
    pub fn from_passages(passages: Vec<Passage>) -> Result<Self, CorpusError> {
        let mut by_id = HashMap::with_capacity(passages.len());
        for (pos, p) in passages.iter().enumerate() {
            if p.text.trim().is_empty() {
                return Err(CorpusError::EmptyText(p.id.clone()));
            }
            if by_id.insert(p.id.clone(), pos).is_some() {
                return Err(CorpusError::DuplicateId(p.id.clone()));
            }
        }
        Ok(Corpus { passages, by_id })
    }

    pub fn len(&self) -> usize {
        self.passages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.passages.is_empty()
    }

    pub fn passages(&self) -> &[Passage] {
        &self.passages
    }

    pub fn get(&self, pos: usize) -> Option<&Passage> {
        self.passages.get(pos)
    }

    pub fn position_of(&self, id: &str) -> Option<usize> {
        self.by_id.get(id).copied()
    }

    /// SHA-256 over the canonical JSON-lines serialization of all passages.
    pub fn content_hash(&self) -> String {
        let mut hasher = Sha256::new();
        for p in &self.passages {
            hasher.update(serde_json::to_string(p).expect("passage serializes").as_bytes());
            hasher.update(b"\n");
        }
        hex::encode(hasher.finalize())
    }
}

/// Load an event table from CSV with header
/// `tournament,category,year,winner,runner_up,score,final_date`.
pub fn load_event_table(path: impl AsRef<Path>) -> Result<Vec<EventRow>, CorpusError> {
    let mut reader = csv::Reader::from_path(path).map_err(csv_error)?;
    let mut rows = Vec::new();
    for (i, record) in reader.deserialize::<EventRow>().enumerate() {
        let row: EventRow = record.map_err(|e| CorpusError::Parse {
            line: i + 2, // header is line 1
            message: e.to_string(),
        })?;
        // Re-run the constructor so the year invariant holds for file input too.
        rows.push(EventRow::new(
            row.tournament,
            row.category,
            row.year,
            row.winner,
            row.runner_up,
            row.score,
            row.final_date,
        )?);
    }
    Ok(rows)
}

/// Write an event table as CSV with the canonical header.
pub fn save_event_table(rows: &[EventRow], path: impl AsRef<Path>) -> Result<(), CorpusError> {
    let mut writer = csv::Writer::from_path(path).map_err(csv_error)?;
    for row in rows {
        writer.serialize(row).map_err(csv_error)?;
    }
    writer.flush()?;
    Ok(())
}

fn csv_error(e: csv::Error) -> CorpusError {
    CorpusError::Parse {
        line: 0,
        message: e.to_string(),
    }
}

/// Load a JSON-lines corpus file: one `{"id","text","date"}` object per line.
/// Line order is preserved; unknown fields and duplicate ids are rejected.
pub fn load_corpus(path: impl AsRef<Path>) -> Result<Corpus, CorpusError> {
    let content = fs::read_to_string(path)?;
    let mut passages = Vec::new();
    for (i, line) in content.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let passage: Passage = serde_json::from_str(line).map_err(|e| CorpusError::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        passages.push(passage);
    }
    Corpus::from_passages(passages)
}

/// Write a corpus back out as JSON-lines, one passage per line.
pub fn save_corpus(corpus: &Corpus, path: impl AsRef<Path>) -> Result<(), CorpusError> {
    let file = fs::File::create(path)?;
    let mut w = BufWriter::new(file);
    for p in corpus.passages() {
        serde_json::to_writer(&mut w, p).map_err(|e| CorpusError::Parse {
            line: 0,
            message: e.to_string(),
        })?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}
