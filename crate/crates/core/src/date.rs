//! Calendar dates with day-resolution arithmetic.
//!
//! Query and passage timestamps carry day precision (`YYYY-MM-DD`), so all
//! time-difference arithmetic happens on integer epoch days.

use std::fmt;
use std::str::FromStr;

use chrono::{Datelike, NaiveDate};
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DateError {
    /// Input is not shaped like `YYYY-MM-DD`.
    #[error("malformed date {0:?}: expected YYYY-MM-DD")]
    MalformedDate(String),
    /// Shape is right but the calendar date does not exist (month 13, Feb 30, ...).
    #[error("invalid calendar date {0:?}")]
    InvalidDate(String),
}

/// A proleptic Gregorian calendar date with day resolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CivilDate(NaiveDate);

impl CivilDate {
    pub fn new(year: i32, month: u32, day: u32) -> Result<Self, DateError> {
        NaiveDate::from_ymd_opt(year, month, day)
            .map(CivilDate)
            .ok_or_else(|| DateError::InvalidDate(format!("{year:04}-{month:02}-{day:02}")))
    }

    /// Parse the strict 10-character `YYYY-MM-DD` form.
    pub fn parse(s: &str) -> Result<Self, DateError> {
        let bytes = s.as_bytes();
        let shaped = bytes.len() == 10
            && bytes[4] == b'-'
            && bytes[7] == b'-'
            && bytes
                .iter()
                .enumerate()
                .all(|(i, b)| matches!(i, 4 | 7) || b.is_ascii_digit());
        if !shaped {
            return Err(DateError::MalformedDate(s.to_string()));
        }
        let year: i32 = s[0..4].parse().expect("digits");
        let month: u32 = s[5..7].parse().expect("digits");
        let day: u32 = s[8..10].parse().expect("digits");
        NaiveDate::from_ymd_opt(year, month, day)
            .map(CivilDate)
            .ok_or_else(|| DateError::InvalidDate(s.to_string()))
    }

    /// Days since 1970-01-01 (negative before). Strictly monotone in calendar order.
    pub fn epoch_day(self) -> i64 {
        let epoch = NaiveDate::from_ymd_opt(1970, 1, 1).unwrap();
        self.0.signed_duration_since(epoch).num_days()
    }

    pub fn year(self) -> i32 {
        self.0.year()
    }

    pub fn month(self) -> u32 {
        self.0.month()
    }

    pub fn day(self) -> u32 {
        self.0.day()
    }
}

impl fmt::Display for CivilDate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:04}-{:02}-{:02}",
            self.0.year(),
            self.0.month(),
            self.0.day()
        )
    }
}

impl FromStr for CivilDate {
    type Err = DateError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s)
    }
}

impl Serialize for CivilDate {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for CivilDate {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        CivilDate::parse(&s).map_err(de::Error::custom)
    }
}
