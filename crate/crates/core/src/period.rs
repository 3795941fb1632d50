//! Calendar buckets (UTC month, ISO-8601 week) keyed off block timestamps.

use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Datelike, Duration, NaiveDate, Utc, Weekday};
use serde::{Serialize, Serializer};

fn utc(ts: u64) -> DateTime<Utc> {
    DateTime::from_timestamp(ts as i64, 0).unwrap_or(DateTime::UNIX_EPOCH)
}

pub fn utc_date(ts: u64) -> NaiveDate {
    utc(ts).date_naive()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct YearMonth {
    pub year: i32,
    pub month: u32,
}

impl YearMonth {
    pub fn from_timestamp(ts: u64) -> Self {
        let d = utc(ts);
        YearMonth { year: d.year(), month: d.month() }
    }

    /// Packed as `yyyymm` for the on-disk month index.
    pub fn packed(self) -> u32 {
        self.year as u32 * 100 + self.month
    }

    pub fn unpack(v: u32) -> Self {
        YearMonth { year: (v / 100) as i32, month: v % 100 }
    }

    pub fn succ(self) -> Self {
        if self.month == 12 {
            YearMonth { year: self.year + 1, month: 1 }
        } else {
            YearMonth { year: self.year, month: self.month + 1 }
        }
    }

    /// Every month from `first` to `last` inclusive.
    pub fn range(first: Self, last: Self) -> impl Iterator<Item = YearMonth> {
        std::iter::successors(Some(first), move |m| Some(m.succ()).filter(|n| *n <= last))
    }
}

impl fmt::Display for YearMonth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

impl Serialize for YearMonth {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// ISO-8601 week, e.g. `2015-W15`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct IsoWeek {
    pub year: i32,
    pub week: u32,
}

impl IsoWeek {
    pub fn from_timestamp(ts: u64) -> Self {
        Self::from_date(utc_date(ts))
    }

    pub fn from_date(d: NaiveDate) -> Self {
        let w = d.iso_week();
        IsoWeek { year: w.year(), week: w.week() }
    }

    pub fn monday(self) -> NaiveDate {
        NaiveDate::from_isoywd_opt(self.year, self.week, Weekday::Mon)
            .expect("week constructed from a valid date")
    }

    pub fn range(first: Self, last: Self) -> impl Iterator<Item = IsoWeek> {
        std::iter::successors(Some(first), move |w| {
            Some(IsoWeek::from_date(w.monday() + Duration::days(7))).filter(|n| *n <= last)
        })
    }
}

impl fmt::Display for IsoWeek {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-W{:02}", self.year, self.week)
    }
}

impl Serialize for IsoWeek {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("not an ISO week: {0:?}")]
pub struct ParseWeekError(pub String);

impl FromStr for IsoWeek {
    type Err = ParseWeekError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseWeekError(s.to_string());
        let (y, w) = s.trim().split_once("-W").ok_or_else(err)?;
        let year: i32 = y.parse().map_err(|_| err())?;
        let week: u32 = w.parse().map_err(|_| err())?;
        NaiveDate::from_isoywd_opt(year, week, Weekday::Mon).ok_or_else(err)?;
        Ok(IsoWeek { year, week })
    }
}
