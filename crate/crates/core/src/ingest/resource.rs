use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, NaiveDateTime};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A course step identified as `week.step`, e.g. `1.2`.
///
/// Ordering is numeric on `(week, step)`, so `2.1 < 10.2` even though the
/// strings sort the other way.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ResourceId {
    pub week: u32,
    pub step: u32,
}

impl ResourceId {
    pub fn new(week: u32, step: u32) -> Self {
        ResourceId { week, step }
    }
}

impl fmt::Display for ResourceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.week, self.step)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseResourceError(String);

impl fmt::Display for ParseResourceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unparseable resource id {:?}", self.0)
    }
}

impl std::error::Error for ParseResourceError {}

impl FromStr for ResourceId {
    type Err = ParseResourceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseResourceError(s.to_string());
        let (week, step) = s.trim().split_once('.').ok_or_else(err)?;
        let parse = |part: &str| -> Result<u32, ParseResourceError> {
            if part.is_empty() || !part.bytes().all(|b| b.is_ascii_digit()) {
                return Err(err());
            }
            match part.parse::<u32>() {
                Ok(0) | Err(_) => Err(err()),
                Ok(v) => Ok(v),
            }
        };
        Ok(ResourceId::new(parse(week)?, parse(step)?))
    }
}

impl Serialize for ResourceId {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ResourceId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

const TIMESTAMP_FORMAT: &str = "%Y-%m-%d %H:%M:%S UTC";

/// Parses `YYYY-MM-DD HH:MM:SS UTC` into seconds since the Unix epoch.
pub fn parse_timestamp(s: &str) -> Option<i64> {
    let s = s.trim();
    // chrono tolerates unpadded fields; the export format never has them.
    if s.len() != 23 {
        return None;
    }
    NaiveDateTime::parse_from_str(s, TIMESTAMP_FORMAT)
        .ok()
        .map(|dt| dt.and_utc().timestamp())
}

pub fn format_timestamp(secs: i64) -> String {
    DateTime::from_timestamp(secs, 0)
        .expect("timestamp within chrono range")
        .format(TIMESTAMP_FORMAT)
        .to_string()
}
