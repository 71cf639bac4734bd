//! Scalar values carried by relation rows.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use rust_decimal::{Decimal, RoundingStrategy};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fractional digits kept by `avg`.
pub const AVG_SCALE: u32 = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValueKind {
    Int,
    Decimal,
    Text,
    Date,
}

impl ValueKind {
    pub fn parse(s: &str) -> Option<ValueKind> {
        match s.trim().to_ascii_lowercase().as_str() {
            "int" | "integer" | "bigint" => Some(ValueKind::Int),
            "decimal" | "numeric" => Some(ValueKind::Decimal),
            "text" | "string" | "varchar" => Some(ValueKind::Text),
            "date" => Some(ValueKind::Date),
            _ => None,
        }
    }
}

impl fmt::Display for ValueKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ValueKind::Int => "int",
            ValueKind::Decimal => "decimal",
            ValueKind::Text => "text",
            ValueKind::Date => "date",
        };
        f.write_str(s)
    }
}

/// A column value. Dates are ISO-8601 strings and order lexicographically.
///
/// The derived `Ord` orders first by kind, then by value; it is only used to
/// keep row sets in a deterministic order. Predicate comparisons go through
/// [`Value::compare`], which rejects mixed kinds.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Int(i64),
    Decimal(Decimal),
    Text(String),
    Date(String),
}

impl Value {
    pub fn kind(&self) -> ValueKind {
        match self {
            Value::Int(_) => ValueKind::Int,
            Value::Decimal(_) => ValueKind::Decimal,
            Value::Text(_) => ValueKind::Text,
            Value::Date(_) => ValueKind::Date,
        }
    }

    pub fn text(s: impl Into<String>) -> Value {
        Value::Text(s.into())
    }

    /// Same-kind comparison.
    pub fn compare(&self, other: &Value) -> Result<Ordering> {
        match (self, other) {
            (Value::Int(a), Value::Int(b)) => Ok(a.cmp(b)),
            (Value::Decimal(a), Value::Decimal(b)) => Ok(a.cmp(b)),
            (Value::Text(a), Value::Text(b)) => Ok(a.cmp(b)),
            (Value::Date(a), Value::Date(b)) => Ok(a.cmp(b)),
            _ => Err(Error::KindMismatch {
                left: self.kind(),
                right: other.kind(),
            }),
        }
    }

    /// Parses `raw` as a value of `kind` (CSV cells, CLI arguments).
    pub fn parse_as(kind: ValueKind, raw: &str) -> Result<Value> {
        let bad = || Error::InvalidValue {
            kind,
            raw: raw.to_string(),
        };
        match kind {
            ValueKind::Int => raw.trim().parse::<i64>().map(Value::Int).map_err(|_| bad()),
            ValueKind::Decimal => Decimal::from_str(raw.trim())
                .map(Value::Decimal)
                .map_err(|_| bad()),
            ValueKind::Text => Ok(Value::Text(raw.to_string())),
            ValueKind::Date => {
                let d = raw.trim();
                if is_iso_date(d) {
                    Ok(Value::Date(d.to_string()))
                } else {
                    Err(bad())
                }
            }
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        match self {
            Value::Int(i) => serde_json::Value::from(*i),
            other => serde_json::Value::String(other.to_string()),
        }
    }

    /// Text form used to match user-supplied tuples against stored rows.
    pub fn matches_literal(&self, lit: &str) -> bool {
        match self {
            Value::Decimal(d) => Decimal::from_str(lit.trim()).map(|x| x == *d).unwrap_or(false),
            Value::Int(i) => lit.trim().parse::<i64>().map(|x| x == *i).unwrap_or(false),
            Value::Text(s) | Value::Date(s) => s == lit,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(i) => write!(f, "{i}"),
            Value::Decimal(d) => write!(f, "{d}"),
            Value::Text(s) | Value::Date(s) => f.write_str(s),
        }
    }
}

impl From<i64> for Value {
    fn from(v: i64) -> Self {
        Value::Int(v)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Text(v.to_string())
    }
}

impl From<Decimal> for Value {
    fn from(v: Decimal) -> Self {
        Value::Decimal(v)
    }
}

pub(crate) fn round_avg(d: Decimal) -> Decimal {
    d.round_dp_with_strategy(AVG_SCALE, RoundingStrategy::MidpointNearestEven)
}

pub(crate) fn is_iso_date(s: &str) -> bool {
    let b = s.as_bytes();
    if b.len() != 10 || b[4] != b'-' || b[7] != b'-' {
        return false;
    }
    let digits = |r: std::ops::Range<usize>| b[r].iter().all(u8::is_ascii_digit);
    if !(digits(0..4) && digits(5..7) && digits(8..10)) {
        return false;
    }
    let month: u32 = s[5..7].parse().unwrap_or(0);
    let day: u32 = s[8..10].parse().unwrap_or(0);
    (1..=12).contains(&month) && (1..=31).contains(&day)
}
