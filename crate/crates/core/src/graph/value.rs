use std::cmp::Ordering;
use std::fmt;

use chrono::{DateTime, NaiveDate, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};

/// A typed property value.
///
/// Values of the same type are totally ordered. Integers and floats compare
/// by numeric value; every other cross-type comparison is undefined.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "value", rename_all = "lowercase")]
pub enum Value {
    Int(i64),
    Float(f64),
    String(String),
    Bool(bool),
    Timestamp(DateTime<Utc>),
}

impl Value {
    pub fn type_name(&self) -> &'static str {
        match self {
            Value::Int(_) => "int",
            Value::Float(_) => "float",
            Value::String(_) => "string",
            Value::Bool(_) => "bool",
            Value::Timestamp(_) => "timestamp",
        }
    }

    /// Compares two values, returning `None` when they are not comparable.
    pub fn compare(&self, other: &Value) -> Option<Ordering> {
        match (self, other) {
            (Value::Int(a), Value::Int(b)) => Some(a.cmp(b)),
            (Value::Float(a), Value::Float(b)) => a.partial_cmp(b),
            (Value::Int(a), Value::Float(b)) => compare_int_float(*a, *b),
            (Value::Float(a), Value::Int(b)) => compare_int_float(*b, *a).map(Ordering::reverse),
            (Value::String(a), Value::String(b)) => Some(a.cmp(b)),
            (Value::Bool(a), Value::Bool(b)) => Some(a.cmp(b)),
            (Value::Timestamp(a), Value::Timestamp(b)) => Some(a.cmp(b)),
            _ => None,
        }
    }

    pub(crate) fn is_finite(&self) -> bool {
        match self {
            Value::Float(f) => f.is_finite(),
            _ => true,
        }
    }
}

// i64 -> f64 is lossy above 2^53, so fall back to exact integer comparison
// when the float is integral and in range.
fn compare_int_float(i: i64, f: f64) -> Option<Ordering> {
    if f.is_nan() {
        return None;
    }
    if f.fract() == 0.0 && f >= i64::MIN as f64 && f < i64::MAX as f64 {
        return Some(i.cmp(&(f as i64)));
    }
    (i as f64).partial_cmp(&f)
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(i) => write!(f, "{i}"),
            Value::Float(x) => {
                if x.fract() == 0.0 && x.is_finite() {
                    write!(f, "{x:.1}")
                } else {
                    write!(f, "{x}")
                }
            }
            Value::String(s) => write!(f, "{s:?}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Timestamp(t) => write!(f, "{}", format_timestamp(t)),
        }
    }
}

/// Canonical textual form of a timestamp (RFC 3339, UTC, `Z` suffix).
pub fn format_timestamp(t: &DateTime<Utc>) -> String {
    t.to_rfc3339_opts(SecondsFormat::AutoSi, true)
}

/// Parses an ISO-8601 instant. A bare date is read as midnight UTC.
pub fn parse_timestamp(s: &str) -> Option<DateTime<Utc>> {
    if let Ok(t) = DateTime::parse_from_rfc3339(s) {
        return Some(t.with_timezone(&Utc));
    }
    let date = NaiveDate::parse_from_str(s, "%Y-%m-%d").ok()?;
    Some(date.and_hms_opt(0, 0, 0)?.and_utc())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn int_float_compare_numerically() {
        assert_eq!(Value::Int(2).compare(&Value::Float(2.0)), Some(Ordering::Equal));
        assert_eq!(Value::Int(2).compare(&Value::Float(2.5)), Some(Ordering::Less));
        assert_eq!(Value::Float(7.5).compare(&Value::Int(7)), Some(Ordering::Greater));
        assert_eq!(Value::Int(i64::MAX).compare(&Value::Int(i64::MAX - 1)), Some(Ordering::Greater));
    }

    #[test]
    fn cross_type_is_incomparable() {
        assert_eq!(Value::Int(1).compare(&Value::String("1".into())), None);
        assert_eq!(Value::Bool(true).compare(&Value::Int(1)), None);
        assert_eq!(Value::Float(f64::NAN).compare(&Value::Int(1)), None);
    }

    #[test]
    fn bare_dates_are_midnight_utc() {
        let t = parse_timestamp("2020-12-31").unwrap();
        assert_eq!(format_timestamp(&t), "2020-12-31T00:00:00Z");
        let u = parse_timestamp("2020-12-31T02:00:00+02:00").unwrap();
        assert_eq!(t, u);
        assert!(parse_timestamp("yesterday").is_none());
    }

    #[test]
    fn json_shape_is_type_tagged() {
        let v: Value = serde_json::from_str(r#"{"type":"int","value":6}"#).unwrap();
        assert_eq!(v, Value::Int(6));
        let t: Value = serde_json::from_str(r#"{"type":"timestamp","value":"2024-03-01T12:00:00Z"}"#).unwrap();
        assert_eq!(serde_json::to_string(&t).unwrap(), r#"{"type":"timestamp","value":"2024-03-01T12:00:00Z"}"#);
        assert!(serde_json::from_str::<Value>(r#"{"type":"int","value":2.5}"#).is_err());
    }
}
