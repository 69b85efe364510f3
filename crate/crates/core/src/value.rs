//! Attribute values and timestamps.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};

/// A point in time as UTC milliseconds since the Unix epoch.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Timestamp(pub i64);

impl Timestamp {
    pub fn from_millis(millis: i64) -> Self {
        Timestamp(millis)
    }

    pub fn millis(self) -> i64 {
        self.0
    }

    pub fn to_datetime(self) -> Option<DateTime<Utc>> {
        DateTime::from_timestamp_millis(self.0)
    }

    /// RFC 3339 with millisecond precision, e.g. `2018-12-19T15:46:00.000Z`.
    pub fn to_rfc3339(self) -> String {
        match self.to_datetime() {
            Some(dt) => dt.to_rfc3339_opts(SecondsFormat::Millis, true),
            None => format!("@{}ms", self.0),
        }
    }

    pub fn parse_rfc3339(s: &str) -> Option<Self> {
        DateTime::parse_from_rfc3339(s)
            .ok()
            .map(|dt| Timestamp(dt.timestamp_millis()))
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_rfc3339())
    }
}

impl From<DateTime<Utc>> for Timestamp {
    fn from(dt: DateTime<Utc>) -> Self {
        Timestamp(dt.timestamp_millis())
    }
}

/// The value of an event attribute.
///
/// `Undefined` is the only representation of a missing value. Equality is by
/// tag and payload, so `Int(23)` and `Text("23")` are different values.
/// `Real` values compare with [`f64::total_cmp`], which makes the type usable
/// as a map key.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "wire::Value", into = "wire::Value")]
pub enum AttributeValue {
    Undefined,
    Int(i64),
    Real(f64),
    Text(String),
    Time(Timestamp),
    /// Result of collecting values during aggregation. Never contains
    /// `Undefined` or nested sets.
    ValueSet(BTreeSet<AttributeValue>),
}

impl AttributeValue {
    pub fn text(s: impl Into<String>) -> Self {
        AttributeValue::Text(s.into())
    }

    /// Builds a value set, dropping `Undefined` members and flattening nested
    /// sets into one level.
    pub fn set<I: IntoIterator<Item = AttributeValue>>(values: I) -> Self {
        let mut out = BTreeSet::new();
        for v in values {
            match v {
                AttributeValue::Undefined => {}
                AttributeValue::ValueSet(inner) => out.extend(inner),
                other => {
                    out.insert(other);
                }
            }
        }
        AttributeValue::ValueSet(out)
    }

    pub fn is_defined(&self) -> bool {
        !matches!(self, AttributeValue::Undefined)
    }

    pub fn as_time(&self) -> Option<Timestamp> {
        match self {
            AttributeValue::Time(t) => Some(*t),
            _ => None,
        }
    }

    pub fn as_text(&self) -> Option<&str> {
        match self {
            AttributeValue::Text(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            AttributeValue::Int(i) => Some(*i),
            _ => None,
        }
    }

    /// Short lowercase name of the variant, as used in reports and JSON.
    pub fn type_name(&self) -> &'static str {
        match self {
            AttributeValue::Undefined => "undefined",
            AttributeValue::Int(_) => "int",
            AttributeValue::Real(_) => "real",
            AttributeValue::Text(_) => "text",
            AttributeValue::Time(_) => "time",
            AttributeValue::ValueSet(_) => "set",
        }
    }

    fn rank(&self) -> u8 {
        match self {
            AttributeValue::Undefined => 0,
            AttributeValue::Int(_) => 1,
            AttributeValue::Real(_) => 2,
            AttributeValue::Text(_) => 3,
            AttributeValue::Time(_) => 4,
            AttributeValue::ValueSet(_) => 5,
        }
    }

    /// Ordering used by comparison predicates. Only values of the same kind
    /// are ordered (integers and reals compare numerically); everything else,
    /// including `Undefined`, is incomparable.
    pub fn partial_cmp_value(&self, other: &AttributeValue) -> Option<Ordering> {
        use AttributeValue::*;
        match (self, other) {
            (Int(a), Int(b)) => Some(a.cmp(b)),
            (Real(a), Real(b)) => a.partial_cmp(b),
            (Int(a), Real(b)) => (*a as f64).partial_cmp(b),
            (Real(a), Int(b)) => a.partial_cmp(&(*b as f64)),
            (Text(a), Text(b)) => Some(a.cmp(b)),
            (Time(a), Time(b)) => Some(a.cmp(b)),
            _ => None,
        }
    }
}

impl PartialEq for AttributeValue {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for AttributeValue {}

impl PartialOrd for AttributeValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for AttributeValue {
    fn cmp(&self, other: &Self) -> Ordering {
        use AttributeValue::*;
        match (self, other) {
            (Undefined, Undefined) => Ordering::Equal,
            (Int(a), Int(b)) => a.cmp(b),
            (Real(a), Real(b)) => a.total_cmp(b),
            (Text(a), Text(b)) => a.cmp(b),
            (Time(a), Time(b)) => a.cmp(b),
            (ValueSet(a), ValueSet(b)) => a.cmp(b),
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

impl std::hash::Hash for AttributeValue {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.rank().hash(state);
        match self {
            AttributeValue::Undefined => {}
            AttributeValue::Int(i) => i.hash(state),
            AttributeValue::Real(r) => r.to_bits().hash(state),
            AttributeValue::Text(s) => s.hash(state),
            AttributeValue::Time(t) => t.hash(state),
            AttributeValue::ValueSet(s) => s.hash(state),
        }
    }
}

/// Plain textual rendering: text as-is, numbers in decimal, times in RFC 3339,
/// sets as `{a;b}`, and `Undefined` as the empty string.
impl fmt::Display for AttributeValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AttributeValue::Undefined => Ok(()),
            AttributeValue::Int(i) => write!(f, "{i}"),
            AttributeValue::Real(r) => write!(f, "{r}"),
            AttributeValue::Text(s) => f.write_str(s),
            AttributeValue::Time(t) => write!(f, "{t}"),
            AttributeValue::ValueSet(set) => {
                f.write_str("{")?;
                for (i, v) in set.iter().enumerate() {
                    if i > 0 {
                        f.write_str(";")?;
                    }
                    write!(f, "{v}")?;
                }
                f.write_str("}")
            }
        }
    }
}

impl From<&str> for AttributeValue {
    fn from(s: &str) -> Self {
        AttributeValue::Text(s.to_string())
    }
}

impl From<String> for AttributeValue {
    fn from(s: String) -> Self {
        AttributeValue::Text(s)
    }
}

impl From<i64> for AttributeValue {
    fn from(i: i64) -> Self {
        AttributeValue::Int(i)
    }
}

impl From<f64> for AttributeValue {
    fn from(r: f64) -> Self {
        AttributeValue::Real(r)
    }
}

impl From<Timestamp> for AttributeValue {
    fn from(t: Timestamp) -> Self {
        AttributeValue::Time(t)
    }
}

/// JSON representation: `null` for undefined, JSON numbers for int/real,
/// strings for text, `{"time": "<rfc3339>"}` for timestamps and arrays for
/// value sets.
mod wire {
    use super::{AttributeValue, Timestamp};
    use serde::{Deserialize, Serialize};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    pub enum Value {
        Null,
        Int(i64),
        Real(f64),
        Text(String),
        Time { time: String },
        Set(Vec<AttributeValue>),
    }

    impl TryFrom<Value> for AttributeValue {
        type Error = String;

        fn try_from(v: Value) -> Result<Self, Self::Error> {
            Ok(match v {
                Value::Null => AttributeValue::Undefined,
                Value::Int(i) => AttributeValue::Int(i),
                Value::Real(r) => AttributeValue::Real(r),
                Value::Text(s) => AttributeValue::Text(s),
                Value::Time { time } => AttributeValue::Time(
                    Timestamp::parse_rfc3339(&time)
                        .ok_or_else(|| format!("invalid RFC 3339 timestamp: {time:?}"))?,
                ),
                Value::Set(items) => AttributeValue::set(items),
            })
        }
    }

    impl From<AttributeValue> for Value {
        fn from(v: AttributeValue) -> Self {
            match v {
                AttributeValue::Undefined => Value::Null,
                AttributeValue::Int(i) => Value::Int(i),
                AttributeValue::Real(r) => Value::Real(r),
                AttributeValue::Text(s) => Value::Text(s),
                AttributeValue::Time(t) => Value::Time {
                    time: t.to_rfc3339(),
                },
                AttributeValue::ValueSet(s) => Value::Set(s.into_iter().collect()),
            }
        }
    }
}
