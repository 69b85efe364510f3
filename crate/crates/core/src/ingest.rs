//! Reading event tables from CSV and re-ordering them for inspection.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::Read;
use std::str::FromStr;

use chrono::{DateTime, NaiveDate, NaiveDateTime};

use crate::error::{Error, Result};
use crate::model::{attribute_names, AttrMap, Event, EventTable, TIME};
use crate::value::{AttributeValue, Timestamp};

/// Attribute added by [`sort_table`] holding an event's index before sorting.
pub const SOURCE_INDEX: &str = "source:index";

/// A timestamp layout tried when parsing cells.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TimeFormat {
    /// A chrono `strftime` pattern. Patterns without a zone are read as UTC.
    Pattern(String),
    /// RFC 3339 / ISO 8601 date-times, with or without offset, or plain dates.
    Iso8601,
}

impl TimeFormat {
    pub fn parse(&self, s: &str) -> Option<Timestamp> {
        match self {
            TimeFormat::Pattern(p) => parse_with_pattern(s, p),
            TimeFormat::Iso8601 => parse_iso8601(s),
        }
    }
}

/// Accepts `iso8601`, a chrono pattern (anything containing `%`), or the
/// token notation `DD/MM/YYYY HH:mm:ss`.
impl FromStr for TimeFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Err(Error::InvalidProfile("empty time format".into()));
        }
        if s.eq_ignore_ascii_case("iso8601") || s.eq_ignore_ascii_case("iso-8601") {
            return Ok(TimeFormat::Iso8601);
        }
        if s.contains('%') {
            return Ok(TimeFormat::Pattern(s.to_string()));
        }
        let pattern = s
            .replace("YYYY", "%Y")
            .replace("MM", "%m")
            .replace("DD", "%d")
            .replace("HH", "%H")
            .replace("mm", "%M")
            .replace("ss", "%S");
        Ok(TimeFormat::Pattern(pattern))
    }
}

fn parse_with_pattern(s: &str, pattern: &str) -> Option<Timestamp> {
    if let Ok(dt) = DateTime::parse_from_str(s, pattern) {
        return Some(Timestamp(dt.timestamp_millis()));
    }
    if let Ok(naive) = NaiveDateTime::parse_from_str(s, pattern) {
        return Some(Timestamp(naive.and_utc().timestamp_millis()));
    }
    NaiveDate::parse_from_str(s, pattern)
        .ok()
        .and_then(|d| d.and_hms_opt(0, 0, 0))
        .map(|naive| Timestamp(naive.and_utc().timestamp_millis()))
}

fn parse_iso8601(s: &str) -> Option<Timestamp> {
    if let Some(t) = Timestamp::parse_rfc3339(s) {
        return Some(t);
    }
    ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f", "%Y-%m-%dT%H:%M", "%Y-%m-%d %H:%M", "%Y-%m-%d"]
        .iter()
        .find_map(|p| parse_with_pattern(s, p))
}

#[derive(Clone, Debug)]
pub struct CsvProfile {
    pub delimiter: char,
    /// Tried in order; the first that parses wins.
    pub timestamp_formats: Vec<TimeFormat>,
    /// Column holding the timestamp; renamed to `time` on import.
    pub time_column: String,
    /// Cells treated as undefined in addition to the empty string.
    pub null_markers: BTreeSet<String>,
    /// Attribute every event must define. When unset, the first column after
    /// `time` (in header order) that is defined on every row is used.
    pub shared_attr: Option<String>,
}

impl Default for CsvProfile {
    fn default() -> Self {
        CsvProfile {
            delimiter: ',',
            timestamp_formats: vec![
                TimeFormat::Pattern("%d/%m/%Y %H:%M".into()),
                TimeFormat::Pattern("%d/%m/%Y %H:%M:%S".into()),
                TimeFormat::Iso8601,
            ],
            time_column: TIME.into(),
            null_markers: BTreeSet::from([String::new()]),
            shared_attr: None,
        }
    }
}

impl CsvProfile {
    fn validate(&self) -> Result<u8> {
        if self.timestamp_formats.is_empty() {
            return Err(Error::InvalidProfile("no timestamp formats".into()));
        }
        if self.time_column.is_empty() {
            return Err(Error::InvalidProfile("empty time column name".into()));
        }
        if !self.delimiter.is_ascii() {
            return Err(Error::InvalidProfile(format!(
                "delimiter {:?} is not a single-byte character",
                self.delimiter
            )));
        }
        Ok(self.delimiter as u8)
    }

    fn is_null(&self, cell: &str) -> bool {
        cell.is_empty() || self.null_markers.contains(cell)
    }

    fn parse_time(&self, cell: &str) -> Option<Timestamp> {
        self.timestamp_formats.iter().find_map(|f| f.parse(cell))
    }

    /// Int, then Real, then Time, else Text. Integers must be written in
    /// canonical form (`007` stays text) so that ids correlate by exact value.
    fn parse_cell(&self, cell: &str) -> AttributeValue {
        if let Ok(i) = cell.parse::<i64>() {
            if i.to_string() == cell {
                return AttributeValue::Int(i);
            }
        }
        if let Ok(r) = cell.parse::<f64>() {
            let digits = cell.trim_start_matches(['+', '-']);
            let leading_zero = digits.len() > 1
                && digits.starts_with('0')
                && digits.as_bytes()[1].is_ascii_digit();
            if r.is_finite() && !leading_zero && cell.bytes().any(|b| b.is_ascii_digit()) {
                return AttributeValue::Real(r);
            }
        }
        if let Some(t) = self.parse_time(cell) {
            return AttributeValue::Time(t);
        }
        AttributeValue::Text(cell.to_string())
    }
}

/// Parses a CSV event table. The first row is the header; each further row
/// becomes one event. Row numbers in errors count data rows from 1.
pub fn parse_csv<R: Read>(input: R, profile: &CsvProfile) -> Result<EventTable> {
    let delimiter = profile.validate()?;
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .has_headers(true)
        .from_reader(input);

    let mut header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if let Some(first) = header.first_mut() {
        if let Some(stripped) = first.strip_prefix('\u{feff}') {
            *first = stripped.to_string();
        }
    }
    let time_pos = header
        .iter()
        .position(|h| *h == profile.time_column)
        .ok_or_else(|| Error::MissingTimeColumn(profile.time_column.clone()))?;
    if profile.time_column != TIME && header.iter().any(|h| h == TIME) {
        return Err(Error::Csv(format!(
            "header has both {:?} and {TIME:?}",
            profile.time_column
        )));
    }
    header[time_pos] = TIME.to_string();
    let mut seen = BTreeSet::new();
    for h in &header {
        if !seen.insert(h.as_str()) {
            return Err(Error::Csv(format!("duplicate column {h:?}")));
        }
    }

    let mut events = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let row = i + 1;
        let mut attrs = AttrMap::new();
        let mut source = BTreeMap::new();

        let time_cell = record.get(time_pos).unwrap_or_default();
        if profile.is_null(time_cell) {
            return Err(Error::MissingTimestamp { row });
        }
        let time = profile
            .parse_time(time_cell)
            .ok_or_else(|| Error::UnparseableTimestamp {
                row,
                value: time_cell.to_string(),
            })?;
        attrs.insert(TIME.to_string(), AttributeValue::Time(time));
        source.insert(TIME.to_string(), time_cell.to_string());

        for (pos, cell) in record.iter().enumerate() {
            if pos == time_pos || profile.is_null(cell) {
                continue;
            }
            let value = profile.parse_cell(cell);
            if value.to_string() != cell {
                source.insert(header[pos].clone(), cell.to_string());
            }
            attrs.insert(header[pos].clone(), value);
        }
        if attrs.len() == 1 {
            return Err(Error::RowWithOnlyTime { row });
        }
        events.push(Event::from_parts(i, attrs, source)?);
    }

    let shared = match &profile.shared_attr {
        Some(a) => a.clone(),
        None => header
            .iter()
            .filter(|h| *h != TIME)
            .find(|h| events.iter().all(|e| e.get(h).is_defined()))
            .cloned()
            .or_else(|| events.is_empty().then(|| TIME.to_string()))
            .ok_or(Error::NoSharedAttribute)?,
    };
    Ok(EventTable::new(events, shared)?.with_columns(header))
}

/// How [`sort_table`] orders events. Events are always ordered by time
/// within a group.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SortSpec {
    pub group_by: Option<String>,
}

impl SortSpec {
    pub fn by_time() -> Self {
        SortSpec { group_by: None }
    }

    pub fn grouped_by(attr: impl Into<String>) -> Self {
        SortSpec {
            group_by: Some(attr.into()),
        }
    }
}

/// Stable re-ordering: groups in order of first appearance (events without a
/// group value last), then time, then original index. Events are renumbered
/// and keep their old index in [`SOURCE_INDEX`].
pub fn sort_table(t: &EventTable, spec: &SortSpec) -> Result<EventTable> {
    let group_rank: Vec<usize> = match &spec.group_by {
        None => vec![0; t.len()],
        Some(attr) => {
            if !attribute_names(t).contains(attr) {
                return Err(Error::UnknownAttribute(attr.clone()));
            }
            let mut first_seen: HashMap<&AttributeValue, usize> = HashMap::new();
            t.events()
                .iter()
                .map(|e| {
                    let v = e.get(attr);
                    if !v.is_defined() {
                        return usize::MAX;
                    }
                    let next = first_seen.len();
                    *first_seen.entry(v).or_insert(next)
                })
                .collect()
        }
    };

    let mut order: Vec<usize> = (0..t.len()).collect();
    order.sort_by_key(|&i| (group_rank[i], t.events()[i].time(), i));

    let events = order
        .into_iter()
        .enumerate()
        .map(|(pos, i)| {
            let source = &t.events()[i];
            let mut attrs = source.attrs().clone();
            attrs.insert(SOURCE_INDEX.into(), AttributeValue::Int(source.index() as i64));
            Event::from_parts(pos, attrs, source.source_texts().clone())
        })
        .collect::<Result<Vec<_>>>()?;
    let mut columns = t.columns().to_vec();
    if !columns.iter().any(|c| c == SOURCE_INDEX) {
        columns.push(SOURCE_INDEX.into());
    }
    Ok(EventTable::new(events, t.shared_attr())?.with_columns(columns))
}
