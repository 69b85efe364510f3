//! Events and event tables.
//!
//! An [`Event`] is a partial map from attribute names to values that always
//! defines `time` and at least one other attribute. An [`EventTable`] is a
//! finite sequence of events that all define one shared attribute.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::value::{AttributeValue, Timestamp};

/// Canonical name of the mandatory timestamp attribute.
pub const TIME: &str = "time";

pub type AttrMap = BTreeMap<String, AttributeValue>;

static UNDEFINED: AttributeValue = AttributeValue::Undefined;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EventViolation {
    TimeUndefined,
    TimeNotTimestamp,
    NoNonTimeAttribute,
}

impl fmt::Display for EventViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EventViolation::TimeUndefined => "time undefined",
            EventViolation::TimeNotTimestamp => "time is not a timestamp",
            EventViolation::NoNonTimeAttribute => "no non-time attribute",
        })
    }
}

/// Checks the two requirements every event has to meet: a defined timestamp
/// and at least one other defined attribute.
pub fn validate_event(attrs: &AttrMap) -> Result<(), Vec<EventViolation>> {
    let mut violations = Vec::new();
    match attrs.get(TIME) {
        None | Some(AttributeValue::Undefined) => violations.push(EventViolation::TimeUndefined),
        Some(AttributeValue::Time(_)) => {}
        Some(_) => violations.push(EventViolation::TimeNotTimestamp),
    }
    let observes = attrs
        .iter()
        .any(|(name, value)| name != TIME && value.is_defined());
    if !observes {
        violations.push(EventViolation::NoNonTimeAttribute);
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(violations)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Event {
    index: usize,
    attrs: AttrMap,
    /// Original cell text where it differs from the canonical rendering
    /// (always for `time`). Used for lossless re-export.
    #[serde(skip)]
    source_text: BTreeMap<String, String>,
}

impl Event {
    /// Creates a validated event. `Undefined` entries are dropped so that an
    /// absent key is the only encoding of a missing value.
    pub fn new(index: usize, attrs: AttrMap) -> Result<Self> {
        let attrs: AttrMap = attrs.into_iter().filter(|(_, v)| v.is_defined()).collect();
        validate_event(&attrs).map_err(|violations| Error::InvalidEvent { index, violations })?;
        Ok(Event {
            index,
            attrs,
            source_text: BTreeMap::new(),
        })
    }

    pub fn with_source_text(mut self, attr: impl Into<String>, text: impl Into<String>) -> Self {
        self.source_text.insert(attr.into(), text.into());
        self
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn attrs(&self) -> &AttrMap {
        &self.attrs
    }

    /// The value of `name`, or `Undefined`.
    pub fn get(&self, name: &str) -> &AttributeValue {
        self.attrs.get(name).unwrap_or(&UNDEFINED)
    }

    pub fn time(&self) -> Timestamp {
        self.attrs
            .get(TIME)
            .and_then(AttributeValue::as_time)
            .expect("validated events carry a timestamp")
    }

    pub fn source_text(&self, name: &str) -> Option<&str> {
        self.source_text.get(name).map(String::as_str)
    }

    pub(crate) fn source_texts(&self) -> &BTreeMap<String, String> {
        &self.source_text
    }

    /// Replaces attributes and source strings wholesale. Callers guarantee
    /// the result still validates.
    pub(crate) fn from_parts(
        index: usize,
        attrs: AttrMap,
        source_text: BTreeMap<String, String>,
    ) -> Result<Self> {
        let mut event = Event::new(index, attrs)?;
        event.source_text = source_text
            .into_iter()
            .filter(|(k, _)| event.attrs.contains_key(k))
            .collect();
        Ok(event)
    }
}

/// Returns `attrs[a]`, or `Undefined` when `e` does not define `a`.
pub fn get_attr(e: &Event, a: &str) -> AttributeValue {
    e.get(a).clone()
}

/// The attribute names that carry a defined value in at least one event.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct AttributeNameSet(BTreeSet<String>);

impl AttributeNameSet {
    pub fn contains(&self, name: &str) -> bool {
        self.0.contains(name)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }

    pub fn into_inner(self) -> BTreeSet<String> {
        self.0
    }
}

impl<S: Into<String>> FromIterator<S> for AttributeNameSet {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        AttributeNameSet(iter.into_iter().map(Into::into).collect())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EventTable {
    events: Vec<Event>,
    shared_attr: String,
    /// Column order used when writing the table back out.
    columns: Vec<String>,
}

impl EventTable {
    /// Every event must define `shared_attr` and carry its position as index.
    pub fn new(events: Vec<Event>, shared_attr: impl Into<String>) -> Result<Self> {
        let shared_attr = shared_attr.into();
        for (position, event) in events.iter().enumerate() {
            if event.index != position {
                return Err(Error::IndexMismatch {
                    position,
                    index: event.index,
                });
            }
            if !event.get(&shared_attr).is_defined() {
                return Err(Error::MissingSharedAttribute {
                    index: position,
                    attr: shared_attr,
                });
            }
        }
        let mut table = EventTable {
            events,
            shared_attr,
            columns: Vec::new(),
        };
        table.columns = vec![TIME.to_string()];
        table.complete_columns();
        Ok(table)
    }

    /// Sets the export column order. Defined attributes missing from
    /// `columns` are appended in name order.
    pub fn with_columns(mut self, columns: Vec<String>) -> Self {
        self.columns = columns;
        self.complete_columns();
        self
    }

    fn complete_columns(&mut self) {
        for name in attribute_names(self).into_inner() {
            if !self.columns.contains(&name) {
                self.columns.push(name);
            }
        }
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    /// Builds a table from attribute maps, numbering events by position.
    pub fn from_records<I>(records: I, shared_attr: impl Into<String>) -> Result<Self>
    where
        I: IntoIterator<Item = AttrMap>,
    {
        let events = records
            .into_iter()
            .enumerate()
            .map(|(i, attrs)| Event::new(i, attrs))
            .collect::<Result<Vec<_>>>()?;
        EventTable::new(events, shared_attr)
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn shared_attr(&self) -> &str {
        &self.shared_attr
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn attribute_names(&self) -> AttributeNameSet {
        attribute_names(self)
    }
}

pub fn attribute_names(t: &EventTable) -> AttributeNameSet {
    t.events
        .iter()
        .flat_map(|e| e.attrs.keys().cloned())
        .collect()
}

/// Shorthand for building attribute maps in tests and examples.
#[macro_export]
macro_rules! attrs {
    ($($name:expr => $value:expr),* $(,)?) => {{
        let mut map = $crate::model::AttrMap::new();
        $( map.insert(String::from($name), $crate::value::AttributeValue::from($value)); )*
        map
    }};
}
