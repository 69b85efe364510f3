//! Structured event logs: cases, correlation, case attributes and traces.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{attribute_names, AttrMap, Event, EventTable, TIME};
use crate::value::AttributeValue;

/// One value of the case identifier together with its trace.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Case {
    id: AttributeValue,
    case_attrs: AttrMap,
    trace: Vec<Event>,
}

impl Case {
    /// Validates correlation and time order, and derives case attributes
    /// from the trace.
    pub fn new(id_attr: &str, id: AttributeValue, trace: Vec<Event>) -> Result<Self> {
        if !id.is_defined() {
            return Err(Error::InvalidLog("case id is undefined".into()));
        }
        if let Some(e) = trace.iter().find(|e| e.get(id_attr) != &id) {
            return Err(Error::InvalidLog(format!(
                "event {} is not correlated to case {id}",
                e.index()
            )));
        }
        if trace.windows(2).any(|w| w[0].time() > w[1].time()) {
            return Err(Error::InvalidLog(format!("trace of case {id} is not ordered by time")));
        }
        let case_attrs = case_attributes(id_attr, &id, &trace);
        Ok(Case {
            id,
            case_attrs,
            trace,
        })
    }

    pub fn id(&self) -> &AttributeValue {
        &self.id
    }

    pub fn case_attrs(&self) -> &AttrMap {
        &self.case_attrs
    }

    /// The case-level value of `name`, or `Undefined` when `name` is not a
    /// case attribute of this case.
    pub fn get(&self, name: &str) -> &AttributeValue {
        static UNDEFINED: AttributeValue = AttributeValue::Undefined;
        self.case_attrs.get(name).unwrap_or(&UNDEFINED)
    }

    pub fn trace(&self) -> &[Event] {
        &self.trace
    }

    pub fn into_trace(self) -> Vec<Event> {
        self.trace
    }
}

/// `x` is a case attribute iff every event of the trace carries the same
/// defined value for it. Empty traces keep only the identifier.
fn case_attributes(id_attr: &str, id: &AttributeValue, trace: &[Event]) -> AttrMap {
    let mut out = AttrMap::new();
    match trace.split_first() {
        None => {}
        Some((first, rest)) => {
            for (name, value) in first.attrs() {
                if rest.iter().all(|e| e.get(name) == value) {
                    out.insert(name.clone(), value.clone());
                }
            }
        }
    }
    out.insert(id_attr.to_string(), id.clone());
    out
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StructuredEventLog {
    id_attr: String,
    /// Sorted by id, ids pairwise distinct.
    cases: Vec<Case>,
    global_case_attrs: BTreeSet<String>,
    /// Events of the source table without a value for `id_attr`.
    uncorrelated: usize,
}

impl StructuredEventLog {
    /// Assembles a log from cases, checking that ids are distinct and that no
    /// event (by index) belongs to two cases.
    pub fn new(id_attr: impl Into<String>, mut cases: Vec<Case>, uncorrelated: usize) -> Result<Self> {
        let id_attr = id_attr.into();
        cases.sort_by(|a, b| a.id.cmp(&b.id));
        if let Some(w) = cases.windows(2).find(|w| w[0].id == w[1].id) {
            return Err(Error::InvalidLog(format!("duplicate case {}", w[0].id)));
        }
        let mut seen = HashSet::new();
        for case in &cases {
            if case.case_attrs.get(&id_attr) != Some(&case.id) {
                return Err(Error::InvalidLog(format!(
                    "case {} was built for a different identifier",
                    case.id
                )));
            }
            for e in &case.trace {
                if !seen.insert(e.index()) {
                    return Err(Error::InvalidLog(format!(
                        "event {} appears in more than one case",
                        e.index()
                    )));
                }
            }
        }
        let global_case_attrs = global_case_attributes(&id_attr, &cases);
        Ok(StructuredEventLog {
            id_attr,
            cases,
            global_case_attrs,
            uncorrelated,
        })
    }

    pub fn id_attr(&self) -> &str {
        &self.id_attr
    }

    pub fn cases(&self) -> &[Case] {
        &self.cases
    }

    pub fn case(&self, id: &AttributeValue) -> Option<&Case> {
        self.cases
            .binary_search_by(|c| c.id.cmp(id))
            .ok()
            .map(|i| &self.cases[i])
    }

    pub fn global_case_attrs(&self) -> &BTreeSet<String> {
        &self.global_case_attrs
    }

    pub fn uncorrelated(&self) -> usize {
        self.uncorrelated
    }

    pub fn num_cases(&self) -> usize {
        self.cases.len()
    }

    pub fn num_events(&self) -> usize {
        self.cases.iter().map(|c| c.trace.len()).sum()
    }

    pub fn events(&self) -> impl Iterator<Item = &Event> {
        self.cases.iter().flat_map(|c| c.trace.iter())
    }

    pub fn into_cases(self) -> Vec<Case> {
        self.cases
    }

    /// Rebuilds the log with the given cases, keeping identifier and
    /// uncorrelated count.
    pub fn with_cases(&self, cases: Vec<Case>) -> Result<Self> {
        StructuredEventLog::new(self.id_attr.clone(), cases, self.uncorrelated)
    }
}

fn global_case_attributes(id_attr: &str, cases: &[Case]) -> BTreeSet<String> {
    let mut global = match cases.split_first() {
        None => BTreeSet::new(),
        Some((first, rest)) => first
            .case_attrs
            .keys()
            .filter(|k| rest.iter().all(|c| c.case_attrs.contains_key(*k)))
            .cloned()
            .collect(),
    };
    global.insert(id_attr.to_string());
    global
}

fn check_id(t: &EventTable, id: &str) -> Result<()> {
    if !attribute_names(t).contains(id) {
        return Err(Error::UnknownAttribute(id.to_string()));
    }
    Ok(())
}

/// The distinct defined values of `id` in the table.
pub fn cases(t: &EventTable, id: &str) -> Result<BTreeSet<AttributeValue>> {
    check_id(t, id)?;
    Ok(t.events()
        .iter()
        .map(|e| e.get(id))
        .filter(|v| v.is_defined())
        .cloned()
        .collect())
}

/// The events whose `id` attribute equals `c`, in table order.
pub fn correlate(t: &EventTable, id: &str, c: &AttributeValue) -> Result<Vec<Event>> {
    check_id(t, id)?;
    if !c.is_defined() {
        return Ok(Vec::new());
    }
    Ok(t.events()
        .iter()
        .filter(|e| e.get(id) == c)
        .cloned()
        .collect())
}

/// Orders events by time; equal timestamps keep ascending source index.
pub fn build_trace(mut events: Vec<Event>) -> Result<Vec<Event>> {
    if events.is_empty() {
        return Err(Error::EmptyEventSet);
    }
    events.sort_by_key(|e| (e.time(), e.index()));
    Ok(events)
}

/// Builds the structured event log of `t` for case identifier `id`.
pub fn extract_log(t: &EventTable, id: &str) -> Result<StructuredEventLog> {
    if id == TIME {
        return Err(Error::TimeAsCaseId);
    }
    check_id(t, id)?;
    if !attribute_names(t).iter().any(|a| a != TIME && a != id) {
        return Err(Error::MissingActivityAttribute(id.to_string()));
    }

    let mut groups: BTreeMap<&AttributeValue, Vec<Event>> = BTreeMap::new();
    let mut uncorrelated = 0;
    for e in t.events() {
        let v = e.get(id);
        if v.is_defined() {
            groups.entry(v).or_default().push(e.clone());
        } else {
            uncorrelated += 1;
        }
    }
    let cases = groups
        .into_iter()
        .map(|(value, events)| Case::new(id, value.clone(), build_trace(events)?))
        .collect::<Result<Vec<_>>>()?;
    StructuredEventLog::new(id, cases, uncorrelated)
}

/// A trace as a strict partial order: `a < b` iff `time(a) < time(b)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PartialOrderTrace {
    /// Ordered by index.
    events: Vec<Event>,
    /// Pairs of event indices `(a, b)` with `a < b` in the order.
    order: BTreeSet<(usize, usize)>,
}

impl PartialOrderTrace {
    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn order(&self) -> &BTreeSet<(usize, usize)> {
        &self.order
    }

    pub fn precedes(&self, a: usize, b: usize) -> bool {
        self.order.contains(&(a, b))
    }

    /// True if `sequence` holds exactly these events and never places an
    /// event before one that precedes it.
    pub fn is_linearization(&self, sequence: &[Event]) -> bool {
        if sequence.len() != self.events.len() {
            return false;
        }
        let mut got: Vec<usize> = sequence.iter().map(Event::index).collect();
        got.sort_unstable();
        if got != self.events.iter().map(Event::index).collect::<Vec<_>>() {
            return false;
        }
        sequence.iter().enumerate().all(|(i, later)| {
            sequence[..i]
                .iter()
                .all(|earlier| !self.precedes(later.index(), earlier.index()))
        })
    }
}

pub fn partial_order_trace(events: Vec<Event>) -> Result<PartialOrderTrace> {
    if events.is_empty() {
        return Err(Error::EmptyEventSet);
    }
    let mut events = events;
    events.sort_by_key(Event::index);
    let mut order = BTreeSet::new();
    for a in &events {
        for b in &events {
            if a.time() < b.time() {
                order.insert((a.index(), b.index()));
            }
        }
    }
    Ok(PartialOrderTrace { events, order })
}
