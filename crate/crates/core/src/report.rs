//! Per-attribute summary of an event table, used to pick a case identifier.
//!
//! The entity heuristic is deliberately simple. An attribute is
//! *identifier-like* when every defined value is an integer or a text
//! containing a digit (`23`, `A7001`, `623`). The identifier-like attribute
//! defined on most events serves as reference; for every other attribute the
//! report counts values that occur together with two or more reference
//! values. Attributes that are not identifier-like and share values this way
//! describe classes of things rather than individual entities.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::Serialize;

use crate::model::{EventTable, TIME};
use crate::value::AttributeValue;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AttributeStats {
    pub name: String,
    pub defined: usize,
    pub distinct: usize,
    /// `int`, `real`, `text`, `time`, `set` or `mixed`.
    pub value_type: String,
    pub identifier_like: bool,
    /// Distinct values seen together with at least two values of the
    /// reference attribute.
    pub shared_values: usize,
    /// Not identifier-like and shares values across entities.
    pub likely_not_entity: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AttributeReport {
    pub events: usize,
    /// Attribute used to detect values shared across entities.
    pub reference: Option<String>,
    /// Case identifier candidates first, `time` last.
    pub attributes: Vec<AttributeStats>,
}

fn identifier_like(v: &AttributeValue) -> bool {
    match v {
        AttributeValue::Int(_) => true,
        AttributeValue::Text(s) => s.bytes().any(|b| b.is_ascii_digit()),
        _ => false,
    }
}

pub fn inspect(t: &EventTable) -> AttributeReport {
    let mut values: BTreeMap<&str, Vec<&AttributeValue>> = BTreeMap::new();
    for e in t.events() {
        for (name, v) in e.attrs() {
            values.entry(name.as_str()).or_default().push(v);
        }
    }

    let mut stats: Vec<AttributeStats> = values
        .iter()
        .map(|(name, vs)| {
            let distinct: BTreeSet<&AttributeValue> = vs.iter().copied().collect();
            let types: BTreeSet<&str> = vs.iter().map(|v| v.type_name()).collect();
            let value_type = if types.len() == 1 {
                types.into_iter().next().unwrap_or("mixed").to_string()
            } else {
                "mixed".to_string()
            };
            AttributeStats {
                name: name.to_string(),
                defined: vs.len(),
                distinct: distinct.len(),
                value_type,
                identifier_like: *name != TIME && vs.iter().all(|v| identifier_like(v)),
                shared_values: 0,
                likely_not_entity: false,
            }
        })
        .collect();

    let reference = stats
        .iter()
        .filter(|s| s.identifier_like)
        .max_by(|a, b| {
            (a.defined, a.distinct)
                .cmp(&(b.defined, b.distinct))
                .then_with(|| b.name.cmp(&a.name))
        })
        .map(|s| s.name.clone());

    if let Some(reference) = &reference {
        for s in stats.iter_mut().filter(|s| s.name != *reference && s.name != TIME) {
            let mut seen_with: BTreeMap<&AttributeValue, BTreeSet<&AttributeValue>> = BTreeMap::new();
            for e in t.events() {
                let (v, r) = (e.get(&s.name), e.get(reference));
                if v.is_defined() && r.is_defined() {
                    seen_with.entry(v).or_default().insert(r);
                }
            }
            s.shared_values = seen_with.values().filter(|refs| refs.len() > 1).count();
            s.likely_not_entity = !s.identifier_like && s.shared_values > 0;
        }
    }

    stats.sort_by(|a, b| {
        (a.name == TIME)
            .cmp(&(b.name == TIME))
            .then_with(|| b.identifier_like.cmp(&a.identifier_like))
            .then_with(|| b.defined.cmp(&a.defined))
            .then_with(|| b.distinct.cmp(&a.distinct))
            .then_with(|| a.name.cmp(&b.name))
    });

    AttributeReport {
        events: t.len(),
        reference,
        attributes: stats,
    }
}

impl AttributeReport {
    pub fn get(&self, name: &str) -> Option<&AttributeStats> {
        self.attributes.iter().find(|s| s.name == name)
    }

    /// One line per attribute, e.g.
    /// `order: 32 defined, 5 distinct, int, candidate case identifier`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for s in &self.attributes {
            let _ = write!(out, "{}: {} defined, {} distinct, {}", s.name, s.defined, s.distinct, s.value_type);
            if s.name == TIME {
                out.push_str(", timestamp");
            } else if s.identifier_like {
                out.push_str(", candidate case identifier");
            }
            if s.likely_not_entity {
                let _ = write!(
                    out,
                    ", values shared across {} entities ({}), likely not an entity type",
                    self.reference.as_deref().unwrap_or("?"),
                    s.shared_values
                );
            }
            out.push('\n');
        }
        out
    }

    /// Warnings about using `id` as case identifier. Any attribute is
    /// accepted; these only flag choices that look like non-entities.
    pub fn case_id_warnings(&self, id: &str) -> Vec<String> {
        let mut warnings = Vec::new();
        if let Some(s) = self.get(id) {
            if !s.identifier_like {
                warnings.push(format!(
                    "case identifier {id:?} does not look like an entity identifier"
                ));
            }
            if s.defined < self.events {
                warnings.push(format!("events uncorrelated: {}", self.events - s.defined));
            }
        }
        warnings
    }
}
