//! Writing tables and logs: CSV and a small XES subset.
//!
//! The XES writer covers `<log>`, `<trace>`, `<event>` and the `string`,
//! `int`, `float` and `date` attribute elements. The case identifier is
//! written as the trace's `concept:name`, `time` as `time:timestamp`, value
//! sets as strings of the form `{a;b}`. Output is byte-stable: cases in
//! ascending id order, events in trace order, attributes by name.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::error::Result;
use crate::extract::StructuredEventLog;
use crate::model::{Event, EventTable, TIME};
use crate::value::AttributeValue;

/// Source text when the cell was imported, canonical rendering otherwise.
fn cell(e: &Event, name: &str) -> String {
    match e.source_text(name) {
        Some(raw) => raw.to_string(),
        None => e.get(name).to_string(),
    }
}

fn write_csv<'a, I>(columns: &[String], events: I, delimiter: u8) -> Result<Vec<u8>>
where
    I: IntoIterator<Item = &'a Event>,
{
    let mut w = csv::WriterBuilder::new()
        .delimiter(delimiter)
        .from_writer(Vec::new());
    w.write_record(columns)?;
    for e in events {
        w.write_record(columns.iter().map(|c| cell(e, c)))?;
    }
    w.into_inner()
        .map_err(|e| crate::Error::Csv(e.error().to_string()))
}

/// Writes a table in its column order. With the default profile, parsing
/// the output reproduces the original table.
pub fn write_table_csv(t: &EventTable, delimiter: u8) -> Result<Vec<u8>> {
    write_csv(t.columns(), t.events(), delimiter)
}

/// Writes all events of a log, case by case. Columns: the case identifier,
/// `time`, then the remaining attributes by name.
pub fn write_log_csv(log: &StructuredEventLog, delimiter: u8) -> Result<Vec<u8>> {
    let names: BTreeSet<&str> = log
        .events()
        .flat_map(|e| e.attrs().keys().map(String::as_str))
        .collect();
    let mut columns = vec![log.id_attr().to_string(), TIME.to_string()];
    columns.extend(
        names
            .into_iter()
            .filter(|n| *n != TIME && *n != log.id_attr())
            .map(str::to_string),
    );
    write_csv(&columns, log.events(), delimiter)
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            '\n' => out.push_str("&#10;"),
            '\r' => out.push_str("&#13;"),
            '\t' => out.push_str("&#9;"),
            c => out.push(c),
        }
    }
    out
}

fn xes_attribute(out: &mut String, indent: &str, key: &str, value: &AttributeValue) {
    let (tag, text) = match value {
        AttributeValue::Undefined => return,
        AttributeValue::Int(i) => ("int", i.to_string()),
        AttributeValue::Real(r) => ("float", r.to_string()),
        AttributeValue::Time(t) => ("date", t.to_rfc3339()),
        AttributeValue::Text(_) | AttributeValue::ValueSet(_) => ("string", value.to_string()),
    };
    let key = if key == TIME { "time:timestamp" } else { key };
    let _ = writeln!(
        out,
        "{indent}<{tag} key=\"{}\" value=\"{}\"/>",
        escape(key),
        escape(&text)
    );
}

/// Serializes a log as XES. When `include_case_id_on_events` is false the
/// case identifier is only written on the trace.
pub fn export_xes(log: &StructuredEventLog, include_case_id_on_events: bool) -> Vec<u8> {
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    out.push_str("<log xes.version=\"1.0\" xmlns=\"http://www.xes-standard.org/\">\n");
    let id_attr = log.id_attr();
    for case in log.cases() {
        out.push_str("  <trace>\n");
        xes_attribute(&mut out, "    ", "concept:name", &AttributeValue::Text(case.id().to_string()));
        for (name, value) in case.case_attrs() {
            if name != id_attr && name != TIME {
                xes_attribute(&mut out, "    ", name, value);
            }
        }
        for e in case.trace() {
            out.push_str("    <event>\n");
            for (name, value) in e.attrs() {
                if name == id_attr && !include_case_id_on_events {
                    continue;
                }
                xes_attribute(&mut out, "      ", name, value);
            }
            out.push_str("    </event>\n");
        }
        out.push_str("  </trace>\n");
    }
    out.push_str("</log>\n");
    out.into_bytes()
}
