//! Selection, projection and aggregation combined in a filter stack, with
//! the per-step statistics. The stack is the same JSON the CLI and the HTTP
//! API accept.
//!
//!     cargo run -p evlog --example filter_stack

use std::fs::File;

use evlog::{apply_stack, extract_log, parse_csv, simple_log, Classifier, CsvProfile, FilterStack};

const STACK: &str = r#"{"steps": [
  {"op": "select", "predicate": {"kind": "compare", "operand": {"of": "case", "attr": "type"}, "op": "eq", "value": "online"}},
  {"op": "project", "predicate": {"kind": "compare", "operand": {"of": "event", "attr": "life-cycle"}, "op": "eq", "value": "complete"}},
  {"op": "aggregate", "grouping": ["action"], "replacement": {"policy": "keep_last"}}
]}"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures/order_events.csv");
    let table = parse_csv(File::open(path)?, &CsvProfile::default())?;
    let log = extract_log(&table, "order")?;

    let stack = FilterStack::from_json(STACK)?;
    let outcome = apply_stack(&log, &stack)?;
    for s in &outcome.stats {
        println!(
            "step {} {:<9} cases {} -> {}, events {} -> {}",
            s.step, s.op, s.cases_in, s.cases_out, s.events_in, s.events_out
        );
    }
    print!("{}", simple_log(&outcome.log, &Classifier::single("action")).to_text("+"));

    // errors point at the offending step
    let broken = r#"[{"op": "project", "predicate": {"kind": "trace_length", "op": "gt", "value": 3}}]"#;
    if let Err(e) = FilterStack::from_json(broken) {
        println!("rejected: {e}");
    }
    Ok(())
}
