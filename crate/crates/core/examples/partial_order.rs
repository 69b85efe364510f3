//! Events with equal timestamps are unordered. Shows the pairs the partial
//! order leaves open and checks that the sequential trace respects it.
//!
//!     cargo run -p evlog --example partial_order

use std::fs::File;

use evlog::{extract_log, parse_csv, partial_order_trace, CsvProfile};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures/order_events.csv");
    let table = parse_csv(File::open(path)?, &CsvProfile::default())?;
    let log = extract_log(&table, "order")?;

    for case in log.cases() {
        let po = partial_order_trace(case.trace().to_vec())?;
        let trace = case.trace();
        let mut concurrent = Vec::new();
        for (i, a) in trace.iter().enumerate() {
            for b in &trace[i + 1..] {
                if !po.precedes(a.index(), b.index()) && !po.precedes(b.index(), a.index()) {
                    concurrent.push(format!("{} || {}", a.get("action"), b.get("action")));
                }
            }
        }
        println!(
            "order {}: {} events, {} ordered pairs, linearization: {}, unordered: {:?}",
            case.id(),
            trace.len(),
            po.order().len(),
            po.is_linearization(trace),
            concurrent
        );
    }
    Ok(())
}
