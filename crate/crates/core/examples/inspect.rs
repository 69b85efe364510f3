//! Step 1 of an analysis: look at the attributes and pick a case identifier.
//!
//!     cargo run -p evlog --example inspect [-- path/to/events.csv]

use std::fs::File;

use evlog::{inspect, parse_csv, CsvProfile};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures/order_events.csv").into());
    let table = parse_csv(File::open(&path)?, &CsvProfile::default())?;
    let report = inspect(&table);
    println!("{} events", report.events);
    print!("{}", report.to_text());

    for candidate in ["order", "item"] {
        for warning in report.case_id_warnings(candidate) {
            println!("{candidate}: {warning}");
        }
    }
    Ok(())
}
