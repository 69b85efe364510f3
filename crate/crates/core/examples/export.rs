//! Writing a (filtered) log as XES or CSV.
//!
//!     cargo run -p evlog --example export -- xes > orders.xes
//!     cargo run -p evlog --example export -- csv

use std::fs::File;
use std::io::Write;

use evlog::{export_xes, extract_log, parse_csv, write_log_csv, CsvProfile};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures/order_events.csv");
    let table = parse_csv(File::open(path)?, &CsvProfile::default())?;
    let log = extract_log(&table, "order")?;

    let bytes = match std::env::args().nth(1).as_deref() {
        Some("csv") => write_log_csv(&log, b',')?,
        _ => export_xes(&log, false),
    };
    std::io::stdout().write_all(&bytes)?;
    Ok(())
}
