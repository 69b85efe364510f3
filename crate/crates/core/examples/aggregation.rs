//! Collapsing runs of equal-class events: keep the last event, or merge the
//! run and collect an attribute into a set.
//!
//!     cargo run -p evlog --example aggregation

use std::fs::File;

use evlog::{
    aggregate, extract_log, parse_csv, AggregationSpec, AttributeValue, Classifier, CsvProfile, MergeTime,
    Replacement,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures/order_events.csv");
    let table = parse_csv(File::open(path)?, &CsvProfile::default())?;
    let log = extract_log(&table, "order")?;
    let order35 = AttributeValue::Int(35);

    let policies = [
        ("keep last", Replacement::KeepLast),
        (
            "merge items",
            Replacement::Merge {
                timestamp: MergeTime::First,
                set_collect: vec!["item".into()],
            },
        ),
    ];
    for (name, replacement) in policies {
        let spec = AggregationSpec::new(Classifier::single("action"), replacement);
        let out = aggregate(&log, &spec)?;
        println!("== {name}: {} -> {} events", log.num_events(), out.num_events());
        for e in out.case(&order35).unwrap().trace() {
            println!("  {}  {:<16} {}", e.get("time"), e.get("action"), e.get("item"));
        }
    }
    Ok(())
}
