//! The two decisions that define an event log: the case identifier and the
//! event classifier. Prints the trace variants for a few combinations.
//!
//!     cargo run -p evlog --example variants

use std::fs::File;

use evlog::{extract_log, parse_csv, simple_log, Classifier, CsvProfile};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures/order_events.csv");
    let table = parse_csv(File::open(path)?, &CsvProfile::default())?;

    for (id, classifier) in [("order", "action"), ("order", "action+life-cycle"), ("customer", "order")] {
        let log = extract_log(&table, id)?;
        let classifier: Classifier = classifier.parse()?;
        let simple = simple_log(&log, &classifier);
        println!(
            "== case id {id}, classifier {classifier}: {} cases, {} variants, {} uncorrelated events",
            log.num_cases(),
            simple.variants().len(),
            log.uncorrelated()
        );
        print!("{}", simple.to_text(classifier.separator()));

        // color index = rank by frequency, as shown by the explorer
        for (rank, (class, n)) in simple.alphabet_by_frequency().into_iter().enumerate() {
            println!("  color {rank}: {} ({n}x)", classifier.label(class));
        }
    }
    Ok(())
}
