//! Event log extraction and pre-processing.
//!
//! Raw event data arrives as a table of timestamped events with arbitrary
//! attributes. Turning it into something process mining algorithms can
//! consume takes two choices: a *case identifier* (which entity to follow)
//! and an *event classifier* (how to name what happened). This crate covers
//! the whole path:
//!
//! ```text
//! CSV > parse_csv > EventTable > extract_log(id) > StructuredEventLog
//!                                                    | apply_stack(select / project / aggregate)
//!                                                    | simple_log(classifier) > SimpleEventLog (variants)
//!                                                    | export_xes / write_log_csv
//! ```
//!
//! ```
//! use evlog::{extract_log, parse_csv, simple_log, Classifier, CsvProfile};
//!
//! let csv = "order,time,action\n\
//!            23,19/12/2018 15:46,receive payment\n\
//!            23,19/12/2018 16:30,archive\n";
//! let table = parse_csv(csv.as_bytes(), &CsvProfile::default())?;
//! let log = extract_log(&table, "order")?;
//! let variants = simple_log(&log, &Classifier::single("action"));
//! assert_eq!(variants.to_text("+"), "1\treceive payment,archive\n");
//! # Ok::<(), evlog::Error>(())
//! ```

pub mod classify;
pub mod error;
pub mod export;
pub mod extract;
pub mod ingest;
pub mod model;
pub mod predicate;
pub mod preprocess;
pub mod report;
pub mod value;

pub use classify::{classify, event_classes, simple_log, simple_trace, Classifier, EventClass, SimpleEventLog};
pub use error::{Error, Result};
pub use export::{export_xes, write_log_csv, write_table_csv};
pub use extract::{
    build_trace, cases, correlate, extract_log, partial_order_trace, Case, PartialOrderTrace,
    StructuredEventLog,
};
pub use ingest::{parse_csv, sort_table, CsvProfile, SortSpec, TimeFormat};
pub use model::{attribute_names, get_attr, validate_event, AttrMap, AttributeNameSet, Event, EventTable, EventViolation};
pub use predicate::{CmpOp, LogContext, Operand, Predicate};
pub use preprocess::{
    aggregate, apply_stack, project, select, AggregationSpec, FilterStack, MergeTime, Replacement,
    StackOutcome, Step, StepStats,
};
pub use report::{inspect, AttributeReport, AttributeStats};
pub use value::{AttributeValue, Timestamp};
