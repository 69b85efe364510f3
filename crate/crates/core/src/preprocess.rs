//! Selection, projection and aggregation of structured event logs, and
//! ordered filter stacks combining them.
//!
//! Every operation maps a [`StructuredEventLog`] to a new one, so steps can be
//! combined in any order. Case attributes and global case attributes are
//! recomputed on the output.

use serde::{Deserialize, Serialize};

use crate::classify::Classifier;
use crate::error::{Error, Result};
use crate::extract::{Case, StructuredEventLog};
use crate::model::{Event, TIME};
use crate::predicate::{Level, LogContext, Predicate};
use crate::value::{AttributeValue, Timestamp};

/// Keeps the cases satisfying a case-level predicate. Surviving cases are
/// unchanged.
pub fn select(log: &StructuredEventLog, phi: &Predicate) -> Result<StructuredEventLog> {
    phi.check_level(Level::Case)?;
    let ctx = LogContext::new(log, phi);
    let kept = log
        .cases()
        .iter()
        .filter(|c| phi.eval_case(c, &ctx))
        .cloned()
        .collect();
    log.with_cases(kept)
}

/// Keeps, in every trace, the events satisfying an event-level predicate.
/// All cases survive, possibly with an empty trace.
pub fn project(log: &StructuredEventLog, psi: &Predicate) -> Result<StructuredEventLog> {
    psi.check_level(Level::Event)?;
    let ctx = LogContext::new(log, psi);
    let cases = log
        .cases()
        .iter()
        .map(|c| {
            let trace = c
                .trace()
                .iter()
                .enumerate()
                .filter(|(i, _)| psi.eval_event(c, *i, &ctx))
                .map(|(_, e)| e.clone())
                .collect();
            Case::new(log.id_attr(), c.id().clone(), trace)
        })
        .collect::<Result<Vec<_>>>()?;
    log.with_cases(cases)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MergeTime {
    First,
    #[default]
    Last,
    /// Halfway between first and last, rounded down to the millisecond.
    Midpoint,
}

/// How a run of equal-class events is replaced by a single event.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case", deny_unknown_fields)]
pub enum Replacement {
    #[default]
    KeepLast,
    KeepFirst,
    /// Starts from the last event's attributes, sets the timestamp per
    /// `timestamp`, and replaces each attribute in `set_collect` by the set
    /// of its defined values over the run. The case identifier and `time`
    /// are never collected.
    Merge {
        #[serde(default)]
        timestamp: MergeTime,
        #[serde(default)]
        set_collect: Vec<String>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AggregationSpec {
    pub grouping: Classifier,
    #[serde(default)]
    pub replacement: Replacement,
}

impl AggregationSpec {
    pub fn new(grouping: Classifier, replacement: Replacement) -> Self {
        AggregationSpec {
            grouping,
            replacement,
        }
    }

    /// Replaces one run. Singleton runs come back unchanged.
    fn replace(&self, run: &[Event], id_attr: &str) -> Result<Event> {
        let (first, last) = match run {
            [] => return Err(Error::EmptyEventSet),
            [single] => return Ok(single.clone()),
            [first, .., last] => (first, last),
        };
        match &self.replacement {
            Replacement::KeepLast => Ok(last.clone()),
            Replacement::KeepFirst => Ok(first.clone()),
            Replacement::Merge {
                timestamp,
                set_collect,
            } => {
                let mut attrs = last.attrs().clone();
                let mut source = last.source_texts().clone();
                match timestamp {
                    MergeTime::Last => {}
                    MergeTime::First => {
                        attrs.insert(TIME.into(), AttributeValue::Time(first.time()));
                        match first.source_text(TIME) {
                            Some(s) => source.insert(TIME.into(), s.to_string()),
                            None => source.remove(TIME),
                        };
                    }
                    MergeTime::Midpoint => {
                        let (a, b) = (first.time().millis(), last.time().millis());
                        let mid = a + (b - a).div_euclid(2);
                        attrs.insert(TIME.into(), AttributeValue::Time(Timestamp(mid)));
                        source.remove(TIME);
                    }
                }
                for name in set_collect {
                    if name == TIME || name == id_attr {
                        continue;
                    }
                    let set = AttributeValue::set(run.iter().map(|e| e.get(name).clone()));
                    source.remove(name);
                    match &set {
                        AttributeValue::ValueSet(members) if members.is_empty() => {
                            attrs.remove(name);
                        }
                        _ => {
                            attrs.insert(name.clone(), set);
                        }
                    }
                }
                Event::from_parts(last.index(), attrs, source)
            }
        }
    }
}

/// Splits a trace into maximal runs of consecutive events with the same
/// defined grouping class. Events with an undefined class are singleton runs.
pub fn runs<'a>(trace: &'a [Event], grouping: &Classifier) -> Vec<&'a [Event]> {
    let classes: Vec<_> = trace.iter().map(|e| grouping.classify(e)).collect();
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=trace.len() {
        let continues = i < trace.len() && classes[i].is_some() && classes[i] == classes[i - 1];
        if !continues {
            out.push(&trace[start..i]);
            start = i;
        }
    }
    out
}

/// Replaces every maximal run of equal-class events by one event.
pub fn aggregate(log: &StructuredEventLog, spec: &AggregationSpec) -> Result<StructuredEventLog> {
    let cases = log
        .cases()
        .iter()
        .map(|c| {
            let trace = runs(c.trace(), &spec.grouping)
                .into_iter()
                .map(|run| spec.replace(run, log.id_attr()))
                .collect::<Result<Vec<_>>>()?;
            Case::new(log.id_attr(), c.id().clone(), trace)
        })
        .collect::<Result<Vec<_>>>()?;
    log.with_cases(cases)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
pub enum Step {
    Select { predicate: Predicate },
    Project { predicate: Predicate },
    Aggregate(AggregationSpec),
}

impl Step {
    pub fn name(&self) -> &'static str {
        match self {
            Step::Select { .. } => "select",
            Step::Project { .. } => "project",
            Step::Aggregate(_) => "aggregate",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Step::Select { predicate } => predicate.check_level(Level::Case),
            Step::Project { predicate } => predicate.check_level(Level::Event),
            Step::Aggregate(_) => Ok(()),
        }
    }

    pub fn apply(&self, log: &StructuredEventLog) -> Result<StructuredEventLog> {
        match self {
            Step::Select { predicate } => select(log, predicate),
            Step::Project { predicate } => project(log, predicate),
            Step::Aggregate(spec) => aggregate(log, spec),
        }
    }
}

/// An ordered list of steps applied left to right.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FilterStack {
    pub steps: Vec<Step>,
}

impl FilterStack {
    pub fn new(steps: Vec<Step>) -> Self {
        FilterStack { steps }
    }

    /// Parses `{"steps": [...]}` or a bare array of steps. Errors name the
    /// offending step (0-based).
    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::StackSchema {
            step: None,
            message: e.to_string(),
        })?;
        FilterStack::from_value(value)
    }

    pub fn from_value(value: serde_json::Value) -> Result<Self> {
        let items = match value {
            serde_json::Value::Array(items) => items,
            serde_json::Value::Object(mut obj) => match obj.remove("steps") {
                Some(serde_json::Value::Array(items)) if obj.is_empty() => items,
                _ => {
                    return Err(Error::StackSchema {
                        step: None,
                        message: "expected an object with a single \"steps\" array".into(),
                    })
                }
            },
            _ => {
                return Err(Error::StackSchema {
                    step: None,
                    message: "expected an array of steps".into(),
                })
            }
        };
        let steps = items
            .into_iter()
            .enumerate()
            .map(|(i, item)| {
                let step: Step = serde_json::from_value(item).map_err(|e| Error::StackSchema {
                    step: Some(i),
                    message: e.to_string(),
                })?;
                step.validate().map_err(|e| Error::StackSchema {
                    step: Some(i),
                    message: e.to_string(),
                })?;
                Ok(step)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(FilterStack { steps })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("filter stacks always serialize")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepStats {
    pub step: usize,
    pub op: String,
    pub cases_in: usize,
    pub cases_out: usize,
    pub events_in: usize,
    pub events_out: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StackOutcome {
    pub log: StructuredEventLog,
    pub stats: Vec<StepStats>,
}

/// Applies the steps in order. Log-wide statistics used by a step are taken
/// from the log as it enters that step.
pub fn apply_stack(log: &StructuredEventLog, stack: &FilterStack) -> Result<StackOutcome> {
    let mut current = log.clone();
    let mut stats = Vec::with_capacity(stack.steps.len());
    for (i, step) in stack.steps.iter().enumerate() {
        let next = step.apply(&current).map_err(|e| Error::Step {
            step: i,
            source: Box::new(e),
        })?;
        stats.push(StepStats {
            step: i,
            op: step.name().to_string(),
            cases_in: current.num_cases(),
            cases_out: next.num_cases(),
            events_in: current.num_events(),
            events_out: next.num_events(),
        });
        current = next;
    }
    Ok(StackOutcome { log: current, stats })
}
