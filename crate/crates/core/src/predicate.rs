//! Predicates over cases and events.
//!
//! A [`Predicate`] is a JSON-serializable AST. Each node is either neutral
//! (constants, connectives), case-level (usable in selection) or event-level
//! (usable in projection); [`Predicate::level`] rejects trees that mix the
//! two. Nodes that look beyond the current case read precomputed statistics
//! from a [`LogContext`].

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::classify::{simple_log, simple_trace, Classifier, EventClass, SimpleEventLog};
use crate::error::{Error, Result};
use crate::extract::{Case, StructuredEventLog};
use crate::value::AttributeValue;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn holds(self, ord: Ordering) -> bool {
        match self {
            CmpOp::Eq => ord == Ordering::Equal,
            CmpOp::Ne => ord != Ordering::Equal,
            CmpOp::Lt => ord == Ordering::Less,
            CmpOp::Le => ord != Ordering::Greater,
            CmpOp::Gt => ord == Ordering::Greater,
            CmpOp::Ge => ord != Ordering::Less,
        }
    }

    /// Compares attribute values. `eq`/`ne` use structural equality, so
    /// `ne null` means "is defined". Ordering operators are false for
    /// values of different kinds and for `Undefined`.
    pub fn compare(self, lhs: &AttributeValue, rhs: &AttributeValue) -> bool {
        match self {
            CmpOp::Eq => lhs == rhs,
            CmpOp::Ne => lhs != rhs,
            _ => lhs.partial_cmp_value(rhs).is_some_and(|o| self.holds(o)),
        }
    }
}

/// Where a compared value comes from.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "of", rename_all = "snake_case", deny_unknown_fields)]
pub enum Operand {
    /// Attribute of the event under test (event-level).
    Event { attr: String },
    /// Case attribute; undefined unless all events of the case agree.
    Case { attr: String },
    /// Attribute of the first event of the trace.
    FirstEvent { attr: String },
    /// Attribute of the last event of the trace.
    LastEvent { attr: String },
    /// Attribute of the event at a 0-based trace position.
    EventAt { position: usize, attr: String },
}

impl Operand {
    pub fn event(attr: impl Into<String>) -> Self {
        Operand::Event { attr: attr.into() }
    }

    pub fn case(attr: impl Into<String>) -> Self {
        Operand::Case { attr: attr.into() }
    }

    pub fn first(attr: impl Into<String>) -> Self {
        Operand::FirstEvent { attr: attr.into() }
    }

    pub fn last(attr: impl Into<String>) -> Self {
        Operand::LastEvent { attr: attr.into() }
    }

    fn level(&self) -> Level {
        match self {
            Operand::Event { .. } => Level::Event,
            _ => Level::Case,
        }
    }

    fn resolve<'a>(&self, case: &'a Case, position: Option<usize>) -> &'a AttributeValue {
        static UNDEFINED: AttributeValue = AttributeValue::Undefined;
        let trace = case.trace();
        match self {
            Operand::Event { attr } => match position.and_then(|p| trace.get(p)) {
                Some(e) => e.get(attr),
                None => &UNDEFINED,
            },
            Operand::Case { attr } => case.get(attr),
            Operand::FirstEvent { attr } => trace.first().map_or(&UNDEFINED, |e| e.get(attr)),
            Operand::LastEvent { attr } => trace.last().map_or(&UNDEFINED, |e| e.get(attr)),
            Operand::EventAt { position, attr } => trace.get(*position).map_or(&UNDEFINED, |e| e.get(attr)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Predicate {
    True,
    False,
    And {
        args: Vec<Predicate>,
    },
    Or {
        args: Vec<Predicate>,
    },
    Not {
        arg: Box<Predicate>,
    },
    Compare {
        operand: Operand,
        op: CmpOp,
        value: AttributeValue,
    },
    /// Operand value is one of `values`.
    In {
        operand: Operand,
        values: Vec<AttributeValue>,
    },
    /// Number of events in the trace (case-level).
    TraceLength {
        op: CmpOp,
        value: i64,
    },
    /// Last minus first timestamp of the trace in milliseconds (case-level).
    /// False for empty traces.
    Duration {
        op: CmpOp,
        millis: i64,
    },
    /// Number of cases in the log sharing this case's simple trace
    /// (case-level).
    VariantFrequency {
        classifier: Classifier,
        op: CmpOp,
        value: i64,
    },
    /// Number of events in the log with the same class as this event
    /// (event-level). False for events whose class is undefined.
    ActivityFrequency {
        classifier: Classifier,
        op: CmpOp,
        value: i64,
    },
    /// No later event of the same trace has this event's class
    /// (event-level). Events with an undefined class count as last.
    LastOccurrence {
        classifier: Classifier,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Level {
    /// Evaluates the same for cases and events.
    Any,
    Case,
    Event,
}

impl Level {
    pub fn name(self) -> &'static str {
        match self {
            Level::Any => "neutral",
            Level::Case => "case-level",
            Level::Event => "event-level",
        }
    }

    fn join(self, other: Level) -> Result<Level> {
        match (self, other) {
            (Level::Any, l) | (l, Level::Any) => Ok(l),
            (a, b) if a == b => Ok(a),
            (a, b) => Err(Error::PredicateArity {
                expected: a.name(),
                found: b.name(),
            }),
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Predicate {
    pub fn and(args: Vec<Predicate>) -> Self {
        Predicate::And { args }
    }

    pub fn or(args: Vec<Predicate>) -> Self {
        Predicate::Or { args }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(arg: Predicate) -> Self {
        Predicate::Not { arg: Box::new(arg) }
    }

    pub fn compare(operand: Operand, op: CmpOp, value: impl Into<AttributeValue>) -> Self {
        Predicate::Compare {
            operand,
            op,
            value: value.into(),
        }
    }

    pub fn is_in<I, V>(operand: Operand, values: I) -> Self
    where
        I: IntoIterator<Item = V>,
        V: Into<AttributeValue>,
    {
        Predicate::In {
            operand,
            values: values.into_iter().map(Into::into).collect(),
        }
    }

    /// The level of the whole tree, or an arity error if it mixes case-level
    /// and event-level nodes.
    pub fn level(&self) -> Result<Level> {
        match self {
            Predicate::True | Predicate::False => Ok(Level::Any),
            Predicate::And { args } | Predicate::Or { args } => args
                .iter()
                .try_fold(Level::Any, |acc, p| acc.join(p.level()?)),
            Predicate::Not { arg } => arg.level(),
            Predicate::Compare { operand, .. } | Predicate::In { operand, .. } => Ok(operand.level()),
            Predicate::TraceLength { .. }
            | Predicate::Duration { .. }
            | Predicate::VariantFrequency { .. } => Ok(Level::Case),
            Predicate::ActivityFrequency { .. } | Predicate::LastOccurrence { .. } => Ok(Level::Event),
        }
    }

    /// Fails unless the predicate can be evaluated at `wanted` level.
    pub fn check_level(&self, wanted: Level) -> Result<()> {
        let found = self.level()?;
        if found == Level::Any || found == wanted {
            Ok(())
        } else {
            Err(Error::PredicateArity {
                expected: wanted.name(),
                found: found.name(),
            })
        }
    }

    fn visit_classifiers<'a>(&'a self, out: &mut Vec<(&'a Classifier, bool)>) {
        match self {
            Predicate::And { args } | Predicate::Or { args } => {
                args.iter().for_each(|p| p.visit_classifiers(out))
            }
            Predicate::Not { arg } => arg.visit_classifiers(out),
            Predicate::VariantFrequency { classifier, .. } => out.push((classifier, true)),
            Predicate::ActivityFrequency { classifier, .. } => out.push((classifier, false)),
            _ => {}
        }
    }

    /// Evaluates a case-level (or neutral) predicate on `case`.
    pub fn eval_case(&self, case: &Case, ctx: &LogContext) -> bool {
        self.eval(case, None, ctx)
    }

    /// Evaluates an event-level (or neutral) predicate on the event at
    /// `position` in `case`'s trace.
    pub fn eval_event(&self, case: &Case, position: usize, ctx: &LogContext) -> bool {
        self.eval(case, Some(position), ctx)
    }

    fn eval(&self, case: &Case, position: Option<usize>, ctx: &LogContext) -> bool {
        match self {
            Predicate::True => true,
            Predicate::False => false,
            Predicate::And { args } => args.iter().all(|p| p.eval(case, position, ctx)),
            Predicate::Or { args } => args.iter().any(|p| p.eval(case, position, ctx)),
            Predicate::Not { arg } => !arg.eval(case, position, ctx),
            Predicate::Compare { operand, op, value } => op.compare(operand.resolve(case, position), value),
            Predicate::In { operand, values } => {
                let v = operand.resolve(case, position);
                values.iter().any(|x| x == v)
            }
            Predicate::TraceLength { op, value } => op.holds((case.trace().len() as i64).cmp(value)),
            Predicate::Duration { op, millis } => match (case.trace().first(), case.trace().last()) {
                (Some(first), Some(last)) => {
                    op.holds((last.time().millis() - first.time().millis()).cmp(millis))
                }
                _ => false,
            },
            Predicate::VariantFrequency {
                classifier,
                op,
                value,
            } => {
                let count = ctx.variant_frequency(classifier, case);
                op.holds((count as i64).cmp(value))
            }
            Predicate::ActivityFrequency {
                classifier,
                op,
                value,
            } => {
                let Some(e) = position.and_then(|p| case.trace().get(p)) else {
                    return false;
                };
                match classifier.classify(e) {
                    Some(class) => op.holds((ctx.class_frequency(classifier, &class) as i64).cmp(value)),
                    None => false,
                }
            }
            Predicate::LastOccurrence { classifier } => {
                let Some(p) = position else { return false };
                let trace = case.trace();
                match trace.get(p).and_then(|e| classifier.classify(e)) {
                    Some(class) => trace[p + 1..]
                        .iter()
                        .all(|later| classifier.classify(later).as_ref() != Some(&class)),
                    None => true,
                }
            }
        }
    }
}

/// Log-wide statistics needed by a predicate, computed once per step.
#[derive(Debug, Default)]
pub struct LogContext {
    simple_logs: HashMap<Classifier, SimpleEventLog>,
    class_counts: HashMap<Classifier, HashMap<EventClass, usize>>,
}

impl LogContext {
    pub fn new(log: &StructuredEventLog, predicate: &Predicate) -> Self {
        let mut wanted = Vec::new();
        predicate.visit_classifiers(&mut wanted);
        let mut ctx = LogContext::default();
        for (cl, is_variant) in wanted {
            if is_variant {
                ctx.simple_logs
                    .entry(cl.clone())
                    .or_insert_with(|| simple_log(log, cl));
            } else {
                ctx.class_counts.entry(cl.clone()).or_insert_with(|| {
                    let mut counts = HashMap::new();
                    for class in log.events().filter_map(|e| cl.classify(e)) {
                        *counts.entry(class).or_default() += 1;
                    }
                    counts
                });
            }
        }
        ctx
    }

    fn variant_frequency(&self, cl: &Classifier, case: &Case) -> usize {
        self.simple_logs.get(cl).map_or(0, |simple| {
            simple.multiplicity(&simple_trace(cl, case, simple.alphabet()))
        })
    }

    fn class_frequency(&self, cl: &Classifier, class: &EventClass) -> usize {
        self.class_counts
            .get(cl)
            .and_then(|m| m.get(class))
            .copied()
            .unwrap_or(0)
    }
}
