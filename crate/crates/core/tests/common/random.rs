//! Random small logs and filter stacks, plus a brute-force evaluator that
//! follows the definitions of selection, projection and aggregation.
//!
//! Generated tables have the attributes `time`, `case` (the identifier,
//! sometimes missing), `a` (text, optional), `b` (text, always present) and
//! `c` (integer, optional). At most 8 cases with at most 10 events each.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use evlog::{
    AggregationSpec, AttrMap, AttributeValue, Classifier, CmpOp, EventTable, FilterStack,
    MergeTime, Operand, Predicate, Replacement, Step, StructuredEventLog, Timestamp,
};
use proptest::prelude::*;

pub const ID: &str = "case";
pub const MAX_CASES: i64 = 8;
pub const MAX_TRACE: usize = 10;

// ---- generated instances ----

#[derive(Clone, Debug)]
pub struct Row {
    pub case: Option<i64>,
    pub minute: i64,
    pub a: Option<&'static str>,
    pub b: &'static str,
    pub c: Option<i64>,
}

impl Row {
    pub fn to_attrs(&self) -> AttrMap {
        let mut m = AttrMap::new();
        m.insert("time".into(), AttributeValue::Time(Timestamp(self.minute * 60_000)));
        if let Some(case) = self.case {
            m.insert(ID.into(), AttributeValue::Int(case));
        }
        if let Some(a) = self.a {
            m.insert("a".into(), AttributeValue::text(a));
        }
        m.insert("b".into(), AttributeValue::text(self.b));
        if let Some(c) = self.c {
            m.insert("c".into(), AttributeValue::Int(c));
        }
        m
    }
}

#[derive(Clone, Debug)]
pub enum CasePred {
    True,
    False,
    CaseEq(&'static str, AttributeValue),
    FirstEq(&'static str, AttributeValue),
    LastEq(&'static str, AttributeValue),
    Len(CmpOp, i64),
    Duration(CmpOp, i64),
    VariantFreq(Vec<&'static str>, CmpOp, i64),
    And(Vec<CasePred>),
    Or(Vec<CasePred>),
    Not(Box<CasePred>),
}

#[derive(Clone, Debug)]
pub enum EventPred {
    True,
    False,
    Eq(&'static str, AttributeValue),
    Ne(&'static str, AttributeValue),
    In(&'static str, Vec<AttributeValue>),
    IntCmp(CmpOp, i64),
    ActFreq(Vec<&'static str>, CmpOp, i64),
    LastOcc(Vec<&'static str>),
    And(Vec<EventPred>),
    Or(Vec<EventPred>),
    Not(Box<EventPred>),
}

#[derive(Clone, Debug)]
pub enum Policy {
    KeepLast,
    KeepFirst,
    Merge(MergeTime, Vec<&'static str>),
}

#[derive(Clone, Debug)]
pub enum OStep {
    Select(CasePred),
    Project(EventPred),
    Aggregate(Vec<&'static str>, Policy),
}

#[derive(Clone, Debug)]
pub struct Instance {
    pub rows: Vec<Row>,
    pub steps: Vec<OStep>,
}

fn text_value() -> impl Strategy<Value = (&'static str, AttributeValue)> {
    prop_oneof![
        prop::sample::select(vec!["x", "y", "z"]).prop_map(|v| ("a", AttributeValue::text(v))),
        prop::sample::select(vec!["p", "q"]).prop_map(|v| ("b", AttributeValue::text(v))),
        (0i64..3).prop_map(|v| ("c", AttributeValue::Int(v))),
    ]
}

fn cmp_op() -> impl Strategy<Value = CmpOp> {
    prop::sample::select(vec![CmpOp::Eq, CmpOp::Ne, CmpOp::Lt, CmpOp::Le, CmpOp::Gt, CmpOp::Ge])
}

fn classifier_attrs() -> impl Strategy<Value = Vec<&'static str>> {
    prop::sample::select(vec![vec!["a"], vec!["b"], vec!["c"], vec!["a", "b"], vec!["b", "c"]])
}

fn case_pred() -> impl Strategy<Value = CasePred> {
    let leaf = prop_oneof![
        Just(CasePred::True),
        Just(CasePred::False),
        text_value().prop_map(|(k, v)| CasePred::CaseEq(k, v)),
        text_value().prop_map(|(k, v)| CasePred::FirstEq(k, v)),
        text_value().prop_map(|(k, v)| CasePred::LastEq(k, v)),
        (cmp_op(), 0i64..12).prop_map(|(op, n)| CasePred::Len(op, n)),
        (cmp_op(), 0i64..40).prop_map(|(op, m)| CasePred::Duration(op, m * 60_000)),
        (classifier_attrs(), cmp_op(), 0i64..4).prop_map(|(cl, op, n)| CasePred::VariantFreq(cl, op, n)),
    ];
    leaf.prop_recursive(2, 8, 3, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 0..3).prop_map(CasePred::And),
            prop::collection::vec(inner.clone(), 0..3).prop_map(CasePred::Or),
            inner.prop_map(|p| CasePred::Not(Box::new(p))),
        ]
    })
}

fn event_pred() -> impl Strategy<Value = EventPred> {
    let leaf = prop_oneof![
        Just(EventPred::True),
        Just(EventPred::False),
        text_value().prop_map(|(k, v)| EventPred::Eq(k, v)),
        text_value().prop_map(|(k, v)| EventPred::Ne(k, v)),
        prop::sample::select(vec!["a", "c"]).prop_map(|k| EventPred::Ne(k, AttributeValue::Undefined)),
        prop::collection::vec(text_value(), 1..3).prop_map(|vs| {
            let attr = vs[0].0;
            EventPred::In(attr, vs.into_iter().map(|(_, v)| v).collect())
        }),
        (cmp_op(), 0i64..3).prop_map(|(op, n)| EventPred::IntCmp(op, n)),
        (classifier_attrs(), cmp_op(), 0i64..12).prop_map(|(cl, op, n)| EventPred::ActFreq(cl, op, n)),
        classifier_attrs().prop_map(EventPred::LastOcc),
    ];
    leaf.prop_recursive(2, 8, 3, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 0..3).prop_map(EventPred::And),
            prop::collection::vec(inner.clone(), 0..3).prop_map(EventPred::Or),
            inner.prop_map(|p| EventPred::Not(Box::new(p))),
        ]
    })
}

fn policy() -> impl Strategy<Value = Policy> {
    prop_oneof![
        Just(Policy::KeepLast),
        Just(Policy::KeepFirst),
        (
            prop::sample::select(vec![MergeTime::First, MergeTime::Last, MergeTime::Midpoint]),
            prop::sample::subsequence(vec!["a", "c", ID, "time"], 0..=4),
        )
            .prop_map(|(t, set)| Policy::Merge(t, set)),
    ]
}

fn step() -> impl Strategy<Value = OStep> {
    prop_oneof![
        case_pred().prop_map(OStep::Select),
        event_pred().prop_map(OStep::Project),
        (classifier_attrs(), policy()).prop_map(|(g, p)| OStep::Aggregate(g, p)),
    ]
}

fn row() -> impl Strategy<Value = Row> {
    (
        prop::option::weighted(0.95, 0..MAX_CASES),
        0i64..40,
        prop::option::weighted(0.8, prop::sample::select(vec!["x", "y", "z"])),
        prop::sample::select(vec!["p", "q"]),
        prop::option::weighted(0.7, 0i64..3),
    )
        .prop_map(|(case, minute, a, b, c)| Row { case, minute, a, b, c })
}

pub fn rows() -> impl Strategy<Value = Vec<Row>> {
    prop::collection::vec(row(), 1..60).prop_map(|mut rows| {
        if rows.iter().all(|r| r.case.is_none()) {
            rows[0].case = Some(0);
        }
        let mut per_case: BTreeMap<Option<i64>, usize> = BTreeMap::new();
        rows.retain(|r| {
            let n = per_case.entry(r.case).or_default();
            *n += 1;
            r.case.is_none() || *n <= MAX_TRACE
        });
        rows.sort_by_key(|r| r.minute);
        rows
    })
}

pub fn instance() -> impl Strategy<Value = Instance> {
    (rows(), prop::collection::vec(step(), 0..4)).prop_map(|(rows, steps)| Instance { rows, steps })
}

// ---- translation to the library AST ----

fn cl(attrs: &[&str]) -> Classifier {
    Classifier::new(attrs.iter().copied()).expect("valid classifier")
}

impl CasePred {
    pub fn to_predicate(&self) -> Predicate {
        match self {
            CasePred::True => Predicate::True,
            CasePred::False => Predicate::False,
            CasePred::CaseEq(k, v) => Predicate::compare(Operand::case(*k), CmpOp::Eq, v.clone()),
            CasePred::FirstEq(k, v) => Predicate::compare(Operand::first(*k), CmpOp::Eq, v.clone()),
            CasePred::LastEq(k, v) => Predicate::compare(Operand::last(*k), CmpOp::Eq, v.clone()),
            CasePred::Len(op, n) => Predicate::TraceLength { op: *op, value: *n },
            CasePred::Duration(op, ms) => Predicate::Duration { op: *op, millis: *ms },
            CasePred::VariantFreq(c, op, n) => Predicate::VariantFrequency {
                classifier: cl(c),
                op: *op,
                value: *n,
            },
            CasePred::And(ps) => Predicate::and(ps.iter().map(Self::to_predicate).collect()),
            CasePred::Or(ps) => Predicate::or(ps.iter().map(Self::to_predicate).collect()),
            CasePred::Not(p) => Predicate::not(p.to_predicate()),
        }
    }
}

impl EventPred {
    pub fn to_predicate(&self) -> Predicate {
        match self {
            EventPred::True => Predicate::True,
            EventPred::False => Predicate::False,
            EventPred::Eq(k, v) => Predicate::compare(Operand::event(*k), CmpOp::Eq, v.clone()),
            EventPred::Ne(k, v) => Predicate::compare(Operand::event(*k), CmpOp::Ne, v.clone()),
            EventPred::In(k, vs) => Predicate::is_in(Operand::event(*k), vs.clone()),
            EventPred::IntCmp(op, n) => Predicate::compare(Operand::event("c"), *op, *n),
            EventPred::ActFreq(c, op, n) => Predicate::ActivityFrequency {
                classifier: cl(c),
                op: *op,
                value: *n,
            },
            EventPred::LastOcc(c) => Predicate::LastOccurrence { classifier: cl(c) },
            EventPred::And(ps) => Predicate::and(ps.iter().map(Self::to_predicate).collect()),
            EventPred::Or(ps) => Predicate::or(ps.iter().map(Self::to_predicate).collect()),
            EventPred::Not(p) => Predicate::not(p.to_predicate()),
        }
    }
}

impl EventPred {
    /// True when the predicate looks at the event alone. Projection by such a
    /// predicate is idempotent; nodes reading the rest of the trace or log
    /// can change their verdict once other events are gone.
    pub fn context_free(&self) -> bool {
        match self {
            EventPred::ActFreq(..) | EventPred::LastOcc(_) => false,
            EventPred::And(ps) | EventPred::Or(ps) => ps.iter().all(Self::context_free),
            EventPred::Not(p) => p.context_free(),
            _ => true,
        }
    }
}

impl OStep {
    pub fn to_step(&self) -> Step {
        match self {
            OStep::Select(p) => Step::Select { predicate: p.to_predicate() },
            OStep::Project(p) => Step::Project { predicate: p.to_predicate() },
            OStep::Aggregate(g, policy) => {
                let replacement = match policy {
                    Policy::KeepLast => Replacement::KeepLast,
                    Policy::KeepFirst => Replacement::KeepFirst,
                    Policy::Merge(t, set) => Replacement::Merge {
                        timestamp: *t,
                        set_collect: set.iter().map(|s| s.to_string()).collect(),
                    },
                };
                Step::Aggregate(AggregationSpec::new(cl(g), replacement))
            }
        }
    }
}

pub fn to_stack(steps: &[OStep]) -> FilterStack {
    FilterStack::new(steps.iter().map(OStep::to_step).collect())
}

// ---- brute-force evaluator ----

#[derive(Clone, Debug, PartialEq)]
pub struct OEvent {
    pub index: usize,
    pub attrs: BTreeMap<String, AttributeValue>,
}

impl OEvent {
    pub fn get(&self, name: &str) -> Option<&AttributeValue> {
        self.attrs.get(name)
    }

    pub fn millis(&self) -> i64 {
        match self.attrs.get("time") {
            Some(AttributeValue::Time(t)) => t.0,
            other => panic!("event without timestamp: {other:?}"),
        }
    }

    /// `None` when any classifier attribute is missing.
    pub fn class(&self, attrs: &[&str]) -> Option<Vec<AttributeValue>> {
        attrs.iter().map(|a| self.attrs.get(*a).cloned()).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OCase {
    pub id: AttributeValue,
    pub events: Vec<OEvent>,
}

impl OCase {
    /// The value every event agrees on, if any.
    pub fn case_attr(&self, name: &str) -> Option<AttributeValue> {
        if name == ID {
            return Some(self.id.clone());
        }
        let first = self.events.first()?.get(name)?;
        self.events
            .iter()
            .all(|e| e.get(name) == Some(first))
            .then(|| first.clone())
    }

    pub fn case_attrs(&self) -> BTreeSet<String> {
        let mut names: BTreeSet<String> = self.events.iter().flat_map(|e| e.attrs.keys().cloned()).collect();
        names.insert(ID.to_string());
        names.into_iter().filter(|n| self.case_attr(n).is_some()).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OLog {
    pub cases: Vec<OCase>,
    pub uncorrelated: usize,
}

impl OLog {
    pub fn num_events(&self) -> usize {
        self.cases.iter().map(|c| c.events.len()).sum()
    }

    pub fn global_case_attrs(&self) -> BTreeSet<String> {
        let mut it = self.cases.iter().map(OCase::case_attrs);
        let Some(first) = it.next() else {
            return [ID.to_string()].into_iter().collect();
        };
        it.fold(first, |acc, s| acc.intersection(&s).cloned().collect())
    }

    fn simple_trace(&self, c: &OCase, attrs: &[&str]) -> Vec<Vec<AttributeValue>> {
        c.events.iter().filter_map(|e| e.class(attrs)).collect()
    }
}

pub fn holds(op: CmpOp, ord: Ordering) -> bool {
    match op {
        CmpOp::Eq => ord == Ordering::Equal,
        CmpOp::Ne => ord != Ordering::Equal,
        CmpOp::Lt => ord == Ordering::Less,
        CmpOp::Le => ord != Ordering::Greater,
        CmpOp::Gt => ord == Ordering::Greater,
        CmpOp::Ge => ord != Ordering::Less,
    }
}

pub fn oracle_extract(rows: &[Row]) -> OLog {
    let mut by_case: BTreeMap<i64, Vec<OEvent>> = BTreeMap::new();
    let mut uncorrelated = 0;
    for (index, r) in rows.iter().enumerate() {
        match r.case {
            Some(c) => by_case.entry(c).or_default().push(OEvent {
                index,
                attrs: r.to_attrs(),
            }),
            None => uncorrelated += 1,
        }
    }
    let cases = by_case
        .into_iter()
        .map(|(id, mut events)| {
            // stable: rows arrive in index order
            events.sort_by_key(OEvent::millis);
            OCase {
                id: AttributeValue::Int(id),
                events,
            }
        })
        .collect();
    OLog { cases, uncorrelated }
}

pub fn eval_case(p: &CasePred, c: &OCase, log: &OLog) -> bool {
    match p {
        CasePred::True => true,
        CasePred::False => false,
        CasePred::CaseEq(k, v) => c.case_attr(k).as_ref() == Some(v),
        CasePred::FirstEq(k, v) => c.events.first().and_then(|e| e.get(k)) == Some(v),
        CasePred::LastEq(k, v) => c.events.last().and_then(|e| e.get(k)) == Some(v),
        CasePred::Len(op, n) => holds(*op, (c.events.len() as i64).cmp(n)),
        CasePred::Duration(op, ms) => match (c.events.first(), c.events.last()) {
            (Some(f), Some(l)) => holds(*op, (l.millis() - f.millis()).cmp(ms)),
            _ => false,
        },
        CasePred::VariantFreq(attrs, op, n) => {
            let mine = log.simple_trace(c, attrs);
            let count = log.cases.iter().filter(|d| log.simple_trace(d, attrs) == mine).count();
            holds(*op, (count as i64).cmp(n))
        }
        CasePred::And(ps) => ps.iter().all(|p| eval_case(p, c, log)),
        CasePred::Or(ps) => ps.iter().any(|p| eval_case(p, c, log)),
        CasePred::Not(p) => !eval_case(p, c, log),
    }
}

pub fn eval_event(p: &EventPred, c: &OCase, i: usize, log: &OLog) -> bool {
    let e = &c.events[i];
    match p {
        EventPred::True => true,
        EventPred::False => false,
        EventPred::Eq(k, v) => e.get(k) == Some(v),
        EventPred::Ne(k, v) => {
            if v.is_defined() {
                e.get(k) != Some(v)
            } else {
                e.get(k).is_some()
            }
        }
        EventPred::In(k, vs) => e.get(k).is_some_and(|x| vs.contains(x)),
        // equality is plain value equality (an absent value differs from
        // every value); ordering needs two integers
        EventPred::IntCmp(CmpOp::Eq, n) => e.get("c") == Some(&AttributeValue::Int(*n)),
        EventPred::IntCmp(CmpOp::Ne, n) => e.get("c") != Some(&AttributeValue::Int(*n)),
        EventPred::IntCmp(op, n) => match e.get("c") {
            Some(AttributeValue::Int(x)) => holds(*op, x.cmp(n)),
            _ => false,
        },
        EventPred::ActFreq(attrs, op, n) => match e.class(attrs) {
            Some(class) => {
                let count = log
                    .cases
                    .iter()
                    .flat_map(|d| &d.events)
                    .filter(|x| x.class(attrs).as_ref() == Some(&class))
                    .count();
                holds(*op, (count as i64).cmp(n))
            }
            None => false,
        },
        EventPred::LastOcc(attrs) => match e.class(attrs) {
            Some(class) => c.events[i + 1..].iter().all(|x| x.class(attrs).as_ref() != Some(&class)),
            None => true,
        },
        EventPred::And(ps) => ps.iter().all(|p| eval_event(p, c, i, log)),
        EventPred::Or(ps) => ps.iter().any(|p| eval_event(p, c, i, log)),
        EventPred::Not(p) => !eval_event(p, c, i, log),
    }
}

/// Maximal runs of consecutive events sharing a defined class, as index
/// ranges into the trace.
pub fn oracle_runs(events: &[OEvent], attrs: &[&str]) -> Vec<std::ops::Range<usize>> {
    let mut runs = Vec::new();
    let mut start = 0;
    for i in 1..=events.len() {
        let extends = i < events.len() && {
            let prev = events[i - 1].class(attrs);
            prev.is_some() && prev == events[i].class(attrs)
        };
        if !extends {
            runs.push(start..i);
            start = i;
        }
    }
    runs
}

fn replace(run: &[OEvent], policy: &Policy) -> OEvent {
    if run.len() == 1 {
        return run[0].clone();
    }
    let first = &run[0];
    let last = &run[run.len() - 1];
    match policy {
        Policy::KeepLast => last.clone(),
        Policy::KeepFirst => first.clone(),
        Policy::Merge(time, collect) => {
            let mut out = last.clone();
            let t = match time {
                MergeTime::First => first.millis(),
                MergeTime::Last => last.millis(),
                MergeTime::Midpoint => (first.millis() + last.millis()).div_euclid(2),
            };
            out.attrs.insert("time".into(), AttributeValue::Time(Timestamp(t)));
            for name in collect.iter().filter(|n| **n != ID && **n != "time") {
                let mut members = BTreeSet::new();
                for e in run {
                    match e.get(name) {
                        Some(AttributeValue::ValueSet(inner)) => members.extend(inner.iter().cloned()),
                        Some(v) => {
                            members.insert(v.clone());
                        }
                        None => {}
                    }
                }
                if members.is_empty() {
                    out.attrs.remove(*name);
                } else {
                    out.attrs.insert(name.to_string(), AttributeValue::ValueSet(members));
                }
            }
            out
        }
    }
}

pub fn oracle_step(step: &OStep, log: &OLog) -> OLog {
    let cases = match step {
        OStep::Select(p) => log.cases.iter().filter(|c| eval_case(p, c, log)).cloned().collect(),
        OStep::Project(p) => log
            .cases
            .iter()
            .map(|c| OCase {
                id: c.id.clone(),
                events: (0..c.events.len())
                    .filter(|i| eval_event(p, c, *i, log))
                    .map(|i| c.events[i].clone())
                    .collect(),
            })
            .collect(),
        OStep::Aggregate(g, policy) => log
            .cases
            .iter()
            .map(|c| OCase {
                id: c.id.clone(),
                events: oracle_runs(&c.events, g)
                    .into_iter()
                    .map(|r| replace(&c.events[r], policy))
                    .collect(),
            })
            .collect(),
    };
    OLog {
        cases,
        uncorrelated: log.uncorrelated,
    }
}

// ---- comparison and invariants ----

pub fn from_library(log: &StructuredEventLog) -> OLog {
    OLog {
        cases: log
            .cases()
            .iter()
            .map(|c| OCase {
                id: c.id().clone(),
                events: c
                    .trace()
                    .iter()
                    .map(|e| OEvent {
                        index: e.index(),
                        attrs: e.attrs().clone(),
                    })
                    .collect(),
            })
            .collect(),
        uncorrelated: log.uncorrelated(),
    }
}

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)*) => {
        if !$cond {
            return Err(format!($($fmt)*));
        }
    };
}

/// Re-checks the structural invariants of a library log from scratch.
pub fn check_log_invariants(log: &StructuredEventLog) -> Result<(), String> {
    let o = from_library(log);
    let mut seen_ids = BTreeSet::new();
    let mut seen_events = BTreeSet::new();
    for (c, lc) in o.cases.iter().zip(log.cases()) {
        ensure!(seen_ids.insert(c.id.clone()), "duplicate case id {}", c.id);
        for w in c.events.windows(2) {
            ensure!(w[0].millis() <= w[1].millis(), "case {} not in time order", c.id);
        }
        for e in &c.events {
            ensure!(e.get(ID) == Some(&c.id), "event {} not correlated to case {}", e.index, c.id);
            ensure!(seen_events.insert(e.index), "event {} in two cases", e.index);
        }
        let lib: BTreeSet<String> = lc.case_attrs().keys().cloned().collect();
        ensure!(lib == c.case_attrs(), "case attrs of {}: {:?} vs {:?}", c.id, lib, c.case_attrs());
        for name in &lib {
            ensure!(Some(lc.get(name).clone()) == c.case_attr(name), "case attr {name} of {}", c.id);
        }
    }
    let ids: Vec<_> = o.cases.iter().map(|c| c.id.clone()).collect();
    ensure!(ids.windows(2).all(|w| w[0] < w[1]), "cases not sorted by id");
    ensure!(
        *log.global_case_attrs() == o.global_case_attrs(),
        "global case attrs {:?} vs {:?}",
        log.global_case_attrs(),
        o.global_case_attrs()
    );
    ensure!(log.global_case_attrs().contains(ID), "id missing from global case attrs");
    Ok(())
}

fn is_subsequence(small: &[OEvent], big: &[OEvent]) -> bool {
    let mut it = big.iter();
    small.iter().all(|e| it.any(|b| b == e))
}

/// Step-specific properties comparing a step's input and output.
pub fn check_step_properties(step: &OStep, before: &OLog, after: &OLog) -> Result<(), String> {
    match step {
        OStep::Select(_) => {
            ensure!(
                after.cases.iter().all(|c| before.cases.contains(c)),
                "selection changed or invented a case"
            );
        }
        OStep::Project(p) => {
            ensure!(after.cases.len() == before.cases.len(), "projection changed the case count");
            for (a, b) in after.cases.iter().zip(&before.cases) {
                ensure!(a.id == b.id, "projection reordered cases");
                ensure!(is_subsequence(&a.events, &b.events), "trace of {} is not a subsequence", a.id);
            }
            if p.context_free() {
                let again = oracle_step(&OStep::Project(p.clone()), after);
                ensure!(again == *after, "projection is not idempotent");
            }
        }
        OStep::Aggregate(g, policy) => {
            // merging a grouping attribute into a set changes the class of
            // the merged event, so only the other policies keep output
            // classes distinct from their neighbours
            let keeps_classes = match policy {
                Policy::Merge(_, collect) => !collect.iter().any(|c| g.contains(c)),
                _ => true,
            };
            for (a, b) in after.cases.iter().zip(&before.cases) {
                ensure!(a.events.len() <= b.events.len(), "aggregation grew trace {}", a.id);
                if keeps_classes {
                    for w in a.events.windows(2) {
                        let (x, y) = (w[0].class(g), w[1].class(g));
                        ensure!(x.is_none() || x != y, "equal classes remain adjacent in {}", a.id);
                    }
                }
                let runs = oracle_runs(&b.events, g);
                for w in runs.windows(2) {
                    let (x, y) = (b.events[w[0].end - 1].class(g), b.events[w[1].start].class(g));
                    ensure!(x.is_none() || x != y, "runs in {} are not maximal", a.id);
                }
                ensure!(runs.len() == a.events.len(), "one output event per run in {}", a.id);
                for (r, e) in runs.iter().zip(&a.events) {
                    let lo = b.events[r.start].millis();
                    let hi = b.events[r.end - 1].millis();
                    ensure!(lo <= e.millis() && e.millis() <= hi, "timestamp outside its run in {}", a.id);
                }
                if runs.iter().all(|r| r.len() == 1) {
                    ensure!(a.events == b.events, "run-free trace {} changed", a.id);
                }
            }
        }
    }
    Ok(())
}

/// Runs one instance through the library and the evaluator and compares
/// every intermediate log and step statistic.
pub fn check_instance(inst: &Instance) -> Result<(), String> {
    let table = EventTable::from_records(inst.rows.iter().map(Row::to_attrs), "b")
        .map_err(|e| format!("table: {e}"))?;
    let log = evlog::extract_log(&table, ID).map_err(|e| format!("extract: {e}"))?;
    let mut expected = oracle_extract(&inst.rows);

    // partition: every event is in exactly one case or uncorrelated
    ensure!(
        log.num_events() + log.uncorrelated() == inst.rows.len(),
        "extraction lost events"
    );
    ensure!(from_library(&log) == expected, "extraction differs from oracle");
    check_log_invariants(&log)?;

    let stack = to_stack(&inst.steps);
    let round_trip = FilterStack::from_json(&stack.to_json()).map_err(|e| format!("stack json: {e}"))?;
    ensure!(round_trip == stack, "stack JSON round trip changed the stack");

    let outcome = evlog::apply_stack(&log, &stack).map_err(|e| format!("apply_stack: {e}"))?;
    ensure!(outcome.stats.len() == inst.steps.len(), "one stats entry per step");

    let mut current = log;
    for (i, step) in inst.steps.iter().enumerate() {
        let next = step.to_step().apply(&current).map_err(|e| format!("step {i}: {e}"))?;
        let want = oracle_step(step, &expected);
        let got = from_library(&next);
        ensure!(got == want, "step {i} ({step:?}) differs from oracle:\n got  {got:?}\n want {want:?}");
        check_log_invariants(&next).map_err(|e| format!("step {i}: {e}"))?;
        check_step_properties(step, &expected, &want).map_err(|e| format!("step {i}: {e}"))?;
        if let OStep::Project(p) = step {
            if p.context_free() {
                let twice = step.to_step().apply(&next).map_err(|e| format!("step {i}: {e}"))?;
                ensure!(twice == next, "step {i}: projecting twice differs from once");
            }
        }
        let s = &outcome.stats[i];
        ensure!(
            (s.cases_in, s.cases_out, s.events_in, s.events_out)
                == (expected.cases.len(), want.cases.len(), expected.num_events(), want.num_events()),
            "step {i} stats {s:?}"
        );
        expected = want;
        current = next;
    }
    ensure!(from_library(&outcome.log) == expected, "stack result differs from oracle");
    Ok(())
}
