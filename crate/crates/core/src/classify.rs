//! Event classifiers, event classes and simple event logs (trace variants).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extract::{Case, StructuredEventLog};
use crate::model::Event;
use crate::value::AttributeValue;

pub const DEFAULT_SEPARATOR: &str = "+";

/// Maps an event to the tuple of its values for an ordered list of
/// attributes.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "ClassifierRepr", into = "ClassifierRepr")]
pub struct Classifier {
    attrs: Vec<String>,
    separator: String,
}

impl Classifier {
    pub fn new<I, S>(attrs: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Classifier::with_separator(attrs, DEFAULT_SEPARATOR)
    }

    pub fn with_separator<I, S>(attrs: I, separator: impl Into<String>) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let attrs: Vec<String> = attrs.into_iter().map(Into::into).collect();
        if attrs.is_empty() {
            return Err(Error::InvalidClassifier("no attributes".into()));
        }
        if let Some(a) = attrs.iter().find(|a| a.is_empty()) {
            return Err(Error::InvalidClassifier(format!("empty attribute name {a:?}")));
        }
        let mut seen = BTreeSet::new();
        if let Some(dup) = attrs.iter().find(|a| !seen.insert(a.as_str())) {
            return Err(Error::InvalidClassifier(format!("duplicate attribute {dup:?}")));
        }
        Ok(Classifier {
            attrs,
            separator: separator.into(),
        })
    }

    pub fn single(attr: impl Into<String>) -> Self {
        Classifier {
            attrs: vec![attr.into()],
            separator: DEFAULT_SEPARATOR.into(),
        }
    }

    pub fn attrs(&self) -> &[String] {
        &self.attrs
    }

    pub fn separator(&self) -> &str {
        &self.separator
    }

    /// The event class of `e`, or `None` (⊥) if any component is undefined.
    pub fn classify(&self, e: &Event) -> Option<EventClass> {
        self.attrs
            .iter()
            .map(|a| {
                let v = e.get(a);
                v.is_defined().then(|| v.clone())
            })
            .collect::<Option<Vec<_>>>()
            .map(EventClass)
    }

    pub fn label(&self, class: &EventClass) -> String {
        class.label(&self.separator)
    }
}

/// Parses `a+b+c` (attribute names joined by `+`).
impl FromStr for Classifier {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Classifier::new(s.split('+').map(str::trim))
    }
}

impl fmt::Display for Classifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.attrs.join("+"))
    }
}

/// JSON form: either `"action+life-cycle"`, `["action", "life-cycle"]`, or
/// `{"attrs": [...], "separator": "+"}`.
#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ClassifierRepr {
    Text(String),
    List(Vec<String>),
    Full {
        attrs: Vec<String>,
        #[serde(default = "default_separator")]
        separator: String,
    },
}

fn default_separator() -> String {
    DEFAULT_SEPARATOR.into()
}

impl TryFrom<ClassifierRepr> for Classifier {
    type Error = Error;

    fn try_from(r: ClassifierRepr) -> Result<Self> {
        match r {
            ClassifierRepr::Text(s) => s.parse(),
            ClassifierRepr::List(attrs) => Classifier::new(attrs),
            ClassifierRepr::Full { attrs, separator } => Classifier::with_separator(attrs, separator),
        }
    }
}

impl From<Classifier> for ClassifierRepr {
    fn from(c: Classifier) -> Self {
        if c.separator == DEFAULT_SEPARATOR {
            ClassifierRepr::List(c.attrs)
        } else {
            ClassifierRepr::Full {
                attrs: c.attrs,
                separator: c.separator,
            }
        }
    }
}

/// A defined event class: the ordered tuple of classifier values. Classes
/// compare structurally; the joined text is for display only.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EventClass(pub Vec<AttributeValue>);

impl EventClass {
    pub fn parts(&self) -> &[AttributeValue] {
        &self.0
    }

    pub fn label(&self, separator: &str) -> String {
        self.0
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join(separator)
    }
}

impl fmt::Display for EventClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label(DEFAULT_SEPARATOR))
    }
}

impl Serialize for EventClass {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

pub fn classify(cl: &Classifier, e: &Event) -> Option<EventClass> {
    cl.classify(e)
}

/// All defined classes of events in `log`.
pub fn event_classes(log: &StructuredEventLog, cl: &Classifier) -> BTreeSet<EventClass> {
    log.events().filter_map(|e| cl.classify(e)).collect()
}

/// The classes of `c`'s trace in order, keeping only those in `alphabet`.
/// Undefined classes are never in an alphabet, so they are always dropped.
pub fn simple_trace(cl: &Classifier, c: &Case, alphabet: &BTreeSet<EventClass>) -> Vec<EventClass> {
    c.trace()
        .iter()
        .filter_map(|e| cl.classify(e))
        .filter(|class| alphabet.contains(class))
        .collect()
}

/// A multiset of simple traces over an alphabet of event classes.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SimpleEventLog {
    alphabet: BTreeSet<EventClass>,
    variants: BTreeMap<Vec<EventClass>, usize>,
}

impl SimpleEventLog {
    pub fn alphabet(&self) -> &BTreeSet<EventClass> {
        &self.alphabet
    }

    pub fn variants(&self) -> &BTreeMap<Vec<EventClass>, usize> {
        &self.variants
    }

    pub fn multiplicity(&self, variant: &[EventClass]) -> usize {
        self.variants.get(variant).copied().unwrap_or(0)
    }

    /// Sum of multiplicities, i.e. the number of cases.
    pub fn total(&self) -> usize {
        self.variants.values().sum()
    }

    /// Variants by descending count, then lexicographically by class labels.
    pub fn sorted_variants(&self, separator: &str) -> Vec<(&[EventClass], usize)> {
        let mut rows: Vec<(Vec<String>, &[EventClass], usize)> = self
            .variants
            .iter()
            .map(|(v, n)| (v.iter().map(|c| c.label(separator)).collect(), v.as_slice(), *n))
            .collect();
        rows.sort_by(|a, b| b.2.cmp(&a.2).then_with(|| a.0.cmp(&b.0)));
        rows.into_iter().map(|(_, v, n)| (v, n)).collect()
    }

    /// How often each class occurs over all variants, weighted by
    /// multiplicity.
    pub fn class_frequencies(&self) -> BTreeMap<&EventClass, usize> {
        let mut freq: BTreeMap<&EventClass, usize> = self.alphabet.iter().map(|c| (c, 0)).collect();
        for (variant, n) in &self.variants {
            for class in variant {
                *freq.entry(class).or_default() += n;
            }
        }
        freq
    }

    /// Alphabet ordered by descending frequency, then class order. A class's
    /// position is its stable color index.
    pub fn alphabet_by_frequency(&self) -> Vec<(&EventClass, usize)> {
        let mut classes: Vec<_> = self.class_frequencies().into_iter().collect();
        classes.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        classes
    }

    /// One line per variant: `count<TAB>class1,class2,...`.
    pub fn to_text(&self, separator: &str) -> String {
        let mut out = String::new();
        for (variant, n) in self.sorted_variants(separator) {
            let labels: Vec<String> = variant.iter().map(|c| c.label(separator)).collect();
            out.push_str(&format!("{n}\t{}\n", labels.join(",")));
        }
        out
    }
}

pub fn simple_log(log: &StructuredEventLog, cl: &Classifier) -> SimpleEventLog {
    let alphabet = event_classes(log, cl);
    let mut variants: BTreeMap<Vec<EventClass>, usize> = BTreeMap::new();
    for case in log.cases() {
        *variants.entry(simple_trace(cl, case, &alphabet)).or_default() += 1;
    }
    SimpleEventLog { alphabet, variants }
}
