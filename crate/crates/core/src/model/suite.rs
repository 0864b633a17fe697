use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::id::Id;

/// Integer variable bindings carried by an input event.
pub type Bindings = BTreeMap<Id, i64>;

/// One input of a test case: an event occurrence plus the data it carries.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Input {
    pub event: Id,
    #[serde(default)]
    pub bindings: Bindings,
}

impl Input {
    pub fn new(event: impl Into<Id>) -> Self {
        Input {
            event: event.into(),
            bindings: Bindings::new(),
        }
    }

    pub fn bind(mut self, var: impl Into<Id>, value: i64) -> Self {
        self.bindings.insert(var.into(), value);
        self
    }
}

/// `e2` or `e2(n=6)`.
impl fmt::Display for Input {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.event)?;
        if !self.bindings.is_empty() {
            let parts: Vec<String> = self
                .bindings
                .iter()
                .map(|(k, v)| format!("{k}={v}"))
                .collect();
            write!(f, "({})", parts.join(","))?;
        }
        Ok(())
    }
}

/// A test case `[I, S, O]` together with the state and transition trace it
/// is expected to exercise.
///
/// `inputs` is one longer than `transitions` for a sneak-path probe, whose
/// last input is expected to find no enabled transition.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestCase {
    pub id: Id,
    #[serde(rename = "I")]
    pub initial: Id,
    pub inputs: Vec<Input>,
    pub expected_outputs: Vec<String>,
    pub states: Vec<Id>,
    pub transitions: Vec<Id>,
    pub complete: bool,
}

impl TestCase {
    pub fn state_set(&self) -> BTreeSet<&Id> {
        self.states.iter().collect()
    }

    pub fn transition_set(&self) -> BTreeSet<&Id> {
        self.transitions.iter().collect()
    }

    /// True when the last input is expected to be rejected.
    pub fn expects_rejection(&self) -> bool {
        self.inputs.len() == self.transitions.len() + 1
    }

    /// Checks the trace shape invariants that do not need the model.
    pub fn check_shape(&self) -> Result<(), SuiteError> {
        let bad = |why: &str| {
            Err(SuiteError::MalformedCase {
                id: self.id.clone(),
                reason: why.to_owned(),
            })
        };
        if self.states.len() != self.transitions.len() + 1 {
            return bad("state trace must be one longer than the transition trace");
        }
        if self.states.first() != Some(&self.initial) {
            return bad("state trace must start at I");
        }
        if self.inputs.len() != self.transitions.len() && !self.expects_rejection() {
            return bad("inputs must match transitions, plus at most one rejected input");
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Enumerated,
    Ktc,
    Ftc,
    Minimized,
    /// Suite read from a file that carries no provenance tag.
    External,
}

impl Provenance {
    pub fn id_prefix(self) -> &'static str {
        match self {
            Provenance::Enumerated | Provenance::Minimized | Provenance::External => "tc",
            Provenance::Ktc => "ktc",
            Provenance::Ftc => "ftc",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SuiteError {
    #[error("duplicate test case id `{0}`")]
    DuplicateId(Id),
    #[error("test case `{id}` is malformed: {reason}")]
    MalformedCase { id: Id, reason: String },
    #[error("invalid suite JSON: {0}")]
    Json(String),
}

/// An ordered list of test cases with unique ids.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TestSuite {
    provenance: Provenance,
    cases: Vec<TestCase>,
}

impl TestSuite {
    pub fn new(provenance: Provenance, cases: Vec<TestCase>) -> Result<Self, SuiteError> {
        let mut seen = BTreeSet::new();
        for c in &cases {
            if !seen.insert(&c.id) {
                return Err(SuiteError::DuplicateId(c.id.clone()));
            }
        }
        Ok(TestSuite { provenance, cases })
    }

    /// Sorts cases by (I, transition trace, inputs), drops exact duplicates
    /// and numbers them `<prefix>1..` in that order.
    pub fn canonical(provenance: Provenance, mut cases: Vec<TestCase>) -> Self {
        cases.sort_by(|a, b| {
            (&a.initial, &a.transitions, &a.inputs).cmp(&(&b.initial, &b.transitions, &b.inputs))
        });
        cases.dedup_by(|a, b| {
            a.initial == b.initial && a.transitions == b.transitions && a.inputs == b.inputs
        });
        let prefix = provenance.id_prefix();
        for (i, c) in cases.iter_mut().enumerate() {
            c.id = Id::from(format!("{prefix}{}", i + 1));
        }
        TestSuite { provenance, cases }
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn cases(&self) -> &[TestCase] {
        &self.cases
    }

    pub fn into_cases(self) -> Vec<TestCase> {
        self.cases
    }

    pub fn len(&self) -> usize {
        self.cases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cases.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&TestCase> {
        self.cases.iter().find(|c| c.id.as_str() == id)
    }

    pub fn ids(&self) -> impl Iterator<Item = &Id> {
        self.cases.iter().map(|c| &c.id)
    }

    /// Cases whose ids satisfy `keep`, order preserved.
    pub fn retain_ids(&self, provenance: Provenance, keep: impl Fn(&Id) -> bool) -> Self {
        TestSuite {
            provenance,
            cases: self.cases.iter().filter(|c| keep(&c.id)).cloned().collect(),
        }
    }
}
