//! Statechart domain model: states, transitions, hierarchy, validation and
//! flattening of composite states into a flat machine over simple states.

mod flatten;
pub mod guard;
mod suite;
mod validate;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::id::Id;
pub use guard::{CmpOp, GuardExpr, Term};
pub use suite::{Bindings, Input, Provenance, SuiteError, TestCase, TestSuite};
pub use validate::Violation;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StateKind {
    Simple,
    Composite,
}

/// A state declaration. Whether it is simple or composite follows from the
/// hierarchy: a state with children is composite.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct State {
    pub id: Id,
    pub parent: Option<Id>,
    pub initial: bool,
    pub is_final: bool,
    /// Default entry child of its parent composite.
    pub entry: bool,
}

impl State {
    pub fn new(id: impl Into<Id>) -> Self {
        State {
            id: id.into(),
            parent: None,
            initial: false,
            is_final: false,
            entry: false,
        }
    }

    pub fn initial(mut self) -> Self {
        self.initial = true;
        self
    }

    pub fn final_state(mut self) -> Self {
        self.is_final = true;
        self
    }

    pub fn within(mut self, parent: impl Into<Id>) -> Self {
        self.parent = Some(parent.into());
        self
    }

    pub fn entry(mut self) -> Self {
        self.entry = true;
        self
    }
}

/// A legal transition `source --event [guard] / action--> target`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transition {
    pub id: Id,
    pub source: Id,
    pub target: Id,
    pub event: Id,
    pub guard: Option<GuardExpr>,
    pub action: Option<String>,
}

impl Transition {
    pub fn new(
        id: impl Into<Id>,
        source: impl Into<Id>,
        target: impl Into<Id>,
        event: impl Into<Id>,
    ) -> Self {
        Transition {
            id: id.into(),
            source: source.into(),
            target: target.into(),
            event: event.into(),
            guard: None,
            action: None,
        }
    }

    pub fn with_guard(mut self, guard: GuardExpr) -> Self {
        self.guard = Some(guard);
        self
    }

    pub fn with_action(mut self, action: impl Into<String>) -> Self {
        self.action = Some(action.into());
        self
    }

    /// Label in `event [guard] / action` form.
    pub fn label(&self) -> String {
        let mut s = self.event.to_string();
        if let Some(g) = &self.guard {
            s.push_str(&format!(" [{g}]"));
        }
        if let Some(a) = &self.action {
            s.push_str(&format!(" / {a}"));
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("duplicate state `{0}`")]
    DuplicateState(Id),
    #[error("duplicate transition `{0}`")]
    DuplicateTransition(Id),
    #[error("duplicate event `{0}`")]
    DuplicateEvent(Id),
    #[error("duplicate variable `{0}`")]
    DuplicateVariable(Id),
    #[error("`{0}` is not a valid identifier")]
    InvalidIdentifier(String),
    #[error("unknown state `{0}`")]
    UnknownState(Id),
    #[error("transition `{transition}` references unknown state `{state}`")]
    UnknownTransitionState { transition: Id, state: Id },
    #[error("transition `{transition}` is triggered by undeclared event `{event}`")]
    UnknownEvent { transition: Id, event: Id },
    #[error("guard of transition `{transition}` uses undeclared variable `{var}`")]
    UnknownVariable { transition: Id, var: Id },
    #[error("state `{state}` has unknown parent `{parent}`")]
    UnknownParent { state: Id, parent: Id },
    #[error("composite state `{0}` has more than one entry child (orthogonal regions are not supported)")]
    OrthogonalRegionUnsupported(Id),
    #[error("model is not well-formed: {}", join_violations(.0))]
    Invalid(Vec<Violation>),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

/// A statechart. All ids referenced by transitions and the hierarchy are
/// guaranteed to be declared; deeper well-formedness is checked by
/// [`Statechart::validate`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Statechart {
    name: Id,
    events: BTreeSet<Id>,
    vars: BTreeSet<Id>,
    states: BTreeMap<Id, State>,
    transitions: BTreeMap<Id, Transition>,
}

impl Statechart {
    pub fn builder(name: impl Into<Id>) -> StatechartBuilder {
        StatechartBuilder {
            name: name.into(),
            events: Vec::new(),
            vars: Vec::new(),
            states: Vec::new(),
            transitions: Vec::new(),
        }
    }

    pub fn name(&self) -> &Id {
        &self.name
    }

    pub fn events(&self) -> &BTreeSet<Id> {
        &self.events
    }

    pub fn vars(&self) -> &BTreeSet<Id> {
        &self.vars
    }

    pub fn states(&self) -> impl Iterator<Item = &State> {
        self.states.values()
    }

    pub fn state(&self, id: &str) -> Option<&State> {
        self.states.get(id)
    }

    pub fn transitions(&self) -> impl Iterator<Item = &Transition> {
        self.transitions.values()
    }

    pub fn transition(&self, id: &str) -> Option<&Transition> {
        self.transitions.get(id)
    }

    pub fn transition_count(&self) -> usize {
        self.transitions.len()
    }

    pub fn children(&self, id: &str) -> impl Iterator<Item = &State> + '_ {
        let id = id.to_owned();
        self.states
            .values()
            .filter(move |s| s.parent.as_ref().is_some_and(|p| p.as_str() == id))
    }

    pub fn kind(&self, id: &str) -> Option<StateKind> {
        self.states.get(id)?;
        Some(if self.children(id).next().is_some() {
            StateKind::Composite
        } else {
            StateKind::Simple
        })
    }

    pub fn is_flat(&self) -> bool {
        self.states.values().all(|s| s.parent.is_none())
    }

    pub fn simple_states(&self) -> impl Iterator<Item = &State> {
        self.states
            .values()
            .filter(|s| self.kind(s.id.as_str()) == Some(StateKind::Simple))
    }

    pub fn initial_states(&self) -> impl Iterator<Item = &State> {
        self.states.values().filter(|s| s.initial)
    }

    pub fn final_states(&self) -> impl Iterator<Item = &State> {
        self.states.values().filter(|s| s.is_final)
    }

    /// The unique initial state, when there is exactly one.
    pub fn initial_state(&self) -> Option<&Id> {
        let mut it = self.initial_states();
        match (it.next(), it.next()) {
            (Some(s), None) => Some(&s.id),
            _ => None,
        }
    }

    pub fn is_final(&self, id: &str) -> bool {
        self.states.get(id).is_some_and(|s| s.is_final)
    }

    /// Transitions entering `state`, sorted by id.
    pub fn in_set(&self, state: &str) -> Result<Vec<&Transition>, ModelError> {
        self.require_simple(state)?;
        Ok(self
            .transitions
            .values()
            .filter(|t| t.target.as_str() == state)
            .collect())
    }

    /// Transitions leaving `state`, sorted by id.
    pub fn out_set<'a>(&'a self, state: &'a str) -> Result<Vec<&'a Transition>, ModelError> {
        self.require_simple(state)?;
        Ok(self.outgoing(state).collect())
    }

    /// Unchecked variant of [`Statechart::out_set`].
    pub fn outgoing<'a>(&'a self, state: &'a str) -> impl Iterator<Item = &'a Transition> + 'a {
        self.transitions
            .values()
            .filter(move |t| t.source.as_str() == state)
    }

    fn require_simple(&self, state: &str) -> Result<(), ModelError> {
        match self.kind(state) {
            Some(StateKind::Simple) => Ok(()),
            _ => Err(ModelError::UnknownState(Id::from(state))),
        }
    }

    /// Action labels declared on transitions.
    pub fn actions(&self) -> BTreeSet<&str> {
        self.transitions
            .values()
            .filter_map(|t| t.action.as_deref())
            .collect()
    }

    pub fn validate(&self) -> Vec<Violation> {
        validate::validate(self)
    }

    pub fn flatten(&self) -> Result<Statechart, ModelError> {
        flatten::flatten(self)
    }
}

impl fmt::Display for Statechart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::parser::serialize_statechart(self))
    }
}

pub struct StatechartBuilder {
    name: Id,
    events: Vec<Id>,
    vars: Vec<Id>,
    states: Vec<State>,
    transitions: Vec<Transition>,
}

impl StatechartBuilder {
    pub fn event(mut self, e: impl Into<Id>) -> Self {
        self.events.push(e.into());
        self
    }

    pub fn events<I, S>(mut self, es: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<Id>,
    {
        self.events.extend(es.into_iter().map(Into::into));
        self
    }

    pub fn var(mut self, v: impl Into<Id>) -> Self {
        self.vars.push(v.into());
        self
    }

    pub fn state(mut self, s: State) -> Self {
        self.states.push(s);
        self
    }

    pub fn transition(mut self, t: Transition) -> Self {
        self.transitions.push(t);
        self
    }

    pub fn build(self) -> Result<Statechart, ModelError> {
        let check = |id: &Id| {
            if Id::is_valid(id.as_str()) {
                Ok(())
            } else {
                Err(ModelError::InvalidIdentifier(id.to_string()))
            }
        };
        check(&self.name)?;

        let mut events = BTreeSet::new();
        for e in self.events {
            check(&e)?;
            if !events.insert(e.clone()) {
                return Err(ModelError::DuplicateEvent(e));
            }
        }
        let mut vars = BTreeSet::new();
        for v in self.vars {
            check(&v)?;
            if crate::parser::GUARD_KEYWORDS.contains(&v.as_str()) {
                return Err(ModelError::InvalidIdentifier(v.to_string()));
            }
            if !vars.insert(v.clone()) {
                return Err(ModelError::DuplicateVariable(v));
            }
        }
        let mut states = BTreeMap::new();
        for s in self.states {
            check(&s.id)?;
            if states.contains_key(&s.id) {
                return Err(ModelError::DuplicateState(s.id));
            }
            states.insert(s.id.clone(), s);
        }
        for s in states.values() {
            if let Some(p) = &s.parent {
                if !states.contains_key(p) {
                    return Err(ModelError::UnknownParent {
                        state: s.id.clone(),
                        parent: p.clone(),
                    });
                }
            }
        }
        let mut transitions = BTreeMap::new();
        for t in self.transitions {
            check(&t.id)?;
            if let Some(a) = &t.action {
                if !crate::parser::is_label(a) {
                    return Err(ModelError::InvalidIdentifier(a.clone()));
                }
            }
            for st in [&t.source, &t.target] {
                if !states.contains_key(st) {
                    return Err(ModelError::UnknownTransitionState {
                        transition: t.id.clone(),
                        state: st.clone(),
                    });
                }
            }
            if !events.contains(&t.event) {
                return Err(ModelError::UnknownEvent {
                    transition: t.id.clone(),
                    event: t.event.clone(),
                });
            }
            if let Some(g) = &t.guard {
                if let Some(var) = g.variables().into_iter().find(|v| !vars.contains(v)) {
                    return Err(ModelError::UnknownVariable {
                        transition: t.id.clone(),
                        var,
                    });
                }
            }
            if transitions.contains_key(&t.id) {
                return Err(ModelError::DuplicateTransition(t.id));
            }
            transitions.insert(t.id.clone(), t);
        }
        Ok(Statechart {
            name: self.name,
            events,
            vars,
            states,
            transitions,
        })
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    /// The automated ticket machine: St1 idle .. St7 return money, with
    /// St6 the terminal state.
    pub fn atm() -> Statechart {
        let le = |v: &str, n| GuardExpr::cmp(CmpOp::Le, Term::Var(v.into()), Term::Int(n));
        let ge = |v: &str, n| GuardExpr::cmp(CmpOp::Ge, Term::Var(v.into()), Term::Int(n));
        let eq = |v: &str, n| GuardExpr::cmp(CmpOp::Eq, Term::Var(v.into()), Term::Int(n));
        let gt = |v: &str, n| GuardExpr::cmp(CmpOp::Gt, Term::Var(v.into()), Term::Int(n));
        Statechart::builder("ATM")
            .events((1..=7).map(|i| format!("e{i}")))
            .var("n")
            .var("chng")
            .state(State::new("St1").initial())
            .state(State::new("St2"))
            .state(State::new("St3"))
            .state(State::new("St4"))
            .state(State::new("St5"))
            .state(State::new("St6").final_state())
            .state(State::new("St7"))
            .transition(Transition::new("TR1", "St1", "St2", "e1").with_action("show_fares"))
            .transition(
                Transition::new("TR2", "St2", "St3", "e2")
                    .with_guard(le("n", 6))
                    .with_action("show_amount"),
            )
            .transition(Transition::new("TR3", "St3", "St4", "e3").with_action("compute_change"))
            .transition(Transition::new("TR4", "St4", "St5", "e4").with_guard(ge("chng", 0)))
            .transition(
                Transition::new("TR5", "St5", "St6", "e5")
                    .with_guard(eq("chng", 0))
                    .with_action("issue_ticket"),
            )
            .transition(
                Transition::new("TR6", "St5", "St7", "e6")
                    .with_guard(gt("chng", 0))
                    .with_action("issue_ticket"),
            )
            .transition(Transition::new("TR7", "St7", "St6", "e7").with_action("return_change"))
            .build()
            .unwrap()
    }
}
