//! Executes input sequences on a flat statechart.
//!
//! An event that enables no transition in the current state leaves the
//! machine where it is and emits nothing; [`run`] reports it as
//! [`Verdict::RejectedAt`] and stops.

use std::fmt;

use thiserror::Error;

use crate::id::Id;
use crate::model::{Bindings, GuardExpr, Input, StateKind, Statechart, Term, TestCase, Transition};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InterpError {
    #[error("guard variable `{0}` is not bound")]
    UnboundVariable(Id),
    #[error("`{0}` is not a simple state of the model")]
    UnknownState(Id),
    #[error("event `{event}` enables more than one transition in `{state}`: {}", ids(.transitions))]
    NondeterministicModel {
        state: Id,
        event: Id,
        transitions: Vec<Id>,
    },
}

fn ids(v: &[Id]) -> String {
    v.iter().map(Id::as_str).collect::<Vec<_>>().join(", ")
}

pub fn eval_guard(g: &GuardExpr, env: &Bindings) -> Result<bool, InterpError> {
    if let Some(v) = g.variables().into_iter().find(|v| !env.contains_key(v)) {
        return Err(InterpError::UnboundVariable(v));
    }
    Ok(eval(g, env))
}

fn eval(g: &GuardExpr, env: &Bindings) -> bool {
    let term = |t: &Term| match t {
        Term::Var(v) => env[v],
        Term::Int(n) => *n,
    };
    match g {
        GuardExpr::Bool(b) => *b,
        GuardExpr::Truthy(v) => env[v] != 0,
        GuardExpr::Cmp(op, a, b) => op.apply(term(a), term(b)),
        GuardExpr::Not(e) => !eval(e, env),
        GuardExpr::And(a, b) => eval(a, env) && eval(b, env),
        GuardExpr::Or(a, b) => eval(a, env) || eval(b, env),
    }
}

/// Boundary-value search for bindings that make `g` evaluate to `want`.
///
/// Each variable ranges over `c, c-1, c+1` for every constant `c` in the
/// guard (ascending), then `0` and `1`; the first assignment found in that
/// order wins, so results are deterministic.
pub fn find_bindings(g: &GuardExpr, want: bool) -> Option<Bindings> {
    let vars: Vec<Id> = g.variables().into_iter().collect();
    let mut candidates: Vec<i64> = Vec::new();
    for c in g.constants() {
        for v in [Some(c), c.checked_sub(1), c.checked_add(1)]
            .into_iter()
            .flatten()
        {
            if !candidates.contains(&v) {
                candidates.push(v);
            }
        }
    }
    for v in [0, 1] {
        if !candidates.contains(&v) {
            candidates.push(v);
        }
    }
    const LIMIT: usize = 1 << 16;
    let mut idx = vec![0usize; vars.len()];
    for _ in 0..LIMIT {
        let env: Bindings = vars
            .iter()
            .zip(&idx)
            .map(|(v, &i)| (v.clone(), candidates[i]))
            .collect();
        if eval(g, &env) == want {
            return Some(env);
        }
        // odometer increment, last variable fastest
        let mut pos = vars.len();
        loop {
            if pos == 0 {
                return None;
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < candidates.len() {
                break;
            }
            idx[pos] = 0;
        }
    }
    None
}

/// The input that exercises `t` with its guard satisfied, if possible.
pub fn enabling_input(t: &Transition) -> Option<Input> {
    let bindings = match &t.guard {
        Some(g) => find_bindings(g, true)?,
        None => Bindings::new(),
    };
    Some(Input {
        event: t.event.clone(),
        bindings,
    })
}

/// Expected output of firing `t`: its action label, or `out(<id>)`.
pub fn output_token(t: &Transition) -> String {
    match &t.action {
        Some(a) => a.clone(),
        None => format!("out({})", t.id),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Step<'a> {
    Fired {
        transition: &'a Transition,
        next: Id,
    },
    NoEnabledTransition,
}

/// Fires the unique transition enabled by `input` in `current`.
pub fn step<'a>(
    sc: &'a Statechart,
    current: &'a str,
    input: &Input,
) -> Result<Step<'a>, InterpError> {
    if sc.kind(current) != Some(StateKind::Simple) {
        return Err(InterpError::UnknownState(Id::from(current)));
    }
    let mut enabled = Vec::new();
    for t in sc.outgoing(current).filter(|t| t.event == input.event) {
        let ok = match &t.guard {
            Some(g) => eval_guard(g, &input.bindings)?,
            None => true,
        };
        if ok {
            enabled.push(t);
        }
    }
    match enabled.as_slice() {
        [] => Ok(Step::NoEnabledTransition),
        [t] => Ok(Step::Fired {
            transition: t,
            next: t.target.clone(),
        }),
        many => Err(InterpError::NondeterministicModel {
            state: Id::from(current),
            event: input.event.clone(),
            transitions: many.iter().map(|t| t.id.clone()).collect(),
        }),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rejection {
    NoEnabledTransition,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Accepted,
    /// 1-based index of the input that was not accepted.
    RejectedAt {
        step: usize,
        reason: Rejection,
    },
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Accepted => f.write_str("accepted"),
            Verdict::RejectedAt { step, .. } => {
                write!(f, "rejected_at({step}, no_enabled_transition)")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExecTrace {
    pub states: Vec<Id>,
    pub transitions: Vec<Id>,
    pub outputs: Vec<String>,
    pub verdict: Verdict,
}

pub fn run(sc: &Statechart, start: &str, inputs: &[Input]) -> Result<ExecTrace, InterpError> {
    if sc.kind(start) != Some(StateKind::Simple) {
        return Err(InterpError::UnknownState(Id::from(start)));
    }
    let mut trace = ExecTrace {
        states: vec![Id::from(start)],
        transitions: Vec::new(),
        outputs: Vec::new(),
        verdict: Verdict::Accepted,
    };
    for (i, input) in inputs.iter().enumerate() {
        let current = trace.states.last().expect("non-empty").clone();
        match step(sc, current.as_str(), input)? {
            Step::Fired { transition, next } => {
                trace.transitions.push(transition.id.clone());
                trace.outputs.push(output_token(transition));
                trace.states.push(next);
            }
            Step::NoEnabledTransition => {
                trace.verdict = Verdict::RejectedAt {
                    step: i + 1,
                    reason: Rejection::NoEnabledTransition,
                };
                break;
            }
        }
    }
    Ok(trace)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReplayError {
    #[error("test case `{id}`: {source}")]
    Exec { id: Id, source: InterpError },
    #[error("test case `{id}` does not replay: {reason}")]
    Mismatch { id: Id, reason: String },
}

/// Re-executes a test case from its `I` and checks the recorded traces,
/// outputs, completeness flag and expected verdict.
pub fn replay(sc: &Statechart, tc: &TestCase) -> Result<ExecTrace, ReplayError> {
    let mismatch = |reason: String| ReplayError::Mismatch {
        id: tc.id.clone(),
        reason,
    };
    let trace = run(sc, tc.initial.as_str(), &tc.inputs).map_err(|source| ReplayError::Exec {
        id: tc.id.clone(),
        source,
    })?;
    let want = if tc.expects_rejection() {
        Verdict::RejectedAt {
            step: tc.inputs.len(),
            reason: Rejection::NoEnabledTransition,
        }
    } else {
        Verdict::Accepted
    };
    if trace.verdict != want {
        return Err(mismatch(format!("expected {want}, got {}", trace.verdict)));
    }
    if trace.states != tc.states {
        return Err(mismatch("state trace differs".into()));
    }
    if trace.transitions != tc.transitions {
        return Err(mismatch("transition trace differs".into()));
    }
    if trace.outputs != tc.expected_outputs {
        return Err(mismatch("expected outputs differ".into()));
    }
    let complete = sc.initial_state() == tc.states.first()
        && tc.states.last().is_some_and(|s| sc.is_final(s.as_str()));
    if complete != tc.complete {
        return Err(mismatch("completeness flag is wrong".into()));
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::atm;
    use crate::model::{State, Transition};
    use crate::parser::parse_guard;

    fn env(pairs: &[(&str, i64)]) -> Bindings {
        pairs.iter().map(|&(k, v)| (Id::from(k), v)).collect()
    }

    #[test]
    fn guards() {
        let g = parse_guard("n <= 6").unwrap();
        assert!(eval_guard(&g, &env(&[("n", 6)])).unwrap());
        assert!(!eval_guard(&g, &env(&[("n", 7)])).unwrap());
        let g = parse_guard("chng > 0 and chng != 5").unwrap();
        assert!(!eval_guard(&g, &env(&[("chng", 5)])).unwrap());
        assert!(eval_guard(&g, &env(&[("chng", 4)])).unwrap());
        assert_eq!(
            eval_guard(&g, &env(&[])).unwrap_err(),
            InterpError::UnboundVariable("chng".into())
        );
        let g = parse_guard("not flag or false").unwrap();
        assert!(eval_guard(&g, &env(&[("flag", 0)])).unwrap());
        assert!(!eval_guard(&g, &env(&[("flag", 3)])).unwrap());
    }

    #[test]
    fn boundary_bindings() {
        let g = parse_guard("n <= 6").unwrap();
        assert_eq!(find_bindings(&g, true), Some(env(&[("n", 6)])));
        assert_eq!(find_bindings(&g, false), Some(env(&[("n", 7)])));
        let g = parse_guard("chng > 0").unwrap();
        assert_eq!(find_bindings(&g, true), Some(env(&[("chng", 1)])));
        assert_eq!(find_bindings(&g, false), Some(env(&[("chng", 0)])));
        let g = parse_guard("a < b and b < 3").unwrap();
        let b = find_bindings(&g, true).unwrap();
        assert!(eval_guard(&g, &b).unwrap());
        assert_eq!(find_bindings(&parse_guard("true").unwrap(), false), None);
        assert_eq!(
            find_bindings(&parse_guard("x < 1 and x > 1").unwrap(), true),
            None
        );
    }

    #[test]
    fn steps_on_atm() {
        let sc = atm();
        match step(&sc, "St5", &Input::new("e5").bind("chng", 0)).unwrap() {
            Step::Fired { transition, next } => {
                assert_eq!(transition.id.as_str(), "TR5");
                assert_eq!(next.as_str(), "St6");
            }
            s => panic!("unexpected {s:?}"),
        }
        assert_eq!(
            step(&sc, "St1", &Input::new("e3")).unwrap(),
            Step::NoEnabledTransition
        );
        assert_eq!(
            step(&sc, "St5", &Input::new("e5").bind("chng", 2)).unwrap(),
            Step::NoEnabledTransition
        );
        assert_eq!(
            step(&sc, "St5", &Input::new("e5")).unwrap_err(),
            InterpError::UnboundVariable("chng".into())
        );
        assert_eq!(
            step(&sc, "Nope", &Input::new("e1")).unwrap_err(),
            InterpError::UnknownState("Nope".into())
        );
    }

    #[test]
    fn nondeterminism_detected() {
        let sc = Statechart::builder("M")
            .event("e")
            .var("x")
            .state(State::new("A").initial())
            .state(State::new("B").final_state())
            .transition(
                Transition::new("t1", "A", "B", "e").with_guard(parse_guard("x > 0").unwrap()),
            )
            .transition(
                Transition::new("t2", "A", "A", "e").with_guard(parse_guard("x < 5").unwrap()),
            )
            .build()
            .unwrap();
        assert_eq!(
            step(&sc, "A", &Input::new("e").bind("x", 3)).unwrap_err(),
            InterpError::NondeterministicModel {
                state: "A".into(),
                event: "e".into(),
                transitions: vec!["t1".into(), "t2".into()],
            }
        );
        assert!(matches!(
            step(&sc, "A", &Input::new("e").bind("x", 7)).unwrap(),
            Step::Fired { .. }
        ));
    }

    #[test]
    fn runs_on_atm() {
        let sc = atm();
        let inputs: Vec<Input> = ["TR1", "TR2", "TR3", "TR4", "TR5"]
            .iter()
            .map(|t| enabling_input(sc.transition(t).unwrap()).unwrap())
            .collect();
        let tr = run(&sc, "St1", &inputs).unwrap();
        let states: Vec<&str> = tr.states.iter().map(Id::as_str).collect();
        assert_eq!(states, ["St1", "St2", "St3", "St4", "St5", "St6"]);
        assert_eq!(tr.verdict, Verdict::Accepted);
        assert_eq!(
            tr.outputs,
            [
                "show_fares",
                "show_amount",
                "compute_change",
                "out(TR4)",
                "issue_ticket"
            ]
        );

        let tr = run(&sc, "St1", &[]).unwrap();
        assert_eq!(tr.states, vec![Id::from("St1")]);
        assert_eq!(tr.verdict, Verdict::Accepted);

        let tr = run(&sc, "St1", &[Input::new("e7")]).unwrap();
        assert_eq!(
            tr.verdict,
            Verdict::RejectedAt {
                step: 1,
                reason: Rejection::NoEnabledTransition
            }
        );
        assert_eq!(
            tr.verdict.to_string(),
            "rejected_at(1, no_enabled_transition)"
        );
        assert_eq!(tr.states.len(), 1);
    }
}
