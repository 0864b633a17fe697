//! Test suite generation: exhaustive sequence enumeration, k-transition
//! coverage through covering walks of the sequence graphs, and sneak-path
//! (faulty transition) probes.

mod faulty;
mod gtsp;

use std::sync::atomic::{AtomicUsize, Ordering};

use thiserror::Error;

pub use faulty::{
    derive_faulty_pairs, generate_ftc_suite, guard_probe_suite, start_sequence, FaultyPair,
};
pub use gtsp::{solve_gtsp, CoveringWalk, EXACT_VERTEX_LIMIT};

use crate::id::Id;
use crate::interpreter::{self, find_bindings, InterpError, Verdict};
use crate::model::{GuardExpr, Input, Provenance, Statechart, TestCase, TestSuite, Transition};
use crate::par;
use crate::tgraph::{build_transition_graph, GraphError, Vertex};

/// Default upper bound on the number of generated test cases.
pub const DEFAULT_CAP: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenError {
    #[error("model must be flattened first")]
    NotFlat,
    #[error("model has no unique initial state")]
    NoInitialState,
    #[error("suite would exceed the cap of {cap} test cases")]
    SuiteTooLarge { cap: usize },
    #[error("maximum sequence length must be at least 1")]
    InvalidLength,
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("graph is not strongly connected")]
    NotStronglyConnected,
    #[error("graph lacks its entry/exit sentinels")]
    MissingSentinels,
    #[error("state `{0}` is unreachable from the initial state")]
    UnreachableState(Id),
    #[error("no bindings enable transition `{0}` deterministically")]
    UnsatisfiableGuard(Id),
    #[error(transparent)]
    Interp(#[from] InterpError),
    #[error("generated inputs do not replay on the model: {0}")]
    Replay(String),
}

pub(crate) fn require_flat(sc: &Statechart) -> Result<&Id, GenError> {
    if !sc.is_flat() {
        return Err(GenError::NotFlat);
    }
    sc.initial_state().ok_or(GenError::NoInitialState)
}

/// Input that fires `t` (guard true) while every other transition on the
/// same event from the same state stays disabled. With `enabled = false`
/// the guard of `t` is made false instead, and siblings are kept disabled
/// where possible.
pub(crate) fn input_for(sc: &Statechart, t: &Transition, enabled: bool) -> Option<Input> {
    let siblings: Vec<&Transition> = sc
        .outgoing(t.source.as_str())
        .filter(|o| o.event == t.event && o.id != t.id)
        .collect();
    let own = t.guard.clone().unwrap_or(GuardExpr::Bool(true));
    let own = if enabled { own } else { GuardExpr::negate(own) };
    let all_off = siblings.iter().fold(own.clone(), |acc, s| {
        let g = s.guard.clone().unwrap_or(GuardExpr::Bool(true));
        GuardExpr::and(acc, GuardExpr::negate(g))
    });
    let mut bindings = match find_bindings(&all_off, true) {
        Some(b) => b,
        None if !enabled => find_bindings(&own, true)?,
        None => return None,
    };
    // siblings may mention variables the chosen formula did not
    for s in &siblings {
        if let Some(g) = &s.guard {
            for v in g.variables() {
                bindings.entry(v).or_insert(0);
            }
        }
    }
    Some(Input {
        event: t.event.clone(),
        bindings,
    })
}

/// Executes `inputs` from `start` and records the observed behaviour as a
/// test case. A rejection is only allowed at the last input.
pub(crate) fn case_from_inputs(
    sc: &Statechart,
    start: &Id,
    inputs: Vec<Input>,
) -> Result<TestCase, GenError> {
    let trace = interpreter::run(sc, start.as_str(), &inputs)?;
    if let Verdict::RejectedAt { step, .. } = trace.verdict {
        if step != inputs.len() {
            return Err(GenError::Replay(format!(
                "rejected at step {step} of {}",
                inputs.len()
            )));
        }
    }
    let complete = sc.initial_state() == Some(start)
        && trace.states.last().is_some_and(|s| sc.is_final(s.as_str()));
    Ok(TestCase {
        id: Id::from("pending"),
        initial: start.clone(),
        inputs,
        expected_outputs: trace.outputs,
        states: trace.states,
        transitions: trace.transitions,
        complete,
    })
}

/// Test case exercising exactly the legal transition sequence `seq`.
pub fn case_from_sequence(sc: &Statechart, seq: &[Id]) -> Result<TestCase, GenError> {
    let first = seq.first().ok_or(GenError::InvalidLength)?;
    let start = sc
        .transition(first.as_str())
        .ok_or_else(|| GenError::Replay(format!("unknown transition `{first}`")))?
        .source
        .clone();
    let mut inputs = Vec::with_capacity(seq.len());
    for id in seq {
        let t = sc
            .transition(id.as_str())
            .ok_or_else(|| GenError::Replay(format!("unknown transition `{id}`")))?;
        inputs.push(
            input_for(sc, t, true).ok_or_else(|| GenError::UnsatisfiableGuard(t.id.clone()))?,
        );
    }
    let tc = case_from_inputs(sc, &start, inputs)?;
    if tc.transitions != seq || tc.expects_rejection() {
        return Err(GenError::Replay(format!(
            "sequence {seq:?} is not executable"
        )));
    }
    Ok(tc)
}

/// Every legal transition sequence (walk) of length `1..=max_len` from every
/// state, as test cases numbered `tc1..` in canonical order.
pub fn enumerate_sequences(
    sc: &Statechart,
    max_len: usize,
    cap: usize,
) -> Result<TestSuite, GenError> {
    require_flat(sc)?;
    if max_len == 0 {
        return Err(GenError::InvalidLength);
    }
    let seqs = enumerate_walks(sc, max_len, cap)?;
    let cases = par::map(&seqs, |s| case_from_sequence(sc, s));
    let cases = cases.into_iter().collect::<Result<Vec<_>, _>>()?;
    Ok(TestSuite::canonical(Provenance::Enumerated, cases))
}

/// Raw walk enumeration shared with the metrics path universe.
pub(crate) fn enumerate_walks(
    sc: &Statechart,
    max_len: usize,
    cap: usize,
) -> Result<Vec<Vec<Id>>, GenError> {
    let starts: Vec<&Transition> = sc.transitions().collect();
    let count = AtomicUsize::new(0);
    let parts = par::map(&starts, |t| {
        let mut out = Vec::new();
        let mut path = vec![t.id.clone()];
        extend(sc, &mut path, t, max_len, cap, &count, &mut out).map(|_| out)
    });
    let mut all = Vec::new();
    for p in parts {
        all.extend(p?);
    }
    Ok(all)
}

fn extend(
    sc: &Statechart,
    path: &mut Vec<Id>,
    last: &Transition,
    max_len: usize,
    cap: usize,
    count: &AtomicUsize,
    out: &mut Vec<Vec<Id>>,
) -> Result<(), GenError> {
    if count.fetch_add(1, Ordering::Relaxed) >= cap {
        return Err(GenError::SuiteTooLarge { cap });
    }
    out.push(path.clone());
    if path.len() == max_len {
        return Ok(());
    }
    for next in sc.outgoing(last.target.as_str()) {
        path.push(next.id.clone());
        extend(sc, path, next, max_len, cap, count, out)?;
        path.pop();
    }
    Ok(())
}

/// Complete test cases that contain every legal sequence of length `<= k`
/// occurring in some complete sequence.
///
/// The order-`k` sequence graph is augmented with `tf -> ti` and covered by a
/// [`solve_gtsp`] walk, which is cut at each return edge. Complete sequences
/// shorter than `k` that extend in neither direction are added directly.
pub fn generate_ktc_suite(sc: &Statechart, k: usize) -> Result<TestSuite, GenError> {
    require_flat(sc)?;
    if k == 0 {
        return Err(GraphError::InvalidOrder.into());
    }
    let base = build_transition_graph(sc)?;
    let levels = base.levels(k);
    let mut seqs: Vec<Vec<Id>> = levels[..k - 1]
        .iter()
        .flat_map(|g| g.unexpandable_short_sequences())
        .collect();

    let top = &levels[k - 1];
    if top.sequence_count() == 0 {
        return Err(GraphError::EmptyGraph(k).into());
    }
    let walk = solve_gtsp(&top.augment())?;
    seqs.extend(walk.complete_sequences());

    let cases = par::map(&seqs, |s| case_from_sequence(sc, s));
    let cases = cases.into_iter().collect::<Result<Vec<_>, _>>()?;
    Ok(TestSuite::canonical(Provenance::Ktc, cases))
}

impl CoveringWalk {
    /// Splits the walk at every `tf -> ti` step and flattens each segment of
    /// sequence vertices back into one transition sequence.
    pub fn complete_sequences(&self) -> Vec<Vec<Id>> {
        let mut out = Vec::new();
        let mut cur: Option<Vec<Id>> = None;
        for v in &self.vertices {
            match v {
                Vertex::Entry => cur = Some(Vec::new()),
                Vertex::Seq(s) => {
                    if let Some(c) = cur.as_mut() {
                        if c.is_empty() {
                            c.extend(s.iter().cloned());
                        } else {
                            c.extend(s.last().cloned());
                        }
                    }
                }
                Vertex::Exit => {
                    if let Some(c) = cur.take() {
                        if !c.is_empty() {
                            out.push(c);
                        }
                    }
                }
            }
        }
        out
    }
}
