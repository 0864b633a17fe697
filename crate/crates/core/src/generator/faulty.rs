use std::collections::{BTreeMap, VecDeque};

use super::{case_from_inputs, input_for, require_flat, GenError};
use crate::id::Id;
use crate::model::{Input, Provenance, Statechart, TestSuite};
use crate::par;

/// A sneak path: `event` occurring in `state`, where no legal transition
/// handles it.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FaultyPair {
    pub state: Id,
    pub event: Id,
}

/// Every (simple state, declared event) pair without an outgoing transition
/// on that event. Guards are ignored: a guarded transition counts as
/// handling its event.
pub fn derive_faulty_pairs(sc: &Statechart) -> Vec<FaultyPair> {
    let mut out = Vec::new();
    for s in sc.simple_states() {
        for e in sc.events() {
            if !sc.outgoing(s.id.as_str()).any(|t| t.event == *e) {
                out.push(FaultyPair {
                    state: s.id.clone(),
                    event: e.clone(),
                });
            }
        }
    }
    out
}

/// Shortest transition sequence from the initial state to `state`; among
/// equally short ones the lexicographically smallest by transition id.
pub fn start_sequence(sc: &Statechart, state: &str) -> Result<Vec<Id>, GenError> {
    let init = require_flat(sc)?;
    if sc.state(state).is_none() {
        return Err(GenError::UnreachableState(Id::from(state)));
    }
    // BFS in id order discovers every state first along its smallest path
    let mut via: BTreeMap<Id, Option<(Id, Id)>> = BTreeMap::new();
    via.insert(init.clone(), None);
    let mut queue = VecDeque::from([init.clone()]);
    while let Some(s) = queue.pop_front() {
        if s.as_str() == state {
            break;
        }
        for t in sc.outgoing(s.as_str()) {
            if !via.contains_key(&t.target) {
                via.insert(t.target.clone(), Some((s.clone(), t.id.clone())));
                queue.push_back(t.target.clone());
            }
        }
    }
    if !via.contains_key(state) {
        return Err(GenError::UnreachableState(Id::from(state)));
    }
    let mut seq = Vec::new();
    let mut cur = Id::from(state);
    while let Some(Some((prev, t))) = via.get(&cur) {
        seq.push(t.clone());
        cur = prev.clone();
    }
    seq.reverse();
    Ok(seq)
}

fn start_inputs(sc: &Statechart, seq: &[Id]) -> Result<Vec<Input>, GenError> {
    seq.iter()
        .map(|id| {
            let t = sc
                .transition(id.as_str())
                .expect("start sequence uses model transitions");
            input_for(sc, t, true).ok_or_else(|| GenError::UnsatisfiableGuard(id.clone()))
        })
        .collect()
}

/// One test case per faulty pair: the start sequence to its state followed
/// by the unhandled event, which the model is expected to reject.
pub fn generate_ftc_suite(sc: &Statechart) -> Result<TestSuite, GenError> {
    let init = require_flat(sc)?.clone();
    let pairs = derive_faulty_pairs(sc);
    let cases = par::map(&pairs, |p| {
        let seq = start_sequence(sc, p.state.as_str())?;
        let mut inputs = start_inputs(sc, &seq)?;
        inputs.push(Input::new(p.event.clone()));
        let tc = case_from_inputs(sc, &init, inputs)?;
        if !tc.expects_rejection() {
            return Err(GenError::Replay(format!(
                "{} in {} was not rejected",
                p.event, p.state
            )));
        }
        Ok(tc)
    });
    let cases = cases.into_iter().collect::<Result<Vec<_>, _>>()?;
    Ok(TestSuite::canonical(Provenance::Ftc, cases))
}

/// One case per guarded transition: reach its source, then send its event
/// with bindings that make the guard false. Tautological guards are
/// skipped. Case ids use the `gp` prefix.
pub fn guard_probe_suite(sc: &Statechart) -> Result<TestSuite, GenError> {
    let init = require_flat(sc)?.clone();
    let guarded: Vec<_> = sc.transitions().filter(|t| t.guard.is_some()).collect();
    let cases = par::map(&guarded, |t| {
        let Some(probe) = input_for(sc, t, false) else {
            return Ok(None);
        };
        let seq = start_sequence(sc, t.source.as_str())?;
        let mut inputs = start_inputs(sc, &seq)?;
        inputs.push(probe);
        case_from_inputs(sc, &init, inputs).map(Some)
    });
    let mut out = Vec::new();
    for c in cases {
        out.extend(c?);
    }
    let mut suite = TestSuite::canonical(Provenance::Ftc, out).into_cases();
    for (i, c) in suite.iter_mut().enumerate() {
        c.id = Id::from(format!("gp{}", i + 1));
    }
    Ok(TestSuite::new(Provenance::Ftc, suite).expect("fresh ids are unique"))
}
