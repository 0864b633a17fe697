use std::collections::BTreeSet;

use super::validate::{structural, Violation};
use super::{ModelError, State, StateKind, Statechart, Transition};
use crate::id::Id;

/// Replaces composite states by their simple descendants.
///
/// * A transition leaving composite `C` is copied onto every simple
///   descendant of `C`, except descendants where a state strictly inside `C`
///   on the way up already handles the same event (inner transitions win).
///   Copies are named `<transition>_<leaf>`.
/// * A transition entering `C` is redirected to `C`'s default entry leaf.
/// * The initial leaf is the entry leaf of the initial state; a leaf is final
///   if it or any ancestor is final.
pub(super) fn flatten(sc: &Statechart) -> Result<Statechart, ModelError> {
    let problems = structural(sc);
    if let Some(Violation::OrthogonalRegions(c)) = problems
        .iter()
        .find(|v| matches!(v, Violation::OrthogonalRegions(_)))
    {
        return Err(ModelError::OrthogonalRegionUnsupported(c.clone()));
    }
    if problems.iter().any(|v| {
        matches!(
            v,
            Violation::HierarchyCycle(_) | Violation::CompositeWithoutEntry(_)
        )
    }) {
        return Err(ModelError::Invalid(problems));
    }
    if sc.is_flat() {
        return Ok(sc.clone());
    }

    let leaves: Vec<&State> = sc.simple_states().collect();
    let mut used: BTreeSet<Id> = sc.transitions().map(|t| t.id.clone()).collect();

    let mut builder = Statechart::builder(sc.name().clone()).events(sc.events().iter().cloned());
    for v in sc.vars() {
        builder = builder.var(v.clone());
    }

    let initial_leaf = sc.initial_state().map(|s| entry_leaf(sc, s));
    for leaf in &leaves {
        let mut st = State::new(leaf.id.clone());
        st.initial = initial_leaf.as_ref() == Some(&leaf.id);
        st.is_final = ancestors_inclusive(sc, &leaf.id).any(|a| sc.is_final(a.as_str()));
        builder = builder.state(st);
    }

    for t in sc.transitions() {
        let target = entry_leaf(sc, &t.target);
        if sc.kind(t.source.as_str()) == Some(StateKind::Simple) {
            let mut copy = t.clone();
            copy.target = target;
            builder = builder.transition(copy);
            continue;
        }
        for leaf in &leaves {
            if !is_descendant(sc, &leaf.id, &t.source) || overridden(sc, &leaf.id, t) {
                continue;
            }
            let mut id = format!("{}_{}", t.id, leaf.id);
            while used.contains(id.as_str()) {
                id.push('_');
            }
            used.insert(Id::from(id.as_str()));
            builder = builder.transition(Transition {
                id: Id::from(id),
                source: leaf.id.clone(),
                target: target.clone(),
                event: t.event.clone(),
                guard: t.guard.clone(),
                action: t.action.clone(),
            });
        }
    }
    builder.build()
}

fn entry_leaf(sc: &Statechart, id: &Id) -> Id {
    let mut cur = id.clone();
    loop {
        let next = sc
            .children(cur.as_str())
            .find(|c| c.entry)
            .map(|c| c.id.clone());
        match next {
            Some(child) => cur = child,
            None => return cur,
        }
    }
}

fn ancestors_inclusive<'a>(sc: &'a Statechart, id: &Id) -> impl Iterator<Item = Id> + 'a {
    let mut cur = Some(id.clone());
    std::iter::from_fn(move || {
        let this = cur.take()?;
        cur = sc.state(this.as_str()).and_then(|s| s.parent.clone());
        Some(this)
    })
}

fn is_descendant(sc: &Statechart, leaf: &Id, ancestor: &Id) -> bool {
    ancestors_inclusive(sc, leaf)
        .skip(1)
        .any(|a| a == *ancestor)
}

fn overridden(sc: &Statechart, leaf: &Id, t: &Transition) -> bool {
    ancestors_inclusive(sc, leaf)
        .take_while(|a| *a != t.source)
        .any(|a| sc.outgoing(a.as_str()).any(|o| o.event == t.event))
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::atm;
    use super::*;

    #[test]
    fn flat_model_is_unchanged() {
        let sc = atm();
        assert_eq!(sc.flatten().unwrap(), sc);
    }

    #[test]
    fn composite_source_is_copied_to_children() {
        let sc = Statechart::builder("M")
            .events(["e", "f"])
            .state(State::new("C").initial())
            .state(State::new("A").within("C").entry())
            .state(State::new("B").within("C"))
            .state(State::new("X").final_state())
            .transition(Transition::new("t0", "A", "B", "f"))
            .transition(Transition::new("t1", "C", "X", "e"))
            .build()
            .unwrap();
        let flat = sc.flatten().unwrap();
        let got: Vec<(String, String, String, String)> = flat
            .transitions()
            .map(|t| {
                (
                    t.id.to_string(),
                    t.source.to_string(),
                    t.target.to_string(),
                    t.event.to_string(),
                )
            })
            .collect();
        let want = [
            ("t0", "A", "B", "f"),
            ("t1_A", "A", "X", "e"),
            ("t1_B", "B", "X", "e"),
        ];
        let want: Vec<_> = want
            .iter()
            .map(|(a, b, c, d)| (a.to_string(), b.to_string(), c.to_string(), d.to_string()))
            .collect();
        assert_eq!(got, want);
        assert_eq!(flat.initial_state().unwrap().as_str(), "A");
        assert!(flat.is_flat());
        assert_eq!(flat.validate(), vec![]);
    }

    #[test]
    fn inner_transition_takes_priority() {
        let sc = Statechart::builder("M")
            .event("e")
            .state(State::new("C").initial())
            .state(State::new("A").within("C").entry())
            .state(State::new("B").within("C"))
            .state(State::new("X").final_state())
            .transition(Transition::new("inner", "A", "B", "e"))
            .transition(Transition::new("outer", "C", "X", "e"))
            .build()
            .unwrap();
        let flat = sc.flatten().unwrap();
        let ids: Vec<&str> = flat.transitions().map(|t| t.id.as_str()).collect();
        assert_eq!(ids, ["inner", "outer_B"]);
    }

    #[test]
    fn orthogonal_regions_rejected() {
        let sc = Statechart::builder("M")
            .state(State::new("C").initial().final_state())
            .state(State::new("A").within("C").entry())
            .state(State::new("B").within("C").entry())
            .build()
            .unwrap();
        assert_eq!(
            sc.flatten().unwrap_err(),
            ModelError::OrthogonalRegionUnsupported("C".into())
        );
    }

    #[test]
    fn final_composite_marks_leaves_final() {
        let sc = Statechart::builder("M")
            .event("e")
            .state(State::new("S").initial())
            .state(State::new("Done").final_state())
            .state(State::new("D1").within("Done").entry())
            .state(State::new("D2").within("Done"))
            .transition(Transition::new("t1", "S", "Done", "e"))
            .transition(Transition::new("t2", "D1", "D2", "e"))
            .build()
            .unwrap();
        let flat = sc.flatten().unwrap();
        let finals: Vec<&str> = flat.final_states().map(|s| s.id.as_str()).collect();
        assert_eq!(finals, ["D1", "D2"]);
        assert_eq!(flat.transition("t1").unwrap().target.as_str(), "D1");
    }
}
