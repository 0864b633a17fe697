use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use super::{StateKind, Statechart};
use crate::id::Id;

/// A well-formedness violation reported by [`Statechart::validate`].
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Violation {
    HierarchyCycle(Id),
    CompositeWithoutEntry(Id),
    OrthogonalRegions(Id),
    EntryOutsideComposite(Id),
    NoInitial,
    MultipleInitial(Vec<Id>),
    NoFinal,
    Unreachable(Id),
    CannotReachFinal(Id),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::HierarchyCycle(s) => write!(f, "hierarchy-cycle({s})"),
            Violation::CompositeWithoutEntry(s) => write!(f, "composite-without-entry({s})"),
            Violation::OrthogonalRegions(s) => write!(f, "orthogonal-regions({s})"),
            Violation::EntryOutsideComposite(s) => write!(f, "entry-outside-composite({s})"),
            Violation::NoInitial => f.write_str("no-initial"),
            Violation::MultipleInitial(ss) => {
                let names: Vec<&str> = ss.iter().map(Id::as_str).collect();
                write!(f, "multiple-initial({})", names.join(", "))
            }
            Violation::NoFinal => f.write_str("no-final"),
            Violation::Unreachable(s) => write!(f, "unreachable({s})"),
            Violation::CannotReachFinal(s) => write!(f, "cannot-reach-final({s})"),
        }
    }
}

/// Hierarchy, entry and initial/final checks that do not need flattening.
pub(super) fn structural(sc: &Statechart) -> Vec<Violation> {
    let mut out = Vec::new();

    for s in sc.states() {
        let mut seen = BTreeSet::new();
        let mut cur = s.parent.clone();
        while let Some(p) = cur {
            if p == s.id || !seen.insert(p.clone()) {
                out.push(Violation::HierarchyCycle(s.id.clone()));
                break;
            }
            cur = sc.state(p.as_str()).and_then(|ps| ps.parent.clone());
        }
    }
    if !out.is_empty() {
        return out;
    }

    for s in sc.states() {
        if sc.kind(s.id.as_str()) == Some(StateKind::Composite) {
            let entries = sc.children(s.id.as_str()).filter(|c| c.entry).count();
            match entries {
                0 => out.push(Violation::CompositeWithoutEntry(s.id.clone())),
                1 => {}
                _ => out.push(Violation::OrthogonalRegions(s.id.clone())),
            }
        }
        if s.entry && s.parent.is_none() {
            out.push(Violation::EntryOutsideComposite(s.id.clone()));
        }
    }

    let initials: Vec<Id> = sc.initial_states().map(|s| s.id.clone()).collect();
    match initials.len() {
        0 => out.push(Violation::NoInitial),
        1 => {}
        _ => out.push(Violation::MultipleInitial(initials)),
    }
    if sc.final_states().next().is_none() {
        out.push(Violation::NoFinal);
    }
    out
}

pub(super) fn validate(sc: &Statechart) -> Vec<Violation> {
    let mut out = structural(sc);
    if !out.is_empty() {
        return out;
    }
    let flat = match sc.flatten() {
        Ok(f) => f,
        // structural() already covers every flatten failure
        Err(_) => return out,
    };
    out.extend(reachability(&flat));
    out
}

/// Reachability from the initial state and co-reachability of a final state,
/// over a flat machine and ignoring guards.
pub(crate) fn reachability(flat: &Statechart) -> Vec<Violation> {
    let Some(init) = flat.initial_state() else {
        return Vec::new();
    };
    let forward = bfs(flat, [init.clone()], |t| (&t.source, &t.target));
    let finals = flat.final_states().map(|s| s.id.clone());
    let backward = bfs(flat, finals, |t| (&t.target, &t.source));

    let mut out = Vec::new();
    for s in flat.simple_states() {
        if !forward.contains(&s.id) {
            out.push(Violation::Unreachable(s.id.clone()));
        }
        if !backward.contains(&s.id) {
            out.push(Violation::CannotReachFinal(s.id.clone()));
        }
    }
    out
}

fn bfs<F>(sc: &Statechart, roots: impl IntoIterator<Item = Id>, edge: F) -> BTreeSet<Id>
where
    F: Fn(&super::Transition) -> (&Id, &Id),
{
    let mut seen: BTreeSet<Id> = BTreeSet::new();
    let mut queue: VecDeque<Id> = VecDeque::new();
    for r in roots {
        if seen.insert(r.clone()) {
            queue.push_back(r);
        }
    }
    while let Some(s) = queue.pop_front() {
        for t in sc.transitions() {
            let (from, to) = edge(t);
            if *from == s && seen.insert(to.clone()) {
                queue.push_back(to.clone());
            }
        }
    }
    seen
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::atm;
    use super::super::{State, Statechart, Transition};
    use super::*;

    #[test]
    fn atm_is_valid() {
        assert_eq!(atm().validate(), vec![]);
    }

    #[test]
    fn isolated_state() {
        let sc = Statechart::builder("M")
            .event("go")
            .state(State::new("A").initial())
            .state(State::new("B").final_state())
            .state(State::new("X"))
            .transition(Transition::new("t1", "A", "B", "go"))
            .build()
            .unwrap();
        assert_eq!(
            sc.validate(),
            vec![
                Violation::Unreachable("X".into()),
                Violation::CannotReachFinal("X".into())
            ]
        );
    }

    #[test]
    fn two_initial_states() {
        let sc = Statechart::builder("M")
            .event("go")
            .state(State::new("A").initial())
            .state(State::new("B").initial().final_state())
            .transition(Transition::new("t1", "A", "B", "go"))
            .build()
            .unwrap();
        assert_eq!(
            sc.validate(),
            vec![Violation::MultipleInitial(vec!["A".into(), "B".into()])]
        );
    }

    #[test]
    fn missing_initial_and_final() {
        let sc = Statechart::builder("M")
            .state(State::new("A"))
            .build()
            .unwrap();
        assert_eq!(
            sc.validate(),
            vec![Violation::NoInitial, Violation::NoFinal]
        );
    }

    #[test]
    fn hierarchy_problems() {
        let sc = Statechart::builder("M")
            .state(State::new("A").within("B"))
            .state(State::new("B").within("A"))
            .build()
            .unwrap();
        assert!(sc
            .validate()
            .iter()
            .all(|v| matches!(v, Violation::HierarchyCycle(_))));

        let sc = Statechart::builder("M")
            .state(State::new("C").initial().final_state())
            .state(State::new("A").within("C"))
            .state(State::new("B").within("C"))
            .state(State::new("D").entry())
            .build()
            .unwrap();
        assert_eq!(
            sc.validate(),
            vec![
                Violation::CompositeWithoutEntry("C".into()),
                Violation::EntryOutsideComposite("D".into())
            ]
        );
    }

    #[test]
    fn trap_state_cannot_reach_final() {
        let sc = Statechart::builder("M")
            .event("go")
            .state(State::new("A").initial())
            .state(State::new("B").final_state())
            .state(State::new("Trap"))
            .transition(Transition::new("t1", "A", "B", "go"))
            .transition(Transition::new("t2", "A", "Trap", "go"))
            .build()
            .unwrap();
        assert_eq!(
            sc.validate(),
            vec![Violation::CannotReachFinal("Trap".into())]
        );
    }
}
