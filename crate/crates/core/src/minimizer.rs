//! Suite minimization by coverage subsumption, plus greedy set-cover
//! reduction.
//!
//! `NC(tc)` is the set of other cases whose covered elements contain those
//! of `tc`. The effective suite keeps the cases with an empty `NC`.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::id::Id;
use crate::model::{Provenance, TestCase, TestSuite};
use crate::par;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MinimizeError {
    #[error("unknown test case `{0}`")]
    UnknownTestCase(Id),
    #[error("suite is empty")]
    EmptySuite,
}

/// Which elements of a case are compared.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Relation {
    /// Visited states.
    NodeSubset,
    /// Fired transitions.
    TransitionSubset,
    /// States, transitions, inputs and outputs together.
    #[default]
    ElementSubset,
}

/// Which cases may cover each other.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Grouping {
    #[default]
    Global,
    /// Only cases with the same initial state `I`.
    ByInitialState,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SubsumptionStrategy {
    pub relation: Relation,
    pub grouping: Grouping,
}

impl SubsumptionStrategy {
    pub fn new(relation: Relation, grouping: Grouping) -> Self {
        SubsumptionStrategy { relation, grouping }
    }
}

/// A covered element, tagged by kind so that equal names in different
/// dimensions stay distinct.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Element {
    State(Id),
    Transition(Id),
    Input(String),
    Output(String),
}

/// Elements of `tc` under `relation`.
pub fn elements(tc: &TestCase, relation: Relation) -> BTreeSet<Element> {
    let states = tc.states.iter().cloned().map(Element::State);
    let transitions = tc.transitions.iter().cloned().map(Element::Transition);
    match relation {
        Relation::NodeSubset => states.collect(),
        Relation::TransitionSubset => transitions.collect(),
        Relation::ElementSubset => states
            .chain(transitions)
            .chain(tc.inputs.iter().map(|i| Element::Input(i.to_string())))
            .chain(tc.expected_outputs.iter().cloned().map(Element::Output))
            .collect(),
    }
}

struct Prepared<'a> {
    cases: &'a [TestCase],
    sets: Vec<BTreeSet<Element>>,
    grouping: Grouping,
}

impl<'a> Prepared<'a> {
    fn new(suite: &'a TestSuite, strategy: SubsumptionStrategy) -> Self {
        let cases = suite.cases();
        Prepared {
            cases,
            sets: par::map(cases, |c| elements(c, strategy.relation)),
            grouping: strategy.grouping,
        }
    }

    fn covers(&self, by: usize, tc: usize) -> bool {
        if by == tc {
            return false;
        }
        let (a, b) = (&self.cases[tc], &self.cases[by]);
        if self.grouping == Grouping::ByInitialState && a.initial != b.initial {
            return false;
        }
        if !self.sets[tc].is_subset(&self.sets[by]) {
            return false;
        }
        // identical sets: only the smaller id covers the other
        self.sets[tc].len() < self.sets[by].len() || b.id < a.id
    }

    fn covering(&self, tc: usize) -> BTreeSet<Id> {
        (0..self.cases.len())
            .filter(|&by| self.covers(by, tc))
            .map(|by| self.cases[by].id.clone())
            .collect()
    }
}

/// `NC(tc)`: the ids of the cases that cover `tc` under `strategy`.
pub fn covering_set(
    tc: &str,
    suite: &TestSuite,
    strategy: SubsumptionStrategy,
) -> Result<BTreeSet<Id>, MinimizeError> {
    let idx = suite
        .cases()
        .iter()
        .position(|c| c.id.as_str() == tc)
        .ok_or_else(|| MinimizeError::UnknownTestCase(Id::from(tc)))?;
    Ok(Prepared::new(suite, strategy).covering(idx))
}

/// `NC` for every case, in suite order.
pub fn covering_table(suite: &TestSuite, strategy: SubsumptionStrategy) -> Vec<(Id, BTreeSet<Id>)> {
    let prep = Prepared::new(suite, strategy);
    par::map_range(suite.len(), |i| {
        (suite.cases()[i].id.clone(), prep.covering(i))
    })
}

/// The effective suite: cases with an empty covering set, order preserved.
pub fn minimize_suite(
    suite: &TestSuite,
    strategy: SubsumptionStrategy,
) -> Result<TestSuite, MinimizeError> {
    if suite.is_empty() {
        return Err(MinimizeError::EmptySuite);
    }
    let keep: BTreeSet<Id> = covering_table(suite, strategy)
        .into_iter()
        .filter(|(_, nc)| nc.is_empty())
        .map(|(id, _)| id)
        .collect();
    Ok(suite.retain_ids(Provenance::Minimized, |id| keep.contains(id)))
}

/// Target dimension for [`greedy_reduce`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dimension {
    States,
    Transitions,
}

impl Dimension {
    pub fn relation(self) -> Relation {
        match self {
            Dimension::States => Relation::NodeSubset,
            Dimension::Transitions => Relation::TransitionSubset,
        }
    }
}

/// Greedy set cover over `target`: repeatedly takes the case adding the most
/// uncovered elements. Ties go to the case with more elements overall, then
/// to the smaller id. The result keeps suite order.
pub fn greedy_reduce(suite: &TestSuite, target: Dimension) -> Result<TestSuite, MinimizeError> {
    if suite.is_empty() {
        return Err(MinimizeError::EmptySuite);
    }
    let sets: Vec<BTreeSet<Element>> = par::map(suite.cases(), |c| elements(c, target.relation()));
    let mut covered: BTreeSet<&Element> = BTreeSet::new();
    let mut chosen = vec![false; sets.len()];
    loop {
        let best = (0..sets.len())
            .filter(|&i| !chosen[i])
            .map(|i| {
                let gain = sets[i].iter().filter(|e| !covered.contains(e)).count();
                (i, gain)
            })
            .filter(|&(_, gain)| gain > 0)
            .max_by(|&(i, gi), &(j, gj)| {
                gi.cmp(&gj)
                    .then(sets[i].len().cmp(&sets[j].len()))
                    .then(suite.cases()[j].id.cmp(&suite.cases()[i].id))
            });
        let Some((i, _)) = best else { break };
        chosen[i] = true;
        covered.extend(sets[i].iter());
    }
    let keep: BTreeSet<&Id> = chosen
        .iter()
        .zip(suite.cases())
        .filter(|(c, _)| **c)
        .map(|(_, tc)| &tc.id)
        .collect();
    Ok(suite.retain_ids(Provenance::Minimized, |id| keep.contains(id)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Input;

    fn case(id: &str, states: &[&str], trs: &[&str]) -> TestCase {
        TestCase {
            id: id.into(),
            initial: states[0].into(),
            inputs: trs.iter().map(|t| Input::new(*t)).collect(),
            expected_outputs: vec![],
            states: states.iter().map(|&s| Id::from(s)).collect(),
            transitions: trs.iter().map(|&t| Id::from(t)).collect(),
            complete: false,
        }
    }

    fn suite(cases: Vec<TestCase>) -> TestSuite {
        TestSuite::new(Provenance::External, cases).unwrap()
    }

    fn ids(s: &TestSuite) -> Vec<&str> {
        s.ids().map(Id::as_str).collect()
    }

    const TRANS: SubsumptionStrategy = SubsumptionStrategy {
        relation: Relation::TransitionSubset,
        grouping: Grouping::Global,
    };

    #[test]
    fn singleton_is_unchanged() {
        let s = suite(vec![case("a", &["A", "B"], &["t"])]);
        for relation in [
            Relation::NodeSubset,
            Relation::TransitionSubset,
            Relation::ElementSubset,
        ] {
            let strat = SubsumptionStrategy::new(relation, Grouping::Global);
            assert!(covering_set("a", &s, strat).unwrap().is_empty());
            assert_eq!(minimize_suite(&s, strat).unwrap().len(), 1);
        }
        assert_eq!(
            covering_set("zz", &s, TRANS).unwrap_err(),
            MinimizeError::UnknownTestCase("zz".into())
        );
    }

    #[test]
    fn duplicates_keep_smaller_id() {
        let s = suite(vec![
            case("tc10", &["A", "B"], &["t"]),
            case("tc2", &["A", "B"], &["t"]),
        ]);
        let m = minimize_suite(&s, TRANS).unwrap();
        assert_eq!(ids(&m), ["tc2"]);
        assert_eq!(m.provenance(), Provenance::Minimized);
    }

    #[test]
    fn grouping_limits_covering() {
        let s = suite(vec![
            case("a", &["A", "B", "C"], &["t", "u"]),
            case("b", &["B", "C"], &["u"]),
        ]);
        assert_eq!(ids(&minimize_suite(&s, TRANS).unwrap()), ["a"]);
        let grouped =
            SubsumptionStrategy::new(Relation::TransitionSubset, Grouping::ByInitialState);
        assert_eq!(ids(&minimize_suite(&s, grouped).unwrap()), ["a", "b"]);
    }

    #[test]
    fn element_subset_sees_inputs() {
        let mut b = case("b", &["B", "C"], &["u"]);
        b.inputs[0] = Input::new("u").bind("x", 3);
        let s = suite(vec![case("a", &["A", "B", "C"], &["t", "u"]), b]);
        assert_eq!(ids(&minimize_suite(&s, TRANS).unwrap()), ["a"]);
        assert_eq!(
            ids(&minimize_suite(&s, SubsumptionStrategy::default()).unwrap()),
            ["a", "b"]
        );
    }

    #[test]
    fn greedy_cases() {
        let all = suite(vec![
            case("a", &["A", "B", "C"], &["t", "u"]),
            case("b", &["A", "B"], &["t"]),
        ]);
        assert_eq!(
            ids(&greedy_reduce(&all, Dimension::Transitions).unwrap()),
            ["a"]
        );
        let disjoint = suite(vec![
            case("a", &["A", "B"], &["t"]),
            case("b", &["C", "D"], &["u"]),
        ]);
        assert_eq!(
            ids(&greedy_reduce(&disjoint, Dimension::States).unwrap()),
            ["a", "b"]
        );
        let empty = TestSuite::new(Provenance::External, vec![]).unwrap();
        assert_eq!(
            greedy_reduce(&empty, Dimension::States).unwrap_err(),
            MinimizeError::EmptySuite
        );
        assert_eq!(
            minimize_suite(&empty, TRANS).unwrap_err(),
            MinimizeError::EmptySuite
        );
    }
}
