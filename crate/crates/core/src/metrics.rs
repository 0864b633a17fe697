//! Coverage ratios of a suite against a flat model: states, transitions,
//! complete paths, actions and guard conditions.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::generator::DEFAULT_CAP;
use crate::id::Id;
use crate::interpreter::eval_guard;
use crate::model::{Statechart, TestSuite};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("path bound must be at least 1")]
    InvalidBound,
    #[error("model must be flattened first")]
    NotFlat,
    #[error("more than {cap} complete paths within the path bound")]
    TooManyPaths { cap: usize },
}

/// `covered / total`; not applicable when `total` is zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Ratio {
    pub covered: usize,
    pub total: usize,
}

impl Ratio {
    pub fn value(self) -> Option<f64> {
        (self.total > 0).then(|| self.covered as f64 / self.total as f64)
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.value() {
            Some(v) => write!(f, "{v:.4}"),
            None => f.write_str("n/a"),
        }
    }
}

/// One coverage dimension with its element lists.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimensionReport {
    pub covered: usize,
    pub total: usize,
    /// `null` when not applicable.
    pub ratio: Option<f64>,
    pub covered_elements: Vec<String>,
    pub uncovered_elements: Vec<String>,
}

impl DimensionReport {
    fn new(universe: BTreeSet<String>, hit: &BTreeSet<String>) -> Self {
        let (covered, uncovered): (Vec<String>, Vec<String>) =
            universe.into_iter().partition(|e| hit.contains(e));
        let r = Ratio {
            covered: covered.len(),
            total: covered.len() + uncovered.len(),
        };
        DimensionReport {
            covered: r.covered,
            total: r.total,
            ratio: r.value(),
            covered_elements: covered,
            uncovered_elements: uncovered,
        }
    }

    pub fn ratio(&self) -> Ratio {
        Ratio {
            covered: self.covered,
            total: self.total,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub state: DimensionReport,
    pub transition: DimensionReport,
    pub path: DimensionReport,
    pub action: DimensionReport,
    pub condition: DimensionReport,
    pub path_bound: usize,
}

impl CoverageReport {
    pub fn state_cov(&self) -> Ratio {
        self.state.ratio()
    }

    pub fn transition_cov(&self) -> Ratio {
        self.transition.ratio()
    }

    pub fn path_cov(&self) -> Ratio {
        self.path.ratio()
    }

    pub fn action_cov(&self) -> Ratio {
        self.action.ratio()
    }

    pub fn condition_cov(&self) -> Ratio {
        self.condition.ratio()
    }

    pub fn rows(&self) -> [(&'static str, &DimensionReport); 5] {
        [
            ("state", &self.state),
            ("transition", &self.transition),
            ("path", &self.path),
            ("action", &self.action),
            ("condition", &self.condition),
        ]
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Aligned table, ratios to four decimal places.
impl fmt::Display for CoverageReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<10}  {:>7}  {:>5}  {:>6}",
            "dimension", "covered", "total", "ratio"
        )?;
        for (name, d) in self.rows() {
            writeln!(
                f,
                "{:<10}  {:>7}  {:>5}  {:>6}",
                name,
                d.covered,
                d.total,
                d.ratio().to_string()
            )?;
        }
        writeln!(f, "path bound: {}", self.path_bound)
    }
}

/// Length of the longest complete path that visits no state twice.
pub fn longest_simple_complete_path(sc: &Statechart) -> usize {
    fn dfs(sc: &Statechart, s: &Id, seen: &mut BTreeSet<Id>, len: usize, best: &mut usize) {
        if sc.is_final(s.as_str()) {
            *best = (*best).max(len);
        }
        for t in sc.outgoing(s.as_str()) {
            if seen.insert(t.target.clone()) {
                dfs(sc, &t.target, seen, len + 1, best);
                seen.remove(&t.target);
            }
        }
    }
    let Some(init) = sc.initial_state() else {
        return 0;
    };
    let mut best = 0;
    let mut seen = BTreeSet::from([init.clone()]);
    dfs(sc, init, &mut seen, 0, &mut best);
    best
}

/// Every transition sequence of length `1..=bound` from the initial state
/// that ends in a final state.
pub fn complete_paths(
    sc: &Statechart,
    bound: usize,
    cap: usize,
) -> Result<Vec<Vec<Id>>, MetricsError> {
    fn dfs(
        sc: &Statechart,
        s: &Id,
        path: &mut Vec<Id>,
        bound: usize,
        cap: usize,
        out: &mut Vec<Vec<Id>>,
    ) -> Result<(), MetricsError> {
        if !path.is_empty() && sc.is_final(s.as_str()) {
            if out.len() == cap {
                return Err(MetricsError::TooManyPaths { cap });
            }
            out.push(path.clone());
        }
        if path.len() == bound {
            return Ok(());
        }
        for t in sc.outgoing(s.as_str()) {
            path.push(t.id.clone());
            dfs(sc, &t.target, path, bound, cap, out)?;
            path.pop();
        }
        Ok(())
    }
    let mut out = Vec::new();
    if let Some(init) = sc.initial_state() {
        dfs(sc, init, &mut Vec::new(), bound, cap, &mut out)?;
    }
    Ok(out)
}

fn join(ids: &[Id]) -> String {
    ids.iter().map(Id::as_str).collect::<Vec<_>>().join(",")
}

/// Coverage of `suite` on `sc`. `path_bound` defaults to
/// [`longest_simple_complete_path`].
pub fn coverage_report(
    sc: &Statechart,
    suite: &TestSuite,
    path_bound: Option<usize>,
) -> Result<CoverageReport, MetricsError> {
    if !sc.is_flat() {
        return Err(MetricsError::NotFlat);
    }
    let path_bound = match path_bound {
        Some(0) => return Err(MetricsError::InvalidBound),
        Some(b) => b,
        None => longest_simple_complete_path(sc),
    };
    let cases = suite.cases();
    let names = |it: &mut dyn Iterator<Item = &Id>| {
        it.map(|i| i.as_str().to_owned()).collect::<BTreeSet<_>>()
    };

    let state = DimensionReport::new(
        names(&mut sc.simple_states().map(|s| &s.id)),
        &names(&mut cases.iter().flat_map(|c| &c.states)),
    );
    let hit_transitions = names(&mut cases.iter().flat_map(|c| &c.transitions));
    let transition = DimensionReport::new(
        names(&mut sc.transitions().map(|t| &t.id)),
        &hit_transitions,
    );

    let universe: BTreeSet<String> = complete_paths(sc, path_bound, DEFAULT_CAP)?
        .iter()
        .map(|p| join(p))
        .collect();
    let initial = sc.initial_state();
    let whole: BTreeSet<String> = cases
        .iter()
        .filter(|c| Some(&c.initial) == initial && !c.expects_rejection())
        .map(|c| join(&c.transitions))
        .collect();
    let path = DimensionReport::new(universe, &whole);

    let hit_actions: BTreeSet<String> = hit_transitions
        .iter()
        .filter_map(|t| sc.transition(t.as_str())?.action.clone())
        .collect();
    let action = DimensionReport::new(
        sc.actions().into_iter().map(str::to_owned).collect(),
        &hit_actions,
    );

    // a guard counts once it has been seen both true and false
    let mut seen_true = BTreeSet::new();
    let mut seen_false = BTreeSet::new();
    for c in cases {
        for (state, input) in c.states.iter().zip(&c.inputs) {
            for t in sc
                .outgoing(state.as_str())
                .filter(|t| t.event == input.event)
            {
                let Some(g) = &t.guard else { continue };
                match eval_guard(g, &input.bindings) {
                    Ok(true) => seen_true.insert(t.id.as_str().to_owned()),
                    Ok(false) => seen_false.insert(t.id.as_str().to_owned()),
                    Err(_) => false,
                };
            }
        }
    }
    let both: BTreeSet<String> = seen_true.intersection(&seen_false).cloned().collect();
    let condition = DimensionReport::new(
        sc.transitions()
            .filter(|t| t.guard.is_some())
            .map(|t| t.id.as_str().to_owned())
            .collect(),
        &both,
    );

    Ok(CoverageReport {
        state,
        transition,
        path,
        action,
        condition,
        path_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::{enumerate_sequences, guard_probe_suite};
    use crate::model::fixtures::atm;
    use crate::model::Provenance;

    #[test]
    fn atm_single_case() {
        let sc = atm();
        let full = enumerate_sequences(&sc, 7, DEFAULT_CAP).unwrap();
        let one = full.retain_ids(Provenance::External, |id| id.as_str() == "tc1");
        let r = coverage_report(&sc, &one, None).unwrap();
        assert_eq!(
            r.state_cov(),
            Ratio {
                covered: 2,
                total: 7
            }
        );
        assert_eq!(
            r.transition_cov(),
            Ratio {
                covered: 1,
                total: 7
            }
        );
        assert_eq!(r.state_cov().to_string(), "0.2857");
        assert_eq!(r.transition_cov().to_string(), "0.1429");
        assert_eq!(r.action.covered_elements, ["show_fares"]);
    }

    #[test]
    fn atm_full_suite() {
        let sc = atm();
        let full = enumerate_sequences(&sc, 7, DEFAULT_CAP).unwrap();
        let r = coverage_report(&sc, &full, Some(6)).unwrap();
        assert_eq!(r.state_cov().value(), Some(1.0));
        assert_eq!(r.transition_cov().value(), Some(1.0));
        assert_eq!(
            r.path_cov(),
            Ratio {
                covered: 2,
                total: 2
            }
        );
        assert_eq!(
            r.action_cov(),
            Ratio {
                covered: 5,
                total: 5
            }
        );
        // enumeration only drives guards true
        assert_eq!(
            r.condition_cov(),
            Ratio {
                covered: 0,
                total: 4
            }
        );
        assert_eq!(coverage_report(&sc, &full, None).unwrap().path_bound, 6);
    }

    #[test]
    fn probes_complete_condition_coverage() {
        let sc = atm();
        let full = enumerate_sequences(&sc, 7, DEFAULT_CAP).unwrap();
        let mut cases = full.into_cases();
        cases.extend(
            guard_probe_suite(&sc)
                .unwrap()
                .into_cases()
                .into_iter()
                .map(|mut c| {
                    c.id = Id::from(format!("x{}", c.id));
                    c
                }),
        );
        let both = TestSuite::new(Provenance::External, cases).unwrap();
        let r = coverage_report(&sc, &both, None).unwrap();
        assert_eq!(
            r.condition_cov(),
            Ratio {
                covered: 4,
                total: 4
            }
        );
    }

    #[test]
    fn empty_suite_and_bad_bound() {
        let sc = atm();
        let empty = TestSuite::new(Provenance::External, vec![]).unwrap();
        let r = coverage_report(&sc, &empty, None).unwrap();
        for (_, d) in r.rows() {
            assert_eq!(d.ratio, Some(0.0));
        }
        assert_eq!(
            coverage_report(&sc, &empty, Some(0)).unwrap_err(),
            MetricsError::InvalidBound
        );
    }

    #[test]
    fn text_table_aligns() {
        let sc = atm();
        let empty = TestSuite::new(Provenance::External, vec![]).unwrap();
        let text = coverage_report(&sc, &empty, None).unwrap().to_string();
        let widths: BTreeSet<usize> = text.lines().take(6).map(str::len).collect();
        assert_eq!(widths.len(), 1, "{text}");
    }
}
